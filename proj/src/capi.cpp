#include "relubias.h"

#include <cmath>
#include <cstring>
#include <string>

#include <json.hpp>

#include "core/experiment.hpp"

using namespace relubias;
using nlohmann::json;

struct rb_dataset_s {
    Dataset ds;
};
struct rb_trajectory_s {
    Trajectory traj;
};
struct rb_minnorm_s {
    MinNormSolution sol;
};

namespace {

thread_local std::string g_last_error;

char* dup_string(const std::string& s) {
    char* out = new char[s.size() + 1];
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

template <class F>
rb_status guard(F&& f) {
    try {
        g_last_error.clear();
        return f();
    } catch (const SchemaError& e) {
        g_last_error = e.what();
        return RB_ERROR_INPUT;
    } catch (const json::exception& e) {
        g_last_error = e.what();
        return RB_ERROR_INPUT;
    } catch (const InputError& e) {
        g_last_error = e.what();
        return RB_ERROR_INPUT;
    } catch (const NumericError& e) {
        g_last_error = e.what();
        return RB_ERROR_NUMERIC;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return RB_ERROR_INTERNAL;
    }
}

Vec eps_from_json(const json& j, const char* key, int n, double fallback_scalar) {
    if (!j.contains(key)) {
        if (fallback_scalar <= 0) throw InputError(std::string("missing eps field: ") + key);
        return Vec::Constant(n, fallback_scalar);
    }
    if (j.at(key).is_number()) return Vec::Constant(n, j.at(key).get<double>());
    auto v = j.at(key).get<std::vector<double>>();
    if (static_cast<int>(v.size()) != n) throw InputError("eps array length must equal n");
    return Eigen::Map<const Vec>(v.data(), v.size());
}

}  // namespace

extern "C" {

const char* rb_version(void) { return "0.1.0"; }

const char* rb_last_error(void) { return g_last_error.c_str(); }

void rb_string_free(char* s) { delete[] s; }

rb_status rb_dataset_generate(const char* params_json, rb_dataset** out) {
    return guard([&]() {
        if (!params_json || !out) throw InputError("null argument");
        json j;
        try {
            j = json::parse(params_json);
        } catch (const json::exception& e) {
            throw SchemaError(std::string("params JSON parse error: ") + e.what());
        }
        const int n = j.at("n").get<int>();
        const int d = j.at("d").get<int>();
        const auto kind =
            spectrum_kind_from_string(j.value("spectrum_kind", std::string("isotropic")));
        Spectrum spec;
        if (kind == SpectrumKind::Isotropic)
            spec = make_spectrum(kind, d);
        else if (kind == SpectrumKind::Geometric)
            spec = make_spectrum(kind, d, {j.value("spectrum_ratio", 0.5)});
        else
            spec = make_spectrum(kind, d, j.at("spectrum_lambda").get<std::vector<double>>());
        LabelSpec ls;
        ls.y_min = j.value("y_min", 0.1);
        ls.y_max = j.value("y_max", 1.0);
        ls.frac_positive = j.value("frac_positive", 0.5);
        ls.require_both_signs = j.value("require_both_signs", false);
        if (j.value("magnitude_dist", std::string("uniform")) == std::string("fixed"))
            ls.magnitude_dist = MagnitudeDist::Fixed;
        SampleOptions opts;
        opts.rotate = j.value("rotate", false);
        const auto z = z_dist_from_string(j.value("z_dist", std::string("gaussian")));
        const auto seed = j.value("seed", static_cast<std::uint64_t>(0));
        *out = new rb_dataset_s{sample_dataset(spec, n, ls, z, seed, opts)};
        return RB_OK;
    });
}

rb_status rb_dataset_load_json(const char* path, rb_dataset** out) {
    return guard([&]() {
        if (!path || !out) throw InputError("null argument");
        *out = new rb_dataset_s{dataset_from_json(read_file(path))};
        return RB_OK;
    });
}

rb_status rb_dataset_save_json(const rb_dataset* ds, const char* path) {
    return guard([&]() {
        if (!ds || !path) throw InputError("null argument");
        write_file(path, dataset_to_json(ds->ds));
        return RB_OK;
    });
}

rb_status rb_dataset_save_csv(const rb_dataset* ds, const char* path) {
    return guard([&]() {
        if (!ds || !path) throw InputError("null argument");
        write_file(path, dataset_to_csv(ds->ds));
        return RB_OK;
    });
}

rb_status rb_dataset_info(const rb_dataset* ds, char** json_out) {
    return guard([&]() {
        if (!ds || !json_out) throw InputError("null argument");
        const Dataset& d = ds->ds;
        Constants c = Constants::from_cg(eigen_bounds(d).cg_hat);
        json j;
        j["n"] = d.n();
        j["d"] = d.d();
        j["n_pos"] = d.n_pos;
        j["n_neg"] = d.n_neg();
        j["seed"] = d.seed;
        j["d2"] = d.spectrum.d2();
        j["dinf"] = d.spectrum.dinf();
        j["lambda_l1"] = d.spectrum.l1();
        j["gram"] = json::parse(gram_report_to_json(gram_deviation(d, c), eigen_bounds(d)));
        j["assumptions"] = json::parse(assumption_report_to_json(check_assumptions(d, c)));
        j["constants"] = json::parse(constants_to_json(c));
        *json_out = dup_string(j.dump(2));
        return RB_OK;
    });
}

void rb_dataset_free(rb_dataset* ds) { delete ds; }

rb_status rb_gd_run(const rb_dataset* ds, const char* run_json, rb_trajectory** out) {
    return guard([&]() {
        if (!ds || !run_json || !out) throw InputError("null argument");
        json j;
        try {
            j = json::parse(run_json);
        } catch (const json::exception& e) {
            throw SchemaError(std::string("run JSON parse error: ") + e.what());
        }
        const Dataset& data = ds->ds;
        const int n = data.n();
        Constants c = Constants::from_cg(eigen_bounds(data).cg_hat);

        const json& ij = j.at("init");
        const std::string kind = ij.at("kind").get<std::string>();
        InitSpec init;
        if (kind == "single_eps") {
            init.kind = InitKind::SingleEps;
            init.eps = {eps_from_json(ij, "eps", n, data.y_min_bound / (2.0 * c.C_alpha))};
        } else if (kind == "two_eps") {
            init.kind = InitKind::TwoEps;
            init.eps = {eps_from_json(ij, "eps_plus", n, data.y_min_bound / (4.0 * c.C_alpha)),
                        eps_from_json(ij, "eps_minus", n, data.y_min_bound / (4.0 * c.C_alpha))};
        } else if (kind == "multi_disjoint") {
            init.kind = InitKind::MultiDisjoint;
            init.assignment = ij.at("assignment").get<std::vector<int>>();
            init.signs = ij.at("signs").get<std::vector<int>>();
            init.cg_hat = ij.value("cg_hat", c.C_g);
            const int m = static_cast<int>(init.signs.size());
            init.eps.assign(
                m, eps_from_json(ij, "eps", n, data.y_min_bound / (2.0 * c.C_alpha * m)));
        } else if (kind == "random") {
            init.kind = InitKind::Random;
            init.signs = ij.at("signs").get<std::vector<int>>();
            init.m = static_cast<int>(init.signs.size());
            init.scale = ij.value("scale", std::sqrt(2e-6));
            init.seed = ij.value("seed", static_cast<std::uint64_t>(0));
        } else {
            throw InputError("unknown init kind: " + kind);
        }

        ModelState m0 = apply_init(data, init);
        const double eta =
            j.value("eta", -1.0) > 0 ? j["eta"].get<double>() : recommend_step_size(data, c).eta;
        StopRule stop;
        stop.max_iters = j.value("max_iters", static_cast<long>(-1));
        stop.grad_tol = j.value("grad_tol", -1.0);
        *out = new rb_trajectory_s{run(m0, data, eta, stop)};
        return RB_OK;
    });
}

rb_status rb_trajectory_write_csv(const rb_trajectory* t, const char* path) {
    return guard([&]() {
        if (!t || !path) throw InputError("null argument");
        write_file(path, trajectory_to_csv(t->traj));
        return RB_OK;
    });
}

rb_status rb_trajectory_summary_json(const rb_trajectory* t, char** json_out) {
    return guard([&]() {
        if (!t || !json_out) throw InputError("null argument");
        *json_out = dup_string(trajectory_summary_json(t->traj, detect_activation_freeze(t->traj)));
        return RB_OK;
    });
}

void rb_trajectory_free(rb_trajectory* t) { delete t; }

rb_status rb_minnorm_single(const rb_dataset* ds, double tol, rb_minnorm** out) {
    return guard([&]() {
        if (!ds || !out) throw InputError("null argument");
        *out = new rb_minnorm_s{min_norm_single(ds->ds, tol > 0 ? tol : 1e-9)};
        return RB_OK;
    });
}

rb_status rb_minnorm_single_pg(const rb_dataset* ds, double tol, rb_minnorm** out) {
    return guard([&]() {
        if (!ds || !out) throw InputError("null argument");
        *out = new rb_minnorm_s{min_norm_single_pg(ds->ds, tol > 0 ? tol : 1e-9)};
        return RB_OK;
    });
}

rb_status rb_minnorm_two(const rb_dataset* ds, double tol, rb_minnorm** out) {
    return guard([&]() {
        if (!ds || !out) throw InputError("null argument");
        *out = new rb_minnorm_s{min_norm_two(ds->ds, tol > 0 ? tol : 1e-9)};
        return RB_OK;
    });
}

rb_status rb_minnorm_to_json(const rb_minnorm* sol, char** json_out) {
    return guard([&]() {
        if (!sol || !json_out) throw InputError("null argument");
        *json_out = dup_string(minnorm_to_json(sol->sol));
        return RB_OK;
    });
}

rb_status rb_minnorm_upper_bound_multi(const rb_dataset* ds, int m, const int* signs,
                                       double* out) {
    return guard([&]() {
        if (!ds || !signs || !out || m <= 0) throw InputError("null argument");
        std::vector<int> sv(signs, signs + m);
        *out = feasible_upper_bound_multi(ds->ds, m, sv);
        return RB_OK;
    });
}

void rb_minnorm_free(rb_minnorm* sol) { delete sol; }

rb_status rb_experiment_run(const char* config_json, char** manifest_json_out) {
    return guard([&]() {
        if (!config_json) throw InputError("null argument");
        ExperimentConfig cfg = ExperimentConfig::from_json(config_json);
        ArtifactManifest manifest = run_experiment(cfg);
        if (manifest_json_out) *manifest_json_out = dup_string(manifest.to_json());
        return RB_OK;
    });
}

rb_status rb_emit_plot(const char* aggregate_csv_path, const char* svg_path, const char* style) {
    return guard([&]() {
        if (!aggregate_csv_path || !svg_path) throw InputError("null argument");
        emit_plot(aggregate_csv_path, svg_path, style ? style : "default");
        return RB_OK;
    });
}

rb_status rb_verify_files(const char* trajectory_csv, const char* dataset_json,
                          const char* config_json, char** report_json_out) {
    return guard([&]() {
        if (!trajectory_csv || !dataset_json || !config_json) throw InputError("null argument");
        VerifyFilesResult res = verify_files(trajectory_csv, dataset_json, config_json);
        if (report_json_out) *report_json_out = dup_string(res.report_json);
        if (res.exit_code == 0) return RB_OK;
        if (res.exit_code == 1) return RB_CHECK_FAILED;
        g_last_error = "schema mismatch in persisted artifacts";
        return RB_ERROR_INPUT;
    });
}

}  // extern "C"
