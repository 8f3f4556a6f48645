#include "experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <random>
#include <sstream>
#include <thread>

#include <json.hpp>

namespace relubias {

namespace fs = std::filesystem;
using nlohmann::json;

const char* to_string(Scenario s) {
    switch (s) {
        case Scenario::SingleThm: return "single_thm";
        case Scenario::SingleSweepD: return "single_sweep_d";
        case Scenario::TwoGoodInit: return "two_good_init";
        case Scenario::TwoRandomInit: return "two_random_init";
        case Scenario::TwoLowDim: return "two_low_dim";
        case Scenario::MultiDisjoint: return "multi_disjoint";
        case Scenario::MultiSharedSignFail: return "multi_shared_sign_fail";
        case Scenario::SingleModerateDim: return "single_moderate_dim";
        case Scenario::GramConc: return "gram_conc";
    }
    return "?";
}

Scenario scenario_from_string(const std::string& s) {
    for (Scenario sc : {Scenario::SingleThm, Scenario::SingleSweepD, Scenario::TwoGoodInit,
                        Scenario::TwoRandomInit, Scenario::TwoLowDim, Scenario::MultiDisjoint,
                        Scenario::MultiSharedSignFail, Scenario::SingleModerateDim,
                        Scenario::GramConc})
        if (s == to_string(sc)) return sc;
    throw InputError("unknown scenario: " + s);
}

void ExperimentConfig::apply_scenario_defaults() {
    auto seed_range = [](int count) {
        std::vector<std::uint64_t> v(count);
        for (int i = 0; i < count; ++i) v[i] = i;
        return v;
    };
    n = 10;
    d = 2000;
    switch (scenario) {
        case Scenario::SingleThm:
            seeds = seed_range(20);
            max_iters = 400;
            break;
        case Scenario::SingleSweepD:
            d_list = {500, 1000, 2000, 4000, 8000};
            seeds = seed_range(20);
            max_iters = 400;
            emit_dataset = false;
            break;
        case Scenario::TwoGoodInit:
            seeds = seed_range(20);
            max_iters = 400;
            break;
        case Scenario::TwoRandomInit:
            seeds = seed_range(50);
            max_iters = 400;
            break;
        case Scenario::TwoLowDim:
            d = 15;
            seeds = seed_range(10);
            max_iters = 2000;
            break;
        case Scenario::MultiDisjoint:
            seeds = seed_range(10);
            max_iters = 600;
            break;
        case Scenario::MultiSharedSignFail:
            seeds = seed_range(20);
            max_iters = 400;
            break;
        case Scenario::SingleModerateDim:
            d = 50;
            seeds = seed_range(10);
            max_iters = 2000;
            if (eta <= 0) eta = 1e-4;
            break;
        case Scenario::GramConc:
            seeds = seed_range(20);
            break;
    }
}

ExperimentConfig ExperimentConfig::from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw SchemaError(std::string("config JSON parse error: ") + e.what());
    }
    ExperimentConfig cfg;
    try {
        cfg.scenario = scenario_from_string(j.value("scenario", std::string("single_thm")));
        cfg.apply_scenario_defaults();
        if (j.contains("seeds")) cfg.seeds = j["seeds"].get<std::vector<std::uint64_t>>();
        cfg.seed_offset = j.value("seed_offset", cfg.seed_offset);
        cfg.out_dir = j.value("out_dir", cfg.out_dir);
        cfg.n = j.value("n", cfg.n);
        cfg.d = j.value("d", cfg.d);
        if (j.contains("d_list")) cfg.d_list = j["d_list"].get<std::vector<int>>();
        if (j.contains("spectrum_kind"))
            cfg.spectrum_kind = spectrum_kind_from_string(j["spectrum_kind"].get<std::string>());
        cfg.spectrum_ratio = j.value("spectrum_ratio", cfg.spectrum_ratio);
        if (j.contains("spectrum_lambda"))
            cfg.spectrum_lambda = j["spectrum_lambda"].get<std::vector<double>>();
        if (j.contains("z_dist")) cfg.z_dist = z_dist_from_string(j["z_dist"].get<std::string>());
        cfg.y_min = j.value("y_min", cfg.y_min);
        cfg.y_max = j.value("y_max", cfg.y_max);
        cfg.frac_positive = j.value("frac_positive", cfg.frac_positive);
        cfg.eta = j.value("eta", cfg.eta);
        cfg.max_iters = j.value("max_iters", cfg.max_iters);
        cfg.grad_tol = j.value("grad_tol", cfg.grad_tol);
        if (j.contains("constants")) {
            const auto& c = j["constants"];
            cfg.const_C = c.value("C", cfg.const_C);
            cfg.const_C_y = c.value("C_y", cfg.const_C_y);
            cfg.const_C_g = c.value("C_g", cfg.const_C_g);
        }
        cfg.minnorm_cap = j.value("minnorm_cap", cfg.minnorm_cap);
        cfg.minnorm_two_cap = j.value("minnorm_two_cap", cfg.minnorm_two_cap);
        cfg.threads = j.value("threads", cfg.threads);
        cfg.emit_dataset = j.value("emit_dataset", cfg.emit_dataset);
        cfg.emit_trajectory = j.value("emit_trajectory", cfg.emit_trajectory);
    } catch (const json::exception& e) {
        throw SchemaError(std::string("config JSON schema error: ") + e.what());
    }
    if (cfg.seeds.empty()) throw InputError("config: seeds must be non-empty");
    return cfg;
}

std::string ExperimentConfig::to_json() const {
    json j;
    j["scenario"] = to_string(scenario);
    j["seeds"] = seeds;
    j["seed_offset"] = seed_offset;
    j["out_dir"] = out_dir;
    j["n"] = n;
    j["d"] = d;
    if (!d_list.empty()) j["d_list"] = d_list;
    j["spectrum_kind"] = relubias::to_string(spectrum_kind);
    if (spectrum_kind == SpectrumKind::Geometric) j["spectrum_ratio"] = spectrum_ratio;
    if (spectrum_kind == SpectrumKind::Explicit) j["spectrum_lambda"] = spectrum_lambda;
    j["z_dist"] = relubias::to_string(z_dist);
    j["y_min"] = y_min;
    j["y_max"] = y_max;
    j["frac_positive"] = frac_positive;
    j["eta"] = eta;
    j["max_iters"] = max_iters;
    j["grad_tol"] = grad_tol;
    j["constants"] = {{"C", const_C}, {"C_y", const_C_y}, {"C_g", const_C_g}};
    j["minnorm_cap"] = minnorm_cap;
    j["minnorm_two_cap"] = minnorm_two_cap;
    j["threads"] = threads;
    j["emit_dataset"] = emit_dataset;
    j["emit_trajectory"] = emit_trajectory;
    return j.dump();
}

int derive_n_pos(std::uint64_t seed, int n) {
    if (n < 2) return n;
    std::mt19937_64 aux(seed * 0x9e3779b97f4a7c15ull + 0x1234abcdull);
    return 1 + static_cast<int>(aux() % static_cast<std::uint64_t>(n - 1));
}

std::vector<int> derive_assignment(std::uint64_t seed, const Dataset& ds,
                                   const std::vector<int>& signs) {
    std::mt19937_64 aux(seed * 0xd1b54a32d192ed03ull + 0x5678ef01ull);
    std::vector<int> assign(ds.n());
    for (int i = 0; i < ds.n(); ++i) {
        std::vector<int> matching;
        for (int k = 0; k < static_cast<int>(signs.size()); ++k)
            if (signs[k] * ds.y(i) > 0) matching.push_back(k);
        if (matching.empty()) throw InputError("derive_assignment: no neuron matches a label sign");
        assign[i] = matching[aux() % matching.size()];
    }
    return assign;
}

namespace {

struct SeedWorkItem {
    std::uint64_t seed = 0;
    int d = 0;
    std::string prefix;  // relative file prefix, e.g. "seed3" or "d500/seed3"
};

std::string hash_hex(const std::string& content) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(content)));
    return buf;
}

void emit(SeedResult& res, const std::string& out_dir, const std::string& rel,
          const std::string& content) {
    write_file(out_dir + "/" + rel, content);
    res.files.push_back({rel, hash_hex(content)});
}

Dataset build_dataset(const ExperimentConfig& cfg, std::uint64_t seed, int d) {
    Spectrum spec;
    switch (cfg.spectrum_kind) {
        case SpectrumKind::Isotropic: spec = make_spectrum(SpectrumKind::Isotropic, d); break;
        case SpectrumKind::Geometric:
            spec = make_spectrum(SpectrumKind::Geometric, d, {cfg.spectrum_ratio});
            break;
        case SpectrumKind::Explicit:
            spec = make_spectrum(SpectrumKind::Explicit, d, cfg.spectrum_lambda);
            break;
    }
    LabelSpec ls;
    ls.y_min = cfg.y_min;
    ls.y_max = cfg.y_max;
    if (cfg.frac_positive >= 0.0) {
        ls.frac_positive = cfg.frac_positive;
    } else {
        ls.frac_positive = static_cast<double>(derive_n_pos(seed, cfg.n)) / cfg.n;
        ls.require_both_signs = cfg.n >= 2;
    }
    return sample_dataset(spec, cfg.n, ls, cfg.z_dist, seed);
}

Constants constants_for(const ExperimentConfig& cfg, const Dataset& ds) {
    const double cg = cfg.const_C_g > 0 ? cfg.const_C_g : eigen_bounds(ds).cg_hat;
    return Constants::from_cg(cg, cfg.const_C_y, cfg.const_C);
}

std::vector<int> scenario_signs(Scenario s) {
    switch (s) {
        case Scenario::SingleThm:
        case Scenario::SingleSweepD:
        case Scenario::SingleModerateDim:
            return {+1};
        case Scenario::TwoGoodInit:
        case Scenario::TwoRandomInit:
        case Scenario::TwoLowDim:
            return {+1, -1};
        case Scenario::MultiDisjoint:
        case Scenario::MultiSharedSignFail:
            return {+1, +1, -1, -1};
        case Scenario::GramConc:
            return {};
    }
    return {};
}

InitSpec scenario_init(const ExperimentConfig& cfg, const Dataset& ds, const Constants& c,
                       std::uint64_t seed) {
    InitSpec init;
    const int n = ds.n();
    switch (cfg.scenario) {
        case Scenario::SingleThm:
        case Scenario::SingleSweepD:
            init.kind = InitKind::SingleEps;
            init.eps = {Vec::Constant(n, cfg.y_min / (2.0 * c.C_alpha))};
            break;
        case Scenario::TwoGoodInit:
        case Scenario::TwoLowDim:
            init.kind = InitKind::TwoEps;
            init.eps = {Vec::Constant(n, cfg.y_min / (4.0 * c.C_alpha)),
                        Vec::Constant(n, cfg.y_min / (4.0 * c.C_alpha))};
            break;
        case Scenario::MultiDisjoint: {
            init.kind = InitKind::MultiDisjoint;
            init.signs = scenario_signs(cfg.scenario);
            init.assignment = derive_assignment(seed, ds, init.signs);
            init.cg_hat = c.C_g;
            init.eps.assign(init.signs.size(),
                            Vec::Constant(n, cfg.y_min / (2.0 * c.C_alpha *
                                                          static_cast<double>(init.signs.size()))));
            break;
        }
        case Scenario::TwoRandomInit:
        case Scenario::MultiSharedSignFail:
        case Scenario::SingleModerateDim: {
            init.kind = InitKind::Random;
            init.signs = scenario_signs(cfg.scenario);
            init.m = static_cast<int>(init.signs.size());
            init.scale = std::sqrt(2e-6);
            init.seed = seed + 0x517cc1b727220a95ull;
            break;
        }
        case Scenario::GramConc:
            throw InputError("gram_conc has no model initialization");
    }
    return init;
}

// Mechanism invariants every run is expected to satisfy: primal-dual
// consistency, frozen-dual exactness, monotone risk after the freeze.
void mechanism_metrics(const Trajectory& traj, const Dataset& ds, SeedResult& res) {
    double pd = 0.0;
    for (const auto& s : traj.snapshots) pd = std::max(pd, s.pd_residual);
    res.metrics["pd_residual_max"] = pd;
    res.metrics["dual_violations"] = static_cast<double>(dual_update_check(traj, ds).size());
    auto t0 = detect_activation_freeze(traj);
    res.metrics["t0"] = t0 ? static_cast<double>(*t0) : -1.0;
    double monotone = 1.0;
    if (t0) {
        for (size_t si = 1; si < traj.snapshots.size(); ++si)
            if (traj.snapshots[si].t > *t0 &&
                traj.snapshots[si].risk > traj.snapshots[si - 1].risk + 1e-12)
                monotone = 0.0;
    }
    res.metrics["risk_monotone_after_t0"] = monotone;
}

void put_verify_metrics(const VerifyReport& rep, SeedResult& res) {
    res.metrics["verify_pass"] = rep.pass ? 1.0 : 0.0;
    for (const auto& [name, ck] : rep.checks) res.metrics["verify_" + name] = ck.value;
}

SeedResult run_one_seed(const ExperimentConfig& cfg, const SeedWorkItem& item) {
    SeedResult res;
    res.seed = item.seed;
    res.d = item.d;
    std::string stage = "dataset";
    try {
        Dataset ds = build_dataset(cfg, item.seed, item.d);
        Constants c = constants_for(cfg, ds);
        EigenReport eig = eigen_bounds(ds);
        GramReport gram = gram_deviation(ds, c);
        res.metrics["cg_hat"] = eig.cg_hat;
        res.metrics["gram_deviation"] = gram.deviation;
        res.metrics["gram_ratio"] = gram.ratio;
        res.metrics["n_neg"] = ds.n_neg();

        if (cfg.emit_dataset) emit(res, cfg.out_dir, item.prefix + "_dataset.json", dataset_to_json(ds));

        if (cfg.scenario == Scenario::GramConc) {
            stage = "gram";
            emit(res, cfg.out_dir, item.prefix + "_gram.json", gram_report_to_json(gram, eig));
            return res;
        }

        stage = "init";
        InitSpec init = scenario_init(cfg, ds, c, item.seed);
        ModelState m0 = apply_init(ds, init, c);

        stage = "run";
        const auto rec = recommend_step_size(ds, c);
        const double eta = cfg.eta > 0 ? cfg.eta : rec.eta;
        const double l1 = ds.spectrum.l1();
        res.metrics["eta_in_theorem_window"] =
            (eta >= 1.0 / (c.C * c.C_g * l1) && eta <= 1.0 / (c.C_g * l1)) ? 1.0 : 0.0;
        StopRule stop;
        stop.max_iters = cfg.max_iters;
        stop.grad_tol = cfg.grad_tol;
        Trajectory traj = run(m0, ds, eta, stop);
        res.metrics["eta"] = eta;
        res.metrics["final_risk"] = traj.final_risk();
        res.metrics["iters"] = static_cast<double>(traj.iters());
        res.metrics["risk0"] = traj.snapshots.front().risk;
        mechanism_metrics(traj, ds, res);

        auto t0 = detect_activation_freeze(traj);
        if (cfg.emit_trajectory)
            emit(res, cfg.out_dir, item.prefix + "_trajectory.csv", trajectory_to_csv(traj));
        emit(res, cfg.out_dir, item.prefix + "_summary.json", trajectory_summary_json(traj, t0));

        stage = "ledger";
        ConditionLedger ledger;
        std::vector<int> assignment;
        switch (cfg.scenario) {
            case Scenario::SingleThm:
            case Scenario::SingleSweepD:
            case Scenario::SingleModerateDim:
                ledger = check_conditions_single(traj, ds, c);
                break;
            case Scenario::TwoGoodInit:
            case Scenario::TwoRandomInit:
            case Scenario::TwoLowDim:
                ledger = check_conditions_two(traj, ds, c);
                break;
            case Scenario::MultiDisjoint:
                assignment = init.assignment;
                ledger = check_conditions_multi(traj, ds, assignment, c);
                break;
            case Scenario::MultiSharedSignFail:
                assignment = derive_assignment(item.seed, ds, init.signs);
                ledger = check_conditions_multi(traj, ds, assignment, c);
                break;
            default:
                break;
        }
        emit(res, cfg.out_dir, item.prefix + "_ledger.csv", ledger_to_csv(ledger));
        res.metrics["ledger_all_from_1"] = ledger.all_hold_from(1) ? 1.0 : 0.0;
        bool fail_at_1 = false;
        for (size_t ti = 0; ti < ledger.ts.size(); ++ti)
            if (ledger.ts[ti] == 1 && !ledger.all_hold_at(ti)) fail_at_1 = true;
        res.metrics["ledger_fail_at_1"] = fail_at_1 ? 1.0 : 0.0;
        if (cfg.scenario == Scenario::MultiSharedSignFail || cfg.scenario == Scenario::MultiDisjoint)
            res.metrics["cond_a_violated"] =
                ledger.first_failure("a_assigned_beta_pos", 0) >= 0 ? 1.0 : 0.0;

        stage = "verify";
        switch (cfg.scenario) {
            case Scenario::SingleThm:
            case Scenario::SingleSweepD: {
                VerifyReport rep = verify_implicit_bias_single(traj, ds, init.eps[0], 1e-6);
                emit(res, cfg.out_dir, item.prefix + "_verify.json", verify_report_to_json(rep));
                put_verify_metrics(rep, res);
                break;
            }
            case Scenario::TwoGoodInit:
            case Scenario::TwoLowDim: {
                VerifyReport rep =
                    verify_implicit_bias_two(traj, ds, init.eps[0], init.eps[1], 1e-6);
                emit(res, cfg.out_dir, item.prefix + "_verify.json", verify_report_to_json(rep));
                put_verify_metrics(rep, res);
                break;
            }
            case Scenario::MultiDisjoint: {
                VerifyReport rep = verify_implicit_bias_multi(traj, ds, assignment, init, 1e-6);
                emit(res, cfg.out_dir, item.prefix + "_verify.json", verify_report_to_json(rep));
                put_verify_metrics(rep, res);
                res.metrics["upper_bound_multi"] =
                    feasible_upper_bound_multi(ds, 4, init.signs);
                break;
            }
            default:
                break;  // random inits have no closed-form first iterate
        }

        stage = "minnorm";
        MinNormOptions mopts;
        mopts.cap_single = cfg.minnorm_cap;
        mopts.cap_two = cfg.minnorm_two_cap;
        switch (cfg.scenario) {
            case Scenario::SingleThm:
            case Scenario::SingleSweepD:
            case Scenario::SingleModerateDim: {
                MinNormSolution star = min_norm_single(ds, 1e-9, mopts);
                emit(res, cfg.out_dir, item.prefix + "_minnorm.json", minnorm_to_json(star));
                BoundReport br =
                    bound_report_single(traj.final_state.weights[0], ds, c, star);
                emit(res, cfg.out_dir, item.prefix + "_bound.json", bound_report_to_json(br));
                res.metrics["distance"] = br.distance;
                res.metrics["lower_bound"] = br.lower_bound;
                res.metrics["upper_bound"] = br.upper_bound;
                res.metrics["within"] = br.within ? 1.0 : 0.0;
                res.metrics["minnorm_objective"] = star.objective;
                break;
            }
            case Scenario::TwoGoodInit:
            case Scenario::TwoLowDim: {
                MinNormSolution star = min_norm_two(ds, 1e-9, mopts);
                emit(res, cfg.out_dir, item.prefix + "_minnorm.json", minnorm_to_json(star));
                BoundReportPair pair = bound_report_two(traj.final_state.weights[0],
                                                        traj.final_state.weights[1], ds, c, star);
                json bj;
                bj["plus"] = json::parse(bound_report_to_json(pair.plus));
                bj["minus"] = json::parse(bound_report_to_json(pair.minus));
                emit(res, cfg.out_dir, item.prefix + "_bound.json", bj.dump());
                res.metrics["plus_distance"] = pair.plus.distance;
                res.metrics["minus_distance"] = pair.minus.distance;
                res.metrics["plus_upper"] = pair.plus.upper_bound;
                res.metrics["minus_upper"] = pair.minus.upper_bound;
                res.metrics["minnorm_objective"] = star.objective;
                break;
            }
            default:
                break;
        }
        return res;
    } catch (const std::exception& e) {
        res.stage = stage;
        res.error = e.what();
        return res;
    }
}

int thread_budget(const ExperimentConfig& cfg, size_t n_items) {
    int t = cfg.threads;
    if (t <= 0) {
        if (const char* env = std::getenv("RELUBIAS_THREADS")) t = std::atoi(env);
    }
    if (t <= 0) t = static_cast<int>(std::thread::hardware_concurrency());
    if (t <= 0) t = 1;
    return std::min<int>(t, static_cast<int>(n_items));
}

std::vector<SeedResult> run_items(const ExperimentConfig& cfg,
                                  const std::vector<SeedWorkItem>& items) {
    std::vector<SeedResult> results(items.size());
    std::atomic<size_t> next{0};
    const int nthreads = thread_budget(cfg, items.size());
    auto worker = [&]() {
        while (true) {
            const size_t i = next.fetch_add(1);
            if (i >= items.size()) return;
            results[i] = run_one_seed(cfg, items[i]);
        }
    };
    if (nthreads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    return results;
}

}  // namespace

bool ArtifactManifest::any_errors() const {
    for (const auto& r : results)
        if (!r.error.empty()) return true;
    return false;
}

std::string ArtifactManifest::to_json() const {
    json j;
    j["scenario"] = scenario;
    j["config"] = json::parse(config_json);
    json results_j = json::array();
    for (const auto& r : results) {
        json rj;
        rj["seed"] = r.seed;
        rj["d"] = r.d;
        json files = json::array();
        for (const auto& f : r.files) files.push_back({{"path", f.path}, {"hash", f.hash}});
        rj["files"] = files;
        rj["metrics"] = r.metrics;
        if (!r.error.empty()) {
            rj["error"] = r.error;
            rj["stage"] = r.stage;
        }
        results_j.push_back(rj);
    }
    j["results"] = results_j;
    j["aggregate"] = aggregate;
    json extra = json::array();
    for (const auto& f : extra_files) extra.push_back({{"path", f.path}, {"hash", f.hash}});
    j["extra_files"] = extra;
    return j.dump(2);
}

ArtifactManifest run_experiment(const ExperimentConfig& config) {
    ExperimentConfig cfg = config;
    if (cfg.seeds.empty()) throw InputError("run_experiment: seeds must be non-empty");
    fs::create_directories(cfg.out_dir);

    std::vector<SeedWorkItem> items;
    if (cfg.scenario == Scenario::SingleSweepD) {
        if (cfg.d_list.empty()) throw InputError("sweep scenario needs d_list");
        for (int d : cfg.d_list) {
            fs::create_directories(cfg.out_dir + "/d" + std::to_string(d));
            for (auto s : cfg.seeds) {
                const std::uint64_t seed = s + cfg.seed_offset;
                items.push_back(
                    {seed, d, "d" + std::to_string(d) + "/seed" + std::to_string(seed)});
            }
        }
    } else {
        for (auto s : cfg.seeds) {
            const std::uint64_t seed = s + cfg.seed_offset;
            items.push_back({seed, cfg.d, "seed" + std::to_string(seed)});
        }
    }

    ArtifactManifest manifest;
    manifest.scenario = to_string(cfg.scenario);
    manifest.config_json = cfg.to_json();
    manifest.results = run_items(cfg, items);

    // aggregate metrics
    auto mean_metric = [&](const std::string& name) {
        double sum = 0;
        int count = 0;
        for (const auto& r : manifest.results)
            if (r.error.empty() && r.metrics.count(name)) {
                sum += r.metrics.at(name);
                ++count;
            }
        return count ? sum / count : 0.0;
    };
    manifest.aggregate["seeds_total"] = static_cast<double>(manifest.results.size());
    int failed = 0;
    for (const auto& r : manifest.results)
        if (!r.error.empty()) ++failed;
    manifest.aggregate["seeds_failed"] = failed;
    for (const char* name : {"final_risk", "cg_hat", "gram_ratio", "ledger_all_from_1",
                             "verify_pass", "distance", "cond_a_violated"})
        if (std::any_of(manifest.results.begin(), manifest.results.end(),
                        [&](const SeedResult& r) { return r.metrics.count(name) > 0; }))
            manifest.aggregate[std::string("mean_") + name] = mean_metric(name);

    if (cfg.scenario == Scenario::SingleSweepD) {
        std::vector<SweepRow> rows;
        std::vector<std::pair<double, double>> fit_points;
        for (int d : cfg.d_list) {
            std::vector<double> dist, lo, hi;
            for (const auto& r : manifest.results)
                if (r.d == d && r.error.empty() && r.metrics.count("distance")) {
                    dist.push_back(r.metrics.at("distance"));
                    lo.push_back(r.metrics.at("lower_bound"));
                    hi.push_back(r.metrics.at("upper_bound"));
                }
            if (dist.empty()) continue;
            SweepRow row;
            row.d = d;
            double mean = 0;
            for (double v : dist) mean += v;
            mean /= dist.size();
            double var = 0;
            for (double v : dist) var += (v - mean) * (v - mean);
            row.mean_error = mean;
            row.std_error = dist.size() > 1 ? std::sqrt(var / (dist.size() - 1)) : 0.0;
            row.lower_bound = 0;
            for (double v : lo) row.lower_bound += v;
            row.lower_bound /= lo.size();
            row.upper_bound = 0;
            for (double v : hi) row.upper_bound += v;
            row.upper_bound /= hi.size();
            rows.push_back(row);
            fit_points.push_back({static_cast<double>(d), mean});
        }
        const std::string agg_csv = sweep_aggregate_csv(rows);
        write_file(cfg.out_dir + "/aggregate.csv", agg_csv);
        manifest.extra_files.push_back({"aggregate.csv", hash_hex(agg_csv)});
        const std::string svg = render_sweep_svg(rows, "default");
        write_file(cfg.out_dir + "/plot.svg", svg);
        manifest.extra_files.push_back({"plot.svg", hash_hex(svg)});
        if (fit_points.size() >= 4) {
            SlopeFit fit = slope_estimate(fit_points);
            manifest.aggregate["slope"] = fit.slope;
            manifest.aggregate["intercept"] = fit.intercept;
            manifest.aggregate["r2"] = fit.r2;
        }
        bool within = true;
        for (const auto& row : rows)
            within = within && row.lower_bound <= row.mean_error && row.mean_error <= row.upper_bound;
        manifest.aggregate["means_within_envelope"] = within ? 1.0 : 0.0;
    }

    write_file(cfg.out_dir + "/manifest.json", manifest.to_json());
    return manifest;
}

std::string emit_plot(const std::string& aggregate_csv_path, const std::string& svg_path,
                      const std::string& style) {
    const std::string text = read_file(aggregate_csv_path);
    const auto rows = parse_sweep_aggregate_csv(text);
    write_file(svg_path, render_sweep_svg(rows, style));
    return svg_path;
}

VerifyFilesResult verify_files(const std::string& trajectory_csv_path,
                               const std::string& dataset_json_path,
                               const std::string& config_json) {
    VerifyFilesResult out;
    json report;
    try {
        ExperimentConfig cfg = ExperimentConfig::from_json(config_json);
        Dataset ds = dataset_from_json(read_file(dataset_json_path));
        ds.y_min_bound = cfg.y_min;
        ds.y_max_bound = cfg.y_max;
        Constants c = constants_for(cfg, ds);
        const std::vector<int> signs = scenario_signs(cfg.scenario);
        if (signs.empty()) throw SchemaError("verify: scenario has no trajectory to verify");
        const double eta = cfg.eta > 0 ? cfg.eta : recommend_step_size(ds, c).eta;
        Trajectory traj = trajectory_from_csv(read_file(trajectory_csv_path), eta, signs);
        if (traj.log_stride != 1) throw SchemaError("verify: trajectory must use stride-1 logging");

        // reconstruct the final weights from the dual variables (theorem
        // initializations have no component outside the row span)
        const Mat& alphaT = traj.snapshots.back().alpha;
        traj.final_state.signs = signs;
        for (int k = 0; k < static_cast<int>(signs.size()); ++k)
            traj.final_state.weights.push_back(ds.X.transpose() * alphaT.row(k).transpose());

        bool pass = true;
        auto add_check = [&](const std::string& name, bool ok, double value) {
            report["checks"][name] = {{"pass", ok}, {"value", value}};
            pass = pass && ok;
        };

        double pd = 0.0;
        for (const auto& s : traj.snapshots)
            for (int k = 0; k < static_cast<int>(signs.size()); ++k) {
                const Vec r =
                    s.beta.row(k).transpose() - ds.gram->G * s.alpha.row(k).transpose();
                pd = std::max(pd, r.norm() / (1.0 + s.beta.row(k).norm()));
            }
        add_check("pd_consistency", pd <= 1e-8, pd);

        const auto dual_viol = dual_update_check(traj, ds);
        add_check("dual_update_check", dual_viol.empty(), static_cast<double>(dual_viol.size()));

        auto t0 = detect_activation_freeze(traj);
        report["t0"] = t0 ? json(*t0) : json(nullptr);

        const bool theorem_scenario = cfg.scenario == Scenario::SingleThm ||
                                      cfg.scenario == Scenario::SingleSweepD ||
                                      cfg.scenario == Scenario::TwoGoodInit ||
                                      cfg.scenario == Scenario::MultiDisjoint;
        if (theorem_scenario) {
            ConditionLedger ledger;
            VerifyReport rep;
            if (cfg.scenario == Scenario::TwoGoodInit) {
                ledger = check_conditions_two(traj, ds, c);
                Vec eps = Vec::Constant(ds.n(), cfg.y_min / (4.0 * c.C_alpha));
                rep = verify_implicit_bias_two(traj, ds, eps, eps, 1e-6);
            } else if (cfg.scenario == Scenario::MultiDisjoint) {
                const auto assignment = derive_assignment(ds.seed, ds, signs);
                ledger = check_conditions_multi(traj, ds, assignment, c);
                InitSpec init = scenario_init(cfg, ds, c, ds.seed);
                rep = verify_implicit_bias_multi(traj, ds, assignment, init, 1e-6);
            } else {
                ledger = check_conditions_single(traj, ds, c);
                Vec eps = Vec::Constant(ds.n(), cfg.y_min / (2.0 * c.C_alpha));
                rep = verify_implicit_bias_single(traj, ds, eps, 1e-6);
            }
            add_check("ledger_from_1", ledger.all_hold_from(1),
                      ledger.all_hold_from(1) ? 1.0 : 0.0);
            add_check("implicit_bias", rep.pass, rep.pass ? 1.0 : 0.0);
            report["verify_detail"] = json::parse(verify_report_to_json(rep));
        }

        report["pass"] = pass;
        out.exit_code = pass ? 0 : 1;
        out.report_json = report.dump(2);
        return out;
    } catch (const SchemaError& e) {
        report["error"] = e.what();
        out.exit_code = 2;
        out.report_json = report.dump(2);
        return out;
    }
}

}  // namespace relubias
