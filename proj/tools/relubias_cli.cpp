// relubias command line front end. Talks to the core exclusively through the
// C API in relubias.h; argument handling and config merging live here.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "relubias.h"

using nlohmann::json;

namespace {

int fail(rb_status st) {
    std::cerr << "error: " << rb_last_error() << "\n";
    switch (st) {
        case RB_CHECK_FAILED: return 1;
        case RB_ERROR_INPUT: return 2;
        default: return 2;
    }
}

std::string take_string(char* s) {
    std::string out = s ? s : "";
    rb_string_free(s);
    return out;
}

json load_config_file(const std::string& path) {
    if (path.empty()) return json::object();
    std::ifstream in(path);
    if (!in) {
        std::cerr << "error: cannot open config file " << path << "\n";
        std::exit(2);
    }
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        return json::parse(ss.str());
    } catch (const json::exception& e) {
        std::cerr << "error: config parse failure: " << e.what() << "\n";
        std::exit(2);
    }
}

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
    std::vector<std::uint64_t> seeds;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty()) continue;
        seeds.push_back(std::stoull(tok));
    }
    return seeds;
}

void apply_constants_flag(json& cfg, const std::string& text) {
    json c = cfg.value("constants", json::object());
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        const auto eq = tok.find('=');
        if (eq == std::string::npos) {
            std::cerr << "error: --constants expects key=val,... pairs\n";
            std::exit(2);
        }
        c[tok.substr(0, eq)] = std::stod(tok.substr(eq + 1));
    }
    cfg["constants"] = c;
}

struct CommonRunFlags {
    std::string config_path;
    std::string scenario;
    std::string seeds;
    std::string out;
    double eta = -1.0;
    long max_iters = -1;
    std::string constants;
    std::uint64_t seed_offset = 0;
    int threads = 0;
};

void add_run_flags(CLI::App* app, CommonRunFlags& f) {
    app->add_option("--config", f.config_path, "config JSON file");
    app->add_option("--scenario", f.scenario, "scenario name");
    app->add_option("--seeds", f.seeds, "comma-separated seed list");
    app->add_option("--out", f.out, "output directory");
    app->add_option("--eta", f.eta, "step size override");
    app->add_option("--max-iters", f.max_iters, "iteration cap override");
    app->add_option("--constants", f.constants, "constant overrides, key=val,...");
    app->add_option("--seed-offset", f.seed_offset, "shift applied to every seed");
    app->add_option("--threads", f.threads, "parallel seed cap (or RELUBIAS_THREADS)");
}

int run_scenario(const CommonRunFlags& f, const std::string& default_scenario) {
    json cfg = load_config_file(f.config_path);
    if (!f.scenario.empty()) cfg["scenario"] = f.scenario;
    if (!cfg.contains("scenario") && !default_scenario.empty()) cfg["scenario"] = default_scenario;
    if (!f.seeds.empty()) cfg["seeds"] = parse_seed_list(f.seeds);
    if (!f.out.empty()) cfg["out_dir"] = f.out;
    if (f.eta > 0) cfg["eta"] = f.eta;
    if (f.max_iters >= 0) cfg["max_iters"] = f.max_iters;
    if (f.seed_offset != 0) cfg["seed_offset"] = f.seed_offset;
    if (f.threads > 0) cfg["threads"] = f.threads;
    if (!f.constants.empty()) apply_constants_flag(cfg, f.constants);

    char* manifest = nullptr;
    rb_status st = rb_experiment_run(cfg.dump().c_str(), &manifest);
    if (st != RB_OK) return fail(st);
    const std::string text = take_string(manifest);
    json m = json::parse(text);
    std::cout << "scenario " << m["scenario"].get<std::string>() << ": "
              << m["results"].size() << " runs, "
              << m["aggregate"].value("seeds_failed", 0.0) << " failed\n";
    for (const auto& [k, v] : m["aggregate"].items())
        std::cout << "  " << k << " = " << v << "\n";
    std::cout << "manifest: " << cfg.value("out_dir", ".") << "/manifest.json\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"simulation and verification laboratory for the implicit bias of "
                 "gradient descent on shallow ReLU regression"};
    app.require_subcommand(1);

    // gen ------------------------------------------------------------------
    auto* gen = app.add_subcommand("gen", "generate a dataset and write JSON/CSV");
    int gen_n = 10, gen_d = 2000;
    std::uint64_t gen_seed = 0;
    std::string gen_out = "dataset.json", gen_csv, gen_spectrum = "isotropic",
                gen_zdist = "gaussian";
    double gen_ratio = 0.5, gen_ymin = 0.1, gen_ymax = 1.0, gen_frac = 0.5;
    gen->add_option("--n", gen_n, "number of examples");
    gen->add_option("--d", gen_d, "feature dimension");
    gen->add_option("--seed", gen_seed, "RNG seed");
    gen->add_option("--out", gen_out, "output JSON path");
    gen->add_option("--csv", gen_csv, "optional CSV export path");
    gen->add_option("--spectrum", gen_spectrum, "isotropic|geometric|explicit");
    gen->add_option("--ratio", gen_ratio, "geometric spectrum ratio");
    gen->add_option("--z-dist", gen_zdist, "gaussian|rademacher|uniform_unit_var");
    gen->add_option("--y-min", gen_ymin, "label magnitude lower bound");
    gen->add_option("--y-max", gen_ymax, "label magnitude upper bound");
    gen->add_option("--frac-positive", gen_frac, "fraction of positive labels");

    // run / sweep ------------------------------------------------------------
    auto* runc = app.add_subcommand("run", "run an experiment scenario");
    CommonRunFlags run_flags;
    add_run_flags(runc, run_flags);

    auto* sweep = app.add_subcommand("sweep", "run the dimension sweep scenario");
    CommonRunFlags sweep_flags;
    add_run_flags(sweep, sweep_flags);

    // minnorm ----------------------------------------------------------------
    auto* minnorm = app.add_subcommand("minnorm", "solve a min-norm problem for a dataset");
    std::string mn_dataset, mn_model = "single", mn_out;
    double mn_tol = 1e-9;
    minnorm->add_option("--dataset", mn_dataset, "dataset JSON path")->required();
    minnorm->add_option("--model", mn_model, "single|single_pg|two|upper");
    minnorm->add_option("--tol", mn_tol, "feasibility/multiplier tolerance");
    minnorm->add_option("--out", mn_out, "write the solution JSON here (default stdout)");

    // verify -------------------------------------------------------------
    auto* verify = app.add_subcommand("verify", "re-check persisted run artifacts");
    std::string vf_traj, vf_dataset, vf_config;
    std::string vf_scenario = "single_thm";
    verify->add_option("--trajectory", vf_traj, "trajectory CSV path")->required();
    verify->add_option("--dataset", vf_dataset, "dataset JSON path")->required();
    verify->add_option("--config", vf_config, "experiment config JSON file");
    verify->add_option("--scenario", vf_scenario, "scenario when no config is given");

    // plot ---------------------------------------------------------------
    auto* plot = app.add_subcommand("plot", "render a sweep aggregate CSV as SVG");
    std::string pl_agg, pl_out = "plot.svg", pl_style = "default";
    plot->add_option("--aggregate", pl_agg, "aggregate CSV path")->required();
    plot->add_option("--out", pl_out, "output SVG path");
    plot->add_option("--style", pl_style, "plot style tag");

    CLI11_PARSE(app, argc, argv);

    if (gen->parsed()) {
        json params;
        params["n"] = gen_n;
        params["d"] = gen_d;
        params["seed"] = gen_seed;
        params["spectrum_kind"] = gen_spectrum;
        params["spectrum_ratio"] = gen_ratio;
        params["z_dist"] = gen_zdist;
        params["y_min"] = gen_ymin;
        params["y_max"] = gen_ymax;
        params["frac_positive"] = gen_frac;
        rb_dataset* ds = nullptr;
        rb_status st = rb_dataset_generate(params.dump().c_str(), &ds);
        if (st != RB_OK) return fail(st);
        st = rb_dataset_save_json(ds, gen_out.c_str());
        if (st == RB_OK && !gen_csv.empty()) st = rb_dataset_save_csv(ds, gen_csv.c_str());
        char* info = nullptr;
        if (st == RB_OK) st = rb_dataset_info(ds, &info);
        rb_dataset_free(ds);
        if (st != RB_OK) return fail(st);
        std::cout << take_string(info) << "\n";
        return 0;
    }

    if (runc->parsed()) return run_scenario(run_flags, "");
    if (sweep->parsed()) return run_scenario(sweep_flags, "single_sweep_d");

    if (minnorm->parsed()) {
        rb_dataset* ds = nullptr;
        rb_status st = rb_dataset_load_json(mn_dataset.c_str(), &ds);
        if (st != RB_OK) return fail(st);
        std::string output;
        if (mn_model == "upper") {
            const int signs[2] = {+1, -1};
            double bound = 0;
            st = rb_minnorm_upper_bound_multi(ds, 2, signs, &bound);
            if (st == RB_OK) {
                json j;
                j["upper_bound"] = bound;
                output = j.dump();
            }
        } else {
            rb_minnorm* sol = nullptr;
            if (mn_model == "single")
                st = rb_minnorm_single(ds, mn_tol, &sol);
            else if (mn_model == "single_pg")
                st = rb_minnorm_single_pg(ds, mn_tol, &sol);
            else if (mn_model == "two")
                st = rb_minnorm_two(ds, mn_tol, &sol);
            else {
                std::cerr << "error: unknown --model " << mn_model << "\n";
                rb_dataset_free(ds);
                return 2;
            }
            if (st == RB_OK) {
                char* j = nullptr;
                st = rb_minnorm_to_json(sol, &j);
                if (st == RB_OK) output = take_string(j);
            }
            rb_minnorm_free(sol);
        }
        rb_dataset_free(ds);
        if (st != RB_OK) return fail(st);
        if (mn_out.empty()) {
            std::cout << output << "\n";
        } else {
            std::ofstream out(mn_out);
            out << output;
        }
        return 0;
    }

    if (verify->parsed()) {
        std::string cfg_text;
        if (!vf_config.empty()) {
            cfg_text = load_config_file(vf_config).dump();
        } else {
            json j;
            j["scenario"] = vf_scenario;
            cfg_text = j.dump();
        }
        char* report = nullptr;
        rb_status st = rb_verify_files(vf_traj.c_str(), vf_dataset.c_str(), cfg_text.c_str(),
                                       &report);
        std::cout << take_string(report) << "\n";
        if (st == RB_OK) return 0;
        if (st == RB_CHECK_FAILED) return 1;
        std::cerr << "error: " << rb_last_error() << "\n";
        return 2;
    }

    if (plot->parsed()) {
        rb_status st = rb_emit_plot(pl_agg.c_str(), pl_out.c_str(), pl_style.c_str());
        if (st != RB_OK) return fail(st);
        std::cout << "wrote " << pl_out << "\n";
        return 0;
    }

    return 2;
}
