// Acceptance suite: runs every acceptance criterion end to end against the
// library and prints one pass/fail line per criterion. Exit code 0 iff every
// selected criterion passes.

#include <chrono>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

#include "core/experiment.hpp"

using namespace relubias;
namespace fs = std::filesystem;

namespace {

std::string g_root;

std::string out_dir(const std::string& tag) {
    const std::string p = g_root + "/" + tag;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

double elapsed_s(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

ExperimentConfig scenario_config(Scenario sc, const std::string& tag) {
    ExperimentConfig cfg;
    cfg.scenario = sc;
    cfg.apply_scenario_defaults();
    cfg.out_dir = out_dir(tag);
    return cfg;
}

bool metric_ok(const SeedResult& r, const char* name, double lo, double hi) {
    if (!r.metrics.count(name)) return false;
    const double v = r.metrics.at(name);
    return v >= lo && v <= hi;
}

// mechanism invariants recorded by every scenario run (criterion 9 umbrella)
bool mechanism_ok(const SeedResult& r, std::ostringstream& why) {
    if (!metric_ok(r, "pd_residual_max", 0.0, 1e-8)) {
        why << " seed " << r.seed << ": primal-dual residual "
            << r.metrics.at("pd_residual_max");
        return false;
    }
    if (!metric_ok(r, "dual_violations", 0.0, 0.0)) {
        why << " seed " << r.seed << ": frozen-dual violations";
        return false;
    }
    if (!metric_ok(r, "risk_monotone_after_t0", 1.0, 1.0)) {
        why << " seed " << r.seed << ": risk not monotone after t0";
        return false;
    }
    return true;
}

// ---- criterion 1: single-ReLU implicit bias ------------------------------
bool crit1(std::string& detail) {
    const auto start = std::chrono::steady_clock::now();
    ExperimentConfig cfg = scenario_config(Scenario::SingleThm, "crit1");
    ArtifactManifest m = run_experiment(cfg);
    std::ostringstream why;
    int pass = 0;
    for (const auto& r : m.results) {
        if (!r.error.empty()) continue;
        const bool ok = r.metrics.at("t0") == 1.0 && r.metrics.at("verify_pass") == 1.0 &&
                        mechanism_ok(r, why);
        if (ok) ++pass;
    }
    const double secs = elapsed_s(start);
    std::ostringstream d;
    d << pass << "/" << m.results.size() << " seeds (need >= 19), " << secs << " s (< 30)";
    d << why.str();
    detail = d.str();
    return pass >= 19 && secs < 30.0;
}

// ---- criterion 2: distance scaling sweep ---------------------------------
bool crit2(std::string& detail) {
    const auto start = std::chrono::steady_clock::now();
    ExperimentConfig cfg = scenario_config(Scenario::SingleSweepD, "crit2");
    ArtifactManifest m = run_experiment(cfg);
    const double slope = m.aggregate.count("slope") ? m.aggregate.at("slope") : 0.0;
    const double r2 = m.aggregate.count("r2") ? m.aggregate.at("r2") : 0.0;
    const bool envel = m.aggregate.count("means_within_envelope") &&
                       m.aggregate.at("means_within_envelope") == 1.0;
    const double secs = elapsed_s(start);
    std::ostringstream d;
    d << "slope " << slope << " (in [-0.6,-0.4]), r2 " << r2 << " (>= 0.95), envelope "
      << (envel ? "ok" : "VIOLATED") << ", " << secs << " s (< 600)";
    detail = d.str();
    return slope >= -0.6 && slope <= -0.4 && r2 >= 0.95 && envel && !m.any_errors() &&
           secs < 600.0;
}

// ---- criterion 3: all-positive degenerate case ---------------------------
bool crit3(std::string& detail) {
    int pass = 0;
    std::ostringstream why;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        Spectrum spec = make_spectrum(SpectrumKind::Isotropic, 1000);
        LabelSpec ls;
        ls.y_min = 0.1;
        ls.y_max = 1.0;
        ls.frac_positive = 1.0;
        Dataset ds = sample_dataset(spec, 8, ls, ZDist::Gaussian, seed);
        Constants c = Constants::from_cg(eigen_bounds(ds).cg_hat);
        Vec eps = Vec::Constant(8, ds.y_min_bound / (2.0 * c.C_alpha));
        ModelState m0 = init_single(ds, eps, c);
        StopRule stop;
        stop.max_iters = 3000;
        Trajectory traj = run(m0, ds, recommend_step_size(ds, c).eta, stop);
        MinNormSolution star = min_norm_single(ds);
        const double dist = (traj.final_state.weights[0] - star.weights[0]).norm();
        if (dist <= 1e-6 * star.weights[0].norm())
            ++pass;
        else
            why << " seed " << seed << ": " << dist;
    }
    detail = "10 seeds, ||w_inf - w*|| <= 1e-6 ||w*|| on " + std::to_string(pass) + why.str();
    return pass == 10;
}

// ---- criterion 4: min-norm oracle equivalence ----------------------------
bool crit4(std::string& detail) {
    const auto start = std::chrono::steady_clock::now();
    int pass = 0;
    std::ostringstream why;
    for (std::uint64_t inst = 0; inst < 200; ++inst) {
        std::mt19937_64 rng(inst * 7919 + 13);
        const int n = 3 + static_cast<int>(rng() % 6);           // 3..8
        const int d = n + static_cast<int>(rng() % (33 - n));    // n..32
        const int npos = 1 + static_cast<int>(rng() % (n - 1));  // mixed labels
        Spectrum spec = make_spectrum(SpectrumKind::Isotropic, d);
        LabelSpec ls;
        ls.y_min = 0.1;
        ls.y_max = 1.0;
        ls.frac_positive = static_cast<double>(npos) / n;
        ls.require_both_signs = true;
        Dataset ds = sample_dataset(spec, n, ls, ZDist::Gaussian, inst + 1000);
        MinNormSolution en = min_norm_single(ds);
        MinNormSolution pg = min_norm_single_pg(ds);
        const double gap = (en.weights[0] - pg.weights[0]).norm();
        if (gap <= 1e-6 && en.kkt_residual <= 1e-7)
            ++pass;
        else if (why.tellp() < 200)
            why << " inst " << inst << ": gap " << gap << " kkt " << en.kkt_residual;
    }
    const double secs = elapsed_s(start);
    std::ostringstream d;
    d << pass << "/200 instances, " << secs << " s (< 60)" << why.str();
    detail = d.str();
    return pass == 200 && secs < 60.0;
}

// ---- criterion 5: two-ReLU restricted program ----------------------------
bool crit5(std::string& detail) {
    int pass = 0;
    std::ostringstream why;
    for (std::uint64_t inst = 0; inst < 50; ++inst) {
        std::mt19937_64 rng(inst * 104729 + 7);
        const int n = 3 + static_cast<int>(rng() % 4);  // 3..6
        const int d = 2 * n + static_cast<int>(rng() % 8);
        const int npos = 1 + static_cast<int>(rng() % (n - 1));
        Spectrum spec = make_spectrum(SpectrumKind::Isotropic, d);
        LabelSpec ls;
        ls.y_min = 0.1;
        ls.y_max = 1.0;
        ls.frac_positive = static_cast<double>(npos) / n;
        ls.require_both_signs = true;
        Dataset ds = sample_dataset(spec, n, ls, ZDist::Gaussian, inst + 5000);

        MinNormSolution sol = min_norm_two(ds);
        bool ok = true;
        // original nonconvex feasibility at 1e-8
        Vec hp = ds.X * sol.weights[0];
        Vec hm = ds.X * sol.weights[1];
        for (int i = 0; i < n; ++i) {
            const double h = std::max(hp(i), 0.0) - std::max(hm(i), 0.0);
            if (std::abs(h - ds.y(i)) > 1e-8 * (1.0 + std::abs(ds.y(i)))) ok = false;
        }
        // bounded by the explicit feasible witness
        const double witness = feasible_upper_bound_multi(ds, 2, {+1, -1});
        if (sol.objective > witness + 1e-9) ok = false;
        // independent brute force over every partition via the PG route
        double best_pg = std::numeric_limits<double>::infinity();
        for (int code = 0; code < (1 << n); ++code) {
            std::vector<int> bits(n);
            for (int i = 0; i < n; ++i) bits[i] = (code >> (n - 1 - i)) & 1;
            RestrictedResult r = restricted_program_pg(ds, bits);
            if (!r.ok) continue;
            bool orig = true;
            for (int i = 0; i < n; ++i) {
                const double h = std::max(r.Xw_plus(i), 0.0) - std::max(r.Xw_minus(i), 0.0);
                if (std::abs(h - ds.y(i)) > 1e-6 * (1.0 + std::abs(ds.y(i)))) orig = false;
            }
            if (orig) best_pg = std::min(best_pg, r.objective);
        }
        if (best_pg < sol.objective - 1e-6 * (1.0 + sol.objective)) ok = false;
        if (ok)
            ++pass;
        else if (why.tellp() < 200)
            why << " inst " << inst << ": obj " << sol.objective << " bf " << best_pg;
    }
    detail = std::to_string(pass) + "/50 instances" + why.str();
    return pass == 50;
}

// ---- criterion 6: two-ReLU dynamics --------------------------------------
bool crit6(std::string& detail) {
    ExperimentConfig cfg = scenario_config(Scenario::TwoGoodInit, "crit6");
    ArtifactManifest m = run_experiment(cfg);
    std::ostringstream why;
    int ledger_pass = 0, fit_pass = 0, dist_pass = 0;
    for (const auto& r : m.results) {
        if (!r.error.empty()) {
            why << " seed " << r.seed << ": " << r.error;
            continue;
        }
        if (!mechanism_ok(r, why)) return false;
        if (r.metrics.at("ledger_all_from_1") == 1.0) ++ledger_pass;
        if (r.metrics.at("verify_pass") == 1.0) ++fit_pass;
        if (r.metrics.at("plus_distance") > 1e-12 && r.metrics.at("minus_distance") > 1e-12)
            ++dist_pass;
    }
    std::ostringstream d;
    d << "ledger " << ledger_pass << "/20 (>= 19), fits " << fit_pass << "/20, distances "
      << dist_pass << "/20" << why.str();
    detail = d.str();
    return ledger_pass >= 19 && fit_pass == 20 && dist_pass == 20;
}

// ---- criterion 7: multi-neuron disjoint regime ---------------------------
bool crit7(std::string& detail) {
    ExperimentConfig cfg = scenario_config(Scenario::MultiDisjoint, "crit7");
    ArtifactManifest m = run_experiment(cfg);
    std::ostringstream why;
    int ledger_pass = 0, fit_pass = 0;
    for (const auto& r : m.results) {
        if (!r.error.empty()) {
            why << " seed " << r.seed << ": " << r.error;
            continue;
        }
        if (!mechanism_ok(r, why)) return false;
        if (r.metrics.at("ledger_all_from_1") == 1.0) ++ledger_pass;
        if (r.metrics.at("verify_pass") == 1.0) ++fit_pass;
    }
    std::ostringstream d;
    d << "ledger " << ledger_pass << "/10 (>= 9), interpolation " << fit_pass << "/10"
      << why.str();
    detail = d.str();
    return ledger_pass >= 9 && fit_pass == 10;
}

// ---- criterion 8: failure scenarios --------------------------------------
bool crit8(std::string& detail) {
    ExperimentConfig rnd = scenario_config(Scenario::TwoRandomInit, "crit8_random");
    ArtifactManifest mr = run_experiment(rnd);
    int stuck = 0;
    for (const auto& r : mr.results)
        if (r.error.empty() && r.metrics.at("final_risk") > 1e-3 &&
            r.metrics.at("ledger_fail_at_1") == 1.0)
            ++stuck;

    ExperimentConfig shared = scenario_config(Scenario::MultiSharedSignFail, "crit8_shared");
    ArtifactManifest ms = run_experiment(shared);
    int violated = 0;
    for (const auto& r : ms.results)
        if (r.error.empty() && r.metrics.at("cond_a_violated") == 1.0) ++violated;

    std::ostringstream d;
    d << "random-init stuck runs " << stuck << "/50 (need >= 1), shared-sign condition-(a) "
      << violated << "/20 (need >= 10)";
    detail = d.str();
    return stuck >= 1 && violated >= 10;
}

// ---- criterion 9: mechanism invariants -----------------------------------
bool fd_gradient_ok(const ModelState& state, const Dataset& ds, std::ostringstream& why) {
    Mat beta = preactivations(state, ds.X);
    double row_norm = 0;
    for (int i = 0; i < ds.n(); ++i) row_norm = std::max(row_norm, ds.X.row(i).norm());
    double wmax = 0;
    for (const auto& w : state.weights) wmax = std::max(wmax, w.cwiseAbs().maxCoeff());
    const double h = 1e-6 * (1.0 + wmax);
    if (beta.cwiseAbs().minCoeff() <= 10 * h * row_norm) {
        why << " (state too close to a kink; skipped coords)";
        return true;  // the contract only applies away from kinks
    }
    auto grad = gradient(state, ds);
    double gmax = 0;
    for (const auto& g : grad) gmax = std::max(gmax, g.cwiseAbs().maxCoeff());
    std::mt19937_64 rng(99);
    for (int k = 0; k < state.m(); ++k) {
        for (int trial = 0; trial < 20; ++trial) {
            const int j = static_cast<int>(rng() % ds.d());
            ModelState p = state, q = state;
            p.weights[k](j) += h;
            q.weights[k](j) -= h;
            const double fd = (empirical_risk(p, ds) - empirical_risk(q, ds)) / (2 * h);
            const double g = grad[k](j);
            const double denom = std::max(std::abs(g), 1e-10 * (1.0 + gmax));
            if (std::abs(fd - g) / denom > 1e-4) {
                why << " neuron " << k << " coord " << j << ": fd " << fd << " vs " << g;
                return false;
            }
        }
    }
    return true;
}

bool crit9(std::string& detail) {
    std::ostringstream why;
    bool ok = true;
    for (std::uint64_t seed : {0ull, 1ull}) {
        Dataset ds = [&] {
            Spectrum spec = make_spectrum(SpectrumKind::Isotropic, 2000);
            LabelSpec ls;
            ls.y_min = 0.1;
            ls.y_max = 1.0;
            ls.frac_positive = static_cast<double>(derive_n_pos(seed, 10)) / 10.0;
            ls.require_both_signs = true;
            return sample_dataset(spec, 10, ls, ZDist::Gaussian, seed);
        }();
        Constants c = Constants::from_cg(eigen_bounds(ds).cg_hat);
        const double eta = recommend_step_size(ds, c).eta;
        Vec eps = Vec::Constant(10, ds.y_min_bound / (4.0 * c.C_alpha));
        ModelState m0 = init_two(ds, eps, eps, c);
        StopRule stop;
        stop.max_iters = 400;
        Trajectory traj = run(m0, ds, eta, stop);

        // primal-dual consistency and frozen-dual exactness
        for (const auto& s : traj.snapshots)
            if (s.pd_residual > 1e-8) {
                why << " seed " << seed << ": pd residual " << s.pd_residual;
                ok = false;
            }
        if (!dual_update_check(traj, ds).empty()) {
            why << " seed " << seed << ": dual violations";
            ok = false;
        }
        auto t0 = detect_activation_freeze(traj);
        if (t0)
            for (size_t si = 1; si < traj.snapshots.size(); ++si)
                if (traj.snapshots[si].t > *t0 &&
                    traj.snapshots[si].risk > traj.snapshots[si - 1].risk + 1e-12) {
                    why << " seed " << seed << ": risk increased after t0";
                    ok = false;
                }

        // finite differences at an intermediate state away from the kinks
        ModelState mid = step(step(m0, ds, eta), ds, eta);
        if (!fd_gradient_ok(mid, ds, why)) ok = false;

        // positive homogeneity: scaling (y, eps) by 2 preserves every mask
        Dataset ds2 = ds;
        ds2.y *= 2.0;
        ds2.y_min_bound *= 2.0;
        ds2.y_max_bound *= 2.0;
        ModelState m0b = init_two(ds2, Vec(2.0 * eps), Vec(2.0 * eps), c);
        Trajectory traj2 = run(m0b, ds2, eta, stop);
        if (traj2.snapshots.size() != traj.snapshots.size()) {
            why << " seed " << seed << ": paired run lengths differ";
            ok = false;
        } else {
            for (size_t si = 0; si < traj.snapshots.size(); ++si)
                if ((traj.snapshots[si].mask != traj2.snapshots[si].mask).any()) {
                    why << " seed " << seed << ": mask mismatch at t "
                        << traj.snapshots[si].t;
                    ok = false;
                    break;
                }
        }
    }
    detail = ok ? "pd <= 1e-8, frozen duals exact, risk monotone, FD <= 1e-4, masks scale-invariant"
                : why.str();
    return ok;
}

// ---- criterion 10: concentration diagnostics -----------------------------
bool crit10(std::string& detail) {
    ExperimentConfig cfg = scenario_config(Scenario::GramConc, "crit10");
    ArtifactManifest m = run_experiment(cfg);
    int dev_pass = 0, cg_pass = 0;
    double worst_ratio = 0, worst_cg = 0;
    for (const auto& r : m.results) {
        if (!r.error.empty()) continue;
        const double ratio = r.metrics.at("gram_ratio");
        const double cg = r.metrics.at("cg_hat");
        worst_ratio = std::max(worst_ratio, ratio);
        worst_cg = std::max(worst_cg, cg);
        if (ratio <= 5.0) ++dev_pass;
        if (cg <= 1.3) ++cg_pass;
    }
    std::ostringstream d;
    d << "deviation ratio <= 5 on " << dev_pass << "/20 (worst " << worst_ratio
      << "), cg_hat <= 1.3 on " << cg_pass << "/20 (worst " << worst_cg << ")";
    detail = d.str();
    return dev_pass == 20 && cg_pass == 20;
}

struct Criterion {
    int id;
    const char* name;
    std::function<bool(std::string&)> fn;
};

}  // namespace

int main(int argc, char** argv) {
    g_root = (fs::temp_directory_path() / "relubias_acceptance").string();

    int only = 0;
    for (int a = 1; a < argc; ++a) {
        if (std::strcmp(argv[a], "--criterion") == 0 && a + 1 < argc) only = std::atoi(argv[++a]);
        if (std::strncmp(argv[a], "--out=", 6) == 0) g_root = argv[a] + 6;
    }

    const Criterion table[] = {
        {1, "single-ReLU implicit bias (freeze at t0=1, fit, projection)", crit1},
        {2, "distance scaling sweep (slope, r^2, envelope)", crit2},
        {3, "all-positive degenerate case (w_inf == w*)", crit3},
        {4, "min-norm oracle equivalence (enumeration vs projected gradient)", crit4},
        {5, "two-ReLU restricted program (feasibility, witness, brute force)", crit5},
        {6, "two-ReLU decoupled dynamics (eight conditions, fits, distances)", crit6},
        {7, "multi-neuron disjoint regime (five conditions, interpolation)", crit7},
        {8, "failure scenarios (random init, shared signs)", crit8},
        {9, "mechanism invariants (primal-dual, frozen duals, FD, homogeneity)", crit9},
        {10, "Gram concentration diagnostics", crit10},
    };

    int failures = 0;
    for (const auto& c : table) {
        if (only != 0 && c.id != only) continue;
        std::string detail;
        bool ok = false;
        try {
            ok = c.fn(detail);
        } catch (const std::exception& e) {
            detail = std::string("exception: ") + e.what();
        }
        std::printf("[%s] criterion %d: %s - %s\n", ok ? "PASS" : "FAIL", c.id, c.name,
                    detail.c_str());
        std::fflush(stdout);
        if (!ok) ++failures;
    }
    return failures == 0 ? 0 : 1;
}
