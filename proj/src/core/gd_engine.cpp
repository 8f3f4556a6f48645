#include "gd_engine.hpp"

#include <cmath>
#include <iostream>
#include <random>

namespace relubias {

namespace {

Vec solve_gram(const Dataset& ds, const Vec& b) { return ds.gram->solve(b); }

void check_eps(const Vec& eps, int n, const char* who) {
    if (eps.size() != n) throw InputError(std::string(who) + ": eps length != n");
    for (int i = 0; i < n; ++i)
        if (!(eps(i) > 0.0)) throw InputError(std::string(who) + ": eps entries must be > 0");
}

void warn_eps_bound(const Vec& eps, double bound, const char* who) {
    if (eps.maxCoeff() > bound)
        std::cerr << "[relubias] warning: " << who << ": eps exceeds the recommended bound "
                  << bound << "\n";
}

}  // namespace

ModelState init_single(const Dataset& ds, const Vec& eps, const Constants& c) {
    check_eps(eps, ds.n(), "init_single");
    warn_eps_bound(eps, ds.y_min_bound / c.C_alpha, "init_single");
    ModelState m;
    m.weights.push_back(ds.X.transpose() * solve_gram(ds, eps));
    m.signs.push_back(+1);
    return m;
}

ModelState init_two(const Dataset& ds, const Vec& eps_plus, const Vec& eps_minus,
                    const Constants& c) {
    check_eps(eps_plus, ds.n(), "init_two");
    check_eps(eps_minus, ds.n(), "init_two");
    warn_eps_bound(eps_plus, ds.y_min_bound / (2.0 * c.C_alpha), "init_two");
    warn_eps_bound(eps_minus, ds.y_min_bound / (2.0 * c.C_alpha), "init_two");
    ModelState m;
    m.weights.push_back(ds.X.transpose() * solve_gram(ds, eps_plus));
    m.weights.push_back(ds.X.transpose() * solve_gram(ds, eps_minus));
    m.signs = {+1, -1};
    return m;
}

ModelState init_multi_disjoint(const Dataset& ds, const std::vector<int>& assignment,
                               const std::vector<int>& signs, double cg_hat,
                               const std::vector<Vec>& eps) {
    const int n = ds.n();
    const int m = static_cast<int>(signs.size());
    if (static_cast<int>(assignment.size()) != n)
        throw InputError("init_multi_disjoint: assignment length != n");
    if (static_cast<int>(eps.size()) != m) throw InputError("init_multi_disjoint: need one eps per neuron");
    if (!(cg_hat > 0.0)) throw InputError("init_multi_disjoint: cg_hat must be > 0");
    for (int i = 0; i < n; ++i) {
        int k = assignment[i];
        if (k < 0 || k >= m) throw InputError("init_multi_disjoint: assignment out of range");
        if (!(signs[k] * ds.y(i) > 0.0))
            throw InputError("init_multi_disjoint: assignment must satisfy s_{a_i} * y_i > 0");
    }
    ModelState state;
    state.signs = signs;
    for (int k = 0; k < m; ++k) {
        check_eps(eps[k], n, "init_multi_disjoint");
        // (A_k)_ii = 0 if a_i == k or s_k*y_i < 0, else -sign(y_i)
        Vec b(n);
        for (int i = 0; i < n; ++i) {
            double a_ii = (assignment[i] == k || signs[k] * ds.y(i) < 0.0)
                              ? 0.0
                              : -(ds.y(i) > 0 ? 1.0 : -1.0);
            b(i) = a_ii * ds.y(i) / cg_hat + eps[k](i);
        }
        state.weights.push_back(ds.X.transpose() * solve_gram(ds, b));
    }
    return state;
}

ModelState init_random(const Dataset& ds, int m, const std::vector<int>& signs, double scale,
                       std::uint64_t seed) {
    if (!(scale > 0.0)) throw InputError("init_random: scale must be > 0");
    if (static_cast<int>(signs.size()) != m) throw InputError("init_random: signs length != m");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, scale);
    ModelState state;
    state.signs = signs;
    for (int k = 0; k < m; ++k) {
        Vec w(ds.d());
        for (int j = 0; j < ds.d(); ++j) w(j) = g(rng);
        state.weights.push_back(std::move(w));
    }
    return state;
}

ModelState apply_init(const Dataset& ds, const InitSpec& spec, const Constants& c) {
    switch (spec.kind) {
        case InitKind::SingleEps:
            if (spec.eps.size() != 1) throw InputError("apply_init: single_eps needs one eps vector");
            return init_single(ds, spec.eps[0], c);
        case InitKind::TwoEps:
            if (spec.eps.size() != 2) throw InputError("apply_init: two_eps needs two eps vectors");
            return init_two(ds, spec.eps[0], spec.eps[1], c);
        case InitKind::MultiDisjoint:
            return init_multi_disjoint(ds, spec.assignment, spec.signs, spec.cg_hat, spec.eps);
        case InitKind::Random:
            return init_random(ds, spec.m, spec.signs, spec.scale, spec.seed);
    }
    throw InputError("apply_init: unknown init kind");
}

StepSizeRecommendation recommend_step_size(const Dataset& ds, const Constants& c) {
    StepSizeRecommendation r;
    const double mu1 = ds.gram->mu_1;
    if (!(mu1 > 0.0)) throw NumericError("recommend_step_size: zero spectral norm");
    r.eta_hi = 1.0 / mu1;
    r.eta_lo = r.eta_hi / c.C;
    r.eta = r.eta_hi / 2.0;
    const double l1 = ds.spectrum.l1();
    r.in_theorem_window =
        r.eta >= 1.0 / (c.C * c.C_g * l1) && r.eta <= 1.0 / (c.C_g * l1);
    return r;
}

namespace {

// One GD update given precomputed preactivations; shared by step() and run().
void step_in_place(ModelState& state, const Dataset& ds, double eta, const Mat& beta) {
    Vec residual = predict_from_beta(beta, state.signs) - ds.y;
    for (int k = 0; k < state.m(); ++k) {
        Vec masked = residual;
        for (int i = 0; i < ds.n(); ++i)
            if (!(beta(k, i) > 0.0)) masked(i) = 0.0;
        state.weights[k].noalias() -=
            eta * static_cast<double>(state.signs[k]) * (ds.X.transpose() * masked);
    }
    ++state.iter;
}

double grad_norm_from_beta(const ModelState& state, const Dataset& ds, const Mat& beta) {
    Vec residual = predict_from_beta(beta, state.signs) - ds.y;
    double sq = 0.0;
    for (int k = 0; k < state.m(); ++k) {
        Vec masked = residual;
        for (int i = 0; i < ds.n(); ++i)
            if (!(beta(k, i) > 0.0)) masked(i) = 0.0;
        sq += (ds.X.transpose() * masked).squaredNorm();
    }
    return std::sqrt(sq);
}

double pd_residual(const Dataset& ds, const Mat& beta, const Mat& alpha) {
    double worst = 0.0;
    for (int k = 0; k < beta.rows(); ++k) {
        Vec r = beta.row(k).transpose() - ds.gram->G * alpha.row(k).transpose();
        worst = std::max(worst, r.norm() / (1.0 + beta.row(k).norm()));
    }
    return worst;
}

}  // namespace

ModelState step(const ModelState& state, const Dataset& ds, double eta) {
    if (!(eta > 0.0)) throw InputError("step: eta must be > 0");
    ModelState next = state;
    Mat beta = preactivations(state, ds.X);
    step_in_place(next, ds, eta, beta);
    for (const auto& w : next.weights)
        if (!w.allFinite()) throw NumericError("step: non-finite weights (divergence)");
    return next;
}

Trajectory run(const ModelState& init, const Dataset& ds, double eta, const StopRule& stop) {
    if (!(eta > 0.0)) throw InputError("run: eta must be > 0");
    if (stop.log_stride < 1) throw InputError("run: log_stride must be >= 1");

    long max_iters = stop.max_iters;
    if (max_iters < 0)
        max_iters = 10 * static_cast<long>(std::ceil(1.0 / (eta * ds.gram->mu_n)));
    double grad_tol = stop.grad_tol;
    if (grad_tol < 0) grad_tol = 1e-10 * ds.y.norm();

    Trajectory traj;
    traj.eta = eta;
    traj.log_stride = stop.log_stride;
    traj.signs = init.signs;

    ModelState state = init;
    state.validate();
    const int m = state.m();
    const int n = ds.n();

    Mat beta = preactivations(state, ds.X);
    // alpha starts from the Gram solve and thereafter follows the dual update
    // recurrence, so frozen coordinates stay bitwise unchanged (Lemma-5 behavior).
    Mat alpha(m, n);
    for (int k = 0; k < m; ++k)
        alpha.row(k) = solve_gram(ds, beta.row(k).transpose()).transpose();

    auto log_snapshot = [&](long t) {
        Snapshot s;
        s.t = t;
        s.beta = beta;
        s.alpha = alpha;
        s.mask = mask_from_beta(beta);
        Vec r = predict_from_beta(beta, state.signs) - ds.y;
        s.risk = 0.5 * r.squaredNorm();
        s.pd_residual = pd_residual(ds, beta, alpha);
        if (stop.log_weights) {
            s.weights.resize(m, ds.d());
            for (int k = 0; k < m; ++k) s.weights.row(k) = state.weights[k].transpose();
        }
        traj.snapshots.push_back(std::move(s));
    };

    log_snapshot(0);
    if (!std::isfinite(traj.snapshots.back().risk))
        throw NumericError("run: non-finite risk at initialization");

    long t = 0;
    while (true) {
        if (grad_norm_from_beta(state, ds, beta) <= grad_tol) {
            traj.stop_reason = "converged";
            break;
        }
        if (stop.risk_tol && traj.snapshots.back().risk <= *stop.risk_tol) {
            traj.stop_reason = "risk_tol";
            break;
        }
        if (t >= max_iters) {
            traj.stop_reason = "max_iters";
            break;
        }

        // dual update uses the pre-step residual and mask
        Vec residual = predict_from_beta(beta, state.signs) - ds.y;
        for (int k = 0; k < m; ++k) {
            const double se = eta * static_cast<double>(state.signs[k]);
            for (int i = 0; i < n; ++i)
                if (beta(k, i) > 0.0) alpha(k, i) -= se * residual(i);
        }
        step_in_place(state, ds, eta, beta);
        ++t;
        beta = preactivations(state, ds.X);

        const bool finite = beta.allFinite();
        if (!finite) {
            traj.stop_reason = "diverged";
            break;
        }
        if (t % stop.log_stride == 0) log_snapshot(t);
        if (!std::isfinite(traj.snapshots.back().risk)) {
            traj.snapshots.pop_back();
            traj.stop_reason = "diverged";
            break;
        }
    }

    traj.final_state = state;
    return traj;
}

std::pair<Mat, Mat> primal_dual(const ModelState& state, const Dataset& ds) {
    if (ds.gram->cond() > 1e12)
        throw NumericError("primal_dual: XX^T condition estimate exceeds 1e12");
    Mat beta = preactivations(state, ds.X);
    Mat alpha(state.m(), ds.n());
    for (int k = 0; k < state.m(); ++k)
        alpha.row(k) = ds.gram->solve(beta.row(k).transpose()).transpose();
    return {beta, alpha};
}

std::optional<long> detect_activation_freeze(const Trajectory& traj) {
    if (traj.snapshots.empty()) throw InputError("detect_activation_freeze: empty trajectory");
    const auto& snaps = traj.snapshots;
    const size_t last = snaps.size() - 1;
    if (snaps.size() >= 2 && (snaps[last].mask != snaps[last - 1].mask).any()) return std::nullopt;
    size_t first = last;
    while (first > 0 && !(snaps[first - 1].mask != snaps[last].mask).any()) --first;
    return snaps[first].t;
}

std::vector<DualUpdateViolation> dual_update_check(const Trajectory& traj, const Dataset& ds,
                                                   double tol) {
    if (traj.log_stride != 1)
        throw InputError("dual_update_check: requires stride-1 logging");
    std::vector<DualUpdateViolation> out;
    const auto& snaps = traj.snapshots;
    for (size_t s = 0; s + 1 < snaps.size(); ++s) {
        const Snapshot& a = snaps[s];
        const Snapshot& b = snaps[s + 1];
        Vec residual = predict_from_beta(a.beta, traj.signs) - ds.y;
        for (int k = 0; k < a.beta.rows(); ++k) {
            const double se = traj.eta * static_cast<double>(traj.signs[k]);
            for (int i = 0; i < a.beta.cols(); ++i) {
                const double actual = b.alpha(k, i) - a.alpha(k, i);
                if (a.beta(k, i) > 0.0) {
                    const double expected = -se * residual(i);
                    const double err = std::abs(actual - expected);
                    if (err > tol * (1.0 + std::abs(expected)))
                        out.push_back({a.t, k, i, err});
                } else if (actual != 0.0) {
                    out.push_back({a.t, k, i, std::abs(actual)});
                }
            }
        }
    }
    return out;
}

}  // namespace relubias
