#pragma once

#include <optional>
#include <string>
#include <vector>

#include "relu_model.hpp"

namespace relubias {

enum class InitKind { SingleEps, TwoEps, MultiDisjoint, Random };

struct InitSpec {
    InitKind kind = InitKind::SingleEps;
    std::vector<Vec> eps;        // per-neuron epsilon vectors (positive entries)
    std::vector<int> assignment; // multi_disjoint: a_i in [0, m)
    std::vector<int> signs;      // multi_disjoint / random
    double cg_hat = 0.0;         // multi_disjoint: scales A_k y
    double scale = 0.0;          // random: per-entry std deviation
    std::uint64_t seed = 0;      // random
    int m = 1;                   // random
};

struct StopRule {
    long max_iters = -1;      // <0: 10 * ceil(1 / (eta * mu_n))
    double grad_tol = -1.0;   // <0: 1e-10 * ||y||
    std::optional<double> risk_tol;
    int log_stride = 1;       // freeze detection and dual checks require 1
    bool log_weights = false; // keep per-step weights (tests)
};

struct Snapshot {
    long t = 0;
    Mat beta;        // m x n
    Mat alpha;       // m x n
    MaskMat mask;    // m x n
    double risk = 0.0;
    double pd_residual = 0.0;  // max_k ||beta_k - G alpha_k|| / (1 + ||beta_k||)
    Mat weights;               // m x d, only when log_weights
};

struct Trajectory {
    std::vector<Snapshot> snapshots;
    ModelState final_state;
    double eta = 0.0;
    int log_stride = 1;
    std::string stop_reason;  // converged | max_iters | risk_tol | diverged
    std::vector<int> signs;

    long iters() const { return snapshots.empty() ? 0 : snapshots.back().t; }
    double final_risk() const { return snapshots.empty() ? 0.0 : snapshots.back().risk; }
};

ModelState init_single(const Dataset& ds, const Vec& eps,
                       const Constants& c = Constants::defaults());
ModelState init_two(const Dataset& ds, const Vec& eps_plus, const Vec& eps_minus,
                    const Constants& c = Constants::defaults());
ModelState init_multi_disjoint(const Dataset& ds, const std::vector<int>& assignment,
                               const std::vector<int>& signs, double cg_hat,
                               const std::vector<Vec>& eps);
ModelState init_random(const Dataset& ds, int m, const std::vector<int>& signs, double scale,
                       std::uint64_t seed);

ModelState apply_init(const Dataset& ds, const InitSpec& spec,
                      const Constants& c = Constants::defaults());

struct StepSizeRecommendation {
    double eta = 0.0;      // eta_hi / 2
    double eta_hi = 0.0;   // 1 / mu_1(XX^T)
    double eta_lo = 0.0;   // eta_hi / C
    bool in_theorem_window = false;  // [1/(C*C_g*l1), 1/(C_g*l1)]
};

StepSizeRecommendation recommend_step_size(const Dataset& ds, const Constants& c);

ModelState step(const ModelState& state, const Dataset& ds, double eta);

Trajectory run(const ModelState& init, const Dataset& ds, double eta, const StopRule& stop);

// beta_k = X w_k; alpha_k solves (XX^T) alpha_k = beta_k.
std::pair<Mat, Mat> primal_dual(const ModelState& state, const Dataset& ds);

// Smallest t0 such that every later logged mask equals the mask at t0;
// nullopt when the last two masks differ.
std::optional<long> detect_activation_freeze(const Trajectory& traj);

struct DualUpdateViolation {
    long t = 0;   // update from t to t+1
    int neuron = 0;
    int example = 0;
    double error = 0.0;  // |actual - expected| (exact-zero expected when frozen)
};

// Verifies alpha_k^{t+1} - alpha_k^t == -eta * s_k * D(beta_k^t) (h^t - y).
// Active coordinates are checked to 1e-8; frozen coordinates must match exactly.
std::vector<DualUpdateViolation> dual_update_check(const Trajectory& traj, const Dataset& ds,
                                                   double tol = 1e-8);

}  // namespace relubias
