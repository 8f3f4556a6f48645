#pragma once

#include <string>
#include <vector>

#include "spectral_data.hpp"

namespace relubias {

// Minimum-l2-norm interpolant with its KKT certificate.
// Stationarity convention: w = -sum_i mult_i x_i (inequality multipliers >= 0).
struct MinNormSolution {
    std::vector<Vec> weights;  // 1 (single) or 2 (pair w_plus, w_minus)
    double objective = 0.0;    // 1/2 * sum ||w||^2
    std::vector<int> subset;     // single: S = positives plus zeroed negatives (sorted)
    std::vector<int> partition;  // two: per-example bit, 0 -> S1/S3, 1 -> S2/S4
    Vec mult_eq;               // length n; single: lambda/mu combined, two: delta
    Vec mult_ineq;             // length n; two: mu (single: mu lives in mult_eq on subset)
    double kkt_residual = 0.0;
    std::string solver;        // "enumeration" | "projected_gradient"
    std::vector<std::vector<int>> tied_certificates;  // other subsets/partitions within tie tol
};

struct MinNormOptions {
    double feas_tol = 1e-9;
    double mult_tol = 1e-9;
    double obj_tie_tol = 1e-10;
    int cap_single = 16;  // max enumerable negatives
    int cap_two = 14;     // max enumerable examples
    bool pg_fallback = false;  // above cap_single: fall back to the PG route
    long pg_max_iter = 2'000'000;
    double pg_tol = 1e-11;
};

// Closed-form linear minimum-norm interpolator X_S' (X_S X_S')^{-1} y_S.
Vec linear_mni(const Mat& X_S, const Vec& y_S);

// Generic inner solver: minimize 1/2||w||^2 s.t. A_eq w = b_eq, G_ineq w <= 0,
// by active-set enumeration with KKT certification.
struct QPResult {
    Vec w;
    Vec eq_multipliers;    // lambda, per equality row
    Vec ineq_multipliers;  // mu >= 0, per inequality row (0 when inactive)
    std::vector<int> active;
    double objective = 0.0;
};
QPResult eq_ineq_qp(const Mat& A_eq, const Vec& b_eq, const Mat& G_ineq,
                    const MinNormOptions& opts = {});

MinNormSolution min_norm_single(const Dataset& ds, double tol = 1e-9,
                                const MinNormOptions& opts = {});

// Independent route: accelerated projected gradient on the dual.
MinNormSolution min_norm_single_pg(const Dataset& ds, double tol = 1e-9,
                                   const MinNormOptions& opts = {});

MinNormSolution min_norm_two(const Dataset& ds, double tol = 1e-9,
                             const MinNormOptions& opts = {});

// Solves one partition's restricted convex program by the projected-gradient
// route; used as the independent cross-check of the enumeration path.
// Returns false when the program is infeasible/unconverged.
struct RestrictedResult {
    bool ok = false;
    double objective = 0.0;
    Vec Xw_plus;   // predictions X w_plus
    Vec Xw_minus;  // predictions X w_minus
};
RestrictedResult restricted_program_pg(const Dataset& ds, const std::vector<int>& partition,
                                       const MinNormOptions& opts = {});

// 1/2 (||w~plus||^2 + ||w~minus||^2) for the explicit interpolating pair
// built from clipped labels; upper-bounds the m-neuron min-norm objective.
double feasible_upper_bound_multi(const Dataset& ds, int m, const std::vector<int>& signs);

// Independent certificate re-check; returns the worst violation magnitude.
double kkt_recheck(const MinNormSolution& sol, const Dataset& ds);

}  // namespace relubias
