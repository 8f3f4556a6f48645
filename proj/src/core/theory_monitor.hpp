#pragma once

#include <map>
#include <string>
#include <vector>

#include "gd_engine.hpp"
#include "min_norm.hpp"

namespace relubias {

struct GramReport {
    double deviation = 0.0;  // || XX'/||lambda||_1 - I ||_op
    double envelope = 0.0;   // C * max(sqrt(n/d2), n/dinf)
    double ratio = 0.0;      // deviation / max(sqrt(n/d2), n/dinf)
};

GramReport gram_deviation(const Dataset& ds, const Constants& c);

struct EigenReport {
    double mu_n = 0.0;
    double mu_1 = 0.0;
    double cg_hat = 0.0;  // max(mu_1/||lambda||_1, ||lambda||_1/mu_n)
};

EigenReport eigen_bounds(const Dataset& ds);

// Per-iteration booleans plus numeric margins (margin >= 0 means the
// condition holds) for the single / two / multi neuron condition lemmas.
struct ConditionLedger {
    std::vector<std::string> names;
    std::vector<long> ts;
    std::vector<std::vector<char>> holds;     // [t][condition]
    std::vector<std::vector<double>> margins; // [t][condition]

    bool all_hold_at(size_t ti) const {
        for (char h : holds[ti])
            if (!h) return false;
        return true;
    }
    // True when every condition holds at every logged t >= t_from.
    bool all_hold_from(long t_from) const;
    // First logged t >= t_from where `name` fails; -1 if it never fails.
    long first_failure(const std::string& name, long t_from = 0) const;
};

ConditionLedger check_conditions_single(const Trajectory& traj, const Dataset& ds,
                                        const Constants& c);
ConditionLedger check_conditions_two(const Trajectory& traj, const Dataset& ds,
                                     const Constants& c);
ConditionLedger check_conditions_multi(const Trajectory& traj, const Dataset& ds,
                                       const std::vector<int>& assignment, const Constants& c);

// Implicit-bias verification: closed-form first-iterate, projection onto the
// interpolation constraints, and the final-state comparisons.
struct VerifyCheck {
    double value = 0.0;
    double threshold = 0.0;
    bool pass = false;
};

struct VerifyReport {
    std::map<std::string, VerifyCheck> checks;
    double gram_condition = 0.0;  // condition number of XX^T
    bool pass = false;

    void add(const std::string& name, double value, double threshold, bool less_or_equal = true);
};

VerifyReport verify_implicit_bias_single(const Trajectory& traj, const Dataset& ds, const Vec& eps,
                                         double tol);
VerifyReport verify_implicit_bias_two(const Trajectory& traj, const Dataset& ds,
                                      const Vec& eps_plus, const Vec& eps_minus, double tol);
VerifyReport verify_implicit_bias_multi(const Trajectory& traj, const Dataset& ds,
                                        const std::vector<int>& assignment, const InitSpec& init,
                                        double tol);

struct BoundReport {
    double distance = 0.0;
    double lower_bound = 0.0;
    double upper_bound = 0.0;
    bool within = false;
    bool bounds_consistent = true;  // lower <= upper
    Constants constants_used;
    int n = 0, n_other = 0, d = 0;  // n_other: n_minus (plus-neuron) or n_plus (minus-neuron)
    double lambda_l1 = 0.0, y_min = 0.0, y_max = 0.0;
};

BoundReport bound_report_single(const Vec& w_inf, const Dataset& ds, const Constants& c,
                                const MinNormSolution& star);

struct BoundReportPair {
    BoundReport plus;   // distance of the positive neuron to w_plus*
    BoundReport minus;  // distance of the negative neuron to w_minus*
};

BoundReportPair bound_report_two(const Vec& w_plus_inf, const Vec& w_minus_inf, const Dataset& ds,
                                 const Constants& c, const MinNormSolution& star);

struct SlopeFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
};

// Least-squares fit of log(error) against log(d).
SlopeFit slope_estimate(const std::vector<std::pair<double, double>>& points);

}  // namespace relubias
