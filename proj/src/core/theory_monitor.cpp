#include "theory_monitor.hpp"

#include <cmath>

namespace relubias {

GramReport gram_deviation(const Dataset& ds, const Constants& c) {
    const double l1 = ds.spectrum.l1();
    Mat dev = ds.gram->G / l1 - Mat::Identity(ds.n(), ds.n());
    Eigen::SelfAdjointEigenSolver<Mat> es(dev);
    GramReport r;
    r.deviation = es.eigenvalues().cwiseAbs().maxCoeff();
    const double scale =
        std::max(std::sqrt(ds.n() / ds.spectrum.d2()), ds.n() / ds.spectrum.dinf());
    r.envelope = c.C * scale;
    r.ratio = r.deviation / scale;
    return r;
}

EigenReport eigen_bounds(const Dataset& ds) {
    EigenReport r;
    r.mu_n = ds.gram->mu_n;
    r.mu_1 = ds.gram->mu_1;
    const double l1 = ds.spectrum.l1();
    r.cg_hat = std::max(r.mu_1 / l1, l1 / r.mu_n);
    return r;
}

bool ConditionLedger::all_hold_from(long t_from) const {
    for (size_t ti = 0; ti < ts.size(); ++ti)
        if (ts[ti] >= t_from && !all_hold_at(ti)) return false;
    return true;
}

long ConditionLedger::first_failure(const std::string& name, long t_from) const {
    size_t ci = 0;
    while (ci < names.size() && names[ci] != name) ++ci;
    if (ci == names.size()) throw InputError("ConditionLedger: unknown condition " + name);
    for (size_t ti = 0; ti < ts.size(); ++ti)
        if (ts[ti] >= t_from && !holds[ti][ci]) return ts[ti];
    return -1;
}

namespace {

struct LedgerBuilder {
    ConditionLedger ledger;
    std::vector<char> row_h;
    std::vector<double> row_m;

    explicit LedgerBuilder(std::vector<std::string> names) { ledger.names = std::move(names); }
    void begin_row(long t) {
        ledger.ts.push_back(t);
        row_h.clear();
        row_m.clear();
    }
    // margin >= 0 counts as holding
    void set(double margin) {
        row_h.push_back(margin >= 0.0 ? 1 : 0);
        row_m.push_back(margin);
    }
    // strict variant: margin must be > 0
    void set_strict(double margin) {
        row_h.push_back(margin > 0.0 ? 1 : 0);
        row_m.push_back(margin);
    }
    void end_row() {
        ledger.holds.push_back(row_h);
        ledger.margins.push_back(row_m);
    }
};

// Dual sandwich margin: lo <= a <= hi, margin = min(a - lo, hi - a).
double sandwich(double a, double lo, double hi) { return std::min(a - lo, hi - a); }

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

ConditionLedger check_conditions_single(const Trajectory& traj, const Dataset& ds,
                                        const Constants& c) {
    if (traj.signs.size() != 1) throw InputError("check_conditions_single: model arity != 1");
    const int n = ds.n();
    const int np = ds.n_pos;
    const double l1 = ds.spectrum.l1();
    const double ymin = ds.y_min_bound, ymax = ds.y_max_bound;
    const double alpha_lo = -3.0 * ymax / (c.C_g * l1);
    const double alpha_hi = -ymin / (c.C_alpha * l1);
    const double alpha_norm_cap = c.C_alpha * std::sqrt(static_cast<double>(n)) * ymax / l1;

    LedgerBuilder lb({"a_beta_pos", "b_alpha_sandwich", "c_beta_residual", "d_alpha_norm",
                      "e_beta_nonpos", "f_sigma_structure"});
    for (const auto& s : traj.snapshots) {
        const Vec beta = s.beta.row(0).transpose();
        const Vec alpha = s.alpha.row(0).transpose();
        lb.begin_row(s.t);

        double a = kInf;
        for (int i = 0; i < np; ++i) a = std::min(a, beta(i));
        lb.set_strict(np > 0 ? a : kInf);

        double b = kInf;
        for (int j = np; j < n; ++j) b = std::min(b, sandwich(alpha(j), alpha_lo, alpha_hi));
        lb.set(b);

        lb.set(c.C_y * ds.y_pos().norm() - (beta.head(np) - ds.y_pos()).norm());
        lb.set(alpha_norm_cap - alpha.norm());

        double e = kInf;
        for (int j = np; j < n; ++j) e = std::min(e, -beta(j));
        lb.set(e);

        // sigma(beta) == [beta_+; 0] <=> beta_+ >= 0 and beta_- <= 0
        double f = kInf;
        for (int i = 0; i < np; ++i) f = std::min(f, beta(i));
        for (int j = np; j < n; ++j) f = std::min(f, -beta(j));
        lb.set(f);
        lb.end_row();
    }
    return lb.ledger;
}

ConditionLedger check_conditions_two(const Trajectory& traj, const Dataset& ds,
                                     const Constants& c) {
    if (traj.signs.size() != 2 || traj.signs[0] != 1 || traj.signs[1] != -1)
        throw InputError("check_conditions_two: expects signs (+1, -1)");
    const int n = ds.n();
    const int np = ds.n_pos;
    const double l1 = ds.spectrum.l1();
    const double ymin = ds.y_min_bound, ymax = ds.y_max_bound;
    const double alpha_lo = -3.0 * ymax / (c.C_g * l1);
    const double alpha_hi = -ymin / (c.C_alpha * l1);
    const double alpha_norm_cap = c.C_alpha * std::sqrt(static_cast<double>(n)) * ymax / l1;

    LedgerBuilder lb({"a_beta_plus_pos", "b_beta_minus_pos", "c_alpha_plus_sandwich",
                      "d_alpha_minus_sandwich", "e_beta_residuals", "f_alpha_norms",
                      "g_beta_plus_nonpos", "h_beta_minus_nonpos"});
    for (const auto& s : traj.snapshots) {
        const Vec bp = s.beta.row(0).transpose();
        const Vec bm = s.beta.row(1).transpose();
        const Vec ap = s.alpha.row(0).transpose();
        const Vec am = s.alpha.row(1).transpose();
        lb.begin_row(s.t);

        double a = kInf;
        for (int i = 0; i < np; ++i) a = std::min(a, bp(i));
        lb.set_strict(np > 0 ? a : kInf);

        double b = kInf;
        for (int j = np; j < n; ++j) b = std::min(b, bm(j));
        lb.set_strict(np < n ? b : kInf);

        double cc = kInf;
        for (int j = np; j < n; ++j) cc = std::min(cc, sandwich(ap(j), alpha_lo, alpha_hi));
        lb.set(cc);

        double dd = kInf;
        for (int i = 0; i < np; ++i) dd = std::min(dd, sandwich(am(i), alpha_lo, alpha_hi));
        lb.set(dd);

        const double res_p = c.C_y * ds.y_pos().norm() - (bp.head(np) - ds.y_pos()).norm();
        const double res_m = c.C_y * ds.y_neg().norm() - (bm.tail(n - np) + ds.y_neg()).norm();
        lb.set(std::min(res_p, res_m));

        lb.set(std::min(alpha_norm_cap - ap.norm(), alpha_norm_cap - am.norm()));

        double g = kInf;
        for (int j = np; j < n; ++j) g = std::min(g, -bp(j));
        lb.set(g);

        double h = kInf;
        for (int i = 0; i < np; ++i) h = std::min(h, -bm(i));
        lb.set(h);
        lb.end_row();
    }
    return lb.ledger;
}

ConditionLedger check_conditions_multi(const Trajectory& traj, const Dataset& ds,
                                       const std::vector<int>& assignment, const Constants& c) {
    const int n = ds.n();
    const int m = static_cast<int>(traj.signs.size());
    if (static_cast<int>(assignment.size()) != n)
        throw InputError("check_conditions_multi: assignment length != n");
    const double l1 = ds.spectrum.l1();
    const double ymin = ds.y_min_bound, ymax = ds.y_max_bound;
    const double alpha_lo = -3.0 * ymax / (c.C_g * l1);
    const double alpha_hi = -ymin / (c.C_alpha * l1);
    const double alpha_norm_cap = c.C_alpha * std::sqrt(static_cast<double>(n)) * ymax / l1;

    LedgerBuilder lb({"a_assigned_beta_pos", "b_off_alpha_sandwich", "c_subset_residuals",
                      "d_alpha_norms", "e_off_beta_nonpos"});
    for (const auto& s : traj.snapshots) {
        lb.begin_row(s.t);

        double a = kInf;
        for (int i = 0; i < n; ++i) a = std::min(a, s.beta(assignment[i], i));
        lb.set_strict(a);

        double b = kInf;
        for (int k = 0; k < m; ++k)
            for (int j = 0; j < n; ++j)
                if (assignment[j] != k) b = std::min(b, sandwich(s.alpha(k, j), alpha_lo, alpha_hi));
        lb.set(b);

        double cm = kInf;
        for (int k = 0; k < m; ++k) {
            double res_sq = 0.0, ynorm_sq = 0.0;
            for (int i = 0; i < n; ++i) {
                if (assignment[i] != k) continue;
                const double diff = s.beta(k, i) - traj.signs[k] * ds.y(i);
                res_sq += diff * diff;
                ynorm_sq += ds.y(i) * ds.y(i);
            }
            cm = std::min(cm, c.C_y * std::sqrt(ynorm_sq) - std::sqrt(res_sq));
        }
        lb.set(cm);

        double dm = kInf;
        for (int k = 0; k < m; ++k) dm = std::min(dm, alpha_norm_cap - s.alpha.row(k).norm());
        lb.set(dm);

        double e = kInf;
        for (int k = 0; k < m; ++k)
            for (int j = 0; j < n; ++j)
                if (assignment[j] != k) e = std::min(e, -s.beta(k, j));
        lb.set(e);
        lb.end_row();
    }
    return lb.ledger;
}

void VerifyReport::add(const std::string& name, double value, double threshold,
                       bool less_or_equal) {
    VerifyCheck ck;
    ck.value = value;
    ck.threshold = threshold;
    ck.pass = less_or_equal ? value <= threshold : value >= threshold;
    checks[name] = ck;
    pass = true;
    for (const auto& [_, c] : checks) pass = pass && c.pass;
}

namespace {

// Euclidean projection of w0 onto {w : A w = b}; empty A returns w0.
Vec project_affine(const Vec& w0, const Mat& A, const Vec& b) {
    if (A.rows() == 0) return w0;
    Mat G = A * A.transpose();
    Eigen::LDLT<Mat> ldlt(G);
    if (ldlt.info() != Eigen::Success) throw NumericError("projection: rank-deficient constraints");
    return w0 + A.transpose() * ldlt.solve(b - A * w0);
}

Vec final_weight(const Trajectory& traj, int k) { return traj.final_state.weights[k]; }

}  // namespace

VerifyReport verify_implicit_bias_single(const Trajectory& traj, const Dataset& ds, const Vec& eps,
                                         double tol) {
    if (traj.signs.size() != 1) throw InputError("verify_implicit_bias_single: model arity != 1");
    const double eta = traj.eta;
    VerifyReport rep;
    rep.gram_condition = ds.gram->cond();

    // w1 = eta X' (y - eps + (1/eta) (XX')^{-1} eps)
    Vec inner = ds.y - eps + ds.gram->solve(eps) / eta;
    Vec w1 = eta * (ds.X.transpose() * inner);
    Vec p = project_affine(w1, ds.X_pos(), ds.y_pos());

    const Vec w_final = final_weight(traj, 0);
    rep.add("dist_to_projection", (w_final - p).norm(), tol);
    rep.add("fit_residual", (ds.X_pos() * w_final - ds.y_pos()).norm(), tol * ds.y_pos().norm());
    const double neg_max =
        ds.n_neg() > 0 ? (ds.X_neg() * w_final).maxCoeff() : 0.0;
    rep.add("neg_preactivation_max", neg_max, 1e-9);
    return rep;
}

VerifyReport verify_implicit_bias_two(const Trajectory& traj, const Dataset& ds,
                                      const Vec& eps_plus, const Vec& eps_minus, double tol) {
    if (traj.signs.size() != 2) throw InputError("verify_implicit_bias_two: model arity != 2");
    const double eta = traj.eta;
    VerifyReport rep;
    rep.gram_condition = ds.gram->cond();

    Vec inner_p = ds.y - eps_plus + eps_minus + ds.gram->solve(eps_plus) / eta;
    Vec inner_m = -ds.y + eps_plus - eps_minus + ds.gram->solve(eps_minus) / eta;
    Vec w1_p = eta * (ds.X.transpose() * inner_p);
    Vec w1_m = eta * (ds.X.transpose() * inner_m);

    Vec pp = project_affine(w1_p, ds.X_pos(), ds.y_pos());
    Vec pm = project_affine(w1_m, ds.X_neg(), -ds.y_neg());

    const Vec wp = final_weight(traj, 0);
    const Vec wm = final_weight(traj, 1);
    rep.add("plus_dist_to_projection", (wp - pp).norm(), tol);
    rep.add("minus_dist_to_projection", (wm - pm).norm(), tol);
    rep.add("plus_fit_residual", (ds.X_pos() * wp - ds.y_pos()).norm(),
            tol * std::max(ds.y_pos().norm(), 1e-300));
    rep.add("minus_fit_residual", (ds.X_neg() * wm + ds.y_neg()).norm(),
            tol * std::max(ds.y_neg().norm(), 1e-300));
    rep.add("plus_cross_preactivation_max",
            ds.n_neg() > 0 ? (ds.X_neg() * wp).maxCoeff() : 0.0, 1e-9);
    rep.add("minus_cross_preactivation_max",
            ds.n_pos > 0 ? (ds.X_pos() * wm).maxCoeff() : 0.0, 1e-9);
    return rep;
}

VerifyReport verify_implicit_bias_multi(const Trajectory& traj, const Dataset& ds,
                                        const std::vector<int>& assignment, const InitSpec& init,
                                        double tol) {
    const int n = ds.n();
    const int m = static_cast<int>(traj.signs.size());
    if (static_cast<int>(assignment.size()) != n)
        throw InputError("verify_implicit_bias_multi: assignment length != n");
    const double eta = traj.eta;
    VerifyReport rep;
    rep.gram_condition = ds.gram->cond();

    // reconstruct beta0 / h0 from the init spec (A_k y / cg + eps_k)
    ModelState w0 = apply_init(ds, init);
    Mat beta0 = preactivations(w0, ds.X);
    Vec h0 = predict_from_beta(beta0, traj.signs);

    for (int k = 0; k < m; ++k) {
        // w_k^(1) = eta X' (s_k D(beta_k^0)(y - h0) + (1/eta)(XX')^{-1} beta_k^0)
        Vec inner = ds.gram->solve(beta0.row(k).transpose()) / eta;
        for (int i = 0; i < n; ++i)
            if (beta0(k, i) > 0.0) inner(i) += traj.signs[k] * (ds.y(i) - h0(i));
        Vec w1 = eta * (ds.X.transpose() * inner);

        std::vector<int> Sk;
        for (int i = 0; i < n; ++i)
            if (assignment[i] == k) Sk.push_back(i);

        Mat Xs(Sk.size(), ds.d());
        Vec ys(Sk.size());
        for (size_t r = 0; r < Sk.size(); ++r) {
            Xs.row(static_cast<int>(r)) = ds.X.row(Sk[r]);
            ys(static_cast<int>(r)) = traj.signs[k] * ds.y(Sk[r]);  // signed targets
        }
        Vec p = project_affine(w1, Xs, ys);
        const Vec wk = final_weight(traj, k);
        const std::string tag = "k" + std::to_string(k);
        rep.add(tag + "_dist_to_projection", (wk - p).norm(), tol);
        rep.add(tag + "_fit_residual", Sk.empty() ? 0.0 : (Xs * wk - ys).norm(),
                tol * std::max(ys.size() ? ys.norm() : 0.0, 1e-300));
        double off_max = -std::numeric_limits<double>::infinity();
        bool any_off = false;
        for (int i = 0; i < n; ++i)
            if (assignment[i] != k) {
                any_off = true;
                off_max = std::max(off_max, ds.X.row(i).dot(wk));
            }
        rep.add(tag + "_off_preactivation_max", any_off ? off_max : 0.0, 1e-9);
    }
    return rep;
}

namespace {

BoundReport make_bound(const Vec& w_inf, const Vec& w_star, const Dataset& ds, const Constants& c,
                       int n_other) {
    BoundReport r;
    r.constants_used = c;
    r.n = ds.n();
    r.n_other = n_other;
    r.d = ds.d();
    r.lambda_l1 = ds.spectrum.l1();
    r.y_min = ds.y_min_bound;
    r.y_max = ds.y_max_bound;
    r.distance = (w_inf - w_star).norm();
    r.lower_bound = std::sqrt(n_other * r.y_min * r.y_min / (c.C * c.C_g * r.lambda_l1));
    r.upper_bound = std::sqrt(16.0 * n_other * r.y_max * r.y_max / (c.C_g * r.lambda_l1));
    r.bounds_consistent = r.lower_bound <= r.upper_bound;
    if (n_other == 0)
        r.within = r.distance <= 1e-6 * std::max(1.0, w_star.norm());
    else
        r.within = r.lower_bound <= r.distance && r.distance <= r.upper_bound;
    return r;
}

}  // namespace

BoundReport bound_report_single(const Vec& w_inf, const Dataset& ds, const Constants& c,
                                const MinNormSolution& star) {
    if (star.weights.size() != 1) throw InputError("bound_report_single: needs a single-ReLU w*");
    return make_bound(w_inf, star.weights[0], ds, c, ds.n_neg());
}

BoundReportPair bound_report_two(const Vec& w_plus_inf, const Vec& w_minus_inf, const Dataset& ds,
                                 const Constants& c, const MinNormSolution& star) {
    if (star.weights.size() != 2) throw InputError("bound_report_two: needs a 2-ReLU w* pair");
    BoundReportPair pair;
    pair.plus = make_bound(w_plus_inf, star.weights[0], ds, c, ds.n_neg());
    pair.minus = make_bound(w_minus_inf, star.weights[1], ds, c, ds.n_pos);
    return pair;
}

SlopeFit slope_estimate(const std::vector<std::pair<double, double>>& points) {
    if (points.size() < 4) throw InputError("slope_estimate: needs at least 4 points");
    const int n = static_cast<int>(points.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    for (const auto& [d, err] : points) {
        if (!(err > 0.0)) throw InputError("slope_estimate: errors must be positive");
        if (!(d > 0.0)) throw InputError("slope_estimate: d values must be positive");
        const double x = std::log(d), y = std::log(err);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        syy += y * y;
    }
    const double den = n * sxx - sx * sx;
    SlopeFit f;
    f.slope = (n * sxy - sx * sy) / den;
    f.intercept = (sy - f.slope * sx) / n;
    const double ss_tot = syy - sy * sy / n;
    double ss_res = 0.0;
    for (const auto& [d, err] : points) {
        const double r = std::log(err) - (f.intercept + f.slope * std::log(d));
        ss_res += r * r;
    }
    f.r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
    return f;
}

}  // namespace relubias
