#include "min_norm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace relubias {

namespace {

// Enumerates subsets of {0..count-1} by increasing size, lexicographic within
// a size. f returns true to stop early.
template <class F>
bool for_each_subset(int count, F&& f) {
    std::vector<int> comb;
    for (int k = 0; k <= count; ++k) {
        comb.resize(k);
        std::iota(comb.begin(), comb.end(), 0);
        while (true) {
            if (f(comb)) return true;
            int i = k - 1;
            while (i >= 0 && comb[i] == count - k + i) --i;
            if (i < 0) break;
            ++comb[i];
            for (int j = i + 1; j < k; ++j) comb[j] = comb[j - 1] + 1;
        }
    }
    return false;
}

struct ActiveSetSolution {
    bool ok = false;
    Vec c;                   // coefficients over [eq rows; active ineq rows]
    std::vector<int> active; // indices into the inequality rows
    double objective = 0.0;
};

// minimize 1/2||v||^2 s.t. row_r . v = b_eq_r (r < n_eq), row_r . v <= 0 (rest),
// given only M = Gram matrix of the constraint rows. Returns the first
// KKT-certified active set (subsets enumerated by size; KKT suffices since the
// program is convex).
ActiveSetSolution solve_active_set(const Mat& M, const Vec& b_eq, int n_eq,
                                   const MinNormOptions& o) {
    const int total = static_cast<int>(M.rows());
    const int n_ineq = total - n_eq;
    ActiveSetSolution best;

    for_each_subset(n_ineq, [&](const std::vector<int>& active) {
        const int na = static_cast<int>(active.size());
        std::vector<int> idx(n_eq + na);
        std::iota(idx.begin(), idx.begin() + n_eq, 0);
        for (int a = 0; a < na; ++a) idx[n_eq + a] = n_eq + active[a];

        Mat Msub(idx.size(), idx.size());
        for (size_t r = 0; r < idx.size(); ++r)
            for (size_t s = 0; s < idx.size(); ++s) Msub(r, s) = M(idx[r], idx[s]);
        Vec rhs = Vec::Zero(idx.size());
        rhs.head(n_eq) = b_eq;

        Eigen::LDLT<Mat> ldlt(Msub);
        if (ldlt.info() != Eigen::Success) return false;
        Vec c = ldlt.solve(rhs);
        if ((Msub * c - rhs).norm() > 1e-8 * (1.0 + rhs.norm())) return false;  // singular system

        // multiplier signs: mu = -c on active rows
        for (int a = 0; a < na; ++a)
            if (c(n_eq + a) > o.mult_tol) return false;

        // primal feasibility of the inactive inequalities
        for (int j = 0; j < n_ineq; ++j) {
            if (std::binary_search(active.begin(), active.end(), j)) continue;
            double v = 0.0;
            for (size_t r = 0; r < idx.size(); ++r) v += M(n_eq + j, idx[r]) * c(r);
            if (v > o.feas_tol) return false;
        }

        best.ok = true;
        best.c = c;
        best.active = active;
        best.objective = 0.5 * c.dot(rhs);
        return true;
    });
    return best;
}

// Objective of the equality-only relaxation; lower-bounds every active set.
// Returns false when the equality system is singular.
bool relaxation_bound(const Mat& M, const Vec& b_eq, int n_eq, double& out) {
    Mat Msub = M.topLeftCorner(n_eq, n_eq);
    Eigen::LDLT<Mat> ldlt(Msub);
    if (ldlt.info() != Eigen::Success) return false;
    Vec c = ldlt.solve(b_eq);
    if ((Msub * c - b_eq).norm() > 1e-8 * (1.0 + b_eq.norm())) return false;
    out = 0.5 * c.dot(b_eq);
    return true;
}

struct DualPgResult {
    bool converged = false;
    Vec nu;        // multipliers; v = -N' nu
    Vec values;    // N v for every row (= -M nu)
    double objective = 0.0;
    long iters = 0;
};

// Accelerated projected gradient (FISTA with gradient restart) on the dual of
//   minimize 1/2||v||^2 s.t. N_eq v = b, N_ineq v <= 0,
// parameterized only by M = N N' (Gram of constraint rows).
DualPgResult dual_pg(const Mat& M, const Vec& b, int n_eq, double tol, long max_iter) {
    const int total = static_cast<int>(M.rows());
    Eigen::SelfAdjointEigenSolver<Mat> es(M);
    const double L = std::max(es.eigenvalues().maxCoeff(), 1e-300);
    const double s = 1.0 / L;
    Vec full_b = Vec::Zero(total);
    full_b.head(n_eq) = b;
    const double scale = 1.0 + b.cwiseAbs().maxCoeff();

    Vec nu = Vec::Zero(total);
    Vec yv = nu;
    double tau = 1.0;
    DualPgResult res;

    auto project = [&](Vec& v) {
        for (int j = n_eq; j < total; ++j) v(j) = std::max(v(j), 0.0);
    };

    for (long it = 1; it <= max_iter; ++it) {
        Vec grad = M * yv + full_b;  // gradient of the (negated) dual
        Vec nu_next = yv - s * grad;
        project(nu_next);

        if ((yv - nu_next).dot(nu_next - nu) > 0.0) {  // restart
            tau = 1.0;
            yv = nu_next;
        } else {
            double tau_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * tau * tau));
            yv = nu_next + ((tau - 1.0) / tau_next) * (nu_next - nu);
            tau = tau_next;
        }
        nu = nu_next;

        if (it % 64 == 0 || it == max_iter) {
            Vec values = -(M * nu);
            double eq_res = n_eq > 0 ? (values.head(n_eq) - b).cwiseAbs().maxCoeff() : 0.0;
            double ineq_max = total > n_eq ? values.tail(total - n_eq).maxCoeff() : 0.0;
            double comp = 0.0;
            for (int j = n_eq; j < total; ++j)
                comp = std::max(comp, std::abs(nu(j) * values(j)));
            if (eq_res <= tol * scale && ineq_max <= tol * scale && comp <= 10.0 * tol * scale) {
                res.converged = true;
                res.nu = nu;
                res.values = values;
                res.objective = 0.5 * nu.dot(M * nu);
                res.iters = it;
                return res;
            }
        }
    }
    res.nu = nu;
    res.values = -(M * nu);
    res.objective = 0.5 * nu.dot(M * nu);
    res.iters = max_iter;
    return res;
}

bool lex_less(const std::vector<int>& a, const std::vector<int>& b) {
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

// Rows of the stacked two-neuron system [w_plus; w_minus]: p*x_i on the plus
// block, q*x_i on the minus block.
struct PairRow {
    int i;
    double p, q;
};

void partition_rows(const Dataset& ds, const std::vector<int>& bits,
                    std::vector<PairRow>& eq, Vec& rhs, std::vector<PairRow>& ineq) {
    const int n = ds.n();
    eq.clear();
    ineq.clear();
    rhs.resize(n);
    for (int i = 0; i < n; ++i) {
        const bool pos = ds.y(i) > 0.0;
        if (pos && bits[i] == 0) {          // S1: w+.x = y, w-.x <= 0
            eq.push_back({i, 1.0, 0.0});
            ineq.push_back({i, 0.0, 1.0});
        } else if (pos) {                   // S2: (w+ - w-).x = y, -w-.x <= 0
            eq.push_back({i, 1.0, -1.0});
            ineq.push_back({i, 0.0, -1.0});
        } else if (bits[i] == 0) {          // S3: -w-.x = y, w+.x <= 0
            eq.push_back({i, 0.0, -1.0});
            ineq.push_back({i, 1.0, 0.0});
        } else {                            // S4: (w+ - w-).x = y, -w+.x <= 0
            eq.push_back({i, 1.0, -1.0});
            ineq.push_back({i, -1.0, 0.0});
        }
        rhs(i) = ds.y(i);
    }
}

Mat pair_gram(const Dataset& ds, const std::vector<PairRow>& rows) {
    const auto& G = ds.gram->G;
    const int r = static_cast<int>(rows.size());
    Mat M(r, r);
    for (int a = 0; a < r; ++a)
        for (int b = 0; b < r; ++b)
            M(a, b) = (rows[a].p * rows[b].p + rows[a].q * rows[b].q) * G(rows[a].i, rows[b].i);
    return M;
}

}  // namespace

Vec linear_mni(const Mat& X_S, const Vec& y_S) {
    if (X_S.rows() != y_S.size()) throw InputError("linear_mni: row/label mismatch");
    if (X_S.rows() == 0) return Vec::Zero(X_S.cols());
    Mat G = X_S * X_S.transpose();
    Eigen::LDLT<Mat> ldlt(G);
    if (ldlt.info() != Eigen::Success) throw NumericError("linear_mni: rank-deficient X_S");
    Vec c = ldlt.solve(y_S);
    if ((G * c - y_S).norm() > 1e-9 * (1.0 + y_S.norm()))
        throw NumericError("linear_mni: rank-deficient X_S");
    return X_S.transpose() * c;
}

QPResult eq_ineq_qp(const Mat& A_eq, const Vec& b_eq, const Mat& G_ineq, const MinNormOptions& o) {
    if (A_eq.rows() != b_eq.size()) throw InputError("eq_ineq_qp: A_eq/b_eq mismatch");
    if (G_ineq.rows() > 0 && G_ineq.cols() != A_eq.cols())
        throw InputError("eq_ineq_qp: column mismatch");
    const int n_eq = static_cast<int>(A_eq.rows());
    const int n_ineq = static_cast<int>(G_ineq.rows());
    Mat N(n_eq + n_ineq, A_eq.cols());
    N.topRows(n_eq) = A_eq;
    if (n_ineq > 0) N.bottomRows(n_ineq) = G_ineq;
    Mat M = N * N.transpose();

    ActiveSetSolution sol = solve_active_set(M, b_eq, n_eq, o);
    if (!sol.ok) throw NumericError("eq_ineq_qp: infeasible system; all active sets rejected");

    QPResult out;
    out.active = sol.active;
    out.objective = sol.objective;
    out.w = Vec::Zero(A_eq.cols());
    for (int r = 0; r < n_eq; ++r) out.w += sol.c(r) * A_eq.row(r).transpose();
    out.eq_multipliers = -sol.c.head(n_eq);
    out.ineq_multipliers = Vec::Zero(n_ineq);
    for (size_t a = 0; a < sol.active.size(); ++a) {
        out.w += sol.c(n_eq + a) * G_ineq.row(sol.active[a]).transpose();
        out.ineq_multipliers(sol.active[a]) = -sol.c(n_eq + a);
    }
    return out;
}

MinNormSolution min_norm_single(const Dataset& ds, double tol, const MinNormOptions& opts) {
    MinNormOptions o = opts;
    o.feas_tol = tol;
    o.mult_tol = tol;
    const int n = ds.n();
    const int np = ds.n_pos;
    const int nn = ds.n_neg();
    if (nn > o.cap_single) {
        if (o.pg_fallback) return min_norm_single_pg(ds, tol, opts);
        throw InputError("min_norm_single: number of negatives exceeds the enumeration cap");
    }

    const auto& G = ds.gram->G;

    struct Candidate {
        double obj;
        std::vector<int> T;   // negative indices (absolute)
        Vec c;                // over positives + T
        std::vector<int> S;   // sorted full subset
    };
    std::vector<Candidate> certified;

    for_each_subset(nn, [&](const std::vector<int>& tsel) {
        std::vector<int> S(np);
        std::iota(S.begin(), S.end(), 0);
        for (int t : tsel) S.push_back(np + t);

        const int k = static_cast<int>(S.size());
        Mat M(k, k);
        for (int a = 0; a < k; ++a)
            for (int b = 0; b < k; ++b) M(a, b) = G(S[a], S[b]);
        Vec rhs = Vec::Zero(k);
        for (int a = 0; a < np; ++a) rhs(a) = ds.y(S[a]);  // zeroed labels on T

        Eigen::LDLT<Mat> ldlt(M);
        if (ldlt.info() != Eigen::Success) return false;
        Vec c = ldlt.solve(rhs);
        if ((M * c - rhs).norm() > 1e-8 * (1.0 + rhs.norm())) return false;

        // mu_j = -c_j on T must be >= -tol
        for (int a = np; a < k; ++a)
            if (c(a) > o.mult_tol) return false;

        // feasibility on negatives outside T: w.x_j <= tol
        for (int j = np; j < n; ++j) {
            if (std::binary_search(S.begin() + np, S.end(), j)) continue;
            double v = 0.0;
            for (int a = 0; a < k; ++a) v += G(j, S[a]) * c(a);
            if (v > o.feas_tol) return false;
        }

        std::vector<int> T;
        for (int t : tsel) T.push_back(np + t);
        certified.push_back({0.5 * c.dot(rhs), T, c, S});
        return false;  // keep enumerating; min objective decides
    });

    if (certified.empty())
        throw NumericError("min_norm_single: no feasible subset (degenerate data)");

    size_t best = 0;
    for (size_t i = 1; i < certified.size(); ++i) {
        if (certified[i].obj < certified[best].obj - o.obj_tie_tol)
            best = i;
        else if (std::abs(certified[i].obj - certified[best].obj) <= o.obj_tie_tol &&
                 lex_less(certified[i].S, certified[best].S))
            best = i;
    }

    const Candidate& cb = certified[best];
    MinNormSolution sol;
    sol.solver = "enumeration";
    sol.objective = cb.obj;
    sol.subset = cb.S;
    Vec w = Vec::Zero(ds.d());
    for (size_t a = 0; a < cb.S.size(); ++a) w += cb.c(a) * ds.X.row(cb.S[a]).transpose();
    sol.weights.push_back(w);
    sol.mult_eq = Vec::Zero(n);  // stationarity coefficients: w = -sum mult_i x_i
    for (size_t a = 0; a < cb.S.size(); ++a) sol.mult_eq(cb.S[a]) = -cb.c(a);
    for (size_t i = 0; i < certified.size(); ++i)
        if (i != best && std::abs(certified[i].obj - cb.obj) <= o.obj_tie_tol)
            sol.tied_certificates.push_back(certified[i].S);
    sol.kkt_residual = kkt_recheck(sol, ds);
    return sol;
}

MinNormSolution min_norm_single_pg(const Dataset& ds, double tol, const MinNormOptions& opts) {
    const int n = ds.n();
    const int np = ds.n_pos;
    DualPgResult pg = dual_pg(ds.gram->G, ds.y_pos(), np, opts.pg_tol, opts.pg_max_iter);
    if (!pg.converged)
        throw NumericError("min_norm_single_pg: projected gradient did not converge");

    MinNormSolution sol;
    sol.solver = "projected_gradient";
    sol.weights.push_back(-(ds.X.transpose() * pg.nu));
    sol.objective = pg.objective;
    sol.mult_eq = pg.nu;
    sol.subset.resize(np);
    std::iota(sol.subset.begin(), sol.subset.end(), 0);
    for (int j = np; j < n; ++j)
        if (pg.nu(j) > 1e-8) sol.subset.push_back(j);
    sol.kkt_residual = kkt_recheck(sol, ds);
    (void)tol;
    return sol;
}

MinNormSolution min_norm_two(const Dataset& ds, double tol, const MinNormOptions& opts) {
    MinNormOptions o = opts;
    o.feas_tol = tol;
    o.mult_tol = tol;
    const int n = ds.n();
    if (n > o.cap_two)
        throw InputError("min_norm_two: n exceeds the partition enumeration cap");

    struct Candidate {
        double obj;
        std::vector<int> bits;
        Vec c;
        std::vector<PairRow> rows;  // eq rows then active ineq rows
        Vec delta, mu;
    };
    bool have_best = false;
    Candidate best;
    std::vector<std::vector<int>> ties;

    std::vector<PairRow> eq, ineq;
    Vec rhs;
    const long total = 1L << n;
    for (long code = 0; code < total; ++code) {
        std::vector<int> bits(n);
        for (int i = 0; i < n; ++i) bits[i] = static_cast<int>((code >> (n - 1 - i)) & 1);

        partition_rows(ds, bits, eq, rhs, ineq);
        std::vector<PairRow> all = eq;
        all.insert(all.end(), ineq.begin(), ineq.end());
        Mat M = pair_gram(ds, all);

        double bound = 0.0;
        const bool has_bound = relaxation_bound(M, rhs, n, bound);
        if (have_best && has_bound && bound > best.obj + std::max(10.0 * o.obj_tie_tol, 1e-9))
            continue;  // cannot beat or tie the incumbent

        ActiveSetSolution as = solve_active_set(M, rhs, n, o);
        if (!as.ok) continue;

        // original nonconvex feasibility: sigma(w+.x) - sigma(w-.x) = y
        Vec xw_plus = Vec::Zero(n), xw_minus = Vec::Zero(n);
        std::vector<PairRow> used = eq;
        for (int a : as.active) used.push_back(ineq[a]);
        for (size_t r = 0; r < used.size(); ++r) {
            xw_plus += as.c(r) * used[r].p * ds.gram->G.col(used[r].i);
            xw_minus += as.c(r) * used[r].q * ds.gram->G.col(used[r].i);
        }
        bool orig_ok = true;
        for (int i = 0; i < n; ++i) {
            double h = std::max(xw_plus(i), 0.0) - std::max(xw_minus(i), 0.0);
            if (std::abs(h - ds.y(i)) > 1e-7 * (1.0 + std::abs(ds.y(i)))) {
                orig_ok = false;
                break;
            }
        }
        if (!orig_ok) continue;

        Candidate cand;
        cand.obj = as.objective;
        cand.bits = bits;
        cand.c = as.c;
        cand.rows = used;
        cand.delta = Vec::Zero(n);
        cand.mu = Vec::Zero(n);
        for (int r = 0; r < n; ++r) cand.delta(eq[r].i) = -as.c(r);
        for (size_t a = 0; a < as.active.size(); ++a)
            cand.mu(ineq[as.active[a]].i) = -as.c(n + a);

        if (!have_best || cand.obj < best.obj - o.obj_tie_tol) {
            have_best = true;
            best = std::move(cand);
            ties.clear();
        } else if (std::abs(cand.obj - best.obj) <= o.obj_tie_tol) {
            if (lex_less(cand.bits, best.bits)) {
                ties.push_back(best.bits);
                best = std::move(cand);
            } else {
                ties.push_back(cand.bits);
            }
        }
    }

    if (!have_best)
        throw NumericError("min_norm_two: no partition certified (unexpected; feasible set is nonempty)");

    MinNormSolution sol;
    sol.solver = "enumeration";
    sol.objective = best.obj;
    sol.partition = best.bits;
    Vec wp = Vec::Zero(ds.d()), wm = Vec::Zero(ds.d());
    for (size_t r = 0; r < best.rows.size(); ++r) {
        wp += best.c(r) * best.rows[r].p * ds.X.row(best.rows[r].i).transpose();
        wm += best.c(r) * best.rows[r].q * ds.X.row(best.rows[r].i).transpose();
    }
    sol.weights = {wp, wm};
    sol.mult_eq = best.delta;
    sol.mult_ineq = best.mu;
    sol.tied_certificates = ties;
    sol.kkt_residual = kkt_recheck(sol, ds);
    return sol;
}

RestrictedResult restricted_program_pg(const Dataset& ds, const std::vector<int>& partition,
                                       const MinNormOptions& opts) {
    const int n = ds.n();
    if (static_cast<int>(partition.size()) != n)
        throw InputError("restricted_program_pg: partition length != n");
    std::vector<PairRow> eq, ineq;
    Vec rhs;
    partition_rows(ds, partition, eq, rhs, ineq);
    std::vector<PairRow> all = eq;
    all.insert(all.end(), ineq.begin(), ineq.end());
    Mat M = pair_gram(ds, all);

    DualPgResult pg = dual_pg(M, rhs, n, opts.pg_tol, opts.pg_max_iter);
    RestrictedResult out;
    if (!pg.converged) return out;
    out.ok = true;
    out.objective = pg.objective;
    out.Xw_plus = Vec::Zero(n);
    out.Xw_minus = Vec::Zero(n);
    for (size_t r = 0; r < all.size(); ++r) {
        out.Xw_plus -= pg.nu(r) * all[r].p * ds.gram->G.col(all[r].i);
        out.Xw_minus -= pg.nu(r) * all[r].q * ds.gram->G.col(all[r].i);
    }
    return out;
}

double feasible_upper_bound_multi(const Dataset& ds, int m, const std::vector<int>& signs) {
    if (static_cast<int>(signs.size()) != m)
        throw InputError("feasible_upper_bound_multi: signs length != m");
    const bool has_pos_label = ds.n_pos > 0;
    const bool has_neg_label = ds.n_neg() > 0;
    if (has_pos_label && has_neg_label) {
        bool sp = false, sn = false;
        for (int s : signs) (s > 0 ? sp : sn) = true;
        if (!sp || !sn)
            throw InputError("feasible_upper_bound_multi: need both neuron signs for mixed labels");
    }
    Vec y_plus = ds.y.cwiseMax(0.0);
    Vec y_minus = -ds.y.cwiseMin(0.0);
    Vec a = ds.gram->solve(y_plus);
    Vec b = ds.gram->solve(y_minus);
    return 0.5 * (y_plus.dot(a) + y_minus.dot(b));
}

double kkt_recheck(const MinNormSolution& sol, const Dataset& ds) {
    const int n = ds.n();
    const int np = ds.n_pos;
    double worst = 0.0;
    auto track = [&](double v) { worst = std::max(worst, v); };

    if (sol.weights.size() == 1) {
        const Vec& w = sol.weights[0];
        Vec xw = ds.X * w;
        track((w + ds.X.transpose() * sol.mult_eq).norm());  // stationarity
        for (int i = 0; i < np; ++i) track(std::abs(xw(i) - ds.y(i)));
        for (int j = np; j < n; ++j) {
            track(std::max(xw(j), 0.0));              // primal feasibility
            track(std::max(-sol.mult_eq(j), 0.0));    // mu_j >= 0
            track(std::abs(sol.mult_eq(j) * xw(j)));  // complementary slackness
        }
        return worst;
    }

    // two-neuron certificate
    const Vec& wp = sol.weights[0];
    const Vec& wm = sol.weights[1];
    Vec xwp = ds.X * wp;
    Vec xwm = ds.X * wm;
    Vec sp = wp, sm = wm;
    for (int i = 0; i < n; ++i) {
        const bool pos = ds.y(i) > 0.0;
        const int bit = sol.partition[i];
        const double d = sol.mult_eq(i), u = sol.mult_ineq(i);
        track(-u);  // dual feasibility
        if (pos && bit == 0) {  // S1
            sp += d * ds.X.row(i).transpose();
            sm += u * ds.X.row(i).transpose();
            track(std::abs(xwp(i) - ds.y(i)));
            track(std::max(xwm(i), 0.0));
            track(std::abs(u * xwm(i)));
        } else if (pos) {  // S2
            sp += d * ds.X.row(i).transpose();
            sm += (-d - u) * ds.X.row(i).transpose();
            track(std::abs(xwp(i) - xwm(i) - ds.y(i)));
            track(std::max(-xwm(i), 0.0));
            track(std::abs(u * xwm(i)));
        } else if (bit == 0) {  // S3
            sp += u * ds.X.row(i).transpose();
            sm += -d * ds.X.row(i).transpose();
            track(std::abs(-xwm(i) - ds.y(i)));
            track(std::max(xwp(i), 0.0));
            track(std::abs(u * xwp(i)));
        } else {  // S4
            sp += (d - u) * ds.X.row(i).transpose();
            sm += -d * ds.X.row(i).transpose();
            track(std::abs(xwp(i) - xwm(i) - ds.y(i)));
            track(std::max(-xwp(i), 0.0));
            track(std::abs(u * xwp(i)));
        }
    }
    track(sp.norm());
    track(sm.norm());
    return worst;
}

}  // namespace relubias
