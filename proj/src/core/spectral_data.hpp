#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "common.hpp"

namespace relubias {

enum class SpectrumKind { Isotropic, Geometric, Explicit };
enum class ZDist { Gaussian, Rademacher, UniformUnitVar };
enum class MagnitudeDist { Uniform, Fixed };

const char* to_string(SpectrumKind k);
const char* to_string(ZDist z);
SpectrumKind spectrum_kind_from_string(const std::string& s);
ZDist z_dist_from_string(const std::string& s);

// Eigenvalue spectrum of the feature covariance, sorted descending.
struct Spectrum {
    Vec lambda;
    SpectrumKind kind = SpectrumKind::Isotropic;

    int d() const { return static_cast<int>(lambda.size()); }
    double l1() const { return lambda.sum(); }
    double l2_sq() const { return lambda.squaredNorm(); }
    double linf() const { return lambda(0); }
    double d2() const { double s = l1(); return s * s / l2_sq(); }
    double dinf() const { return l1() / linf(); }
};

// make_spectrum("isotropic", d) / ("geometric", d, {ratio}) / ("explicit", d, values)
Spectrum make_spectrum(SpectrumKind kind, int d, const std::vector<double>& params = {});

std::pair<double, double> effective_dims(const Spectrum& s);

struct LabelSpec {
    double y_min = 0.1;
    double y_max = 1.0;
    double frac_positive = 0.5;
    MagnitudeDist magnitude_dist = MagnitudeDist::Uniform;
    bool require_both_signs = false;
};

// Universal constants used by the lemma conditions and bound formulas.
// Orderings enforced: C_g >= 1, C_alpha >= max(C_g^2, C_y*C_g), C_0 >= C_alpha^2, C_y >= 2.
struct Constants {
    double C_g = 3.0;
    double C_y = 2.0;
    double C_alpha = 36.0;  // 4*max(C_g^2, C_y*C_g)
    double C_0 = 5184.0;    // 4*C_alpha^2
    double C = 10.0;

    void validate() const;
    // Default record with the fallback C_g = 3.
    static Constants defaults();
    // Derive C_alpha, C_0 from a (typically measured) C_g.
    static Constants from_cg(double cg, double c_y = 2.0, double c = 10.0);
};

struct GramFactor {
    Mat G;                       // X X^T, n x n
    Eigen::LLT<Mat> llt;
    Vec eigs;                    // ascending
    double mu_n = 0.0;           // smallest eigenvalue
    double mu_1 = 0.0;           // largest eigenvalue
    double cond() const { return mu_1 / mu_n; }
    Vec solve(const Vec& b) const { return llt.solve(b); }
};

struct Dataset {
    Mat X;            // n x d, positive-label rows first
    Vec y;            // length n
    int n_pos = 0;
    Spectrum spectrum;
    std::uint64_t seed = 0;
    ZDist z_dist = ZDist::Gaussian;
    // Declared label bounds; empirical when a dataset is loaded from disk.
    double y_min_bound = 0.0;
    double y_max_bound = 0.0;

    std::shared_ptr<const GramFactor> gram;  // built once, shared read-only

    int n() const { return static_cast<int>(X.rows()); }
    int d() const { return static_cast<int>(X.cols()); }
    int n_neg() const { return n() - n_pos; }
    Eigen::Block<const Mat> X_pos() const { return X.topRows(n_pos); }
    Eigen::Block<const Mat> X_neg() const { return X.bottomRows(n_neg()); }
    Vec y_pos() const { return y.head(n_pos); }
    Vec y_neg() const { return y.tail(n_neg()); }

    // Finalizes a hand-assembled dataset: checks the block convention,
    // label signs, rank, and builds the Gram factorization.
    void finalize();
};

// Convenience for tests: wrap an explicit (X, y) with an isotropic spectrum
// unless one is supplied. Rows are reordered so positives come first.
Dataset make_dataset(Mat X, Vec y, std::optional<Spectrum> spectrum = {});

struct SampleOptions {
    bool rotate = false;       // apply a seeded Haar-like rotation V (QR of a Gaussian)
    int max_resample = 5;      // rank-deficiency retries
    double rank_rtol = 1e-10;  // smallest singular value must exceed rank_rtol * largest
};

Dataset sample_dataset(const Spectrum& spectrum, int n, const LabelSpec& label_spec,
                       ZDist z_dist, std::uint64_t seed, const SampleOptions& opts = {});

struct AssumptionReport {
    bool labels_ok = false;        // Assumption 1
    double label_margin_low = 0;   // min|y_i| - y_min
    double label_margin_high = 0;  // y_max - max|y_i|
    bool highdim_ok = false;       // Assumption 2 (both inequalities)
    double d2 = 0, d2_threshold = 0, d2_margin = 0;
    double dinf = 0, dinf_threshold = 0, dinf_margin = 0;
    bool all_ok() const { return labels_ok && highdim_ok; }
};

AssumptionReport check_assumptions(const Dataset& ds, const Constants& c);

}  // namespace relubias
