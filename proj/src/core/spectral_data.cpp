#include "spectral_data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

namespace relubias {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

const char* to_string(SpectrumKind k) {
    switch (k) {
        case SpectrumKind::Isotropic: return "isotropic";
        case SpectrumKind::Geometric: return "geometric";
        case SpectrumKind::Explicit: return "explicit";
    }
    return "?";
}

const char* to_string(ZDist z) {
    switch (z) {
        case ZDist::Gaussian: return "gaussian";
        case ZDist::Rademacher: return "rademacher";
        case ZDist::UniformUnitVar: return "uniform_unit_var";
    }
    return "?";
}

SpectrumKind spectrum_kind_from_string(const std::string& s) {
    if (s == "isotropic") return SpectrumKind::Isotropic;
    if (s == "geometric") return SpectrumKind::Geometric;
    if (s == "explicit") return SpectrumKind::Explicit;
    throw InputError("unknown spectrum kind: " + s);
}

ZDist z_dist_from_string(const std::string& s) {
    if (s == "gaussian") return ZDist::Gaussian;
    if (s == "rademacher") return ZDist::Rademacher;
    if (s == "uniform_unit_var") return ZDist::UniformUnitVar;
    throw InputError("unknown z distribution: " + s);
}

Spectrum make_spectrum(SpectrumKind kind, int d, const std::vector<double>& params) {
    if (d < 1) throw InputError("make_spectrum: d must be >= 1");
    Spectrum s;
    s.kind = kind;
    s.lambda.resize(d);
    switch (kind) {
        case SpectrumKind::Isotropic:
            s.lambda.setOnes();
            break;
        case SpectrumKind::Geometric: {
            if (params.size() != 1) throw InputError("geometric spectrum needs one parameter (ratio)");
            double rho = params[0];
            if (!(rho > 0.0 && rho <= 1.0)) throw InputError("geometric ratio must lie in (0,1]");
            double v = 1.0;
            for (int i = 0; i < d; ++i, v *= rho) s.lambda(i) = v;
            break;
        }
        case SpectrumKind::Explicit: {
            if (static_cast<int>(params.size()) != d)
                throw InputError("explicit spectrum needs exactly d values");
            for (int i = 0; i < d; ++i) {
                if (params[i] < 0.0) throw InputError("spectrum entries must be >= 0");
                if (i > 0 && params[i] > params[i - 1] + 0.0)
                    throw InputError("explicit spectrum must be sorted descending");
                s.lambda(i) = params[i];
            }
            break;
        }
    }
    if (!(s.lambda(0) > 0.0)) throw InputError("spectrum needs at least one positive eigenvalue");
    return s;
}

std::pair<double, double> effective_dims(const Spectrum& s) { return {s.d2(), s.dinf()}; }

void Constants::validate() const {
    if (!(C_g >= 1.0)) throw InputError("Constants: C_g must be >= 1");
    if (!(C_y >= 2.0)) throw InputError("Constants: C_y must be >= 2");
    if (!(C_alpha >= std::max(C_g * C_g, C_y * C_g)))
        throw InputError("Constants: C_alpha must be >= max(C_g^2, C_y*C_g)");
    if (!(C_0 >= C_alpha * C_alpha)) throw InputError("Constants: C_0 must be >= C_alpha^2");
    if (!(C > 0.0)) throw InputError("Constants: C must be > 0");
}

Constants Constants::defaults() { return from_cg(3.0); }

Constants Constants::from_cg(double cg, double c_y, double c) {
    Constants k;
    k.C_g = std::max(cg, 1.0);
    k.C_y = c_y;
    k.C = c;
    k.C_alpha = 4.0 * std::max(k.C_g * k.C_g, k.C_y * k.C_g);
    k.C_0 = 4.0 * k.C_alpha * k.C_alpha;
    k.validate();
    return k;
}

namespace {

std::shared_ptr<const GramFactor> build_gram(const Mat& X, double rank_rtol) {
    auto gf = std::make_shared<GramFactor>();
    gf->G = X * X.transpose();
    Eigen::SelfAdjointEigenSolver<Mat> es(gf->G);
    if (es.info() != Eigen::Success) throw NumericError("Gram eigendecomposition failed");
    gf->eigs = es.eigenvalues();
    gf->mu_n = gf->eigs(0);
    gf->mu_1 = gf->eigs(gf->eigs.size() - 1);
    // sigma_min(X)^2 = mu_n; rank test in singular-value terms
    if (!(gf->mu_n > rank_rtol * rank_rtol * gf->mu_1) || !(gf->mu_n > 0.0))
        throw NumericError("rank(X) < n: smallest singular value below tolerance");
    gf->llt.compute(gf->G);
    if (gf->llt.info() != Eigen::Success) throw NumericError("Gram Cholesky factorization failed");
    return gf;
}

void draw_z_row(Eigen::Ref<Eigen::RowVectorXd> row, ZDist dist, std::mt19937_64& rng) {
    const double sqrt3 = std::sqrt(3.0);
    switch (dist) {
        case ZDist::Gaussian: {
            std::normal_distribution<double> g(0.0, 1.0);
            for (Eigen::Index j = 0; j < row.size(); ++j) row(j) = g(rng);
            break;
        }
        case ZDist::Rademacher: {
            std::uniform_int_distribution<int> b(0, 1);
            for (Eigen::Index j = 0; j < row.size(); ++j) row(j) = b(rng) ? 1.0 : -1.0;
            break;
        }
        case ZDist::UniformUnitVar: {
            std::uniform_real_distribution<double> u(-sqrt3, sqrt3);
            for (Eigen::Index j = 0; j < row.size(); ++j) row(j) = u(rng);
            break;
        }
    }
}

}  // namespace

void Dataset::finalize() {
    const int nn = n();
    if (nn < 1) throw InputError("Dataset: n must be >= 1");
    if (y.size() != nn) throw InputError("Dataset: label length mismatch");
    n_pos = 0;
    for (int i = 0; i < nn; ++i) {
        if (y(i) == 0.0) throw InputError("Dataset: labels must be nonzero");
        if (y(i) > 0.0) {
            if (i != n_pos) throw InputError("Dataset: positive labels must occupy the upper block");
            ++n_pos;
        }
    }
    if (spectrum.d() != d()) throw InputError("Dataset: spectrum dimension mismatch");
    if (y_min_bound <= 0.0) {
        y_min_bound = y.cwiseAbs().minCoeff();
        y_max_bound = y.cwiseAbs().maxCoeff();
    }
    gram = build_gram(X, 1e-10);
}

Dataset make_dataset(Mat X, Vec y, std::optional<Spectrum> spectrum) {
    if (X.rows() != y.size()) throw InputError("make_dataset: row/label count mismatch");
    // reorder positives first
    std::vector<int> order;
    for (int i = 0; i < y.size(); ++i)
        if (y(i) > 0) order.push_back(i);
    for (int i = 0; i < y.size(); ++i)
        if (y(i) <= 0) order.push_back(i);
    Dataset ds;
    ds.X.resize(X.rows(), X.cols());
    ds.y.resize(y.size());
    for (size_t r = 0; r < order.size(); ++r) {
        ds.X.row(static_cast<int>(r)) = X.row(order[r]);
        ds.y(static_cast<int>(r)) = y(order[r]);
    }
    ds.spectrum = spectrum ? *spectrum
                           : make_spectrum(SpectrumKind::Isotropic, static_cast<int>(X.cols()));
    ds.finalize();
    return ds;
}

Dataset sample_dataset(const Spectrum& spectrum, int n, const LabelSpec& label_spec,
                       ZDist z_dist, std::uint64_t seed, const SampleOptions& opts) {
    const int d = spectrum.d();
    if (n < 1) throw InputError("sample_dataset: n must be >= 1");
    if (n > d) throw InputError("sample_dataset: n must not exceed d");
    if (!(label_spec.y_min > 0.0)) throw InputError("sample_dataset: y_min must be > 0");
    if (!(label_spec.y_max >= label_spec.y_min)) throw InputError("sample_dataset: y_max < y_min");
    if (label_spec.frac_positive < 0.0 || label_spec.frac_positive > 1.0)
        throw InputError("sample_dataset: frac_positive must lie in [0,1]");

    const int n_pos = static_cast<int>(std::lround(label_spec.frac_positive * n));
    if (label_spec.require_both_signs && (n_pos == 0 || n_pos == n))
        throw InputError("sample_dataset: frac_positive leaves one label sign empty");

    std::mt19937_64 rng(seed);
    const Vec sqrt_lambda = spectrum.lambda.cwiseSqrt();

    Mat V;
    if (opts.rotate) {
        if (d > 4096) throw InputError("sample_dataset: rotation is limited to d <= 4096");
        Mat A(d, d);
        std::normal_distribution<double> g(0.0, 1.0);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) A(i, j) = g(rng);
        Eigen::HouseholderQR<Mat> qr(A);
        V = qr.householderQ();
    }

    Dataset ds;
    ds.spectrum = spectrum;
    ds.seed = seed;
    ds.z_dist = z_dist;
    ds.y_min_bound = label_spec.y_min;
    ds.y_max_bound = label_spec.y_max;
    ds.y.resize(n);

    Eigen::RowVectorXd z(d);
    for (int attempt = 0; attempt <= opts.max_resample; ++attempt) {
        ds.X.resize(n, d);
        for (int i = 0; i < n; ++i) {
            draw_z_row(z, z_dist, rng);
            Eigen::RowVectorXd x = z.cwiseProduct(sqrt_lambda.transpose());
            ds.X.row(i) = opts.rotate ? (V * x.transpose()).transpose() : x;
        }
        try {
            ds.gram = build_gram(ds.X, opts.rank_rtol);
            break;
        } catch (const NumericError&) {
            if (attempt == opts.max_resample)
                throw NumericError("sample_dataset: rank-deficient X after retries");
        }
    }

    std::uniform_real_distribution<double> umag(label_spec.y_min, label_spec.y_max);
    for (int i = 0; i < n; ++i) {
        double mag = label_spec.magnitude_dist == MagnitudeDist::Uniform ? umag(rng)
                                                                         : label_spec.y_max;
        ds.y(i) = (i < n_pos) ? mag : -mag;
    }
    ds.n_pos = n_pos;
    return ds;
}

AssumptionReport check_assumptions(const Dataset& ds, const Constants& c) {
    AssumptionReport r;
    const double abs_min = ds.y.cwiseAbs().minCoeff();
    const double abs_max = ds.y.cwiseAbs().maxCoeff();
    r.label_margin_low = abs_min - ds.y_min_bound;
    r.label_margin_high = ds.y_max_bound - abs_max;
    r.labels_ok = r.label_margin_low >= 0.0 && r.label_margin_high >= 0.0;

    const double n = ds.n();
    const double ratio = ds.y_max_bound / ds.y_min_bound;
    r.d2 = ds.spectrum.d2();
    r.dinf = ds.spectrum.dinf();
    r.d2_threshold = c.C_0 * c.C_0 * n * n * ratio * ratio;
    r.dinf_threshold = c.C_0 * std::pow(n, 1.5) * ratio;
    r.d2_margin = r.d2 - r.d2_threshold;
    r.dinf_margin = r.dinf - r.dinf_threshold;
    r.highdim_ok = r.d2_margin >= 0.0 && r.dinf_margin >= 0.0;
    return r;
}

}  // namespace relubias
