#include <doctest.h>

#include <random>

#include "core/serialize.hpp"
#include "core/spectral_data.hpp"
#include "test_util.hpp"

using namespace relubias;

TEST_SUITE("spectral_data") {

TEST_CASE("make_spectrum isotropic reduces to the raw dimension") {
    Spectrum s = make_spectrum(SpectrumKind::Isotropic, 4);
    CHECK(s.lambda.isApproxToConstant(1.0));
    auto [d2, dinf] = effective_dims(s);
    CHECK(d2 == doctest::Approx(4.0));
    CHECK(dinf == doctest::Approx(4.0));
}

TEST_CASE("make_spectrum geometric d=3 ratio 0.5") {
    Spectrum s = make_spectrum(SpectrumKind::Geometric, 3, {0.5});
    CHECK(s.lambda(0) == 1.0);
    CHECK(s.lambda(1) == 0.5);
    CHECK(s.lambda(2) == 0.25);
    CHECK(s.l1() == doctest::Approx(1.75));
    auto [d2, dinf] = effective_dims(s);
    CHECK(d2 == doctest::Approx(1.75 * 1.75 / 1.3125));
    CHECK(dinf == doctest::Approx(1.75));
}

TEST_CASE("make_spectrum explicit equal eigenvalues") {
    Spectrum s = make_spectrum(SpectrumKind::Explicit, 2, {2.0, 2.0});
    auto [d2, dinf] = effective_dims(s);
    CHECK(d2 == doctest::Approx(2.0));
    CHECK(dinf == doctest::Approx(2.0));
}

TEST_CASE("make_spectrum rejects bad inputs") {
    CHECK_THROWS_AS(make_spectrum(SpectrumKind::Explicit, 3, {1.0, 2.0, 0.5}), InputError);
    CHECK_THROWS_AS(make_spectrum(SpectrumKind::Geometric, 3, {0.0}), InputError);
    CHECK_THROWS_AS(make_spectrum(SpectrumKind::Geometric, 3, {1.5}), InputError);
    CHECK_THROWS_AS(make_spectrum(SpectrumKind::Isotropic, 0), InputError);
    CHECK_THROWS_AS(make_spectrum(SpectrumKind::Explicit, 2, {0.0, 0.0}), InputError);
}

TEST_CASE("effective_dims edge cases") {
    Spectrum s1 = make_spectrum(SpectrumKind::Isotropic, 100);
    auto [a2, ainf] = effective_dims(s1);
    CHECK(a2 == doctest::Approx(100.0));
    CHECK(ainf == doctest::Approx(100.0));

    Spectrum s2 = make_spectrum(SpectrumKind::Explicit, 3, {1.0, 0.0, 0.0});
    auto [b2, binf] = effective_dims(s2);
    CHECK(b2 == doctest::Approx(1.0));
    CHECK(binf == doctest::Approx(1.0));

    Spectrum s3 = make_spectrum(SpectrumKind::Explicit, 2, {4.0, 1.0});
    auto [c2, cinf] = effective_dims(s3);
    CHECK(c2 == doctest::Approx(25.0 / 17.0));
    CHECK(cinf == doctest::Approx(1.25));
}

TEST_CASE("effective_dims is scale invariant") {
    std::mt19937_64 rng(11);
    std::vector<double> vals;
    double v = 2.0;
    for (int i = 0; i < 6; ++i) {
        vals.push_back(v);
        v *= 0.7 + 0.2 * (rng() % 100) / 100.0 * 0;  // deterministic descending
        v *= 0.8;
    }
    Spectrum s = make_spectrum(SpectrumKind::Explicit, 6, vals);
    for (double c : {0.5, 3.0, 1e4}) {
        std::vector<double> scaled;
        for (double x : vals) scaled.push_back(c * x);
        Spectrum sc = make_spectrum(SpectrumKind::Explicit, 6, scaled);
        CHECK(sc.d2() == doctest::Approx(s.d2()).epsilon(1e-12));
        CHECK(sc.dinf() == doctest::Approx(s.dinf()).epsilon(1e-12));
    }
}

TEST_CASE("sample_dataset forced all-positive labels") {
    Spectrum s = make_spectrum(SpectrumKind::Isotropic, 4);
    LabelSpec ls;
    ls.y_min = 1.0;
    ls.y_max = 1.0;
    ls.frac_positive = 1.0;
    ls.magnitude_dist = MagnitudeDist::Fixed;
    Dataset ds = sample_dataset(s, 2, ls, ZDist::Gaussian, 7);
    CHECK(ds.n_pos == 2);
    CHECK(ds.n_neg() == 0);
    CHECK(ds.y(0) == 1.0);
    CHECK(ds.y(1) == 1.0);
}

TEST_CASE("sample_dataset determinism and block ordering") {
    Dataset a = rbt::small_gaussian(10, 64, 3);
    Dataset b = rbt::small_gaussian(10, 64, 3);
    CHECK(a.X == b.X);
    CHECK(a.y == b.y);
    for (int i = 0; i < a.n(); ++i)
        CHECK((i < a.n_pos ? a.y(i) > 0 : a.y(i) < 0));

    Dataset c = rbt::small_gaussian(10, 64, 4);
    CHECK(a.X != c.X);
}

TEST_CASE("sample_dataset column-space identity") {
    Dataset ds = rbt::small_gaussian(8, 40, 5);
    // X == (XX^T)(XX^T)^{-1} X
    Mat lhs = ds.gram->G * ds.gram->llt.solve(ds.X);
    CHECK((lhs - ds.X).norm() <= 1e-8 * ds.X.norm());
}

TEST_CASE("sample_dataset empirical second moment") {
    // mean of ||x||^2 / ||lambda||_1 -> 1 within 5% once n*d >= 1e5
    Spectrum s = make_spectrum(SpectrumKind::Isotropic, 4000);
    LabelSpec ls;
    Dataset ds = sample_dataset(s, 30, ls, ZDist::Gaussian, 0);
    double mean = 0.0;
    for (int i = 0; i < ds.n(); ++i) mean += ds.X.row(i).squaredNorm() / s.l1();
    mean /= ds.n();
    CHECK(mean == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("sample_dataset unit variance for every z distribution") {
    Spectrum s = make_spectrum(SpectrumKind::Isotropic, 3000);
    LabelSpec ls;
    for (ZDist z : {ZDist::Gaussian, ZDist::Rademacher, ZDist::UniformUnitVar}) {
        Dataset ds = sample_dataset(s, 20, ls, z, 1);
        double mean = 0.0;
        for (int i = 0; i < ds.n(); ++i) mean += ds.X.row(i).squaredNorm() / s.l1();
        mean /= ds.n();
        CHECK(mean == doctest::Approx(1.0).epsilon(0.05));
    }
}

TEST_CASE("sample_dataset rejects bad label specs") {
    Spectrum s = make_spectrum(SpectrumKind::Isotropic, 8);
    LabelSpec ls;
    ls.y_min = 0.0;
    CHECK_THROWS_AS(sample_dataset(s, 4, ls, ZDist::Gaussian, 0), InputError);
    LabelSpec both;
    both.frac_positive = 1.0;
    both.require_both_signs = true;
    CHECK_THROWS_AS(sample_dataset(s, 4, both, ZDist::Gaussian, 0), InputError);
    LabelSpec ok;
    CHECK_THROWS_AS(sample_dataset(s, 9, ok, ZDist::Gaussian, 0), InputError);  // n > d
}

TEST_CASE("sample_dataset rotation preserves the Gram spectrum scale") {
    Spectrum s = make_spectrum(SpectrumKind::Geometric, 24, {0.8});
    LabelSpec ls;
    SampleOptions opts;
    opts.rotate = true;
    Dataset ds = sample_dataset(s, 6, ls, ZDist::Gaussian, 9, opts);
    CHECK(ds.n() == 6);
    CHECK(ds.gram->mu_n > 0.0);
}

TEST_CASE("check_assumptions matches hand-substituted thresholds") {
    Constants c = Constants::defaults();
    c.C_0 = 2.0;  // the worked example uses C_0 = 2
    c.C_alpha = 1.0;
    c.C_g = 1.0;
    c.C_y = 2.0;

    Spectrum s4 = make_spectrum(SpectrumKind::Isotropic, 4);
    LabelSpec ls;
    ls.y_min = 1.0;
    ls.y_max = 1.0;
    ls.magnitude_dist = MagnitudeDist::Fixed;
    Dataset ds4 = sample_dataset(s4, 3, ls, ZDist::Gaussian, 0);
    AssumptionReport r4 = check_assumptions(ds4, c);
    CHECK(r4.labels_ok);
    CHECK(r4.label_margin_low == doctest::Approx(0.0));
    CHECK(r4.label_margin_high == doctest::Approx(0.0));
    CHECK_FALSE(r4.highdim_ok);
    CHECK(r4.d2_threshold == doctest::Approx(36.0));

    // d = 1e6 satisfies both inequalities for n = 3 (36 and ~10.39); checked
    // without sampling a huge dataset by substituting into the same formulas.
    Spectrum s6 = make_spectrum(SpectrumKind::Isotropic, 1000000);
    CHECK(s6.d2() >= 36.0);
    CHECK(s6.dinf() >= 2.0 * std::pow(3.0, 1.5));
}

TEST_CASE("constants orderings are validated") {
    Constants c = Constants::defaults();
    CHECK_NOTHROW(c.validate());
    CHECK(c.C_alpha >= std::max(c.C_g * c.C_g, c.C_y * c.C_g));
    CHECK(c.C_0 >= c.C_alpha * c.C_alpha);
    Constants bad = c;
    bad.C_alpha = 1.0;
    CHECK_THROWS_AS(bad.validate(), InputError);
    Constants est = Constants::from_cg(1.17);
    CHECK(est.C_g == doctest::Approx(1.17));
    CHECK(est.C_alpha == doctest::Approx(4.0 * 2.0 * 1.17));
}

TEST_CASE("dataset JSON round trip is exact") {
    Dataset ds = rbt::small_gaussian(5, 12, 21);
    std::string j1 = dataset_to_json(ds);
    Dataset back = dataset_from_json(j1);
    CHECK(back.X == ds.X);
    CHECK(back.y == ds.y);
    CHECK(back.n_pos == ds.n_pos);
    CHECK(dataset_to_json(back) == j1);
}

TEST_CASE("dataset CSV has the documented header") {
    Dataset ds = rbt::small_gaussian(3, 4, 2);
    std::string csv = dataset_to_csv(ds);
    CHECK(csv.rfind("row,label,x0,x1,x2,x3\n", 0) == 0);
}

}  // TEST_SUITE
