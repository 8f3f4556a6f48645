#pragma once

#include <doctest.h>

#include "core/gd_engine.hpp"
#include "core/spectral_data.hpp"

namespace rbt {

using namespace relubias;

// Small mixed-label Gaussian dataset for unit tests.
inline Dataset small_gaussian(int n, int d, std::uint64_t seed, double frac_positive = 0.5) {
    Spectrum s = make_spectrum(SpectrumKind::Isotropic, d);
    LabelSpec ls;
    ls.y_min = 0.1;
    ls.y_max = 1.0;
    ls.frac_positive = frac_positive;
    return sample_dataset(s, n, ls, ZDist::Gaussian, seed);
}

inline Vec const_vec(int n, double v) { return Vec::Constant(n, v); }

}  // namespace rbt
