#pragma once

#include <vector>

#include "common.hpp"
#include "spectral_data.hpp"

namespace relubias {

// m-neuron ReLU predictor h(x) = sum_k s_k * max(w_k'x, 0) with fixed signs.
struct ModelState {
    std::vector<Vec> weights;  // m vectors of length d
    std::vector<int> signs;    // entries in {-1, +1}
    long iter = 0;

    int m() const { return static_cast<int>(weights.size()); }
    int d() const { return weights.empty() ? 0 : static_cast<int>(weights[0].size()); }
    void validate() const;
};

// Strict-positivity activation mask; entry (k,i) = 1 iff w_k'x_i > 0.
struct ActivationMask {
    MaskMat mask;  // m x n
};

// sigma applied entrywise: max(z, 0).
inline Vec relu(const Vec& z) { return z.cwiseMax(0.0); }

Vec predict(const ModelState& model, const Mat& X);
double empirical_risk(const ModelState& model, const Dataset& ds);
std::vector<Vec> gradient(const ModelState& model, const Dataset& ds);
ActivationMask activation_mask(const ModelState& model, const Dataset& ds);

// Preactivation matrix beta with beta(k,i) = w_k'x_i.
Mat preactivations(const ModelState& model, const Mat& X);

// Model output from preactivations: h = sum_k s_k * relu(beta_k).
Vec predict_from_beta(const Mat& beta, const std::vector<int>& signs);

MaskMat mask_from_beta(const Mat& beta);

}  // namespace relubias
