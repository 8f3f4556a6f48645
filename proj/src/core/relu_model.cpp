#include "relu_model.hpp"

namespace relubias {

void ModelState::validate() const {
    if (weights.size() != signs.size()) throw InputError("ModelState: weights/signs size mismatch");
    if (weights.empty()) throw InputError("ModelState: needs at least one neuron");
    for (int s : signs)
        if (s != 1 && s != -1) throw InputError("ModelState: signs must be +1 or -1");
    for (const auto& w : weights)
        if (w.size() != weights[0].size()) throw InputError("ModelState: inconsistent weight lengths");
}

Mat preactivations(const ModelState& model, const Mat& X) {
    model.validate();
    if (X.cols() != model.d()) throw InputError("dimension mismatch: X columns != model d");
    Mat beta(model.m(), X.rows());
    for (int k = 0; k < model.m(); ++k) beta.row(k) = (X * model.weights[k]).transpose();
    return beta;
}

Vec predict_from_beta(const Mat& beta, const std::vector<int>& signs) {
    Vec h = Vec::Zero(beta.cols());
    for (int k = 0; k < beta.rows(); ++k)
        h += static_cast<double>(signs[k]) * beta.row(k).transpose().cwiseMax(0.0);
    return h;
}

MaskMat mask_from_beta(const Mat& beta) {
    MaskMat m(beta.rows(), beta.cols());
    for (Eigen::Index k = 0; k < beta.rows(); ++k)
        for (Eigen::Index i = 0; i < beta.cols(); ++i) m(k, i) = beta(k, i) > 0.0 ? 1 : 0;
    return m;
}

Vec predict(const ModelState& model, const Mat& X) {
    return predict_from_beta(preactivations(model, X), model.signs);
}

double empirical_risk(const ModelState& model, const Dataset& ds) {
    Vec r = predict(model, ds.X) - ds.y;
    return 0.5 * r.squaredNorm();
}

std::vector<Vec> gradient(const ModelState& model, const Dataset& ds) {
    Mat beta = preactivations(model, ds.X);
    Vec residual = predict_from_beta(beta, model.signs) - ds.y;
    std::vector<Vec> g;
    g.reserve(model.m());
    for (int k = 0; k < model.m(); ++k) {
        // D(X w_k) (h - y): zero out coordinates with nonpositive preactivation
        Vec masked = residual;
        for (int i = 0; i < ds.n(); ++i)
            if (!(beta(k, i) > 0.0)) masked(i) = 0.0;
        g.push_back(static_cast<double>(model.signs[k]) * (ds.X.transpose() * masked));
    }
    return g;
}

ActivationMask activation_mask(const ModelState& model, const Dataset& ds) {
    return ActivationMask{mask_from_beta(preactivations(model, ds.X))};
}

}  // namespace relubias
