#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace relubias {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using MaskMat = Eigen::ArrayXXi;  // m x n, entries in {0,1}

// Thrown on bad arguments (maps to RB_ERROR_INPUT at the C boundary).
struct InputError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Thrown on numerical failures: rank deficiency, divergence, ill-conditioning.
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// FNV-1a over raw bytes; used for manifest content hashes.
inline std::uint64_t fnv1a64(const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ull;
    }
    return h;
}

inline std::uint64_t fnv1a64(const std::string& s) { return fnv1a64(s.data(), s.size()); }

// Deterministic double formatting (17 significant digits round-trips exactly).
std::string format_double(double v);

}  // namespace relubias
