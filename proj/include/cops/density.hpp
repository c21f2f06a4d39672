#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "cops/dataset.hpp"
#include "cops/kernels.hpp"

namespace cops {

struct EmptyBin : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Member rows of one partition bin.
struct LocalSample {
    std::size_t bin_id = 0;
    std::vector<std::size_t> member_indices;

    std::size_t n_k() const { return member_indices.size(); }
};

/// Joint kernel density estimate at (u, v):
///   (1/n) sum_i prod_j Kx_j((u_j - X_ij)/hx_j)/hx_j * Ky((v - Y_i)/hy)/hy.
/// With a shared bandwidth h the normalizer is h^(d+1); with per-axis
/// bandwidths it is the product of the axis bandwidths.
double joint_kde(const Dataset& data, std::span<const KernelSpec> kx, const KernelSpec& ky,
                 std::span<const double> u, double v);

/// Joint KDE from the data augmented with `candidate`; identical to
/// joint_kde on the (n+1)-row dataset:
///   n/(n+1) * joint + kernel term of the candidate / ((n+1) * prod h).
double augmented_joint_kde(const Dataset& data, std::span<const KernelSpec> kx,
                           const KernelSpec& ky, std::span<const double> candidate_x,
                           double candidate_y, std::span<const double> u, double v);

/// Local marginal density of Y given the bin: (1/(n_k h)) sum_{i in bin} K((Y_i - v)/h).
double local_kde(const Dataset& data, const LocalSample& sample, const KernelSpec& ky, double v);

/// Local KDE from the bin augmented with candidate_y:
///   n_k/(n_k+1) * local + K((v - candidate_y)/h) / ((n_k+1) h).
double augmented_local_kde(const Dataset& data, const LocalSample& sample, const KernelSpec& ky,
                           double candidate_y, double v);

// Silverman's rule 1.06 * sd * n^(-1/5); values must be nonempty.
double silverman_bandwidth(std::span<const double> values);

}  // namespace cops
