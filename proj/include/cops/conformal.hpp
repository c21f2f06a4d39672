#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "cops/band.hpp"
#include "cops/dataset.hpp"
#include "cops/density.hpp"
#include "cops/kernels.hpp"

namespace cops {

/// Cutoff rule for the conformal rank: include a point when its p-value is at
/// least alpha, or at least floor((m+1)*alpha)/(m+1) (the discretized level).
enum class RankThreshold { alpha, alpha_tilde };

RankThreshold rank_threshold_from_name(const std::string& name);

// True when a rank count of `count` out of m+1 exchangeable scores clears the
// chosen cutoff.
bool rank_passes(std::size_t count, std::size_t m_plus_1, double alpha, RankThreshold threshold);

/// Conformal p-value of the last score against the whole vector:
/// (1/m) * #{ i : scores[i] <= scores.back() }, ties in the candidate's favor.
double conformal_pvalue(std::span<const double> scores);

/// Plain point cloud in R^p for the covariate-free conformal sets.
struct PointCloud {
    std::vector<double> pts;  // n*p, row-major
    std::size_t n = 0;
    std::size_t p = 0;

    std::span<const double> row(std::size_t i) const { return {pts.data() + i * p, p}; }
};

// Dataset rows joined into (d+1)-column points (x..., y).
PointCloud joint_points(const Dataset& data);

// Plain product-kernel KDE over the cloud at `z`.
double cloud_kde(const PointCloud& cloud, std::span<const KernelSpec> kernels,
                 std::span<const double> z);

/// Full conformal prediction set by test inversion on the cartesian grid
/// (row-major over axes, last axis fastest). Exact indicator: a grid point is
/// included iff its augmented-KDE conformal p-value clears the threshold.
std::vector<char> full_conformal_set(const PointCloud& cloud,
                                     std::span<const KernelSpec> kernels, double alpha,
                                     std::span<const GridSpec> grids,
                                     RankThreshold threshold = RankThreshold::alpha,
                                     std::vector<std::string>* warnings = nullptr);

/// Sandwich approximation: thresholds the plain KDE at
/// p(Z_(j)) - K(0)/(n * prod h) with j = floor(n*alpha), where Z_(j) is the
/// sample point with j-th smallest estimated density. j = 0 degenerates to the
/// whole grid.
std::vector<char> sandwich_joint_set(const PointCloud& cloud,
                                     std::span<const KernelSpec> kernels, double alpha,
                                     std::span<const GridSpec> grids,
                                     std::vector<std::string>* warnings = nullptr);

/// Joint-density cutoff used by sandwich_joint_set / slicer_band. Returns
/// false in `usable` when floor(n*alpha) = 0 (no cutoff; whole space).
struct SandwichCutoff {
    double threshold = 0.0;
    bool usable = false;
};

SandwichCutoff sandwich_cutoff(const PointCloud& cloud, std::span<const KernelSpec> kernels,
                               double alpha);

/// Marginally valid band from x-slices of the joint sandwich region: one
/// global density cutoff, each slice thresholded on the y grid.
PredictionBand slicer_band(const Dataset& data, std::span<const KernelSpec> kx,
                           const KernelSpec& ky, double alpha, const GridSpec& x_grid,
                           const GridSpec& y_grid, std::vector<std::string>* warnings = nullptr);

// Membership rule behind slicer_band, usable without building the grid band.
struct SlicerRule {
    SandwichCutoff cutoff;
    std::vector<KernelSpec> kx;
    KernelSpec ky;

    bool contains(const Dataset& data, std::span<const double> x, double y) const;
};

SlicerRule make_slicer_rule(const Dataset& data, std::span<const KernelSpec> kx,
                            const KernelSpec& ky, double alpha);

}  // namespace cops
