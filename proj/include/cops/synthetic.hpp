#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "cops/band.hpp"
#include "cops/dataset.hpp"

namespace cops {

enum class ModelName { indep_gaussian, lw_mixture };

ModelName model_from_name(const std::string& name);
const char* model_name(ModelName model);

/// Synthetic generators with known conditional laws.
///
/// indep_gaussian: X, Y independent standard normal (d = 1).
/// lw_mixture: X ~ Unif[-1.5, 1.5],
///   Y | X = x ~ 0.5 N(f(x) - g(x), s2(x)) + 0.5 N(f(x) + g(x), s2(x)),
///   f(x) = (x-1)^2 (x+1), g(x) = 2 sqrt(x+0.5) for x >= -0.5 else 0,
///   s2(x) = 1/4 + |x|. A single Gaussian for x <= -0.5; a two-component
///   mixture with nearly separated components for large x.
struct SyntheticModel {
    ModelName name = ModelName::lw_mixture;

    Dataset sample(std::size_t n, std::uint64_t seed) const;
    std::vector<double> sample_y_given_x(double x, std::size_t count, std::uint64_t seed) const;

    double conditional_density(double y, double x) const;
    // P(Y <= y | X = x), exact via the normal CDF.
    double conditional_cdf(double y, double x) const;
    // Support box used for default grids.
    std::pair<double, double> x_support() const;
    std::pair<double, double> y_envelope() const;
};

double lw_mean_shift(double x);     // f
double lw_mode_offset(double x);    // g
double lw_variance(double x);       // s2

/// Conditional oracle band: per x-grid point, the upper level set of
/// p(y|x) whose conditional mass is 1 - alpha (mass within `mass_tol` from
/// above, computed exactly through the conditional CDF; interval endpoints
/// refined off-grid by bisection).
PredictionBand oracle_band(const SyntheticModel& model, double alpha, const GridSpec& x_grid,
                           const GridSpec& y_grid, double mass_tol = 1e-4);

}  // namespace cops
