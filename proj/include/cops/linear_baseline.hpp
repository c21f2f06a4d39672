#pragma once

#include "cops/band.hpp"
#include "cops/dataset.hpp"

namespace cops {

struct LinearFit {
    double intercept = 0.0;
    double slope = 0.0;
    double s = 0.0;    // residual standard error, sqrt(RSS/(n-2))
    double sxx = 0.0;  // sum of squared x deviations
    double x_mean = 0.0;
    std::size_t n = 0;

    double predict(double x) const { return intercept + slope * x; }
    // Half-width of the classical prediction interval at x.
    double half_width(double x, double alpha) const;
};

LinearFit fit_ols(const Dataset& data);

/// Ordinary least squares with the normal-theory prediction interval
/// yhat(x) +- t_{n-2,alpha/2} * s * sqrt(1 + 1/n + (x - xbar)^2/Sxx)
/// at each grid point. Requires d = 1 and n >= 3.
PredictionBand linear_baseline(const Dataset& data, double alpha, const GridSpec& x_grid);

// Two-sided Student-t quantile, upper tail alpha/2 at dof degrees of freedom.
double t_quantile_two_sided(double alpha, double dof);

}  // namespace cops
