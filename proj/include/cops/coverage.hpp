#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cops/band.hpp"
#include "cops/partition.hpp"
#include "cops/synthetic.hpp"

namespace cops {

/// Empirical coverage of a band against a known model. Marginal coverage uses
/// fresh joint draws looked up at the nearest x-grid point; the conditional
/// curve draws Y | X = x directly at each grid point, which keeps binning bias
/// out of the diagnostic. SE = sqrt(p(1-p)/draws).
struct CoverageReport {
    struct Estimate {
        double value = 0.0;
        double se = 0.0;
        std::size_t draws = 0;
    };
    Estimate marginal;
    std::vector<std::pair<std::size_t, Estimate>> per_bin;  // (bin index, coverage)
    std::vector<std::pair<double, Estimate>> conditional_curve;  // (x, coverage)
    std::size_t n_reps = 0;
    std::uint64_t seed = 0;
};

CoverageReport coverage_report(const PredictionBand& band, const SyntheticModel& model,
                               std::size_t n_reps, std::uint64_t seed,
                               const Partition* partition = nullptr,
                               bool conditional_curve = true,
                               std::vector<std::string>* warnings = nullptr);

/// Symmetric-difference distance between two bands on the same x grid.
struct BandDistance {
    double sup = 0.0;
    double mean = 0.0;
};

BandDistance band_distance(const PredictionBand& band, const PredictionBand& reference);

/// Efficiency-trend experiment: for each n the partition width follows the
/// critical rate r_n = (log n / n)^(2/7) (beta = 2, d = 1), anchored so that
/// w(1000) gives 10 bins over the lw_mixture support, with h proportional to
/// sqrt(r_n); records the median sup-distance between the fitted band and the
/// oracle over `reps` seeded replications.
struct RatePoint {
    double alpha = 0.1;
    std::size_t n = 0;
    double median_sup_distance = 0.0;
    double width = 0.0;
    double bandwidth = 0.0;
};

std::vector<RatePoint> rate_trend(const SyntheticModel& model, std::span<const double> alphas,
                                  std::span<const std::size_t> n_list, std::size_t reps,
                                  std::uint64_t seed);

// Critical rate (log n / n)^(beta/(beta(d+2)+1)) with beta = 2, d = 1.
double critical_rate(std::size_t n);

// Least-squares slope of log(median distance) against log(n).
double log_log_slope(std::span<const RatePoint> points);

}  // namespace cops
