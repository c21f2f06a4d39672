#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "cops/cops_band.hpp"
#include "cops/dataset.hpp"
#include "cops/partition.hpp"

namespace cops {

struct TuningInfeasible : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Candidate sets for the partition width and the per-bin kernel bandwidth.
struct TuningGrid {
    std::vector<double> widths;
    std::vector<double> bandwidths;
};

// W = range/{4,6,8,10,14,20}, H = Silverman(y) * {0.5, 0.75, 1, 1.5, 2}.
TuningGrid default_tuning_grid(const Dataset& data);

struct TuningResult {
    double chosen_w = 0.0;
    std::vector<double> chosen_h_per_bin;  // indexed by final-partition bin
    std::vector<std::pair<double, double>> objective_trace;  // (w, Q(w)), ascending w
    std::uint64_t split_seed = 0;
    // Q(chosen_w) decomposition on the tuning half, for audit:
    std::vector<std::size_t> tuning_bin_counts;
    std::vector<double> tuning_bin_measures;
    std::size_t tuning_n = 0;
};

/// Random equal split, reproducible from the seed. Sizes floor(n/2) and
/// ceil(n/2); row order within each half follows the original dataset.
std::pair<Dataset, Dataset> split(const Dataset& data, std::uint64_t seed);

struct TuneOutcome {
    TuningResult result;
    Partition partition;  // built on the fitting half with the chosen width
    CopsBand band;        // fitted on the held-out half only
};

/// Two-stage width/bandwidth selection by sample splitting: per (w, k) the
/// bandwidth minimizing the tuning-half set measure, then the width minimizing
/// Q(w) = (1/n1) * sum_k n_k * measure_k. Ties break toward smaller w and h.
/// The final band is refit on the other half with the chosen parameters.
TuneOutcome tune_cops(const Dataset& data, const TuningGrid& grid, double alpha,
                      const GridSpec& x_grid, const GridSpec& y_grid, std::uint64_t seed,
                      KernelFamily family = KernelFamily::gaussian,
                      const CopsOptions& options = {},
                      std::vector<std::string>* warnings = nullptr);

}  // namespace cops
