#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "cops/interval_union.hpp"

namespace cops {

enum class BandMethod { full_conformal, sandwich_joint, slicer, cops, linear_baseline };

const char* band_method_name(BandMethod method);
BandMethod band_method_from_name(const std::string& name);

/// A prediction band over a 1-D x grid: one interval union per grid point.
struct PredictionBand {
    BandMethod method = BandMethod::slicer;
    double alpha = 0.1;
    std::vector<double> x_grid;
    std::vector<IntervalUnion> sets;

    const IntervalUnion& set_at_nearest(double x) const;
    double mean_measure() const;
};

struct GridSpec {
    double lo = 0.0;
    double hi = 1.0;
    std::size_t m = 512;

    double spacing() const { return (hi - lo) / static_cast<double>(m - 1); }
    std::vector<double> points() const;
};

void validate(const GridSpec& grid);

struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace cops
