#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace cops {

/// Paired observations (x_i in R^d, y_i in R), stored row-major.
struct Dataset {
    std::vector<double> x;  // n*d, row-major
    std::vector<double> y;  // n
    std::size_t n = 0;
    std::size_t d = 0;
    std::vector<std::string> x_names;
    std::string y_name;

    double x_at(std::size_t i, std::size_t j) const { return x[i * d + j]; }
    std::span<const double> x_row(std::size_t i) const { return {x.data() + i * d, d}; }
};

void validate(const Dataset& data);

// Observed [min, max] of x-axis `axis` / of y.
std::pair<double, double> x_range(const Dataset& data, std::size_t axis);
std::pair<double, double> y_range(const Dataset& data);

// New dataset with the candidate row appended.
Dataset append_row(const Dataset& data, std::span<const double> x_row, double y);

// Row subset (used by sample splitting); indices must be valid.
Dataset select_rows(const Dataset& data, std::span<const std::size_t> indices);

}  // namespace cops
