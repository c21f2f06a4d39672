#include "cops/band.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace cops {

const char* band_method_name(BandMethod method) {
    switch (method) {
        case BandMethod::full_conformal: return "full_conformal";
        case BandMethod::sandwich_joint: return "sandwich_joint";
        case BandMethod::slicer: return "slicer";
        case BandMethod::cops: return "cops";
        case BandMethod::linear_baseline: return "linear_baseline";
    }
    return "?";
}

BandMethod band_method_from_name(const std::string& name) {
    for (BandMethod m : {BandMethod::full_conformal, BandMethod::sandwich_joint,
                         BandMethod::slicer, BandMethod::cops, BandMethod::linear_baseline})
        if (name == band_method_name(m)) return m;
    throw std::invalid_argument("unknown band method: " + name);
}

const IntervalUnion& PredictionBand::set_at_nearest(double x) const {
    if (x_grid.empty()) throw std::invalid_argument("band has no x grid");
    auto it = std::lower_bound(x_grid.begin(), x_grid.end(), x);
    std::size_t idx;
    if (it == x_grid.begin()) {
        idx = 0;
    } else if (it == x_grid.end()) {
        idx = x_grid.size() - 1;
    } else {
        const std::size_t hi = static_cast<std::size_t>(it - x_grid.begin());
        idx = (x - x_grid[hi - 1] <= x_grid[hi] - x) ? hi - 1 : hi;
    }
    return sets[idx];
}

double PredictionBand::mean_measure() const {
    if (sets.empty()) return 0.0;
    double sum = 0.0;
    for (const auto& s : sets) sum += s.measure;
    return sum / static_cast<double>(sets.size());
}

void validate(const GridSpec& grid) {
    if (!(grid.lo < grid.hi)) throw std::invalid_argument("grid: need lo < hi");
    if (grid.m < 2) throw std::invalid_argument("grid: need m >= 2");
}

std::vector<double> GridSpec::points() const {
    std::vector<double> pts(m);
    const double step = spacing();
    for (std::size_t i = 0; i < m; ++i) pts[i] = lo + step * static_cast<double>(i);
    pts.back() = hi;
    return pts;
}

}  // namespace cops
