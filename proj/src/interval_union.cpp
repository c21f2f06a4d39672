#include "cops/interval_union.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cops {

bool IntervalUnion::contains(double y) const {
    auto it = std::partition_point(intervals.begin(), intervals.end(),
                                   [y](const Interval& iv) { return iv.hi < y; });
    return it != intervals.end() && it->lo <= y;
}

IntervalUnion make_interval_union(std::vector<Interval> intervals) {
    for (const auto& iv : intervals)
        if (!(iv.lo <= iv.hi) || !std::isfinite(iv.lo) || !std::isfinite(iv.hi))
            throw std::invalid_argument("interval union: malformed interval");
    std::sort(intervals.begin(), intervals.end(),
              [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
    IntervalUnion out;
    for (const auto& iv : intervals) {
        if (!out.intervals.empty() && iv.lo <= out.intervals.back().hi) {
            out.intervals.back().hi = std::max(out.intervals.back().hi, iv.hi);
        } else {
            out.intervals.push_back(iv);
        }
    }
    for (const auto& iv : out.intervals) out.measure += iv.hi - iv.lo;
    return out;
}

IntervalUnion from_grid_indicator(std::span<const double> grid, std::span<const char> included) {
    if (grid.size() != included.size())
        throw std::invalid_argument("from_grid_indicator: size mismatch");
    std::vector<Interval> runs;
    std::size_t i = 0;
    while (i < grid.size()) {
        if (!included[i]) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j + 1 < grid.size() && included[j + 1]) ++j;
        runs.push_back({grid[i], grid[j]});
        i = j + 1;
    }
    return make_interval_union(std::move(runs));
}

double measure(const IntervalUnion& u) { return u.measure; }

double symmetric_difference_measure(const IntervalUnion& a, const IntervalUnion& b) {
    std::vector<double> pts;
    pts.reserve(2 * (a.intervals.size() + b.intervals.size()));
    for (const auto& iv : a.intervals) {
        pts.push_back(iv.lo);
        pts.push_back(iv.hi);
    }
    for (const auto& iv : b.intervals) {
        pts.push_back(iv.lo);
        pts.push_back(iv.hi);
    }
    std::sort(pts.begin(), pts.end());
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        const double len = pts[i + 1] - pts[i];
        if (len <= 0.0) continue;
        const double mid = 0.5 * (pts[i] + pts[i + 1]);
        if (a.contains(mid) != b.contains(mid)) total += len;
    }
    return total;
}

}  // namespace cops
