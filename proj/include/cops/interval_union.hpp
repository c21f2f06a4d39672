#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace cops {

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

/// Finite union of disjoint closed intervals, kept sorted with strict gaps
/// between consecutive members. `measure` caches the total length.
struct IntervalUnion {
    std::vector<Interval> intervals;
    double measure = 0.0;

    bool empty() const { return intervals.empty(); }
    bool contains(double y) const;
};

// Normalizes (sorts, merges overlaps/touching endpoints) and fills measure.
IntervalUnion make_interval_union(std::vector<Interval> intervals);

// Maximal runs of included grid points; a run [i..j] becomes [grid[i], grid[j]].
IntervalUnion from_grid_indicator(std::span<const double> grid, std::span<const char> included);

double measure(const IntervalUnion& u);

// Exact Lebesgue measure of the symmetric difference, via a sweep over the
// merged endpoint list.
double symmetric_difference_measure(const IntervalUnion& a, const IntervalUnion& b);

}  // namespace cops
