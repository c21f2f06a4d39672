#include "cops/partition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace cops {

namespace {

// Per-axis segment edges for an equal-width cover of [lo, hi]; the last
// segment is clipped to the support edge.
std::vector<double> axis_edges(double lo, double hi, double w) {
    const double range = hi - lo;
    std::size_t segments = range > 0.0
                               ? static_cast<std::size_t>(std::ceil(range / w - 1e-12))
                               : 1;
    segments = std::max<std::size_t>(segments, 1);
    std::vector<double> edges(segments + 1);
    for (std::size_t k = 0; k <= segments; ++k)
        edges[k] = std::min(lo + w * static_cast<double>(k), hi);
    edges.back() = hi;
    return edges;
}

std::size_t segment_of(const std::vector<double>& edges, double v) {
    // Half-open segments [e_k, e_{k+1}), last one closed; out-of-range clamps.
    if (v <= edges.front()) return 0;
    if (v >= edges.back()) return edges.size() - 2;
    const auto it = std::upper_bound(edges.begin(), edges.end(), v);
    return static_cast<std::size_t>(it - edges.begin()) - 1;
}

Partition build_equal_width(const Dataset& data, double w,
                            std::vector<std::string>* warnings) {
    std::vector<std::vector<double>> edges(data.d);
    bool clipped_to_single = true;
    for (std::size_t j = 0; j < data.d; ++j) {
        auto [lo, hi] = x_range(data, j);
        edges[j] = axis_edges(lo, hi, w);
        if (edges[j].size() > 2) clipped_to_single = false;
    }
    if (clipped_to_single && warnings) {
        bool wider = true;
        for (std::size_t j = 0; j < data.d; ++j) {
            auto [lo, hi] = x_range(data, j);
            if (w < hi - lo) wider = false;
        }
        if (wider) warnings->push_back("partition width exceeds the data range: single bin");
    }

    Partition part;
    part.scheme = PartitionScheme::equal_width;
    part.parameter = w;
    part.d = data.d;

    std::size_t total = 1;
    std::vector<std::size_t> radix(data.d);
    for (std::size_t j = 0; j < data.d; ++j) {
        radix[j] = edges[j].size() - 1;
        total *= radix[j];
    }
    part.bins.resize(total);
    part.assignments.resize(total);
    for (std::size_t flat = 0; flat < total; ++flat) {
        Bin& bin = part.bins[flat];
        bin.lo.resize(data.d);
        bin.hi.resize(data.d);
        std::size_t rem = flat;
        for (std::size_t j = data.d; j-- > 0;) {
            const std::size_t k = rem % radix[j];
            rem /= radix[j];
            bin.lo[j] = edges[j][k];
            bin.hi[j] = edges[j][k + 1];
        }
        part.assignments[flat].bin_id = flat;
    }
    for (std::size_t i = 0; i < data.n; ++i) {
        std::size_t flat = 0;
        for (std::size_t j = 0; j < data.d; ++j)
            flat = flat * radix[j] + segment_of(edges[j], data.x_at(i, j));
        part.assignments[flat].member_indices.push_back(i);
    }
    return part;
}

Partition build_equal_count(const Dataset& data, double parameter,
                            std::vector<std::string>* warnings) {
    if (data.d != 1)
        throw std::invalid_argument("equal-count partition requires d = 1");
    const std::size_t requested = static_cast<std::size_t>(std::llround(parameter));
    if (requested < 1 || std::abs(parameter - static_cast<double>(requested)) > 1e-9)
        throw std::invalid_argument("equal-count partition needs a positive integer bin count");

    std::vector<double> sorted(data.x.begin(), data.x.end());
    std::sort(sorted.begin(), sorted.end());
    const double lo = sorted.front(), hi = sorted.back();

    // Interior edges at empirical quantiles, ties broken by midpoints.
    std::vector<double> edges{lo};
    for (std::size_t k = 1; k < requested; ++k) {
        const std::size_t c = k * data.n / requested;
        if (c == 0 || c >= data.n) continue;
        const double edge = 0.5 * (sorted[c - 1] + sorted[c]);
        if (edge > edges.back()) edges.push_back(edge);
    }
    edges.push_back(hi);
    while (edges.size() > 2 && edges[edges.size() - 2] >= hi) edges.erase(edges.end() - 2);
    if (warnings && edges.size() - 1 < requested)
        warnings->push_back("tied x values reduced the partition to " +
                            std::to_string(edges.size() - 1) + " bins");

    Partition part;
    part.scheme = PartitionScheme::equal_count;
    part.parameter = parameter;
    part.d = 1;
    const std::size_t bins = edges.size() - 1;
    part.bins.resize(bins);
    part.assignments.resize(bins);
    for (std::size_t k = 0; k < bins; ++k) {
        part.bins[k].lo = {edges[k]};
        part.bins[k].hi = {edges[k + 1]};
        part.assignments[k].bin_id = k;
    }
    for (std::size_t i = 0; i < data.n; ++i)
        part.assignments[segment_of(edges, data.x_at(i, 0))].member_indices.push_back(i);
    return part;
}

}  // namespace

PartitionScheme partition_scheme_from_name(const std::string& name) {
    if (name == "equal-width" || name == "equal_width") return PartitionScheme::equal_width;
    if (name == "equal-count" || name == "equal_count") return PartitionScheme::equal_count;
    throw std::invalid_argument("unknown partition scheme: " + name);
}

const char* partition_scheme_name(PartitionScheme scheme) {
    return scheme == PartitionScheme::equal_width ? "equal-width" : "equal-count";
}

std::size_t Partition::locate(std::span<const double> x) const {
    if (x.size() != d) throw std::invalid_argument("locate: dimension mismatch");
    std::size_t best = 0;
    double best_dist = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < bins.size(); ++k) {
        double dist = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            if (x[j] < bins[k].lo[j])
                dist += bins[k].lo[j] - x[j];
            else if (x[j] > bins[k].hi[j])
                dist += x[j] - bins[k].hi[j];
        }
        if (dist == 0.0) {
            // Interior edges belong to the upper bin, matching assignment.
            bool on_upper_edge = false;
            for (std::size_t j = 0; j < d; ++j)
                if (x[j] == bins[k].hi[j] && bins[k].hi[j] < bins.back().hi[j])
                    on_upper_edge = true;
            if (!on_upper_edge) return k;
            dist = 1e-300;
        }
        if (dist < best_dist) {
            best_dist = dist;
            best = k;
        }
    }
    return best;
}

std::vector<double> Partition::bin_center(std::size_t k) const {
    std::vector<double> c(d);
    for (std::size_t j = 0; j < d; ++j) c[j] = 0.5 * (bins[k].lo[j] + bins[k].hi[j]);
    return c;
}

Partition build_partition(const Dataset& data, PartitionScheme scheme, double parameter,
                          std::vector<std::string>* warnings) {
    validate(data);
    if (!(parameter > 0.0)) throw std::invalid_argument("partition parameter must be positive");
    return scheme == PartitionScheme::equal_width
               ? build_equal_width(data, parameter, warnings)
               : build_equal_count(data, parameter, warnings);
}

}  // namespace cops
