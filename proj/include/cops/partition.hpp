#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "cops/dataset.hpp"
#include "cops/density.hpp"

namespace cops {

enum class PartitionScheme { equal_width, equal_count };

PartitionScheme partition_scheme_from_name(const std::string& name);
const char* partition_scheme_name(PartitionScheme scheme);

/// Axis-aligned box; an interval when d = 1.
struct Bin {
    std::vector<double> lo;
    std::vector<double> hi;
};

/// Finite cover of the observed X range by disjoint bins, with every data row
/// assigned to exactly one bin.
struct Partition {
    PartitionScheme scheme = PartitionScheme::equal_width;
    double parameter = 0.0;  // side length w (equal_width) or bin count (equal_count)
    std::size_t d = 1;
    std::vector<Bin> bins;
    std::vector<LocalSample> assignments;  // one per bin, same order

    std::size_t bin_count() const { return bins.size(); }
    // Bin containing x; points outside the covered range clamp to the nearest bin.
    std::size_t locate(std::span<const double> x) const;
    std::vector<double> bin_center(std::size_t k) const;
};

Partition build_partition(const Dataset& data, PartitionScheme scheme, double parameter,
                          std::vector<std::string>* warnings = nullptr);

}  // namespace cops
