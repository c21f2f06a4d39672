#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "cops/band.hpp"
#include "cops/coverage.hpp"
#include "cops/dataset.hpp"
#include "cops/tuning.hpp"

namespace cops {

struct CsvLoadResult {
    Dataset data;
    std::size_t dropped_rows = 0;  // rows with missing values in selected columns
};

/// Loads the named columns from a CSV file with a header row. Cells that read
/// "", "?", "NA", "NaN" or "null" count as missing and drop the row (tallied
/// in dropped_rows); any other non-numeric cell is an error naming the row.
CsvLoadResult load_csv(const std::string& path, std::span<const std::string> x_columns,
                       const std::string& y_column);

// FNV-1a over (n, sums, first/last values); stable provenance tag for headers.
std::string dataset_fingerprint(const Dataset& data);

/// Band file header: enough provenance to re-run the fit.
struct BandFileHeader {
    std::string method;
    double alpha = 0.0;
    std::string kernel;
    std::string bandwidths;
    std::string partition;
    std::uint64_t seed = 0;
    std::string fingerprint;
};

/// CSV with a '#'-prefixed header block and one row per (x, interval):
/// columns x,lo,hi sorted by x then lo. An empty set at x is one row with
/// empty lo/hi fields.
void write_band_csv(const std::string& path, const BandFileHeader& header,
                    const PredictionBand& band);

struct LoadedBand {
    BandFileHeader header;
    PredictionBand band;
};

LoadedBand read_band_csv(const std::string& path);

void write_coverage_csv(const std::string& path,
                        const std::map<std::string, std::string>& header,
                        const CoverageReport& report);

void write_tuning_csv(const std::string& path,
                      const std::map<std::string, std::string>& header,
                      const TuningResult& result);

void write_rate_csv(const std::string& path,
                    const std::map<std::string, std::string>& header,
                    std::span<const RatePoint> table, double slope);

// key=value pairs, one per line, '#' comments and blank lines skipped.
std::map<std::string, std::string> read_config(const std::string& path);

}  // namespace cops
