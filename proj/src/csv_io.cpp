#include "cops/csv_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace cops {

namespace {

// Minimal RFC-4180-style field splitter (double quotes, embedded commas).
std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    fields.push_back(cur);
    return fields;
}

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

bool is_missing(const std::string& cell) {
    const std::string t = trim(cell);
    return t.empty() || t == "?" || t == "NA" || t == "NaN" || t == "nan" || t == "null";
}

double parse_cell(const std::string& cell, std::size_t row, const std::string& column) {
    const std::string t = trim(cell);
    try {
        std::size_t pos = 0;
        const double v = std::stod(t, &pos);
        if (pos != t.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw std::invalid_argument("non-numeric cell in column '" + column + "' at data row " +
                                    std::to_string(row) + ": '" + t + "'");
    }
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::uint64_t fnv1a(std::uint64_t hash, const void* bytes, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(bytes);
    for (std::size_t i = 0; i < len; ++i) {
        hash ^= p[i];
        hash *= 0x100000001b3ull;
    }
    return hash;
}

std::uint64_t fnv1a_double(std::uint64_t hash, double v) {
    return fnv1a(hash, &v, sizeof(v));
}

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::invalid_argument("cannot open output file: " + path);
    return out;
}

}  // namespace

CsvLoadResult load_csv(const std::string& path, std::span<const std::string> x_columns,
                       const std::string& y_column) {
    if (x_columns.empty()) throw std::invalid_argument("load_csv: need at least one x column");
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot read file: " + path);

    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument("empty file: " + path);
    const std::vector<std::string> header = split_csv_line(line);

    auto column_index = [&](const std::string& name) {
        for (std::size_t j = 0; j < header.size(); ++j)
            if (trim(header[j]) == name) return j;
        std::string available;
        for (const auto& h : header) available += (available.empty() ? "" : ", ") + trim(h);
        throw std::invalid_argument("column '" + name + "' not found; available: " + available);
    };

    std::vector<std::size_t> x_idx;
    for (const auto& c : x_columns) x_idx.push_back(column_index(c));
    const std::size_t y_idx = column_index(y_column);

    CsvLoadResult result;
    result.data.d = x_columns.size();
    result.data.x_names.assign(x_columns.begin(), x_columns.end());
    result.data.y_name = y_column;

    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (trim(line).empty()) continue;
        const std::vector<std::string> fields = split_csv_line(line);
        auto cell = [&](std::size_t j) -> const std::string& {
            static const std::string empty;
            return j < fields.size() ? fields[j] : empty;
        };
        bool missing = is_missing(cell(y_idx));
        for (std::size_t j : x_idx) missing = missing || is_missing(cell(j));
        if (missing) {
            ++result.dropped_rows;
            continue;
        }
        for (std::size_t j : x_idx)
            result.data.x.push_back(parse_cell(cell(j), row, trim(header[j])));
        result.data.y.push_back(parse_cell(cell(y_idx), row, y_column));
        ++result.data.n;
    }
    if (result.data.n == 0)
        throw std::invalid_argument("no usable rows in " + path + " (dropped " +
                                    std::to_string(result.dropped_rows) + ")");
    validate(result.data);
    return result;
}

std::string dataset_fingerprint(const Dataset& data) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    h = fnv1a(h, &data.n, sizeof(data.n));
    h = fnv1a(h, &data.d, sizeof(data.d));
    double sx = 0.0, sy = 0.0;
    for (double v : data.x) sx += v;
    for (double v : data.y) sy += v;
    h = fnv1a_double(h, sx);
    h = fnv1a_double(h, sy);
    h = fnv1a_double(h, data.x.front());
    h = fnv1a_double(h, data.x.back());
    h = fnv1a_double(h, data.y.front());
    h = fnv1a_double(h, data.y.back());
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void write_band_csv(const std::string& path, const BandFileHeader& header,
                    const PredictionBand& band) {
    std::ofstream out = open_output(path);
    out << "# method=" << header.method << "\n";
    out << "# alpha=" << format_double(header.alpha) << "\n";
    out << "# kernel=" << header.kernel << "\n";
    out << "# bandwidths=" << header.bandwidths << "\n";
    out << "# partition=" << header.partition << "\n";
    out << "# seed=" << header.seed << "\n";
    out << "# fingerprint=" << header.fingerprint << "\n";
    out << "x,lo,hi\n";
    for (std::size_t i = 0; i < band.x_grid.size(); ++i) {
        const std::string x = format_double(band.x_grid[i]);
        if (band.sets[i].empty()) {
            out << x << ",,\n";
            continue;
        }
        for (const auto& iv : band.sets[i].intervals)
            out << x << "," << format_double(iv.lo) << "," << format_double(iv.hi) << "\n";
    }
}

LoadedBand read_band_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot read band file: " + path);
    LoadedBand loaded;
    std::string line;
    bool saw_columns = false;
    std::vector<double> xs;
    std::vector<std::vector<Interval>> sets;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            const auto eq = line.find('=');
            if (eq == std::string::npos) continue;
            const std::string key = trim(line.substr(1, eq - 1));
            const std::string value = trim(line.substr(eq + 1));
            if (key == "method") loaded.header.method = value;
            else if (key == "alpha") loaded.header.alpha = std::stod(value);
            else if (key == "kernel") loaded.header.kernel = value;
            else if (key == "bandwidths") loaded.header.bandwidths = value;
            else if (key == "partition") loaded.header.partition = value;
            else if (key == "seed") loaded.header.seed = std::stoull(value);
            else if (key == "fingerprint") loaded.header.fingerprint = value;
            continue;
        }
        if (!saw_columns) {  // the x,lo,hi column row
            saw_columns = true;
            continue;
        }
        const auto fields = split_csv_line(line);
        if (fields.size() != 3)
            throw std::invalid_argument("band file: malformed row '" + line + "'");
        const double x = std::stod(fields[0]);
        if (xs.empty() || x != xs.back()) {
            xs.push_back(x);
            sets.emplace_back();
        }
        if (!trim(fields[1]).empty())
            sets.back().push_back({std::stod(fields[1]), std::stod(fields[2])});
    }
    if (xs.empty()) throw std::invalid_argument("band file has no rows: " + path);
    loaded.band.method = band_method_from_name(loaded.header.method);
    loaded.band.alpha = loaded.header.alpha;
    loaded.band.x_grid = std::move(xs);
    loaded.band.sets.reserve(sets.size());
    for (auto& s : sets) loaded.band.sets.push_back(make_interval_union(std::move(s)));
    return loaded;
}

void write_coverage_csv(const std::string& path,
                        const std::map<std::string, std::string>& header,
                        const CoverageReport& report) {
    std::ofstream out = open_output(path);
    for (const auto& [k, v] : header) out << "# " << k << "=" << v << "\n";
    out << "# n_reps=" << report.n_reps << "\n";
    out << "# seed=" << report.seed << "\n";
    out << "kind,key,estimate,se,draws\n";
    out << "marginal,," << format_double(report.marginal.value) << ","
        << format_double(report.marginal.se) << "," << report.marginal.draws << "\n";
    for (const auto& [bin, e] : report.per_bin)
        out << "bin," << bin << "," << format_double(e.value) << "," << format_double(e.se)
            << "," << e.draws << "\n";
    for (const auto& [x, e] : report.conditional_curve)
        out << "conditional," << format_double(x) << "," << format_double(e.value) << ","
            << format_double(e.se) << "," << e.draws << "\n";
}

void write_tuning_csv(const std::string& path,
                      const std::map<std::string, std::string>& header,
                      const TuningResult& result) {
    std::ofstream out = open_output(path);
    for (const auto& [k, v] : header) out << "# " << k << "=" << v << "\n";
    out << "# chosen_w=" << format_double(result.chosen_w) << "\n";
    out << "# split_seed=" << result.split_seed << "\n";
    out << "# tuning_n=" << result.tuning_n << "\n";
    out << "kind,key,value\n";
    for (const auto& [w, q] : result.objective_trace)
        out << "trace," << format_double(w) << "," << format_double(q) << "\n";
    for (std::size_t k = 0; k < result.chosen_h_per_bin.size(); ++k)
        out << "bin_h," << k << "," << format_double(result.chosen_h_per_bin[k]) << "\n";
    for (std::size_t k = 0; k < result.tuning_bin_measures.size(); ++k)
        out << "tuning_bin_measure," << k << ","
            << format_double(result.tuning_bin_measures[k]) << "\n";
    for (std::size_t k = 0; k < result.tuning_bin_counts.size(); ++k)
        out << "tuning_bin_count," << k << "," << result.tuning_bin_counts[k] << "\n";
}

void write_rate_csv(const std::string& path,
                    const std::map<std::string, std::string>& header,
                    std::span<const RatePoint> table, double slope) {
    std::ofstream out = open_output(path);
    for (const auto& [k, v] : header) out << "# " << k << "=" << v << "\n";
    out << "# log_log_slope=" << format_double(slope) << "\n";
    out << "alpha,n,median_sup_distance,width,bandwidth\n";
    for (const auto& p : table)
        out << format_double(p.alpha) << "," << p.n << ","
            << format_double(p.median_sup_distance) << "," << format_double(p.width) << ","
            << format_double(p.bandwidth) << "\n";
}

std::map<std::string, std::string> read_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot read config file: " + path);
    std::map<std::string, std::string> config;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        " is not key=value: '" + t + "'");
        config[trim(t.substr(0, eq))] = trim(t.substr(eq + 1));
    }
    return config;
}

}  // namespace cops
