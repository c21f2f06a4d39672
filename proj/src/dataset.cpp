#include "cops/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cops {

void validate(const Dataset& data) {
    if (data.n < 1 || data.d < 1) throw std::invalid_argument("dataset: need n >= 1 and d >= 1");
    if (data.x.size() != data.n * data.d || data.y.size() != data.n)
        throw std::invalid_argument("dataset: storage sizes do not match n, d");
    for (double v : data.x)
        if (!std::isfinite(v)) throw std::invalid_argument("dataset: non-finite x entry");
    for (double v : data.y)
        if (!std::isfinite(v)) throw std::invalid_argument("dataset: non-finite y entry");
}

std::pair<double, double> x_range(const Dataset& data, std::size_t axis) {
    if (axis >= data.d) throw std::invalid_argument("x_range: axis out of range");
    double lo = data.x_at(0, axis), hi = lo;
    for (std::size_t i = 1; i < data.n; ++i) {
        lo = std::min(lo, data.x_at(i, axis));
        hi = std::max(hi, data.x_at(i, axis));
    }
    return {lo, hi};
}

std::pair<double, double> y_range(const Dataset& data) {
    auto [lo, hi] = std::minmax_element(data.y.begin(), data.y.end());
    return {*lo, *hi};
}

Dataset append_row(const Dataset& data, std::span<const double> x_row, double y) {
    if (x_row.size() != data.d) throw std::invalid_argument("append_row: dimension mismatch");
    Dataset out = data;
    out.x.insert(out.x.end(), x_row.begin(), x_row.end());
    out.y.push_back(y);
    out.n += 1;
    return out;
}

Dataset select_rows(const Dataset& data, std::span<const std::size_t> indices) {
    Dataset out;
    out.d = data.d;
    out.n = indices.size();
    out.x_names = data.x_names;
    out.y_name = data.y_name;
    out.x.reserve(out.n * out.d);
    out.y.reserve(out.n);
    for (std::size_t i : indices) {
        if (i >= data.n) throw std::invalid_argument("select_rows: index out of range");
        auto row = data.x_row(i);
        out.x.insert(out.x.end(), row.begin(), row.end());
        out.y.push_back(data.y[i]);
    }
    return out;
}

}  // namespace cops
