#include "cops/coverage.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "cops/cops_band.hpp"
#include "cops/dataset.hpp"

namespace cops {

namespace {

CoverageReport::Estimate make_estimate(std::size_t hits, std::size_t draws) {
    CoverageReport::Estimate e;
    e.draws = draws;
    if (draws == 0) return e;
    e.value = static_cast<double>(hits) / static_cast<double>(draws);
    e.se = std::sqrt(e.value * (1.0 - e.value) / static_cast<double>(draws));
    return e;
}

}  // namespace

CoverageReport coverage_report(const PredictionBand& band, const SyntheticModel& model,
                               std::size_t n_reps, std::uint64_t seed,
                               const Partition* partition, bool conditional_curve,
                               std::vector<std::string>* warnings) {
    if (band.x_grid.empty()) throw std::invalid_argument("coverage_report: empty band");
    const auto [supp_lo, supp_hi] = model.x_support();
    if (warnings &&
        (band.x_grid.front() > supp_lo + 1e-9 || band.x_grid.back() < supp_hi - 1e-9))
        warnings->push_back(
            "band x grid does not cover the model support; draws outside clamp to the "
            "nearest grid point");

    CoverageReport report;
    report.n_reps = n_reps;
    report.seed = seed;

    // Marginal: fresh joint draws against the nearest-x set.
    const Dataset fresh = model.sample(n_reps, seed);
    std::size_t hits = 0;
    std::vector<std::size_t> bin_hits, bin_draws;
    if (partition) {
        bin_hits.assign(partition->bin_count(), 0);
        bin_draws.assign(partition->bin_count(), 0);
    }
    for (std::size_t i = 0; i < n_reps; ++i) {
        const double x = fresh.x[i], y = fresh.y[i];
        const bool in = band.set_at_nearest(x).contains(y);
        if (in) ++hits;
        if (partition) {
            const std::size_t k = partition->locate(std::span<const double>{&x, 1});
            ++bin_draws[k];
            if (in) ++bin_hits[k];
        }
    }
    report.marginal = make_estimate(hits, n_reps);
    if (partition)
        for (std::size_t k = 0; k < partition->bin_count(); ++k)
            report.per_bin.emplace_back(k, make_estimate(bin_hits[k], bin_draws[k]));

    // Conditional curve: draw Y | X = x directly at each grid x.
    if (conditional_curve) {
        for (std::size_t ix = 0; ix < band.x_grid.size(); ++ix) {
            const double x = band.x_grid[ix];
            const auto ys = model.sample_y_given_x(x, n_reps, seed + 0x9e3779b9u + ix);
            std::size_t ok = 0;
            for (double y : ys)
                if (band.sets[ix].contains(y)) ++ok;
            report.conditional_curve.emplace_back(x, make_estimate(ok, n_reps));
        }
    }
    return report;
}

BandDistance band_distance(const PredictionBand& band, const PredictionBand& reference) {
    if (band.x_grid.size() != reference.x_grid.size())
        throw std::invalid_argument("band_distance: x grid mismatch");
    for (std::size_t i = 0; i < band.x_grid.size(); ++i)
        if (std::abs(band.x_grid[i] - reference.x_grid[i]) > 1e-12)
            throw std::invalid_argument("band_distance: x grid mismatch");
    BandDistance dist;
    for (std::size_t i = 0; i < band.x_grid.size(); ++i) {
        const double d = symmetric_difference_measure(band.sets[i], reference.sets[i]);
        dist.sup = std::max(dist.sup, d);
        dist.mean += d;
    }
    dist.mean /= static_cast<double>(band.x_grid.size());
    return dist;
}

double critical_rate(std::size_t n) {
    const double nn = static_cast<double>(n);
    return std::pow(std::log(nn) / nn, 2.0 / 7.0);
}

namespace {

// Marginal standard deviation of Y under the model, by quadrature over x.
double model_y_sd(const SyntheticModel& model) {
    if (model.name == ModelName::indep_gaussian) return 1.0;
    const int m = 2000;
    double mean = 0.0, second = 0.0;
    for (int i = 0; i <= m; ++i) {
        const double x = -1.5 + 3.0 * i / m;
        const double w = (i == 0 || i == m) ? 0.5 : 1.0;
        const double f = lw_mean_shift(x), g = lw_mode_offset(x);
        mean += w * f;
        second += w * (lw_variance(x) + f * f + g * g);
    }
    mean /= m;
    second /= m;
    return std::sqrt(second - mean * mean);
}

}  // namespace

std::vector<RatePoint> rate_trend(const SyntheticModel& model, std::span<const double> alphas,
                                  std::span<const std::size_t> n_list, std::size_t reps,
                                  std::uint64_t seed) {
    for (std::size_t i = 1; i < n_list.size(); ++i)
        if (n_list[i] <= n_list[i - 1])
            throw std::invalid_argument("rate_trend: n_list must be increasing");

    const auto [x_lo, x_hi] = model.x_support();
    const auto [y_lo, y_hi] = model.y_envelope();
    const GridSpec x_grid{x_lo, x_hi, 128};
    const GridSpec y_grid{y_lo, y_hi, 512};
    const std::vector<double> ys = y_grid.points();

    const std::size_t n0 = 1000;
    const double w0 = (x_hi - x_lo) / 10.0;  // 10 bins at the anchor size
    const double h0 = 1.06 * model_y_sd(model) * std::pow(static_cast<double>(n0), -0.2);
    const double r0 = critical_rate(n0);

    std::vector<RatePoint> table;
    for (double alpha : alphas) {
        const PredictionBand oracle = oracle_band(model, alpha, x_grid, y_grid);
        for (std::size_t n : n_list) {
            const double ratio = critical_rate(n) / r0;
            const double w = w0 * ratio;
            const double h = h0 * std::sqrt(ratio);
            std::vector<double> sups(reps);
            for (std::size_t rep = 0; rep < reps; ++rep) {
                const Dataset data = model.sample(n, seed + rep);
                const Partition part = build_partition(data, PartitionScheme::equal_width, w);
                const CopsBand fit = cops_band(data, part, KernelSpec{KernelFamily::gaussian, h},
                                               alpha, x_grid, y_grid);
                sups[rep] = band_distance(fit.band, oracle).sup;
            }
            std::sort(sups.begin(), sups.end());
            const double median = reps % 2 == 1
                                      ? sups[reps / 2]
                                      : 0.5 * (sups[reps / 2 - 1] + sups[reps / 2]);
            table.push_back({alpha, n, median, w, h});
        }
    }
    return table;
}

double log_log_slope(std::span<const RatePoint> points) {
    if (points.size() < 2) throw std::invalid_argument("log_log_slope: need >= 2 points");
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    const double m = static_cast<double>(points.size());
    for (const auto& p : points) {
        const double lx = std::log(static_cast<double>(p.n));
        const double ly = std::log(p.median_sup_distance);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

}  // namespace cops
