#include "cops/conformal.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace cops {

namespace {

constexpr double kRankEps = 1e-9;

void check_alpha(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("alpha must lie in (0,1)");
}

double kernel_product_peak(std::span<const KernelSpec> kernels) {
    double peak = 1.0;
    for (const auto& k : kernels) peak *= kernel_peak(k);
    return peak;
}

double bandwidth_product(std::span<const KernelSpec> kernels) {
    double prod = 1.0;
    for (const auto& k : kernels) prod *= k.bandwidth;
    return prod;
}

// Product kernel term prod_j K_j((z_j - row_j)/h_j); no normalization.
double cloud_term(std::span<const KernelSpec> kernels, std::span<const double> row,
                  std::span<const double> z) {
    double term = 1.0;
    for (std::size_t j = 0; j < kernels.size(); ++j) {
        term *= evaluate(kernels[j], (z[j] - row[j]) / kernels[j].bandwidth);
        if (term == 0.0) return 0.0;
    }
    return term;
}

// Plain KDE value at every sample point, ordered as the rows.
std::vector<double> sample_densities(const PointCloud& cloud,
                                     std::span<const KernelSpec> kernels) {
    std::vector<double> dens(cloud.n, 0.0);
    const double norm = static_cast<double>(cloud.n) * bandwidth_product(kernels);
    for (std::size_t i = 0; i < cloud.n; ++i) {
        double sum = 0.0;
        for (std::size_t k = 0; k < cloud.n; ++k)
            sum += cloud_term(kernels, cloud.row(k), cloud.row(i));
        dens[i] = sum / norm;
    }
    return dens;
}

// j-th smallest value (1-based) under the (value, index) tie order.
double order_statistic(std::vector<double> values, std::size_t j) {
    std::sort(values.begin(), values.end());
    return values[j - 1];
}

void check_cloud(const PointCloud& cloud, std::span<const KernelSpec> kernels,
                 std::span<const GridSpec> grids) {
    if (cloud.n == 0) throw std::invalid_argument("conformal: empty sample");
    if (kernels.size() != cloud.p || grids.size() != cloud.p)
        throw std::invalid_argument("conformal: kernel/grid dimension mismatch");
    for (const auto& k : kernels) validate(k);
    for (const auto& g : grids) validate(g);
}

void warn_if_grid_misses_data(const PointCloud& cloud, std::span<const GridSpec> grids,
                              std::vector<std::string>* warnings) {
    if (!warnings) return;
    for (std::size_t j = 0; j < cloud.p; ++j) {
        double lo = cloud.pts[j], hi = cloud.pts[j];
        for (std::size_t i = 1; i < cloud.n; ++i) {
            lo = std::min(lo, cloud.pts[i * cloud.p + j]);
            hi = std::max(hi, cloud.pts[i * cloud.p + j]);
        }
        if (grids[j].lo > lo || grids[j].hi < hi)
            warnings->push_back("grid axis " + std::to_string(j) +
                                " does not cover the data range");
    }
}

// Applies fn to every point of the cartesian grid, last axis fastest.
template <typename Fn>
void for_each_grid_point(std::span<const GridSpec> grids, Fn&& fn) {
    std::vector<std::vector<double>> axes;
    axes.reserve(grids.size());
    std::size_t total = 1;
    for (const auto& g : grids) {
        axes.push_back(g.points());
        total *= g.m;
    }
    std::vector<double> z(grids.size());
    for (std::size_t flat = 0; flat < total; ++flat) {
        std::size_t rem = flat;
        for (std::size_t j = grids.size(); j-- > 0;) {
            z[j] = axes[j][rem % grids[j].m];
            rem /= grids[j].m;
        }
        fn(flat, std::span<const double>(z));
    }
}

}  // namespace

RankThreshold rank_threshold_from_name(const std::string& name) {
    if (name == "alpha") return RankThreshold::alpha;
    if (name == "alpha-tilde" || name == "alpha_tilde") return RankThreshold::alpha_tilde;
    throw std::invalid_argument("unknown threshold rule: " + name);
}

bool rank_passes(std::size_t count, std::size_t m_plus_1, double alpha,
                 RankThreshold threshold) {
    const double m1 = static_cast<double>(m_plus_1);
    const double cutoff = threshold == RankThreshold::alpha
                              ? alpha * m1
                              : std::floor(alpha * m1 + kRankEps);
    return static_cast<double>(count) + kRankEps >= cutoff;
}

double conformal_pvalue(std::span<const double> scores) {
    if (scores.empty()) throw std::invalid_argument("conformal_pvalue: no scores");
    for (double s : scores)
        if (!std::isfinite(s)) throw std::invalid_argument("conformal_pvalue: non-finite score");
    const double candidate = scores.back();
    std::size_t count = 0;
    for (double s : scores)
        if (s <= candidate) ++count;
    return static_cast<double>(count) / static_cast<double>(scores.size());
}

PointCloud joint_points(const Dataset& data) {
    validate(data);
    PointCloud cloud;
    cloud.n = data.n;
    cloud.p = data.d + 1;
    cloud.pts.reserve(cloud.n * cloud.p);
    for (std::size_t i = 0; i < data.n; ++i) {
        auto row = data.x_row(i);
        cloud.pts.insert(cloud.pts.end(), row.begin(), row.end());
        cloud.pts.push_back(data.y[i]);
    }
    return cloud;
}

double cloud_kde(const PointCloud& cloud, std::span<const KernelSpec> kernels,
                 std::span<const double> z) {
    if (cloud.n == 0) throw std::invalid_argument("cloud_kde: empty sample");
    if (kernels.size() != cloud.p || z.size() != cloud.p)
        throw std::invalid_argument("cloud_kde: dimension mismatch");
    double sum = 0.0;
    for (std::size_t i = 0; i < cloud.n; ++i) sum += cloud_term(kernels, cloud.row(i), z);
    return sum / (static_cast<double>(cloud.n) * bandwidth_product(kernels));
}

std::vector<char> full_conformal_set(const PointCloud& cloud,
                                     std::span<const KernelSpec> kernels, double alpha,
                                     std::span<const GridSpec> grids, RankThreshold threshold,
                                     std::vector<std::string>* warnings) {
    check_alpha(alpha);
    check_cloud(cloud, kernels, grids);
    if (cloud.p > 2 || cloud.n > 500)
        throw std::invalid_argument(
            "full_conformal_set: supported only for p <= 2 and n <= 500; "
            "use the sandwich/slicer path for larger problems");
    warn_if_grid_misses_data(cloud, grids, warnings);

    const std::vector<double> base = sample_densities(cloud, kernels);
    const double n = static_cast<double>(cloud.n);
    const double shrink = n / (n + 1.0);
    const double denom = (n + 1.0) * bandwidth_product(kernels);
    const double peak = kernel_product_peak(kernels);

    std::size_t total = 1;
    for (const auto& g : grids) total *= g.m;
    std::vector<char> included(total, 0);
    std::vector<double> terms(cloud.n);

    for_each_grid_point(grids, [&](std::size_t flat, std::span<const double> z) {
        double term_sum = 0.0;
        for (std::size_t i = 0; i < cloud.n; ++i) {
            terms[i] = cloud_term(kernels, cloud.row(i), z);
            term_sum += terms[i];
        }
        // Augmented estimator evaluated at the candidate z itself.
        const double sigma_cand =
            shrink * term_sum / (n * bandwidth_product(kernels)) + peak / denom;
        std::size_t count = 1;  // the candidate's own indicator
        for (std::size_t i = 0; i < cloud.n; ++i) {
            const double sigma_i = shrink * base[i] + terms[i] / denom;
            if (sigma_i <= sigma_cand) ++count;
        }
        included[flat] = rank_passes(count, cloud.n + 1, alpha, threshold) ? 1 : 0;
    });
    return included;
}

SandwichCutoff sandwich_cutoff(const PointCloud& cloud, std::span<const KernelSpec> kernels,
                               double alpha) {
    check_alpha(alpha);
    if (cloud.n == 0) throw std::invalid_argument("sandwich_cutoff: empty sample");
    const std::size_t j =
        static_cast<std::size_t>(std::floor(static_cast<double>(cloud.n) * alpha + kRankEps));
    if (j == 0) return {0.0, false};
    const std::vector<double> base = sample_densities(cloud, kernels);
    const double slack = kernel_product_peak(kernels) /
                         (static_cast<double>(cloud.n) * bandwidth_product(kernels));
    return {order_statistic(base, j) - slack, true};
}

std::vector<char> sandwich_joint_set(const PointCloud& cloud,
                                     std::span<const KernelSpec> kernels, double alpha,
                                     std::span<const GridSpec> grids,
                                     std::vector<std::string>* warnings) {
    check_cloud(cloud, kernels, grids);
    warn_if_grid_misses_data(cloud, grids, warnings);
    const SandwichCutoff cutoff = sandwich_cutoff(cloud, kernels, alpha);

    std::size_t total = 1;
    for (const auto& g : grids) total *= g.m;
    if (!cutoff.usable) {
        if (warnings)
            warnings->push_back("floor(n*alpha) = 0: sandwich set degenerates to the whole grid");
        return std::vector<char>(total, 1);
    }
    std::vector<char> included(total, 0);
    for_each_grid_point(grids, [&](std::size_t flat, std::span<const double> z) {
        included[flat] = cloud_kde(cloud, kernels, z) >= cutoff.threshold ? 1 : 0;
    });
    return included;
}

SlicerRule make_slicer_rule(const Dataset& data, std::span<const KernelSpec> kx,
                            const KernelSpec& ky, double alpha) {
    validate(data);
    if (kx.size() != data.d) throw std::invalid_argument("slicer: kernel dimension mismatch");
    std::vector<KernelSpec> kernels(kx.begin(), kx.end());
    kernels.push_back(ky);
    SlicerRule rule;
    rule.cutoff = sandwich_cutoff(joint_points(data), kernels, alpha);
    rule.kx.assign(kx.begin(), kx.end());
    rule.ky = ky;
    return rule;
}

bool SlicerRule::contains(const Dataset& data, std::span<const double> x, double y) const {
    if (!cutoff.usable) return true;
    return joint_kde(data, kx, ky, x, y) >= cutoff.threshold;
}

PredictionBand slicer_band(const Dataset& data, std::span<const KernelSpec> kx,
                           const KernelSpec& ky, double alpha, const GridSpec& x_grid,
                           const GridSpec& y_grid, std::vector<std::string>* warnings) {
    if (data.d != 1)
        throw std::invalid_argument("slicer_band: band construction expects d = 1");
    validate(x_grid);
    validate(y_grid);
    const SlicerRule rule = make_slicer_rule(data, kx, ky, alpha);
    if (!rule.cutoff.usable && warnings)
        warnings->push_back("floor(n*alpha) = 0: slicer band degenerates to the full y range");

    PredictionBand band;
    band.method = BandMethod::slicer;
    band.alpha = alpha;
    band.x_grid = x_grid.points();
    band.sets.reserve(band.x_grid.size());
    const std::vector<double> ys = y_grid.points();
    std::vector<char> row(ys.size());
    for (double x : band.x_grid) {
        if (!rule.cutoff.usable) {
            band.sets.push_back(make_interval_union({{y_grid.lo, y_grid.hi}}));
            continue;
        }
        const std::span<const double> xs{&x, 1};
        for (std::size_t iy = 0; iy < ys.size(); ++iy)
            row[iy] = joint_kde(data, kx, ky, xs, ys[iy]) >= rule.cutoff.threshold ? 1 : 0;
        band.sets.push_back(from_grid_indicator(ys, row));
    }
    return band;
}

}  // namespace cops
