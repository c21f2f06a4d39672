#include "cops/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

namespace cops {

namespace {

constexpr double kInvSqrt2Pi = 0.39894228040143267794;

double normal_pdf(double y, double mu, double sigma) {
    const double z = (y - mu) / sigma;
    return kInvSqrt2Pi / sigma * std::exp(-0.5 * z * z);
}

double normal_cdf(double y, double mu, double sigma) {
    return 0.5 * std::erfc(-(y - mu) / (sigma * std::numbers::sqrt2));
}

}  // namespace

ModelName model_from_name(const std::string& name) {
    if (name == "indep_gaussian" || name == "indep-gaussian") return ModelName::indep_gaussian;
    if (name == "lw_mixture" || name == "lw-mixture") return ModelName::lw_mixture;
    throw std::invalid_argument("unknown synthetic model: " + name);
}

const char* model_name(ModelName model) {
    return model == ModelName::indep_gaussian ? "indep_gaussian" : "lw_mixture";
}

double lw_mean_shift(double x) { return (x - 1.0) * (x - 1.0) * (x + 1.0); }

double lw_mode_offset(double x) { return x >= -0.5 ? 2.0 * std::sqrt(x + 0.5) : 0.0; }

double lw_variance(double x) { return 0.25 + std::abs(x); }

Dataset SyntheticModel::sample(std::size_t n, std::uint64_t seed) const {
    if (n < 1) throw std::invalid_argument("sample: need n >= 1");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unif(-1.5, 1.5);
    std::bernoulli_distribution coin(0.5);

    Dataset data;
    data.n = n;
    data.d = 1;
    data.x.resize(n);
    data.y.resize(n);
    data.x_names = {"x"};
    data.y_name = "y";
    for (std::size_t i = 0; i < n; ++i) {
        if (name == ModelName::indep_gaussian) {
            data.x[i] = gauss(rng);
            data.y[i] = gauss(rng);
        } else {
            const double x = unif(rng);
            const double mu = lw_mean_shift(x) +
                              (coin(rng) ? lw_mode_offset(x) : -lw_mode_offset(x));
            data.x[i] = x;
            data.y[i] = mu + std::sqrt(lw_variance(x)) * gauss(rng);
        }
    }
    return data;
}

std::vector<double> SyntheticModel::sample_y_given_x(double x, std::size_t count,
                                                     std::uint64_t seed) const {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::bernoulli_distribution coin(0.5);
    std::vector<double> ys(count);
    for (std::size_t i = 0; i < count; ++i) {
        if (name == ModelName::indep_gaussian) {
            ys[i] = gauss(rng);
        } else {
            const double mu = lw_mean_shift(x) +
                              (coin(rng) ? lw_mode_offset(x) : -lw_mode_offset(x));
            ys[i] = mu + std::sqrt(lw_variance(x)) * gauss(rng);
        }
    }
    return ys;
}

double SyntheticModel::conditional_density(double y, double x) const {
    if (name == ModelName::indep_gaussian) return normal_pdf(y, 0.0, 1.0);
    const double f = lw_mean_shift(x), g = lw_mode_offset(x);
    const double sigma = std::sqrt(lw_variance(x));
    return 0.5 * normal_pdf(y, f - g, sigma) + 0.5 * normal_pdf(y, f + g, sigma);
}

double SyntheticModel::conditional_cdf(double y, double x) const {
    if (name == ModelName::indep_gaussian) return normal_cdf(y, 0.0, 1.0);
    const double f = lw_mean_shift(x), g = lw_mode_offset(x);
    const double sigma = std::sqrt(lw_variance(x));
    return 0.5 * normal_cdf(y, f - g, sigma) + 0.5 * normal_cdf(y, f + g, sigma);
}

std::pair<double, double> SyntheticModel::x_support() const {
    return name == ModelName::indep_gaussian ? std::pair{-3.5, 3.5} : std::pair{-1.5, 1.5};
}

std::pair<double, double> SyntheticModel::y_envelope() const {
    if (name == ModelName::indep_gaussian) return {-8.5, 8.5};
    double lo = 0.0, hi = 0.0, smax = 0.0;
    for (int i = 0; i <= 3000; ++i) {
        const double x = -1.5 + 3.0 * i / 3000.0;
        const double f = lw_mean_shift(x), g = lw_mode_offset(x);
        lo = std::min(lo, f - g);
        hi = std::max(hi, f + g);
        smax = std::max(smax, std::sqrt(lw_variance(x)));
    }
    return {lo - 8.0 * smax, hi + 8.0 * smax};
}

PredictionBand oracle_band(const SyntheticModel& model, double alpha, const GridSpec& x_grid,
                           const GridSpec& y_grid, double mass_tol) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("alpha must lie in (0,1)");
    validate(x_grid);
    validate(y_grid);

    PredictionBand band;
    band.method = BandMethod::full_conformal;  // oracle: tagged by the caller if needed
    band.alpha = alpha;
    band.x_grid = x_grid.points();
    band.sets.reserve(band.x_grid.size());

    const std::vector<double> ys = y_grid.points();
    const double target = 1.0 - alpha;

    for (double x : band.x_grid) {
        std::vector<double> dens(ys.size());
        double dens_max = 0.0;
        for (std::size_t i = 0; i < ys.size(); ++i) {
            dens[i] = model.conditional_density(ys[i], x);
            dens_max = std::max(dens_max, dens[i]);
        }

        // Level set {p(.|x) >= t}: boundary roots refined between grid nodes,
        // mass exact via the conditional CDF.
        auto level_set = [&](double t) {
            std::vector<Interval> parts;
            auto refine = [&](double a, double b, bool rising) {
                for (int it = 0; it < 60; ++it) {
                    const double mid = 0.5 * (a + b);
                    const bool above = model.conditional_density(mid, x) >= t;
                    if (above == rising)
                        b = mid;
                    else
                        a = mid;
                }
                return 0.5 * (a + b);
            };
            bool inside = dens[0] >= t;
            double start = ys.front();
            for (std::size_t i = 1; i < ys.size(); ++i) {
                const bool above = dens[i] >= t;
                if (above && !inside) {
                    start = refine(ys[i - 1], ys[i], true);
                    inside = true;
                } else if (!above && inside) {
                    parts.push_back({start, refine(ys[i - 1], ys[i], false)});
                    inside = false;
                }
            }
            if (inside) parts.push_back({start, ys.back()});
            return parts;
        };
        auto mass_of = [&](const std::vector<Interval>& parts) {
            double mass = 0.0;
            for (const auto& iv : parts)
                mass += model.conditional_cdf(iv.hi, x) - model.conditional_cdf(iv.lo, x);
            return mass;
        };

        // Bisection: keep t_lo with mass >= target, shrink until within tol.
        double t_lo = 0.0, t_hi = dens_max * 1.0001;
        std::vector<Interval> best = level_set(t_lo);
        double best_mass = mass_of(best);
        bool converged = false;
        for (int it = 0; it < 200; ++it) {
            if (best_mass >= target && best_mass <= target + mass_tol) {
                converged = true;
                break;
            }
            const double t_mid = 0.5 * (t_lo + t_hi);
            const auto parts = level_set(t_mid);
            const double mass = mass_of(parts);
            if (mass >= target) {
                t_lo = t_mid;
                best = parts;
                best_mass = mass;
            } else {
                t_hi = t_mid;
            }
        }
        if (!converged)
            throw NumericError("oracle_band: level search did not converge at x = " +
                               std::to_string(x) + " (mass " + std::to_string(best_mass) +
                               ", target " + std::to_string(target) + ")");
        band.sets.push_back(make_interval_union(std::move(best)));
    }
    return band;
}

}  // namespace cops
