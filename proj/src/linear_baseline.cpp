#include "cops/linear_baseline.hpp"

#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <stdexcept>

namespace cops {

double t_quantile_two_sided(double alpha, double dof) {
    boost::math::students_t dist(dof);
    return boost::math::quantile(dist, 1.0 - alpha / 2.0);
}

LinearFit fit_ols(const Dataset& data) {
    validate(data);
    if (data.d != 1) throw std::invalid_argument("linear_baseline: expects d = 1");
    if (data.n < 3) throw std::invalid_argument("linear_baseline: need n >= 3");

    const double n = static_cast<double>(data.n);
    double x_mean = 0.0, y_mean = 0.0;
    for (std::size_t i = 0; i < data.n; ++i) {
        x_mean += data.x[i];
        y_mean += data.y[i];
    }
    x_mean /= n;
    y_mean /= n;

    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < data.n; ++i) {
        const double dx = data.x[i] - x_mean;
        sxx += dx * dx;
        sxy += dx * (data.y[i] - y_mean);
    }
    if (!(sxx > 0.0)) throw std::invalid_argument("linear_baseline: degenerate x (zero variance)");

    LinearFit fit;
    fit.n = data.n;
    fit.x_mean = x_mean;
    fit.sxx = sxx;
    fit.slope = sxy / sxx;
    fit.intercept = y_mean - fit.slope * x_mean;
    double rss = 0.0;
    for (std::size_t i = 0; i < data.n; ++i) {
        const double r = data.y[i] - fit.predict(data.x[i]);
        rss += r * r;
    }
    fit.s = std::sqrt(rss / (n - 2.0));
    return fit;
}

double LinearFit::half_width(double x, double alpha) const {
    const double nn = static_cast<double>(n);
    const double t = t_quantile_two_sided(alpha, nn - 2.0);
    const double dx = x - x_mean;
    return t * s * std::sqrt(1.0 + 1.0 / nn + dx * dx / sxx);
}

PredictionBand linear_baseline(const Dataset& data, double alpha, const GridSpec& x_grid) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("alpha must lie in (0,1)");
    validate(x_grid);
    const LinearFit fit = fit_ols(data);

    PredictionBand band;
    band.method = BandMethod::linear_baseline;
    band.alpha = alpha;
    band.x_grid = x_grid.points();
    band.sets.reserve(band.x_grid.size());
    for (double x : band.x_grid) {
        const double c = fit.predict(x);
        const double hw = fit.half_width(x, alpha);
        band.sets.push_back(make_interval_union({{c - hw, c + hw}}));
    }
    return band;
}

}  // namespace cops
