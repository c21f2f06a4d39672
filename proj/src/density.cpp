#include "cops/density.hpp"

#include <cmath>
#include <numeric>

namespace cops {

namespace {

// Product kernel term for row i at (u, v), without the 1/(n * prod h) factor.
double row_term(const Dataset& data, std::span<const KernelSpec> kx, const KernelSpec& ky,
                std::size_t i, std::span<const double> u, double v) {
    double term = evaluate(ky, (v - data.y[i]) / ky.bandwidth);
    if (term == 0.0) return 0.0;
    for (std::size_t j = 0; j < data.d; ++j) {
        term *= evaluate(kx[j], (u[j] - data.x_at(i, j)) / kx[j].bandwidth);
        if (term == 0.0) return 0.0;
    }
    return term;
}

double bandwidth_product(std::span<const KernelSpec> kx, const KernelSpec& ky) {
    double prod = ky.bandwidth;
    for (const auto& k : kx) prod *= k.bandwidth;
    return prod;
}

void check_joint_args(const Dataset& data, std::span<const KernelSpec> kx, const KernelSpec& ky,
                      std::span<const double> u) {
    if (data.n == 0) throw std::invalid_argument("joint_kde: empty dataset");
    if (kx.size() != data.d || u.size() != data.d)
        throw std::invalid_argument("joint_kde: dimension mismatch");
    for (const auto& k : kx) validate(k);
    validate(ky);
}

}  // namespace

double joint_kde(const Dataset& data, std::span<const KernelSpec> kx, const KernelSpec& ky,
                 std::span<const double> u, double v) {
    check_joint_args(data, kx, ky, u);
    double sum = 0.0;
    for (std::size_t i = 0; i < data.n; ++i) sum += row_term(data, kx, ky, i, u, v);
    return sum / (static_cast<double>(data.n) * bandwidth_product(kx, ky));
}

double augmented_joint_kde(const Dataset& data, std::span<const KernelSpec> kx,
                           const KernelSpec& ky, std::span<const double> candidate_x,
                           double candidate_y, std::span<const double> u, double v) {
    check_joint_args(data, kx, ky, u);
    if (candidate_x.size() != data.d)
        throw std::invalid_argument("augmented_joint_kde: candidate dimension mismatch");
    const double n = static_cast<double>(data.n);
    double cand = evaluate(ky, (v - candidate_y) / ky.bandwidth);
    for (std::size_t j = 0; j < data.d && cand != 0.0; ++j)
        cand *= evaluate(kx[j], (u[j] - candidate_x[j]) / kx[j].bandwidth);
    return n / (n + 1.0) * joint_kde(data, kx, ky, u, v) +
           cand / ((n + 1.0) * bandwidth_product(kx, ky));
}

double local_kde(const Dataset& data, const LocalSample& sample, const KernelSpec& ky, double v) {
    validate(ky);
    const std::size_t nk = sample.n_k();
    if (nk == 0) throw EmptyBin("local_kde: empty bin " + std::to_string(sample.bin_id));
    const double h = ky.bandwidth;
    double sum = 0.0;
    for (std::size_t i : sample.member_indices) sum += evaluate(ky, (data.y[i] - v) / h);
    return sum / (static_cast<double>(nk) * h);
}

double augmented_local_kde(const Dataset& data, const LocalSample& sample, const KernelSpec& ky,
                           double candidate_y, double v) {
    const double nk = static_cast<double>(sample.n_k());
    const double h = ky.bandwidth;
    return nk / (nk + 1.0) * local_kde(data, sample, ky, v) +
           evaluate(ky, (v - candidate_y) / h) / ((nk + 1.0) * h);
}

double silverman_bandwidth(std::span<const double> values) {
    if (values.empty()) throw std::invalid_argument("silverman_bandwidth: no values");
    const double n = static_cast<double>(values.size());
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    const double sd = values.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
    const double h = 1.06 * sd * std::pow(n, -0.2);
    return h > 0.0 ? h : 1.0;  // degenerate samples fall back to unit bandwidth
}

}  // namespace cops
