#include "cops/kernels.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace cops {

namespace {

constexpr double kInvSqrt2Pi = 0.39894228040143267794;  // 1/sqrt(2*pi)

// Beyond |u| = 8 the Gaussian term is < 1e-14 and is dropped to keep the
// KDE inner loops cheap.
constexpr double kGaussianCutoff = 8.0;

}  // namespace

KernelFamily kernel_family_from_name(const std::string& name) {
    if (name == "gaussian") return KernelFamily::gaussian;
    if (name == "epanechnikov") return KernelFamily::epanechnikov;
    if (name == "uniform") return KernelFamily::uniform;
    if (name == "biweight") return KernelFamily::biweight;
    throw std::invalid_argument("unknown kernel family: " + name);
}

const char* kernel_family_name(KernelFamily family) {
    switch (family) {
        case KernelFamily::gaussian: return "gaussian";
        case KernelFamily::epanechnikov: return "epanechnikov";
        case KernelFamily::uniform: return "uniform";
        case KernelFamily::biweight: return "biweight";
    }
    return "?";
}

void validate(const KernelSpec& spec) {
    if (!(spec.bandwidth > 0.0) || !std::isfinite(spec.bandwidth))
        throw std::invalid_argument("kernel bandwidth must be positive and finite");
}

double evaluate(const KernelSpec& spec, double u) {
    switch (spec.family) {
        case KernelFamily::gaussian:
            if (std::abs(u) > kGaussianCutoff) return 0.0;
            return kInvSqrt2Pi * std::exp(-0.5 * u * u);
        case KernelFamily::epanechnikov:
            if (std::abs(u) > 1.0) return 0.0;
            return 0.75 * (1.0 - u * u);
        case KernelFamily::uniform:
            return std::abs(u) <= 1.0 ? 0.5 : 0.0;
        case KernelFamily::biweight: {
            if (std::abs(u) > 1.0) return 0.0;
            const double t = 1.0 - u * u;
            return (15.0 / 16.0) * t * t;
        }
    }
    return 0.0;
}

double kernel_peak(const KernelSpec& spec) {
    switch (spec.family) {
        case KernelFamily::gaussian: return kInvSqrt2Pi;
        case KernelFamily::epanechnikov: return 0.75;
        case KernelFamily::uniform: return 0.5;
        case KernelFamily::biweight: return 15.0 / 16.0;
    }
    return 0.0;
}

double kernel_span(const KernelSpec& spec) {
    // inf K = 0 for every shipped family, so the span equals the peak.
    return kernel_peak(spec);
}

double product_evaluate(std::span<const KernelSpec> specs, std::span<const double> u) {
    if (specs.size() != u.size() || specs.empty())
        throw std::invalid_argument("product_evaluate: dimension mismatch");
    double value = 1.0;
    for (std::size_t j = 0; j < specs.size(); ++j) {
        value *= evaluate(specs[j], u[j]);
        if (value == 0.0) return 0.0;
    }
    return value;
}

}  // namespace cops
