#pragma once

#include <span>
#include <string>

namespace cops {

enum class KernelFamily { gaussian, epanechnikov, uniform, biweight };

/// A univariate smoothing kernel plus the bandwidth it is applied with.
/// `evaluate` returns the unscaled kernel K(u); callers apply the bandwidth
/// scaling K((v - y)/h)/h themselves.
struct KernelSpec {
    KernelFamily family = KernelFamily::gaussian;
    double bandwidth = 1.0;
};

KernelFamily kernel_family_from_name(const std::string& name);
const char* kernel_family_name(KernelFamily family);

// Unscaled kernel value K(u). Total function: 0 outside compact supports.
double evaluate(const KernelSpec& spec, double u);

// Kernel peak K(0) = sup K.
double kernel_peak(const KernelSpec& spec);

// Kernel span psi_K = sup K - inf K. All shipped families attain the sup at 0
// and have inf 0 (the Gaussian infimum is its supremum over the real line,
// never attained).
double kernel_span(const KernelSpec& spec);

// Product kernel over d coordinates: prod_j K_j(u_j).
double product_evaluate(std::span<const KernelSpec> specs, std::span<const double> u);

void validate(const KernelSpec& spec);

}  // namespace cops
