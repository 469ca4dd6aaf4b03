#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace panelms {

enum class KernelKind { Epanechnikov, Biweight, Triweight };

/**
 * @brief Compactly supported smoothing kernel on [-1, 1].
 *
 * All built-in kernels are non-negative, symmetric, integrate to one,
 * are Lipschitz, and have squared integral above 1/2.
 */
class SmoothingKernel {
public:
    constexpr SmoothingKernel() noexcept = default;
    constexpr explicit SmoothingKernel(KernelKind kind) noexcept : kind_(kind) {}

    constexpr KernelKind kind() const noexcept { return kind_; }
    std::string_view name() const noexcept;

    /// K(z); exactly zero for |z| >= 1.
    double operator()(double z) const noexcept;

    /// Closed-form integral of K^2 over [-1, 1].
    double squared_integral() const noexcept;

    friend constexpr bool operator==(SmoothingKernel, SmoothingKernel) noexcept = default;

private:
    KernelKind kind_ = KernelKind::Epanechnikov;
};

/// Throws InputError for unknown names.
SmoothingKernel kernel_from_name(std::string_view name);

/// Entry t (0-based) holds K(((t+1)/T - u) / h). Throws PreconditionError on
/// invalid (u, h); an all-zero result is returned as is.
std::vector<double> kernel_weights(const SmoothingKernel& kernel, std::size_t T, double u, double h);

/// Nonzero kernel weights for a lattice point, stored over the contiguous
/// index range [first, first + weights.size()).
struct KernelWindow {
    std::size_t first = 0;
    std::vector<double> weights;

    bool empty() const noexcept { return weights.empty(); }
};

KernelWindow kernel_window(const SmoothingKernel& kernel, std::size_t T, double u, double h);

/// Multiscale correction sqrt(2 log(1/(2h))). Throws PreconditionError unless
/// 0 < h <= 1/2.
double lambda_correction(double h);

}  // namespace panelms
