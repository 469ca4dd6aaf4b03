#include "panelms/kernel.hpp"

#include "panelms/error.hpp"

#include <algorithm>
#include <cmath>

namespace panelms {

std::string_view SmoothingKernel::name() const noexcept {
    switch (kind_) {
        case KernelKind::Epanechnikov:
            return "epanechnikov";
        case KernelKind::Biweight:
            return "biweight";
        case KernelKind::Triweight:
            return "triweight";
    }
    return "epanechnikov";
}

double SmoothingKernel::operator()(double z) const noexcept {
    const double a = std::abs(z);
    if (!(a < 1.0)) {
        return 0.0;
    }
    const double s = 1.0 - z * z;
    switch (kind_) {
        case KernelKind::Epanechnikov:
            return 0.75 * s;
        case KernelKind::Biweight:
            return (15.0 / 16.0) * s * s;
        case KernelKind::Triweight:
            return (35.0 / 32.0) * s * s * s;
    }
    return 0.0;
}

double SmoothingKernel::squared_integral() const noexcept {
    switch (kind_) {
        case KernelKind::Epanechnikov:
            return 3.0 / 5.0;
        case KernelKind::Biweight:
            return 5.0 / 7.0;
        case KernelKind::Triweight:
            return 350.0 / 429.0;
    }
    return 0.0;
}

SmoothingKernel kernel_from_name(std::string_view name) {
    if (name == "epanechnikov") {
        return SmoothingKernel(KernelKind::Epanechnikov);
    }
    if (name == "biweight") {
        return SmoothingKernel(KernelKind::Biweight);
    }
    if (name == "triweight") {
        return SmoothingKernel(KernelKind::Triweight);
    }
    throw InputError("unknown kernel '" + std::string(name) +
                     "' (expected epanechnikov, biweight or triweight)");
}

namespace {

void check_location(std::size_t T, double u, double h) {
    if (T == 0) {
        throw PreconditionError("kernel weights: T must be positive");
    }
    if (!(h > 0.0 && h < 1.0)) {
        throw PreconditionError("kernel weights: bandwidth must lie in (0, 1), got " + std::to_string(h));
    }
    if (!(u >= 0.0 && u <= 1.0)) {
        throw PreconditionError("kernel weights: location must lie in [0, 1], got " + std::to_string(u));
    }
}

// Values within 1e-9 of the 1/T lattice are snapped onto it so that support
// endpoints evaluate to exactly |z| = 1.
double snap_to_lattice(double v, double T) {
    const double scaled = v * T;
    const double nearest = std::round(scaled);
    return std::abs(scaled - nearest) <= 1e-9 * std::max(1.0, std::abs(scaled)) ? nearest : scaled;
}

}  // namespace

std::vector<double> kernel_weights(const SmoothingKernel& kernel, std::size_t T, double u, double h) {
    check_location(T, u, h);
    std::vector<double> w(T);
    const double Td = static_cast<double>(T);
    const double center = snap_to_lattice(u, Td);
    const double width = snap_to_lattice(h, Td);
    for (std::size_t t = 0; t < T; ++t) {
        w[t] = kernel((static_cast<double>(t + 1) - center) / width);
    }
    return w;
}

KernelWindow kernel_window(const SmoothingKernel& kernel, std::size_t T, double u, double h) {
    const auto all = kernel_weights(kernel, T, u, h);
    KernelWindow window;
    std::size_t lo = 0;
    while (lo < T && all[lo] == 0.0) {
        ++lo;
    }
    if (lo == T) {
        return window;
    }
    std::size_t hi = T;
    while (all[hi - 1] == 0.0) {
        --hi;
    }
    window.first = lo;
    window.weights.assign(all.begin() + static_cast<std::ptrdiff_t>(lo),
                          all.begin() + static_cast<std::ptrdiff_t>(hi));
    return window;
}

double lambda_correction(double h) {
    if (!(h > 0.0 && h <= 0.5)) {
        throw PreconditionError("lambda_correction: bandwidth must lie in (0, 1/2], got " +
                                std::to_string(h));
    }
    return std::sqrt(2.0 * std::log(1.0 / (2.0 * h)));
}

}  // namespace panelms
