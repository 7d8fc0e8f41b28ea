#pragma once

#include <complex>
#include <span>
#include <vector>

namespace resavg {

using Complex = std::complex<double>;
using ComplexState = std::vector<Complex>;
using RealVector = std::vector<double>;

/// Phi_w: multiplies coordinate j by exp(i w_j). Moduli are preserved.
[[nodiscard]] ComplexState rotate(std::span<const double> w, std::span<const Complex> z);

/// Actions I_k = |z_k|^2 / 2.
[[nodiscard]] RealVector actions(std::span<const Complex> z);

/// Angles arg z_k in [0, 2pi), with arg 0 := 0.
[[nodiscard]] RealVector angles(std::span<const Complex> z);

/// Real inner product on C^n ~ R^2n: Re sum x_j conj(y_j).
[[nodiscard]] double inner(std::span<const Complex> x, std::span<const Complex> y);

[[nodiscard]] double norm(std::span<const Complex> z);

[[nodiscard]] bool all_finite(std::span<const Complex> z);

/// Flattens (z_1, ..., z_n) to (Re z_1, Im z_1, ..., Re z_n, Im z_n).
[[nodiscard]] RealVector decomplexify(std::span<const Complex> z);
[[nodiscard]] ComplexState complexify(std::span<const double> x);

struct SampledPath {
    std::vector<double> times;
    std::vector<ComplexState> states;

    void validate() const;
};

/// Discrete Hoelder norm: sup |u| plus the largest |u(t) - u(s)| / |t - s|^alpha over
/// all sample pairs. Only sample points are visited, so this bounds the continuum
/// norm from below.
[[nodiscard]] double holder_norm(const SampledPath& path, double alpha);

}  // namespace resavg
