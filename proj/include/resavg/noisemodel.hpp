#pragma once

#include "resavg/complexcore.hpp"
#include "resavg/fields.hpp"
#include "resavg/frequency.hpp"
#include "resavg/matrix.hpp"

#include <functional>
#include <optional>
#include <span>
#include <string_view>

namespace resavg {

class Rng;

/// Eigenvalues above -kEigenClamp are treated as round-off and clamped to zero.
inline constexpr double kEigenClamp = 1e-10;

// Complex Gaussian convention throughout: beta^c = beta^+ + i beta^-, so
// E|beta^c(t)|^2 = 2t. A standard complex Gaussian xi has E xi conj(xi) = 2.

struct DispersionSpec {
    CMatrix psi;  // n x n1, may be zero or rank deficient

    [[nodiscard]] std::size_t n() const noexcept { return psi.rows(); }
    [[nodiscard]] std::size_t n1() const noexcept { return psi.cols(); }
};

/// A_kj = sum_l Psi_kl conj(Psi_jl) when |lambda_k - lambda_j| <= kResonanceTol, else 0.
[[nodiscard]] CMatrix effective_diffusion(const CMatrix& psi, const FrequencySpectrum& spectrum);

/// Principal square root U diag(sqrt(max(ev, 0))) U^*. Throws InvalidArgument when the
/// input is not Hermitian within 1e-10 and NumericalError on an eigenvalue below -1e-10.
[[nodiscard]] CMatrix hermitian_sqrt(const CMatrix& a);

/// Covariance E[zeta zeta^*] of the increment over [tau, tau + h] of
/// int Phi_{s Lambda / eps} Psi d beta^c:
///   C_kj = 2 (Psi Psi^*)_kj int_tau^{tau+h} exp(i (lambda_k - lambda_j) s / eps) ds.
/// The pseudo-covariance E[zeta zeta^T] vanishes and is not represented.
[[nodiscard]] CMatrix noise_increment_covariance(const CMatrix& psi, const FrequencySpectrum& spectrum,
                                                 double eps, double tau, double h);

/// Returns sqrt(C) xi with xi standard complex Gaussian, so E[z z^*] = 2 C.
[[nodiscard]] ComplexState sample_complex_gaussian(const CMatrix& c, Rng& rng);

/// root * xi for a precomputed square root; the allocation-free path used by the kernels.
void apply_root_to_gaussian(const CMatrix& root, Rng& rng, std::span<Complex> xi_scratch, std::span<Complex> out);

struct EffectiveModel {
    EvaluableField drift;
    CMatrix diffusion;   // A
    CMatrix dispersion;  // B, Hermitian PSD, B B^* = A

    /// drift = <<P>> (symbolic for polynomial P, otherwise the numeric average is
    /// evaluated on demand with tolerance `numeric_tol`), A from Psi, B = sqrt(A).
    static EffectiveModel build(const EvaluableField& p, const CMatrix& psi, const FrequencySpectrum& spectrum,
                                double numeric_tol = 1e-8);
    void validate() const;
};

enum class DispersionSmoothness { constant, nondegenerate, c2_smooth };

[[nodiscard]] std::string_view to_string(DispersionSmoothness s);
[[nodiscard]] DispersionSmoothness smoothness_from_string(std::string_view s);

/// Real 2n x n2 dispersion v -> B(v) of the real-form equation with real Wiener
/// noise. The declared class must be one of the three options under which the
/// averaged dispersion is locally Lipschitz.
struct StateDependentDispersion {
    std::size_t n = 0;   // complex dimension; B(v) has 2n rows
    std::size_t n2 = 0;  // number of real Wiener processes
    std::function<RMatrix(std::span<const Complex>)> eval;
    DispersionSmoothness smoothness = DispersionSmoothness::c2_smooth;
    double nondegeneracy = 0.0;  // alpha in |B B^T xi| >= alpha |xi| for the nondegenerate class

    [[nodiscard]] RMatrix operator()(std::span<const Complex> v) const;

    /// B(v) = realify(Psi) for every v; matches the complex additive noise Psi d beta^c.
    static StateDependentDispersion constant_from(const CMatrix& psi);
};

/// Real 2n x 2n block-diagonal rotation Phi_w in the interleaved (Re, Im) order.
[[nodiscard]] RMatrix rotation_blocks(std::span<const double> w);

struct StateDiffusionResult {
    RMatrix value;
    double horizon = 0.0;
};

/// A0(a) = lim (1/T) int_0^T Phi_{t Lambda} B(Phi_{-t Lambda} a) (Phi_{t Lambda} B(...))^T dt.
[[nodiscard]] StateDiffusionResult averaged_state_diffusion(const StateDependentDispersion& b,
                                                            const FrequencySpectrum& spectrum,
                                                            std::span<const Complex> a, double tol);

struct StateRootResult {
    RMatrix root;
    double local_lipschitz = 0.0;  // empirical, from nearby points
};

/// Principal root of A0(a) via symmetric eigendecomposition, plus an empirical local
/// Lipschitz constant of a -> B0(a) from a few points at distance `probe` around a.
[[nodiscard]] StateRootResult state_dispersion_sqrt(const std::function<RMatrix(std::span<const Complex>)>& a0,
                                                    std::span<const Complex> a, double probe = 1e-4);

/// Principal square root of a symmetric PSD real matrix.
[[nodiscard]] RMatrix symmetric_sqrt(const RMatrix& a);

}  // namespace resavg
