#pragma once

#include "resavg/complexcore.hpp"
#include "resavg/frequency.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace resavg {

class Rng;

/// coeff * a^alpha * conj(a)^beta contributing to component `target` (0-based).
struct Monomial {
    std::size_t target = 0;
    std::vector<unsigned> alpha;
    std::vector<unsigned> beta;
    Complex coeff{};

    [[nodiscard]] unsigned degree() const;
    /// Lambda . (alpha - beta)
    [[nodiscard]] double phase_frequency(std::span<const double> lambdas) const;
    [[nodiscard]] bool same_key(const Monomial& other) const;
};

/// Polynomial vector field on C^n in canonical form: monomials sorted by
/// (target, alpha, beta), duplicates merged, zero coefficients dropped.
class PolynomialVectorField {
public:
    PolynomialVectorField() = default;
    explicit PolynomialVectorField(std::size_t n, std::vector<Monomial> monomials = {});
    PolynomialVectorField(std::size_t n, std::vector<Monomial> monomials, unsigned growth_order,
                          double growth_constant);

    static PolynomialVectorField identity(std::size_t n);
    /// Linear field rate * v (diagonal).
    static PolynomialVectorField linear(std::size_t n, Complex rate);

    [[nodiscard]] std::size_t dimension() const noexcept { return n_; }
    [[nodiscard]] const std::vector<Monomial>& monomials() const noexcept { return monomials_; }
    [[nodiscard]] bool empty() const noexcept { return monomials_.empty(); }
    [[nodiscard]] unsigned degree() const noexcept { return degree_; }
    [[nodiscard]] unsigned growth_order() const noexcept { return growth_order_; }
    [[nodiscard]] double growth_constant() const noexcept { return growth_constant_; }
    /// Number of duplicate (target, alpha, beta) keys merged during canonicalization.
    [[nodiscard]] std::size_t merged_duplicates() const noexcept { return merged_; }

    [[nodiscard]] ComplexState operator()(std::span<const Complex> v) const;
    void evaluate_into(std::span<const Complex> v, std::span<Complex> out) const;

    /// Max over sampled points of |P(v)| / (1 + |v|)^m0; the growth bound holds on the
    /// sample when this is <= growth_constant.
    [[nodiscard]] double sampled_growth_ratio(std::size_t samples, double radius, Rng& rng) const;

    friend PolynomialVectorField operator+(const PolynomialVectorField& a, const PolynomialVectorField& b);
    friend PolynomialVectorField operator*(Complex s, const PolynomialVectorField& p);
    bool operator==(const PolynomialVectorField& other) const;

    [[nodiscard]] std::string to_string() const;

private:
    struct Factor {
        std::uint32_t var;
        bool conj;
    };
    void canonicalize();

    std::size_t n_ = 0;
    std::vector<Monomial> monomials_;
    // Expanded factor lists, one per monomial, for the evaluation loop.
    std::vector<std::vector<Factor>> factors_;
    unsigned degree_ = 0;
    unsigned growth_order_ = 0;
    double growth_constant_ = 1.0;
    std::size_t merged_ = 0;
};

/// Either a polynomial field or an opaque routine v -> P(v) with declared growth.
class EvaluableField {
public:
    using Routine = std::function<void(std::span<const Complex>, std::span<Complex>)>;

    EvaluableField(PolynomialVectorField p);  // NOLINT(google-explicit-constructor)
    EvaluableField(std::size_t n, Routine routine, unsigned growth_order, double growth_constant = 1.0,
                   unsigned quadrature_degree = 4);

    [[nodiscard]] std::size_t dimension() const noexcept { return n_; }
    [[nodiscard]] const PolynomialVectorField* polynomial() const noexcept {
        return poly_ ? &*poly_ : nullptr;
    }
    [[nodiscard]] unsigned growth_order() const noexcept { return growth_order_; }
    [[nodiscard]] double growth_constant() const noexcept { return growth_constant_; }
    /// Degree used to size quadratures (polynomial degree, or the declared hint).
    [[nodiscard]] unsigned quadrature_degree() const noexcept { return quad_degree_; }

    [[nodiscard]] ComplexState operator()(std::span<const Complex> v) const;
    void evaluate_into(std::span<const Complex> v, std::span<Complex> out) const;

private:
    std::size_t n_ = 0;
    std::optional<PolynomialVectorField> poly_;
    Routine routine_;
    unsigned growth_order_ = 0;
    double growth_constant_ = 1.0;
    unsigned quad_degree_ = 1;
};

[[nodiscard]] ComplexState evaluate(const EvaluableField& p, std::span<const Complex> v);

/// (Phi_{t Lambda})_* P evaluated at a: rotate(t Lambda, P(rotate(-t Lambda, a))).
[[nodiscard]] ComplexState pushforward(const EvaluableField& p, const FrequencySpectrum& spectrum, double t,
                                       std::span<const Complex> a);

/// Trapezoid approximation of (1/T') int_0^T' pushforward(P, t, a) dt with `steps` panels.
[[nodiscard]] ComplexState partial_average(const EvaluableField& p, const FrequencySpectrum& spectrum,
                                           std::span<const Complex> a, double horizon, int steps);

struct AverageResult {
    ComplexState value;
    double horizon = 0.0;  // achieved T'
    int doublings = 0;
};

/// Averaged field <<P>>(a) by the limiting procedure: one exact period when Lambda is
/// completely resonant, otherwise partial averages over T' = 2^k 2pi until two
/// successive iterates differ by < tol in max norm. Throws ConvergenceError past T' = 1e7.
[[nodiscard]] AverageResult average_numeric(const EvaluableField& p, const FrequencySpectrum& spectrum,
                                            std::span<const Complex> a, double tol);

/// Keeps exactly the monomials with |Lambda.(alpha - beta) - lambda_target| <= kResonanceTol.
[[nodiscard]] PolynomialVectorField resonant_average_symbolic(const PolynomialVectorField& p,
                                                              const FrequencySpectrum& spectrum);

/// Average of (Phi_w)_* P(a) over the torus T^n. Polynomial fields use the exact
/// per-monomial rule (alpha - beta = e_target survives); opaque fields use a
/// rank-1 lattice with `nodes` points. Requires a non-resonant spectrum.
[[nodiscard]] ComplexState torus_average(const EvaluableField& p, const FrequencySpectrum& spectrum,
                                         std::span<const Complex> a, std::size_t nodes);

/// Lattice rule only, for any field (used to cross-check the per-monomial rule).
[[nodiscard]] ComplexState torus_average_lattice(const EvaluableField& p, std::span<const Complex> a,
                                                 std::size_t nodes);

struct ScalarFunction {
    std::function<Complex(std::span<const Complex>)> f;
    unsigned growth_order = 0;
    unsigned quadrature_degree = 2;
};

struct ScalarAverageResult {
    Complex value{};
    double horizon = 0.0;
    int doublings = 0;
};

/// <f>(a) = lim (1/T') int_0^T' f(rotate(-t Lambda, a)) dt, same procedure as average_numeric.
[[nodiscard]] ScalarAverageResult average_function(const ScalarFunction& f, const FrequencySpectrum& spectrum,
                                                   std::span<const Complex> a, double tol);

/// R_j as a polynomial in the squared moduli x_k = |a_k|^2.
struct RadialPolynomial {
    struct Term {
        Complex coeff{};
        std::vector<unsigned> gamma;
    };
    std::vector<Term> terms;

    [[nodiscard]] Complex operator()(std::span<const double> squared_moduli) const;
};

/// Factors every monomial of <<P>>_j as a_j prod |a_k|^(2 gamma_k). Throws
/// InvalidArgument on a monomial without that form, which means the resonance
/// class was misdeclared.
[[nodiscard]] std::vector<RadialPolynomial> radial_decomposition(const PolynomialVectorField& averaged,
                                                                 const FrequencySpectrum& spectrum);

namespace detail {

/// Shared limiting procedure of average_numeric / average_function /
/// averaged_state_diffusion. `sample(t, out)` writes the integrand at time t.
struct TimeAverageResult {
    std::vector<Complex> value;
    double horizon = 0.0;
    int doublings = 0;
};

[[nodiscard]] TimeAverageResult time_average(const FrequencySpectrum& spectrum, unsigned degree, double tol,
                                             std::size_t dim,
                                             const std::function<void(double, std::span<Complex>)>& sample);

inline constexpr double kMaxAveragingHorizon = 1e7;

}  // namespace detail

}  // namespace resavg
