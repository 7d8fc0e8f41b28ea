#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace resavg {

/// Tolerance of the resonance test Lambda.(alpha - beta) = lambda_j and of lambda_k = lambda_j.
inline constexpr double kResonanceTol = 1e-9;

enum class ResonanceClass { completely_resonant, non_resonant, general };

[[nodiscard]] std::string_view to_string(ResonanceClass cls);
[[nodiscard]] ResonanceClass resonance_class_from_string(std::string_view text);

/// The frequency vector Lambda together with its declared (and, where possible,
/// verified) resonance class.
///
/// Complete resonance is verified by a rational fit of lambda_j / lambda_1 with
/// denominators up to 1e6. Non-resonance cannot be verified in floating point;
/// it is accepted, and a warning is recorded when a short integer relation
/// sum m_j lambda_j ~ 0 (|m_j| <= 20) exists.
class FrequencySpectrum {
public:
    FrequencySpectrum(std::vector<double> lambdas, ResonanceClass declared);

    /// Classifies without a user declaration: completely resonant if the rational
    /// fit succeeds, otherwise general.
    static FrequencySpectrum infer(std::vector<double> lambdas);

    [[nodiscard]] std::size_t size() const noexcept { return lambdas_.size(); }
    [[nodiscard]] std::span<const double> lambdas() const noexcept { return lambdas_; }
    [[nodiscard]] double operator[](std::size_t j) const { return lambdas_[j]; }
    [[nodiscard]] ResonanceClass resonance() const noexcept { return class_; }
    [[nodiscard]] bool declared_by_user() const noexcept { return declared_; }

    /// Base frequency lambda > 0 with lambda_j / lambda integer; only meaningful
    /// when completely resonant.
    [[nodiscard]] double base_frequency() const noexcept { return base_; }
    [[nodiscard]] double period() const;
    [[nodiscard]] double max_abs() const noexcept;
    [[nodiscard]] double min_abs() const noexcept;

    [[nodiscard]] const std::vector<std::string>& warnings() const noexcept { return warnings_; }

    /// lambdas scaled by t, i.e. the angle vector t * Lambda.
    [[nodiscard]] std::vector<double> scaled(double t) const;

private:
    FrequencySpectrum() = default;

    std::vector<double> lambdas_;
    ResonanceClass class_ = ResonanceClass::general;
    bool declared_ = false;
    double base_ = 0.0;
    std::vector<std::string> warnings_;
};

/// Largest lambda > 0 with every lambda_j / lambda an integer within 1e-12, found
/// through continued fractions with denominators <= max_denominator. Returns 0
/// when no such lambda exists.
[[nodiscard]] double common_base_frequency(std::span<const double> lambdas,
                                           long long max_denominator = 1'000'000);

/// Searches for m in Z^n \ {0}, |m_j| <= bound, with |sum m_j lambda_j| <= tol.
/// Returns an empty vector when none is found (or the search is too large).
[[nodiscard]] std::vector<int> find_integer_relation(std::span<const double> lambdas, int bound,
                                                     double tol, bool* searched = nullptr);

}  // namespace resavg
