#pragma once

#include "resavg/complexcore.hpp"
#include "resavg/ergodic.hpp"
#include "resavg/fields.hpp"
#include "resavg/frequency.hpp"
#include "resavg/matrix.hpp"
#include "resavg/noisemodel.hpp"
#include "resavg/simulate.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace resavg {

enum class ExperimentKind { E1, E2, E3, E4, E5, E6 };

[[nodiscard]] std::string_view to_string(ExperimentKind k);
[[nodiscard]] ExperimentKind experiment_kind_from_string(std::string_view s);

/// Drift as a named builtin or an explicit monomial list.
///   damping:       P = -rate v
///   damping_swap:  P_j = -rate v_j + coupling v_(n-1-j)
struct DriftSpec {
    std::string builtin;  // empty for explicit monomials
    double rate = 1.0;
    double coupling = 0.0;
    std::vector<Monomial> monomials;
};

/// State-dependent real dispersion. Only the builtin "saturating" is available from
/// files: B(v) = min(1, |v|) scale I_2n.
struct GeneralDispersionSpec {
    std::string builtin;
    double scale = 1.0;
    DispersionSmoothness smoothness = DispersionSmoothness::c2_smooth;
};

struct ExperimentSpec {
    ExperimentKind kind = ExperimentKind::E1;
    std::vector<double> epsilons{0.2, 0.1, 0.05};
    double t_end = 1.0;
    double dt_per_epsilon = 40.0;  // dt = epsilon / dt_per_epsilon
    std::size_t n_traj = 1000;
    std::uint64_t seed = 42;
    std::vector<double> taus{1.0};  // comparison times for E2, E3, E5
    std::vector<double> tau_grid;   // E6
    std::size_t dict_size = 64;
    std::size_t n_dirs = 128;
    std::size_t audit_points = 20;  // E1
    double averaging_tol = 1e-4;    // E1
    StationaryConfig stationary;    // E4, E5
    std::optional<double> tolerance;  // main acceptance threshold; per-experiment default when absent
    std::optional<double> stationary_action_target;  // E5: expected stationary E I_j
};

struct ScenarioConfig {
    std::string name;
    std::size_t n = 0;
    std::vector<double> lambdas;
    ResonanceClass resonance = ResonanceClass::general;
    bool resonance_declared = false;
    DriftSpec drift;
    CMatrix psi;
    std::optional<GeneralDispersionSpec> general_dispersion;
    ComplexState v0;
    ExperimentSpec experiment;
    std::vector<std::string> warnings;
};

/// Parses and validates scenario JSON. Throws ScenarioError carrying every problem
/// found (syntax errors carry line and column).
[[nodiscard]] ScenarioConfig parse_scenario(std::string_view text);
[[nodiscard]] ScenarioConfig load_scenario(const std::filesystem::path& path);

/// Canonical text: sorted keys, canonical monomial order, fixed float formatting.
[[nodiscard]] std::string serialize_scenario(const ScenarioConfig& cfg);

/// FNV-1a 64 of the canonical text.
[[nodiscard]] std::uint64_t scenario_hash(const ScenarioConfig& cfg);

[[nodiscard]] PolynomialVectorField build_drift(const ScenarioConfig& cfg);
[[nodiscard]] FrequencySpectrum build_spectrum(const ScenarioConfig& cfg);
[[nodiscard]] Model build_model(const ScenarioConfig& cfg);
[[nodiscard]] StateDependentDispersion build_general_dispersion(const ScenarioConfig& cfg);

/// Default acceptance threshold of each experiment.
[[nodiscard]] double default_tolerance(ExperimentKind k);

}  // namespace resavg
