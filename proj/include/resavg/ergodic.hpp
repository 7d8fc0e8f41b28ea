#pragma once

#include "resavg/complexcore.hpp"
#include "resavg/fields.hpp"
#include "resavg/measures.hpp"
#include "resavg/simulate.hpp"

#include <optional>
#include <string>
#include <vector>

namespace resavg {

class Rng;

/// Fraction of flagged long trajectories above which a run is declared non-mixing.
inline constexpr double kMaxFlaggedFraction = 0.01;

struct StationaryConfig {
    double burn_in = 10.0;
    double stride = 1.0;
    std::size_t n_long_traj = 200;
    std::size_t samples_per_traj = 10;
    bool override_coercivity = false;  // run even when the drift is not shown coercive
};

struct StationaryEstimate {
    EmpiricalMeasure samples;
    double burn_in = 0.0;
    double stride = 0.0;
    std::size_t n_long_traj = 0;
    std::size_t flagged = 0;
};

struct CoercivityReport {
    bool satisfied = false;
    double alpha1 = 0.0;
    double alpha2 = 0.0;
    ComplexState worst_point;
    double margin = 0.0;  // max over samples of <P(v), v> + alpha1 |v| - alpha2
    std::string message;
};

/// Checks <P(v), v> <= -alpha1 |v| + alpha2 on rays x sphere samples up to
/// search_radius, with extra shells out to 4 search_radius to confirm that the
/// leading homogeneous part controls the tail. alpha1 is scanned over a log grid
/// in [1e-3, 10]; the reported pair uses the largest feasible alpha1 <= 1 (or the
/// smallest feasible one above 1) with the least alpha2 for it.
[[nodiscard]] CoercivityReport check_coercivity(const PolynomialVectorField& p, double search_radius = 10.0,
                                                std::size_t grid_density = 32);

/// Runs n_long_traj trajectories to burn_in + (samples_per_traj - 1) stride and pools
/// the states at burn_in, burn_in + stride, ... . The drift must pass the coercivity
/// check (on <<P>> for the effective equation) unless overridden.
[[nodiscard]] StationaryEstimate estimate_stationary(SimulatorKind kind, const Model& model,
                                                     const StationaryConfig& st, const SimulationConfig& base);

/// Max over n_angles random theta and all real coordinates of the KS distance
/// between the cloud and its image under rotate(theta Lambda, .). mu is over C^n
/// flattened to R^2n.
[[nodiscard]] double rotation_invariance_test(const EmpiricalMeasure& mu, std::span<const double> lambdas,
                                              std::size_t n_angles, Rng& rng);

/// KS acceptance band for m-vs-m comparisons at level alpha, Bonferroni-corrected
/// over `comparisons` tests: c(alpha') sqrt(2 / m), c(a) = sqrt(-ln(a / 2) / 2).
[[nodiscard]] double ks_band(std::size_t m, double alpha, std::size_t comparisons);

/// Stationary covariance E[a a^*] of da = M a dtau + B d beta^c when the drift is
/// holomorphic linear (every monomial is c a_k) and M + M^* is negative definite: the solution of
/// M S + S M^* + 2A = 0. Returns nullopt for any other drift.
[[nodiscard]] std::optional<CMatrix> linear_stationary_covariance(const PolynomialVectorField& drift,
                                                                  const CMatrix& a);

/// m exact draws from the centred complex Gaussian with E[z z^*] = cov, flattened to R^2n.
[[nodiscard]] EmpiricalMeasure sample_complex_gaussian_measure(const CMatrix& cov, std::size_t m, Rng& rng);

struct SweepConfig {
    std::vector<double> epsilons;
    std::vector<double> tau_grid;
    double dt_per_epsilon = 40.0;  // dt = epsilon / dt_per_epsilon
    std::size_t n_traj = 1000;
    std::uint64_t master_seed = 0;
    std::size_t dict_size = 64;
    Execution execution = Execution::parallel;
};

struct SweepRow {
    double epsilon = 0.0;
    double tau = 0.0;
    DistanceBracket bracket;
};

struct SweepResult {
    std::vector<SweepRow> rows;
    std::vector<double> sup_upper;  // per epsilon, in input order
    double tau_max = 0.0;           // the sup over tau >= 0 is truncated here
    std::size_t n_samples = 0;
};

/// Interaction ensemble per epsilon against one effective ensemble, bracketed at every tau.
[[nodiscard]] SweepResult uniform_sweep(const Model& model, const SweepConfig& cfg);

}  // namespace resavg
