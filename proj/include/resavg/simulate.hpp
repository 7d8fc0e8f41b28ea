#pragma once

#include "resavg/complexcore.hpp"
#include "resavg/fields.hpp"
#include "resavg/frequency.hpp"
#include "resavg/matrix.hpp"
#include "resavg/noisemodel.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace resavg {

/// Trajectories whose state norm exceeds this are stopped and flagged.
inline constexpr double kBlowUpThreshold = 1e6;
inline constexpr std::size_t kDefaultMaxCheckpoints = 512;

enum class Execution { serial, parallel };

struct SimulationConfig {
    double epsilon = 1.0;
    double t_end = 1.0;  // slow time T
    double dt = 1e-2;    // requested step; the actual step is t_end / ceil(t_end / dt)
    std::size_t n_traj = 1;
    std::uint64_t master_seed = 0;
    unsigned moment_order = 2;  // m0', diagnostic only
    double osc_resolution = 20.0;
    std::size_t max_checkpoints = kDefaultMaxCheckpoints;
    std::vector<double> checkpoints;  // explicit times; empty means uniform thinning
    Execution execution = Execution::parallel;
    std::uint64_t stream_salt = 0;  // separates the streams of different simulators

    void validate() const;
    /// Throws unless dt <= epsilon / osc_resolution (kernels that integrate fast phases).
    void require_oscillation_resolved() const;
    [[nodiscard]] std::size_t steps() const;
    [[nodiscard]] double step() const;
};

/// Step indices at which states are stored. Always contains step 0 and is strictly increasing.
struct CheckpointPlan {
    std::vector<std::size_t> steps;
    std::vector<double> times;
};

[[nodiscard]] CheckpointPlan plan_checkpoints(const SimulationConfig& cfg);

/// n_traj trajectories stored at the checkpoints of a plan, plus terminal states.
/// Storage is flat: trajectory-major, then checkpoint, then coordinate.
template <typename T>
class Ensemble {
public:
    Ensemble(SimulationConfig cfg, std::size_t dim, CheckpointPlan plan)
        : cfg_(std::move(cfg)),
          dim_(dim),
          plan_(std::move(plan)),
          states_(cfg_.n_traj * plan_.steps.size() * dim),
          terminal_(cfg_.n_traj * dim),
          flagged_(cfg_.n_traj, 0),
          sup_norm_(cfg_.n_traj, 0.0) {}

    [[nodiscard]] const SimulationConfig& config() const noexcept { return cfg_; }
    [[nodiscard]] std::size_t dim() const noexcept { return dim_; }
    [[nodiscard]] std::size_t size() const noexcept { return cfg_.n_traj; }
    [[nodiscard]] std::size_t n_checkpoints() const noexcept { return plan_.steps.size(); }
    [[nodiscard]] const std::vector<double>& checkpoint_times() const noexcept { return plan_.times; }
    [[nodiscard]] const CheckpointPlan& plan() const noexcept { return plan_; }

    [[nodiscard]] std::span<const T> state(std::size_t traj, std::size_t checkpoint) const {
        return {states_.data() + (traj * n_checkpoints() + checkpoint) * dim_, dim_};
    }
    [[nodiscard]] std::span<T> state(std::size_t traj, std::size_t checkpoint) {
        return {states_.data() + (traj * n_checkpoints() + checkpoint) * dim_, dim_};
    }
    [[nodiscard]] std::span<const T> terminal(std::size_t traj) const {
        return {terminal_.data() + traj * dim_, dim_};
    }
    [[nodiscard]] std::span<T> terminal(std::size_t traj) { return {terminal_.data() + traj * dim_, dim_}; }

    [[nodiscard]] bool flagged(std::size_t traj) const { return flagged_[traj] != 0; }
    void set_flagged(std::size_t traj) { flagged_[traj] = 1; }
    [[nodiscard]] std::size_t flagged_count() const {
        std::size_t c = 0;
        for (auto f : flagged_) c += f;
        return c;
    }

    /// max over all integration steps of the state norm (|v| for complex states,
    /// sqrt(2 sum I) for actions, i.e. the norm of the corresponding complex state).
    [[nodiscard]] double sup_norm(std::size_t traj) const { return sup_norm_[traj]; }
    void set_sup_norm(std::size_t traj, double v) { sup_norm_[traj] = v; }

    /// Index of the checkpoint at time tau (within half a step).
    [[nodiscard]] std::optional<std::size_t> checkpoint_index(double tau) const {
        const double tol = 0.5 * cfg_.step() + 1e-12;
        for (std::size_t c = 0; c < plan_.times.size(); ++c) {
            if (std::abs(plan_.times[c] - tau) <= tol) return c;
        }
        return std::nullopt;
    }

    [[nodiscard]] const std::vector<T>& raw_states() const noexcept { return states_; }
    [[nodiscard]] const std::vector<T>& raw_terminal() const noexcept { return terminal_; }

private:
    SimulationConfig cfg_;
    std::size_t dim_;
    CheckpointPlan plan_;
    std::vector<T> states_;
    std::vector<T> terminal_;
    std::vector<unsigned char> flagged_;
    std::vector<double> sup_norm_;
};

using SdeEnsemble = Ensemble<Complex>;
using ActionEnsemble = Ensemble<double>;

/// Checkpointed path of one trajectory.
[[nodiscard]] SampledPath path_of(const SdeEnsemble& e, std::size_t traj);

/// v <- rotate(-h Lambda / eps, v + h P(v) + sqrt(h) Psi xi).
[[nodiscard]] SdeEnsemble simulate_original(const EvaluableField& p, const CMatrix& psi,
                                            const FrequencySpectrum& spectrum, std::span<const Complex> v0,
                                            const SimulationConfig& cfg);

/// a <- a + h (Phi_{tau Lambda / eps})_* P(a) + exact Gaussian increment of the rotated noise.
[[nodiscard]] SdeEnsemble simulate_interaction(const EvaluableField& p, const CMatrix& psi,
                                               const FrequencySpectrum& spectrum, std::span<const Complex> v0,
                                               const SimulationConfig& cfg);

/// a <- a + h <<P>>(a) + sqrt(h) B xi.
[[nodiscard]] SdeEnsemble simulate_effective(const EffectiveModel& model, std::span<const Complex> v0,
                                             const SimulationConfig& cfg);

/// I_j <- max(0, I_j + h (2 I_j Re R_j + b_j^2) + sqrt(h) b_j sqrt(2 I_j) xi_j), R evaluated at |a|^2 = 2I.
[[nodiscard]] ActionEnsemble simulate_action_sde(const std::vector<RadialPolynomial>& r, std::span<const double> b,
                                                 std::span<const double> i0, const SimulationConfig& cfg);

/// Real-form equation with state-dependent dispersion, stored in complex coordinates:
/// v <- rotate(-h Lambda / eps, v + h P(v) + sqrt(h) complexify(B(v) xi)), xi real standard normal.
[[nodiscard]] SdeEnsemble simulate_general(const EvaluableField& p, const StateDependentDispersion& b,
                                           const FrequencySpectrum& spectrum, std::span<const Complex> v0,
                                           const SimulationConfig& cfg);

/// Which equation an ensemble-producing experiment integrates.
enum class SimulatorKind { original, interaction, effective };

[[nodiscard]] std::string_view to_string(SimulatorKind k);
[[nodiscard]] SimulatorKind simulator_kind_from_string(std::string_view s);

/// Everything the three complex simulators need.
struct Model {
    EvaluableField drift;
    CMatrix psi;
    FrequencySpectrum spectrum;
    ComplexState v0;
};

[[nodiscard]] SdeEnsemble simulate(SimulatorKind kind, const Model& model, const SimulationConfig& cfg);

/// Mean over unflagged trajectories of sup_tau |v|^(2 m0').
[[nodiscard]] double sup_moment(const SdeEnsemble& e, unsigned m0);

/// q-quantile over unflagged trajectories of the discrete Hoelder norm of the checkpointed path.
[[nodiscard]] double holder_quantile(const SdeEnsemble& e, double alpha, double q);

}  // namespace resavg
