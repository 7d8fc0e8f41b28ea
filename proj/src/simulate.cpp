#include "resavg/simulate.hpp"

#include "resavg/errors.hpp"
#include "resavg/rng.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <mutex>

namespace resavg {

namespace {

// Step counts within this relative slack of an integer are not rounded up.
constexpr double kStepSlack = 1e-9;

double complex_norm(std::span<const Complex> x) { return norm(x); }

double action_norm(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += 2.0 * v;
    return std::sqrt(std::max(s, 0.0));
}

/// Drives every trajectory through `make_stepper()(k, tau, x, rng)`, with the
/// blow-up guard and checkpoint storage. Each trajectory owns its RNG stream and
/// its output slots, so serial and parallel runs are bit-identical.
template <typename T, typename MakeStepper, typename NormFn>
void run_trajectories(Ensemble<T>& ens, std::span<const T> x0, MakeStepper make_stepper, NormFn state_norm) {
    const SimulationConfig& cfg = ens.config();
    const std::size_t n_steps = cfg.steps();
    const double h = cfg.step();
    const auto& cp_steps = ens.plan().steps;
    const auto n_traj = static_cast<long long>(cfg.n_traj);
    const bool parallel = cfg.execution == Execution::parallel;

    std::exception_ptr failure;
    long long failed_traj = n_traj;
    std::mutex failure_mutex;

#pragma omp parallel for schedule(static) if (parallel)
    for (long long ti = 0; ti < n_traj; ++ti) {
        const auto traj = static_cast<std::size_t>(ti);
        try {
            Rng rng(derive_stream_seed(cfg.master_seed, traj, cfg.stream_salt));
            auto stepper = make_stepper();
            std::vector<T> x(x0.begin(), x0.end());
            std::vector<T> prev(x.size());
            double sup = state_norm(std::span<const T>(x));
            std::size_t next_cp = 0;
            auto store = [&](std::size_t c) { std::copy(x.begin(), x.end(), ens.state(traj, c).begin()); };
            if (!cp_steps.empty() && cp_steps[0] == 0) store(next_cp++);
            for (std::size_t k = 0; k < n_steps; ++k) {
                prev = x;
                stepper(k, static_cast<double>(k) * h, std::span<T>(x), rng);
                const double nx = state_norm(std::span<const T>(x));
                if (!std::isfinite(nx) || nx > kBlowUpThreshold) {
                    x = prev;
                    ens.set_flagged(traj);
                    break;
                }
                sup = std::max(sup, nx);
                if (next_cp < cp_steps.size() && cp_steps[next_cp] == k + 1) store(next_cp++);
            }
            // A stopped trajectory keeps its last finite state at the remaining checkpoints.
            while (next_cp < cp_steps.size()) store(next_cp++);
            std::copy(x.begin(), x.end(), ens.terminal(traj).begin());
            ens.set_sup_norm(traj, sup);
        } catch (...) {
            std::lock_guard lock(failure_mutex);
            // Report the lowest failing trajectory so the error does not depend on scheduling.
            if (ti < failed_traj) {
                failed_traj = ti;
                failure = std::current_exception();
            }
        }
    }
    if (failure) std::rethrow_exception(failure);
}

void check_start(std::size_t n, std::span<const Complex> v0) {
    require_same_dimension(n, v0.size(), "initial condition");
    if (!all_finite(v0)) throw InvalidArgument("initial condition must be finite");
}

}  // namespace

void SimulationConfig::validate() const {
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw InvalidArgument("epsilon must be positive");
    if (!(t_end > 0.0) || !std::isfinite(t_end)) throw InvalidArgument("t_end must be positive");
    if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidArgument("dt must be positive");
    if (n_traj == 0) throw InvalidArgument("n_traj must be positive");
    if (moment_order == 0) throw InvalidArgument("moment_order must be positive");
    if (!(osc_resolution >= 20.0)) throw InvalidArgument("osc_resolution must be at least 20");
    if (max_checkpoints < 2) throw InvalidArgument("max_checkpoints must be at least 2");
}

void SimulationConfig::require_oscillation_resolved() const {
    if (step() > epsilon / osc_resolution * (1.0 + kStepSlack)) {
        throw InvalidArgument("dt = " + std::to_string(dt) + " does not resolve the fast rotation; need dt <= " +
                              std::to_string(epsilon / osc_resolution));
    }
}

std::size_t SimulationConfig::steps() const {
    const double ratio = t_end / dt;
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(ratio - kStepSlack * ratio)));
}

double SimulationConfig::step() const { return t_end / static_cast<double>(steps()); }

CheckpointPlan plan_checkpoints(const SimulationConfig& cfg) {
    const std::size_t n_steps = cfg.steps();
    const double h = cfg.step();
    std::vector<std::size_t> steps{0};
    if (!cfg.checkpoints.empty()) {
        for (double tau : cfg.checkpoints) {
            if (!(tau >= 0.0) || tau > cfg.t_end * (1.0 + kStepSlack)) {
                throw InvalidArgument("checkpoint " + std::to_string(tau) + " outside [0, t_end]");
            }
            steps.push_back(std::min(n_steps, static_cast<std::size_t>(std::llround(tau / h))));
        }
    } else {
        const std::size_t intervals = std::min(n_steps, cfg.max_checkpoints - 1);
        for (std::size_t k = 1; k <= intervals; ++k) {
            steps.push_back((k * n_steps + intervals / 2) / intervals);
        }
    }
    std::sort(steps.begin(), steps.end());
    steps.erase(std::unique(steps.begin(), steps.end()), steps.end());
    CheckpointPlan plan;
    plan.steps = std::move(steps);
    for (auto s : plan.steps) {
        plan.times.push_back(static_cast<double>(s) * cfg.t_end / static_cast<double>(n_steps));
    }
    return plan;
}

SampledPath path_of(const SdeEnsemble& e, std::size_t traj) {
    SampledPath p;
    p.times = e.checkpoint_times();
    p.states.reserve(e.n_checkpoints());
    for (std::size_t c = 0; c < e.n_checkpoints(); ++c) {
        auto s = e.state(traj, c);
        p.states.emplace_back(s.begin(), s.end());
    }
    return p;
}

SdeEnsemble simulate_original(const EvaluableField& p, const CMatrix& psi, const FrequencySpectrum& spectrum,
                              std::span<const Complex> v0, const SimulationConfig& cfg) {
    cfg.validate();
    cfg.require_oscillation_resolved();
    const std::size_t n = spectrum.size();
    require_same_dimension(n, p.dimension(), "simulate_original: drift");
    require_same_dimension(n, psi.rows(), "simulate_original: dispersion");
    check_start(n, v0);

    const double h = cfg.step();
    const double sqrt_h = std::sqrt(h);
    ComplexState phase(n);
    for (std::size_t j = 0; j < n; ++j) phase[j] = std::polar(1.0, -h * spectrum[j] / cfg.epsilon);

    SdeEnsemble ens(cfg, n, plan_checkpoints(cfg));
    auto make = [&] {
        return [&, drift = ComplexState(n), xi = ComplexState(psi.cols()), noise = ComplexState(n)](
                   std::size_t, double, std::span<Complex> v, Rng& rng) mutable {
            p.evaluate_into(v, drift);
            apply_root_to_gaussian(psi, rng, xi, noise);
            for (std::size_t j = 0; j < n; ++j) v[j] = phase[j] * (v[j] + h * drift[j] + sqrt_h * noise[j]);
        };
    };
    run_trajectories<Complex>(ens, v0, make, complex_norm);
    return ens;
}

SdeEnsemble simulate_interaction(const EvaluableField& p, const CMatrix& psi, const FrequencySpectrum& spectrum,
                                 std::span<const Complex> v0, const SimulationConfig& cfg) {
    cfg.validate();
    cfg.require_oscillation_resolved();
    const std::size_t n = spectrum.size();
    require_same_dimension(n, p.dimension(), "simulate_interaction: drift");
    require_same_dimension(n, psi.rows(), "simulate_interaction: dispersion");
    check_start(n, v0);

    const double h = cfg.step();
    const double inv_eps = 1.0 / cfg.epsilon;
    // C(tau) = D(tau) C(0) D(tau)^* with D = diag(exp(i lambda tau / eps)); the root of
    // C(tau) / 2 is D S0 D^* where S0 is the root of C(0) / 2 (xi has E xi xi^* = 2I).
    const CMatrix c0 = noise_increment_covariance(psi, spectrum, cfg.epsilon, 0.0, h);
    const CMatrix s0 = hermitian_sqrt(Complex(0.5) * c0);

    SdeEnsemble ens(cfg, n, plan_checkpoints(cfg));
    auto make = [&] {
        return [&, d = ComplexState(n), y = ComplexState(n), drift = ComplexState(n), xi = ComplexState(n),
                noise = ComplexState(n)](std::size_t, double tau, std::span<Complex> a, Rng& rng) mutable {
            for (std::size_t j = 0; j < n; ++j) {
                d[j] = std::polar(1.0, spectrum[j] * tau * inv_eps);
                y[j] = std::conj(d[j]) * a[j];
            }
            p.evaluate_into(y, drift);
            for (std::size_t j = 0; j < n; ++j) xi[j] = std::conj(d[j]) * rng.complex_gaussian();
            multiply_into(s0, xi, noise);
            for (std::size_t j = 0; j < n; ++j) a[j] += h * d[j] * drift[j] + d[j] * noise[j];
        };
    };
    run_trajectories<Complex>(ens, v0, make, complex_norm);
    return ens;
}

SdeEnsemble simulate_effective(const EffectiveModel& model, std::span<const Complex> v0,
                               const SimulationConfig& cfg) {
    cfg.validate();
    const std::size_t n = model.drift.dimension();
    require_same_dimension(n, model.dispersion.rows(), "simulate_effective: dispersion");
    check_start(n, v0);

    const double h = cfg.step();
    const double sqrt_h = std::sqrt(h);
    SdeEnsemble ens(cfg, n, plan_checkpoints(cfg));
    auto make = [&] {
        return [&, drift = ComplexState(n), xi = ComplexState(model.dispersion.cols()), noise = ComplexState(n)](
                   std::size_t, double, std::span<Complex> a, Rng& rng) mutable {
            model.drift.evaluate_into(a, drift);
            apply_root_to_gaussian(model.dispersion, rng, xi, noise);
            for (std::size_t j = 0; j < n; ++j) a[j] += h * drift[j] + sqrt_h * noise[j];
        };
    };
    run_trajectories<Complex>(ens, v0, make, complex_norm);
    return ens;
}

ActionEnsemble simulate_action_sde(const std::vector<RadialPolynomial>& r, std::span<const double> b,
                                   std::span<const double> i0, const SimulationConfig& cfg) {
    cfg.validate();
    const std::size_t n = r.size();
    require_same_dimension(n, b.size(), "simulate_action_sde: b");
    require_same_dimension(n, i0.size(), "simulate_action_sde: I0");
    for (std::size_t j = 0; j < n; ++j) {
        if (!(i0[j] >= 0.0) || !std::isfinite(i0[j])) throw InvalidArgument("initial actions must be nonnegative");
        if (!(b[j] >= 0.0) || !std::isfinite(b[j])) throw InvalidArgument("b must be nonnegative");
    }

    const double h = cfg.step();
    const double sqrt_h = std::sqrt(h);
    ActionEnsemble ens(cfg, n, plan_checkpoints(cfg));
    auto make = [&] {
        return [&, sq = RealVector(n), xi = RealVector(n)](std::size_t, double, std::span<double> act,
                                                             Rng& rng) mutable {
            for (std::size_t j = 0; j < n; ++j) {
                sq[j] = 2.0 * act[j];
                xi[j] = rng.gaussian();
            }
            for (std::size_t j = 0; j < n; ++j) {
                const double drift = 2.0 * act[j] * r[j](sq).real() + b[j] * b[j];
                const double diffusion = b[j] * std::sqrt(2.0 * act[j]);
                act[j] = std::max(0.0, act[j] + h * drift + sqrt_h * diffusion * xi[j]);
            }
        };
    };
    run_trajectories<double>(ens, i0, make, action_norm);
    return ens;
}

SdeEnsemble simulate_general(const EvaluableField& p, const StateDependentDispersion& b,
                             const FrequencySpectrum& spectrum, std::span<const Complex> v0,
                             const SimulationConfig& cfg) {
    cfg.validate();
    cfg.require_oscillation_resolved();
    const std::size_t n = spectrum.size();
    require_same_dimension(n, p.dimension(), "simulate_general: drift");
    require_same_dimension(n, b.n, "simulate_general: dispersion");
    check_start(n, v0);

    const double h = cfg.step();
    const double sqrt_h = std::sqrt(h);
    ComplexState phase(n);
    for (std::size_t j = 0; j < n; ++j) phase[j] = std::polar(1.0, -h * spectrum[j] / cfg.epsilon);

    SdeEnsemble ens(cfg, n, plan_checkpoints(cfg));
    auto make = [&] {
        return [&, drift = ComplexState(n), xi = RealVector(b.n2), noise = RealVector(2 * n)](
                   std::size_t, double, std::span<Complex> v, Rng& rng) mutable {
            p.evaluate_into(v, drift);
            const RMatrix bv = b(v);
            for (auto& x : xi) x = rng.gaussian();
            multiply_into(bv, xi, noise);
            for (std::size_t j = 0; j < n; ++j) {
                const Complex dw{noise[2 * j], noise[2 * j + 1]};
                v[j] = phase[j] * (v[j] + h * drift[j] + sqrt_h * dw);
            }
        };
    };
    run_trajectories<Complex>(ens, v0, make, complex_norm);
    return ens;
}

std::string_view to_string(SimulatorKind k) {
    switch (k) {
        case SimulatorKind::original: return "original";
        case SimulatorKind::interaction: return "interaction";
        case SimulatorKind::effective: return "effective";
    }
    return "effective";
}

SimulatorKind simulator_kind_from_string(std::string_view s) {
    if (s == "original") return SimulatorKind::original;
    if (s == "interaction") return SimulatorKind::interaction;
    if (s == "effective") return SimulatorKind::effective;
    throw InvalidArgument("unknown simulator '" + std::string(s) + "'");
}

SdeEnsemble simulate(SimulatorKind kind, const Model& model, const SimulationConfig& cfg) {
    switch (kind) {
        case SimulatorKind::original:
            return simulate_original(model.drift, model.psi, model.spectrum, model.v0, cfg);
        case SimulatorKind::interaction:
            return simulate_interaction(model.drift, model.psi, model.spectrum, model.v0, cfg);
        case SimulatorKind::effective:
            break;
    }
    const auto eff = EffectiveModel::build(model.drift, model.psi, model.spectrum);
    return simulate_effective(eff, model.v0, cfg);
}

double sup_moment(const SdeEnsemble& e, unsigned m0) {
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < e.size(); ++i) {
        if (e.flagged(i)) continue;
        sum += std::pow(e.sup_norm(i), 2.0 * m0);
        ++count;
    }
    if (count == 0) throw NumericalError("sup_moment: every trajectory was flagged");
    return sum / static_cast<double>(count);
}

double holder_quantile(const SdeEnsemble& e, double alpha, double q) {
    if (!(q > 0.0 && q <= 1.0)) throw InvalidArgument("holder_quantile: q must lie in (0, 1]");
    std::vector<double> values(e.size(), -1.0);
    const auto n = static_cast<long long>(e.size());
    const bool parallel = e.config().execution == Execution::parallel;
#pragma omp parallel for schedule(static) if (parallel)
    for (long long i = 0; i < n; ++i) {
        const auto t = static_cast<std::size_t>(i);
        if (!e.flagged(t)) values[t] = holder_norm(path_of(e, t), alpha);
    }
    std::erase_if(values, [](double v) { return v < 0.0; });
    if (values.empty()) throw NumericalError("holder_quantile: every trajectory was flagged");
    std::sort(values.begin(), values.end());
    const auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(values.size())));
    return values[std::max<std::size_t>(rank, 1) - 1];
}

}  // namespace resavg
