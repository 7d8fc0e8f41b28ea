#include "resavg/experiments.hpp"

#include "resavg/measures.hpp"
#include "resavg/report_io.hpp"
#include "resavg/rng.hpp"

#include <json.hpp>
#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <sstream>

namespace resavg {

namespace {

using nlohmann::json;

// Stream salts, one per independent random source of an experiment.
constexpr std::uint64_t kSaltInteraction = 0x11;
constexpr std::uint64_t kSaltEffective = 0x12;
constexpr std::uint64_t kSaltBracket = 0x13;
constexpr std::uint64_t kSaltOriginal = 0x14;
constexpr std::uint64_t kSaltAudit = 0x15;
constexpr std::uint64_t kSaltStationary = 0x16;
constexpr std::uint64_t kSaltReference = 0x17;
constexpr std::uint64_t kSaltActionSde = 0x18;

constexpr std::size_t kDiagnosticCheckpoints = 64;
constexpr std::size_t kRotationAngles = 8;
constexpr double kHolderAlpha = 1.0 / 3.0;
constexpr double kDiagnosticFactor = 2.0;
constexpr double kMatrixTol = 1e-10;
constexpr double kStationaryActionTol = 0.05;

Verdict at_most(std::string name, double value, double threshold) {
    return {std::move(name), value <= threshold, value, threshold, "<="};
}

Verdict below(std::string name, double value, double threshold) {
    return {std::move(name), value < threshold, value, threshold, "<"};
}

double smallest(const std::vector<double>& v) { return *std::min_element(v.begin(), v.end()); }

/// Epsilon values from largest to smallest.
std::vector<double> descending(std::vector<double> v) {
    std::sort(v.begin(), v.end(), std::greater<>());
    return v;
}

class Run {
public:
    Run(const ScenarioConfig& cfg, const RunOptions& opt)
        : cfg_(cfg), opt_(opt), model_(build_model(cfg)), x_(cfg.experiment) {
        res_.kind = x_.kind;
        res_.scenario_hash = scenario_hash(cfg);
        res_.seed = opt.seed_override.value_or(x_.seed);
        hash_text_ = hex64(res_.scenario_hash);
        tol_ = x_.tolerance.value_or(default_tolerance(x_.kind));
    }

    ExperimentResult execute() {
        std::filesystem::create_directories(opt_.out_dir);
        try {
            switch (x_.kind) {
                case ExperimentKind::E1: e1(); break;
                case ExperimentKind::E2: e2(); break;
                case ExperimentKind::E3: e3(); break;
                case ExperimentKind::E4: e4(); break;
                case ExperimentKind::E5: e5(); break;
                case ExperimentKind::E6: e6(); break;
            }
        } catch (const std::exception& e) {
            res_.failed_stage = stage_;
            res_.notes.push_back("stage '" + stage_ + "' failed: " + e.what());
            write_summary();
            throw StageError(stage_, std::current_exception(), e.what());
        }
        write_summary();
        return res_;
    }

private:
    CsvWriter csv(const std::string& file, std::vector<std::string> columns) {
        res_.files.push_back(file);
        columns.insert(columns.begin(), {"scenario_hash", "seed"});
        return CsvWriter(opt_.out_dir / file, std::move(columns));
    }

    void traced(CsvWriter& w) { w.field(hash_text_).field(std::to_string(res_.seed)); }

    SimulationConfig sim_config(double eps, std::uint64_t salt) const {
        SimulationConfig c;
        c.epsilon = eps;
        c.t_end = x_.t_end;
        c.dt = eps / x_.dt_per_epsilon;
        c.n_traj = x_.n_traj;
        c.master_seed = res_.seed;
        c.execution = opt_.execution;
        c.stream_salt = salt;
        return c;
    }

    void record_distance(json eps, json tau, double lower, double upper, const std::string& method,
                         std::size_t n) {
        // A null tau marks a stationary comparison, a null epsilon an epsilon-free one.
        distances_.push_back({{"scenario", cfg_.name},
                              {"epsilon", eps},
                              {"tau", tau},
                              {"lower", lower},
                              {"upper", upper},
                              {"method", method},
                              {"n_samples", n},
                              {"seed", res_.seed}});
    }

    // --- E1: symbolic vs numeric average, effective diffusion audit --------------------------
    void e1() {
        stage_ = "averaging audit";
        const auto p = build_drift(cfg_);
        const auto& spectrum = model_.spectrum;
        const auto symbolic = resonant_average_symbolic(p, spectrum);
        res_.notes.push_back("<<P>> = " + symbolic.to_string());
        Rng rng(derive_stream_seed(res_.seed, 0, kSaltAudit));
        auto w = csv("e1_average.csv", {"point", "component", "symbolic_re", "symbolic_im", "numeric_re",
                                        "numeric_im", "abs_diff"});
        double worst = 0.0;
        for (std::size_t k = 0; k < x_.audit_points; ++k) {
            ComplexState a(cfg_.n);
            for (auto& z : a) z = rng.complex_gaussian();
            const auto s = symbolic(a);
            const auto num = average_numeric(EvaluableField(p), spectrum, a, x_.averaging_tol);
            for (std::size_t j = 0; j < cfg_.n; ++j) {
                const double d = std::abs(s[j] - num.value[j]);
                worst = std::max(worst, d);
                traced(w);
                w.field(k).field(j + 1).field(s[j].real()).field(s[j].imag());
                w.field(num.value[j].real()).field(num.value[j].imag()).field(d).end_row();
            }
        }
        res_.verdicts.push_back(at_most("numeric_vs_symbolic_average", worst, tol_));

        stage_ = "effective diffusion";
        const CMatrix a = effective_diffusion(model_.psi, spectrum);
        const CMatrix b = hermitian_sqrt(a);
        const auto eig = hermitian_eigen(a);
        res_.verdicts.push_back(
            at_most("A_hermitian_defect", max_abs_diff(a, adjoint(a)), kMatrixTol));
        res_.verdicts.push_back(
            {"A_min_eigenvalue", eig.values.front() >= -kMatrixTol, eig.values.front(), -kMatrixTol, ">="});
        res_.verdicts.push_back(at_most("BB*_minus_A", max_abs_diff(b * adjoint(b), a), kMatrixTol));
        auto m = csv("e1_diffusion.csv", {"row", "col", "a_re", "a_im", "b_re", "b_im"});
        for (std::size_t i = 0; i < cfg_.n; ++i) {
            for (std::size_t j = 0; j < cfg_.n; ++j) {
                traced(m);
                m.field(i + 1).field(j + 1).field(a(i, j).real()).field(a(i, j).imag());
                m.field(b(i, j).real()).field(b(i, j).imag()).end_row();
            }
        }
    }

    // Checkpoints: the comparison times plus a uniform grid for the path diagnostics.
    std::vector<double> diagnostic_checkpoints() const {
        std::vector<double> t = x_.taus;
        for (std::size_t k = 0; k <= kDiagnosticCheckpoints; ++k) {
            t.push_back(x_.t_end * static_cast<double>(k) / static_cast<double>(kDiagnosticCheckpoints));
        }
        return t;
    }

    SdeEnsemble effective_ensemble(std::vector<double> checkpoints) {
        auto c = sim_config(smallest(x_.epsilons), kSaltEffective);
        c.checkpoints = std::move(checkpoints);
        const auto eff = EffectiveModel::build(model_.drift, model_.psi, model_.spectrum);
        return simulate_effective(eff, model_.v0, c);
    }

    // --- E2: finite-horizon weak convergence of a^eps to the effective law --------------------
    void e2() {
        stage_ = "effective ensemble";
        const auto eff = effective_ensemble(x_.taus);
        auto w = csv("e2_brackets.csv", {"epsilon", "tau", "lower", "upper", "n_samples", "method"});
        auto d = csv("e2_diagnostics.csv", {"epsilon", "sup_moment", "holder_q95", "flagged"});
        std::vector<double> sup_upper, moments, holders;
        std::size_t row = 0;
        const auto eps_list = descending(x_.epsilons);
        for (double eps : eps_list) {
            stage_ = "interaction ensemble eps=" + format_double(eps);
            auto c = sim_config(eps, kSaltInteraction);
            c.checkpoints = diagnostic_checkpoints();
            const auto inter = simulate_interaction(model_.drift, model_.psi, model_.spectrum, model_.v0, c);
            stage_ = "brackets eps=" + format_double(eps);
            double sup = 0.0;
            for (double tau : x_.taus) {
                Rng rng(derive_stream_seed(res_.seed, row++, kSaltBracket));
                const auto b = dual_lipschitz_bracket(checkpoint_measure(inter, tau), checkpoint_measure(eff, tau),
                                                      x_.dict_size, rng, opt_.execution);
                sup = std::max(sup, b.upper);
                traced(w);
                w.field(eps).field(tau).field(b.lower).field(b.upper).field(b.n_samples).field(b.upper_method);
                w.end_row();
                record_distance(eps, tau, b.lower, b.upper, b.upper_method, b.n_samples);
            }
            sup_upper.push_back(sup);
            moments.push_back(sup_moment(inter, c.moment_order));
            holders.push_back(holder_quantile(inter, kHolderAlpha, 0.95));
            traced(d);
            d.field(eps).field(moments.back()).field(holders.back()).field(inter.flagged_count()).end_row();
        }
        res_.verdicts.push_back(at_most("upper_at_smallest_epsilon", sup_upper.back(), tol_));
        bool decreasing = true;
        for (std::size_t i = 1; i < sup_upper.size(); ++i) decreasing = decreasing && sup_upper[i] < sup_upper[i - 1];
        res_.verdicts.push_back({"upper_strictly_decreasing_in_epsilon", decreasing, decreasing ? 1.0 : 0.0, 1.0, "=="});
        auto spread = [](const std::vector<double>& v) {
            return *std::max_element(v.begin(), v.end()) / *std::min_element(v.begin(), v.end());
        };
        res_.verdicts.push_back(below("sup_moment_ratio_across_epsilon", spread(moments), kDiagnosticFactor));
        res_.verdicts.push_back(below("holder_q95_ratio_across_epsilon", spread(holders), kDiagnosticFactor));
        res_.notes.push_back("laws are compared at finitely many checkpoints, a weakening of path-space convergence");
    }

    // --- E3: convergence of the action marginals ---------------------------------------------
    void e3() {
        stage_ = "effective ensemble";
        const auto eff = effective_ensemble(x_.taus);
        auto w = csv("e3_actions.csv", {"epsilon", "tau", "w1", "n_samples"});
        double last = 0.0;
        for (double eps : descending(x_.epsilons)) {
            stage_ = "original ensemble eps=" + format_double(eps);
            auto c = sim_config(eps, kSaltOriginal);
            c.checkpoints = x_.taus;
            const auto orig = simulate_original(model_.drift, model_.psi, model_.spectrum, model_.v0, c);
            double sup = 0.0;
            for (double tau : x_.taus) {
                const auto xa = action_pushforward(orig, tau);
                const auto ya = action_pushforward(eff, tau);
                const double d = marginal_w1(xa, ya);
                sup = std::max(sup, d);
                const std::size_t n = std::min(xa.size(), ya.size());
                traced(w);
                w.field(eps).field(tau).field(d).field(n).end_row();
                record_distance(eps, tau, 0.0, d, "marginal_w1(actions)", n);
            }
            last = sup;
        }
        res_.verdicts.push_back(at_most("action_w1_at_smallest_epsilon", last, tol_));
    }

    // Reference draws from the effective stationary law: exact when <<P>> is linear.
    EmpiricalMeasure reference_stationary(std::size_t m) {
        const auto symbolic = resonant_average_symbolic(build_drift(cfg_), model_.spectrum);
        const CMatrix a = effective_diffusion(model_.psi, model_.spectrum);
        Rng rng(derive_stream_seed(res_.seed, 0, kSaltReference));
        if (const auto cov = linear_stationary_covariance(symbolic, a)) {
            res_.notes.push_back("reference stationary law: exact complex Gaussian");
            return sample_complex_gaussian_measure(*cov, m, rng);
        }
        res_.notes.push_back("reference stationary law: long effective-equation run");
        auto base = sim_config(smallest(x_.epsilons), kSaltReference);
        return estimate_stationary(SimulatorKind::effective, model_, x_.stationary, base).samples;
    }

    // --- E4: stationary measures mu^eps against mu^0 ------------------------------------------
    void e4() {
        stage_ = "reference stationary law";
        const std::size_t pool = x_.stationary.n_long_traj * x_.stationary.samples_per_traj;
        const auto mu0 = reference_stationary(pool);
        auto w = csv("e4_stationary.csv", {"epsilon", "sliced_w1", "n_samples", "mc_floor"});
        double last = 0.0;
        std::size_t row = 0;
        for (double eps : descending(x_.epsilons)) {
            stage_ = "stationary estimate eps=" + format_double(eps);
            const auto est = estimate_stationary(SimulatorKind::original, model_, x_.stationary,
                                                 sim_config(eps, kSaltStationary));
            Rng rng(derive_stream_seed(res_.seed, row++, kSaltBracket));
            last = sliced_w1(est.samples, mu0, x_.n_dirs, rng, opt_.execution);
            const std::size_t n = std::min(est.samples.size(), mu0.size());
            traced(w);
            w.field(eps).field(last).field(n).field(mc_floor(n)).end_row();
            record_distance(eps, nullptr, 0.0, last,
                            "sliced_w1(" + std::to_string(x_.n_dirs) + ")", n);
        }
        res_.verdicts.push_back(at_most("stationary_sliced_w1_at_smallest_epsilon", last, tol_));

        stage_ = "rotation invariance";
        Rng rng(derive_stream_seed(res_.seed, 1, kSaltReference));
        const double ks = rotation_invariance_test(mu0, model_.spectrum.lambdas(), kRotationAngles, rng);
        res_.verdicts.push_back(at_most("reference_rotation_invariance_ks", ks,
                                        ks_band(mu0.size(), 0.05, kRotationAngles * mu0.dim())));
    }

    // --- E5: effective equation vs the reduced action SDE ------------------------------------
    void e5() {
        stage_ = "action SDE setup";
        if (model_.spectrum.resonance() != ResonanceClass::non_resonant) {
            throw InvalidArgument("non-resonant required");
        }
        const auto symbolic = resonant_average_symbolic(build_drift(cfg_), model_.spectrum);
        const auto radial = radial_decomposition(symbolic, model_.spectrum);
        const CMatrix a = effective_diffusion(model_.psi, model_.spectrum);
        RealVector b(cfg_.n);
        for (std::size_t j = 0; j < cfg_.n; ++j) b[j] = std::sqrt(std::max(0.0, a(j, j).real()));
        const auto i0 = actions(model_.v0);

        stage_ = "finite-time action laws";
        const auto eff = effective_ensemble(x_.taus);
        auto c = sim_config(smallest(x_.epsilons), kSaltActionSde);
        c.checkpoints = x_.taus;
        const auto sde = simulate_action_sde(radial, b, i0, c);
        auto w = csv("e5_actions.csv", {"tau", "w1", "n_samples"});
        double sup = 0.0;
        for (double tau : x_.taus) {
            const auto xa = action_pushforward(eff, tau);
            const auto ya = action_measure(sde, tau);
            const double d = marginal_w1(xa, ya);
            sup = std::max(sup, d);
            const std::size_t n = std::min(xa.size(), ya.size());
            traced(w);
            w.field(tau).field(d).field(n).end_row();
            record_distance(nullptr, tau, 0.0, d, "marginal_w1(actions)", n);
        }
        res_.verdicts.push_back(at_most("action_sde_w1", sup, tol_));

        stage_ = "stationary actions";
        const auto& st = x_.stationary;
        auto base = sim_config(smallest(x_.epsilons), kSaltStationary);
        const auto pool = estimate_stationary(SimulatorKind::effective, model_, st, base).samples;
        RealVector mean_eff(cfg_.n, 0.0), mean_sde(cfg_.n, 0.0);
        for (std::size_t i = 0; i < pool.size(); ++i) {
            const auto p = pool.point(i);
            for (std::size_t j = 0; j < cfg_.n; ++j) mean_eff[j] += 0.5 * (p[2 * j] * p[2 * j] + p[2 * j + 1] * p[2 * j + 1]);
        }
        for (auto& m : mean_eff) m /= static_cast<double>(pool.size());

        auto long_cfg = sim_config(smallest(x_.epsilons), kSaltActionSde);
        long_cfg.n_traj = st.n_long_traj;
        long_cfg.t_end = st.burn_in + st.stride * static_cast<double>(st.samples_per_traj - 1);
        long_cfg.checkpoints.clear();
        for (std::size_t k = 0; k < st.samples_per_traj; ++k) {
            long_cfg.checkpoints.push_back(st.burn_in + st.stride * static_cast<double>(k));
        }
        const auto long_sde = simulate_action_sde(radial, b, i0, long_cfg);
        std::size_t count = 0;
        for (std::size_t t = 0; t < long_sde.size(); ++t) {
            if (long_sde.flagged(t)) continue;
            for (std::size_t k = 0; k < long_sde.n_checkpoints(); ++k) {
                const auto s = long_sde.state(t, k);
                for (std::size_t j = 0; j < cfg_.n; ++j) mean_sde[j] += s[j];
                ++count;
            }
        }
        if (count == 0) throw NumericalError("every action SDE trajectory was flagged");
        for (auto& m : mean_sde) m /= static_cast<double>(count);

        auto s = csv("e5_stationary.csv", {"source", "coordinate", "mean_action"});
        for (std::size_t j = 0; j < cfg_.n; ++j) {
            traced(s);
            s.field("effective").field(j + 1).field(mean_eff[j]).end_row();
            traced(s);
            s.field("action_sde").field(j + 1).field(mean_sde[j]).end_row();
            const std::string idx = std::to_string(j + 1);
            res_.verdicts.push_back(at_most("stationary_mean_action_gap_" + idx, std::abs(mean_eff[j] - mean_sde[j]),
                                            kStationaryActionTol));
            if (x_.stationary_action_target) {
                const double target = *x_.stationary_action_target;
                res_.verdicts.push_back(at_most("effective_stationary_action_error_" + idx,
                                                std::abs(mean_eff[j] - target), kStationaryActionTol));
                res_.verdicts.push_back(at_most("action_sde_stationary_action_error_" + idx,
                                                std::abs(mean_sde[j] - target), kStationaryActionTol));
            }
        }
    }

    // --- E6: uniform-in-time sweep ------------------------------------------------------------
    void e6() {
        stage_ = "uniform sweep";
        SweepConfig sc;
        sc.epsilons = descending(x_.epsilons);
        sc.tau_grid = x_.tau_grid;
        sc.dt_per_epsilon = x_.dt_per_epsilon;
        sc.n_traj = x_.n_traj;
        sc.master_seed = res_.seed;
        sc.dict_size = x_.dict_size;
        sc.execution = opt_.execution;
        const auto sweep = uniform_sweep(model_, sc);
        auto w = csv("e6_sweep.csv", {"epsilon", "tau", "lower", "upper", "n_samples"});
        for (const auto& r : sweep.rows) {
            traced(w);
            w.field(r.epsilon).field(r.tau).field(r.bracket.lower).field(r.bracket.upper).field(r.bracket.n_samples);
            w.end_row();
            record_distance(r.epsilon, r.tau, r.bracket.lower, r.bracket.upper, r.bracket.upper_method,
                            r.bracket.n_samples);
        }
        res_.verdicts.push_back(at_most("sup_upper_at_smallest_epsilon", sweep.sup_upper.back(), tol_));
        const double floor = mc_floor(sweep.n_samples);
        for (std::size_t i = 1; i < sweep.sup_upper.size(); ++i) {
            const double slack = sweep.sup_upper[i - 1] - (sweep.sup_upper[i] - floor);
            res_.verdicts.push_back({"sup_ordering_eps_" + format_double(sc.epsilons[i - 1]) + "_vs_" +
                                         format_double(sc.epsilons[i]),
                                     slack >= 0.0, slack, 0.0, ">="});
        }
        res_.notes.push_back("sup over tau >= 0 truncated at tau_max = " + format_double(sweep.tau_max));
    }

    void write_summary() {
        if (!distances_.empty()) {
            write_text(opt_.out_dir / "distances.json", distances_.dump(2) + "\n");
            res_.files.push_back("distances.json");
        }
        json verdicts = json::array();
        for (const auto& v : res_.verdicts) {
            verdicts.push_back({{"name", v.name},
                                {"pass", v.pass},
                                {"value", v.value},
                                {"threshold", v.threshold},
                                {"relation", v.relation}});
        }
        json summary{{"experiment", std::string(to_string(res_.kind))},
                     {"scenario", cfg_.name},
                     {"scenario_hash", hash_text_},
                     {"seed", res_.seed},
                     {"verdicts", verdicts},
                     {"passed", res_.passed()},
                     {"notes", res_.notes},
                     {"warnings", cfg_.warnings},
                     {"files", res_.files}};
        if (!res_.failed_stage.empty()) summary["failed_stage"] = res_.failed_stage;
        write_text(opt_.out_dir / "summary.json", summary.dump(2) + "\n");

        std::ostringstream txt;
        txt << "experiment " << to_string(res_.kind) << " on scenario '" << cfg_.name << "' (hash " << hash_text_
            << ", seed " << res_.seed << ")\n";
        for (const auto& v : res_.verdicts) {
            txt << (v.pass ? "PASS " : "FAIL ") << v.name << ": " << format_double(v.value) << ' ' << v.relation << ' '
                << format_double(v.threshold) << '\n';
        }
        for (const auto& n : res_.notes) txt << "note: " << n << '\n';
        for (const auto& wmsg : cfg_.warnings) txt << "warning: " << wmsg << '\n';
        txt << "overall: " << (res_.passed() ? "PASS" : "FAIL") << '\n';
        write_text(opt_.out_dir / "summary.txt", txt.str());

        const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
        char stamp[32];
        std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
        json meta{{"created_utc", stamp}, {"max_threads", omp_get_max_threads()}};
        write_text(opt_.out_dir / "metadata.json", meta.dump(2) + "\n");
    }

    const ScenarioConfig& cfg_;
    const RunOptions& opt_;
    Model model_;
    const ExperimentSpec& x_;
    ExperimentResult res_;
    std::string hash_text_;
    double tol_ = 0.0;
    std::string stage_ = "setup";
    json distances_ = json::array();
};

}  // namespace

bool ExperimentResult::passed() const {
    return failed_stage.empty() && std::all_of(verdicts.begin(), verdicts.end(), [](const auto& v) { return v.pass; });
}

StageError::StageError(std::string stage_name, std::exception_ptr original, const std::string& message)
    : Error("stage '" + stage_name + "' failed: " + message), stage(std::move(stage_name)), cause(std::move(original)) {}

ExperimentResult run_experiment(const ScenarioConfig& cfg, const RunOptions& opt) { return Run(cfg, opt).execute(); }

}  // namespace resavg
