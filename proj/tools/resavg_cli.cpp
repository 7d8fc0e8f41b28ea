#include "resavg/errors.hpp"
#include "resavg/ergodic.hpp"
#include "resavg/experiments.hpp"
#include "resavg/measures.hpp"
#include "resavg/report_io.hpp"
#include "resavg/rng.hpp"
#include "resavg/scenario.hpp"

#include <CLI11.hpp>
#include <json.hpp>
#include <omp.h>

#include <iostream>

namespace {

using nlohmann::json;
using namespace resavg;

enum ExitCode { kPass = 0, kUsage = 1, kInvalidScenario = 2, kNumericalFailure = 3, kToleranceExceeded = 4 };

struct Globals {
    std::optional<std::uint64_t> seed;
    std::string out_dir;
    int threads = 0;

    [[nodiscard]] Execution execution() const { return threads == 1 ? Execution::serial : Execution::parallel; }
};

json complex_json(Complex z) { return json::array({z.real(), z.imag()}); }

json matrix_json(const CMatrix& m) {
    json rows = json::array();
    for (std::size_t i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(complex_json(m(i, j)));
        rows.push_back(row);
    }
    return rows;
}

int classify(std::exception_ptr e) {
    try {
        std::rethrow_exception(e);
    } catch (const StageError& s) {
        return classify(s.cause);
    } catch (const ScenarioError&) {
        return kInvalidScenario;
    } catch (const InvalidArgument&) {
        return kInvalidScenario;
    } catch (const DimensionError&) {
        return kInvalidScenario;
    } catch (...) {
        return kNumericalFailure;
    }
}

void print_warnings(const ScenarioConfig& cfg) {
    for (const auto& w : cfg.warnings) std::cerr << "warning: " << w << '\n';
}

SimulationConfig config_for(const ScenarioConfig& cfg, const Globals& g, double eps, std::uint64_t salt) {
    SimulationConfig c;
    c.epsilon = eps;
    c.t_end = cfg.experiment.t_end;
    c.dt = eps / cfg.experiment.dt_per_epsilon;
    c.n_traj = cfg.experiment.n_traj;
    c.master_seed = g.seed.value_or(cfg.experiment.seed);
    c.execution = g.execution();
    c.stream_salt = salt;
    return c;
}

int cmd_average(const ScenarioConfig& cfg) {
    const auto spectrum = build_spectrum(cfg);
    const auto avg = resonant_average_symbolic(build_drift(cfg), spectrum);
    std::cout << "resonance: " << to_string(spectrum.resonance()) << '\n';
    std::cout << "P      = " << build_drift(cfg).to_string() << '\n';
    std::cout << "<<P>>  = " << avg.to_string() << '\n';
    return kPass;
}

int cmd_effective(const ScenarioConfig& cfg) {
    const auto model = build_model(cfg);
    const auto eff = EffectiveModel::build(model.drift, model.psi, model.spectrum);
    eff.validate();
    json out{{"scenario", cfg.name},
             {"scenario_hash", hex64(scenario_hash(cfg))},
             {"drift", eff.drift.polynomial() ? eff.drift.polynomial()->to_string() : "numeric"},
             {"A", matrix_json(eff.diffusion)},
             {"B", matrix_json(eff.dispersion)}};
    std::cout << out.dump(2) << '\n';
    return kPass;
}

int cmd_simulate(const ScenarioConfig& cfg, const Globals& g, const std::string& simulator, double eps) {
    const auto model = build_model(cfg);
    auto c = config_for(cfg, g, eps, 0);
    c.checkpoints = cfg.experiment.taus;
    const auto ens = simulator == "general"
                         ? simulate_general(model.drift, build_general_dispersion(cfg), model.spectrum, model.v0, c)
                         : simulate(simulator_kind_from_string(simulator), model, c);
    const auto dir = resolve_out_dir(g.out_dir);
    std::filesystem::create_directories(dir);
    const auto path = dir / ("ensemble_" + simulator + "_eps" + format_double(eps) + ".csv");
    write_ensemble_csv(path, ens, scenario_hash(cfg));
    std::cout << "wrote " << path.string() << " (" << ens.size() << " trajectories, " << ens.flagged_count()
              << " flagged)\n";
    return ens.flagged_count() == 0 ? kPass : kNumericalFailure;
}

int cmd_compare(const ScenarioConfig& cfg, const Globals& g, double eps, double tau) {
    const auto model = build_model(cfg);
    auto c = config_for(cfg, g, eps, 1);
    c.t_end = std::max(tau, c.dt);
    c.checkpoints = {tau};
    const auto inter = simulate(SimulatorKind::interaction, model, c);
    c.stream_salt = 2;
    const auto eff = simulate(SimulatorKind::effective, model, c);
    Rng rng(derive_stream_seed(c.master_seed, 0, 3));
    const auto b = dual_lipschitz_bracket(checkpoint_measure(inter, tau), checkpoint_measure(eff, tau),
                                          cfg.experiment.dict_size, rng, c.execution);
    json out{{"scenario", cfg.name}, {"epsilon", eps},     {"tau", tau},
             {"lower", b.lower},     {"upper", b.upper},   {"method", b.upper_method},
             {"n_samples", b.n_samples}, {"seed", c.master_seed}};
    std::cout << out.dump() << '\n';
    const double tol = cfg.experiment.tolerance.value_or(default_tolerance(ExperimentKind::E2));
    return b.upper <= tol ? kPass : kToleranceExceeded;
}

int cmd_stationary(const ScenarioConfig& cfg, const Globals& g, const std::string& simulator, double eps) {
    const auto model = build_model(cfg);
    const auto coercive = check_coercivity(build_drift(cfg));
    std::cout << "coercivity: " << (coercive.satisfied ? "satisfied" : "not shown") << " (alpha1 "
              << format_double(coercive.alpha1) << ", alpha2 " << format_double(coercive.alpha2) << "; "
              << coercive.message << ")\n";
    const auto est = estimate_stationary(simulator_kind_from_string(simulator), model, cfg.experiment.stationary,
                                         config_for(cfg, g, eps, 0x16));
    std::cout << "pooled samples: " << est.samples.size() << ", flagged: " << est.flagged << '\n';
    for (std::size_t j = 0; j < cfg.n; ++j) {
        const auto re = est.samples.coordinate(2 * j), im = est.samples.coordinate(2 * j + 1);
        double mean = 0.0;
        for (std::size_t i = 0; i < re.size(); ++i) mean += 0.5 * (re[i] * re[i] + im[i] * im[i]);
        std::cout << "E I_" << j + 1 << " = " << format_double(mean / static_cast<double>(re.size())) << '\n';
    }
    return kPass;
}

int cmd_run(ScenarioConfig cfg, const Globals& g, const std::string& experiment) {
    if (!experiment.empty()) cfg.experiment.kind = experiment_kind_from_string(experiment);
    RunOptions opt;
    opt.out_dir = resolve_out_dir(g.out_dir);
    opt.execution = g.execution();
    opt.seed_override = g.seed;
    const auto res = run_experiment(cfg, opt);
    std::cout << read_text(opt.out_dir / "summary.txt");
    return res.passed() ? kPass : kToleranceExceeded;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Resonant averaging toolkit: effective equations and weak-convergence experiments"};
    app.require_subcommand(1);
    app.fallthrough();
    Globals g;
    std::uint64_t seed = 0;
    auto* seed_opt = app.add_option("--seed", seed, "Master seed (overrides the scenario)");
    app.add_option("--out-dir", g.out_dir, "Output directory (default $RESAVG_OUT_DIR or ./resavg_out)");
    app.add_option("--threads", g.threads, "Worker threads; 1 forces serial execution")->check(CLI::NonNegativeNumber);

    std::string scenario_path, simulator = "interaction", experiment;
    double eps = 0.05, tau = 1.0;

    auto* average = app.add_subcommand("average", "Print the resonant average of the drift");
    auto* effective = app.add_subcommand("effective", "Print the effective drift, A and B as JSON");
    auto* sim = app.add_subcommand("simulate", "Simulate an ensemble and write it as CSV");
    auto* compare = app.add_subcommand("compare", "Bracket the distance between interaction and effective laws");
    auto* stationary = app.add_subcommand("stationary", "Estimate a stationary measure");
    auto* sweep = app.add_subcommand("sweep", "Run the uniform-in-time sweep (E6)");
    auto* run = app.add_subcommand("run", "Run the experiment declared in the scenario");
    for (auto* sc : {average, effective, sim, compare, stationary, sweep, run}) {
        sc->add_option("scenario", scenario_path, "Scenario file (JSON)")->required()->check(CLI::ExistingFile);
    }
    sim->add_option("--simulator", simulator, "original, interaction, effective or general (state-dependent noise)")
        ->check(CLI::IsMember({"original", "interaction", "effective", "general"}));
    stationary->add_option("--simulator", simulator, "original, interaction or effective")
        ->check(CLI::IsMember({"original", "interaction", "effective"}));
    for (auto* sc : {sim, compare, stationary}) sc->add_option("--epsilon", eps, "Scale separation")->check(CLI::PositiveNumber);
    compare->add_option("--tau", tau, "Comparison time")->check(CLI::NonNegativeNumber);
    run->add_option("--experiment", experiment, "Override the experiment kind (E1 .. E6)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kPass : kUsage;
    }
    if (*seed_opt) g.seed = seed;
    if (g.threads > 0) omp_set_num_threads(g.threads);

    try {
        const auto cfg = load_scenario(scenario_path);
        print_warnings(cfg);
        if (*average) return cmd_average(cfg);
        if (*effective) return cmd_effective(cfg);
        if (*sim) return cmd_simulate(cfg, g, simulator, eps);
        if (*compare) return cmd_compare(cfg, g, eps, tau);
        if (*stationary) return cmd_stationary(cfg, g, simulator, eps);
        if (*sweep) return cmd_run(cfg, g, "E6");
        return cmd_run(cfg, g, experiment);
    } catch (const ScenarioError& e) {
        std::cerr << e.what() << '\n';
        return kInvalidScenario;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return classify(std::current_exception());
    }
}
