#include "resavg/scenario.hpp"

#include "resavg/errors.hpp"
#include "resavg/report_io.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <set>

namespace resavg {

namespace {

using nlohmann::json;

const std::set<std::string> kTopKeys{"name", "n", "lambdas", "resonance", "drift", "psi", "dispersion", "v0",
                                     "experiment"};
const std::set<std::string> kDriftKeys{"builtin", "rate", "coupling", "monomials"};
const std::set<std::string> kExperimentKeys{"kind",      "epsilons",      "t_end",      "dt_per_epsilon",
                                            "n_traj",    "seed",          "taus",       "tau_grid",
                                            "dict_size", "n_dirs",        "audit_points", "averaging_tol",
                                            "stationary", "tolerance",    "stationary_action_target"};
const std::set<std::string> kStationaryKeys{"burn_in", "stride", "n_long_traj", "samples_per_traj",
                                            "override_coercivity"};
const std::set<std::string> kDispersionKeys{"builtin", "scale", "smoothness"};

// Walks the JSON tree and records every problem instead of stopping at the first.
class Reader {
public:
    std::vector<std::string> errors;

    void fail(const std::string& where, const std::string& what) { errors.push_back(where + ": " + what); }

    void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
        for (const auto& [k, _] : obj.items()) {
            if (!allowed.count(k)) fail(where, "unknown key '" + k + "'");
        }
    }

    std::optional<double> number(const json& obj, const char* key, const std::string& where) {
        if (!obj.contains(key)) return std::nullopt;
        const auto& v = obj.at(key);
        if (!v.is_number()) {
            fail(where + "." + key, "expected a number");
            return std::nullopt;
        }
        const double x = v.get<double>();
        if (!std::isfinite(x)) {
            fail(where + "." + key, "must be finite");
            return std::nullopt;
        }
        return x;
    }

    std::optional<std::uint64_t> count(const json& obj, const char* key, const std::string& where) {
        if (!obj.contains(key)) return std::nullopt;
        const auto& v = obj.at(key);
        if (!v.is_number_unsigned()) {
            fail(where + "." + key, "expected a nonnegative integer");
            return std::nullopt;
        }
        return v.get<std::uint64_t>();
    }

    std::optional<Complex> complex(const json& v, const std::string& where) {
        if (v.is_number()) return Complex(v.get<double>(), 0.0);
        if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
            fail(where, "expected a complex number [re, im]");
            return std::nullopt;
        }
        const Complex z(v[0].get<double>(), v[1].get<double>());
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
            fail(where, "must be finite");
            return std::nullopt;
        }
        return z;
    }

    std::vector<double> reals(const json& v, const std::string& where) {
        std::vector<double> out;
        if (!v.is_array()) {
            fail(where, "expected an array of numbers");
            return out;
        }
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (!v[i].is_number()) {
                fail(where + "[" + std::to_string(i) + "]", "expected a number");
                continue;
            }
            out.push_back(v[i].get<double>());
        }
        return out;
    }

    std::vector<unsigned> exponents(const json& v, const std::string& where) {
        std::vector<unsigned> out;
        if (!v.is_array()) {
            fail(where, "expected an array of nonnegative integers");
            return out;
        }
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (!v[i].is_number_unsigned()) {
                fail(where + "[" + std::to_string(i) + "]", "expected a nonnegative integer");
                out.push_back(0);
                continue;
            }
            out.push_back(v[i].get<unsigned>());
        }
        return out;
    }
};

std::string line_column(std::string_view text, std::size_t byte) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

json complex_json(Complex z) { return json::array({z.real(), z.imag()}); }

void parse_drift(Reader& r, const json& d, ScenarioConfig& cfg) {
    if (!d.is_object()) {
        r.fail("drift", "expected an object");
        return;
    }
    r.check_keys(d, kDriftKeys, "drift");
    if (d.contains("builtin")) {
        if (!d["builtin"].is_string()) {
            r.fail("drift.builtin", "expected a string");
            return;
        }
        cfg.drift.builtin = d["builtin"].get<std::string>();
        if (cfg.drift.builtin != "damping" && cfg.drift.builtin != "damping_swap") {
            r.fail("drift.builtin", "unknown builtin '" + cfg.drift.builtin + "' (damping, damping_swap)");
        }
        if (d.contains("monomials")) r.fail("drift", "give either builtin or monomials, not both");
        if (auto x = r.number(d, "rate", "drift")) cfg.drift.rate = *x;
        if (auto x = r.number(d, "coupling", "drift")) cfg.drift.coupling = *x;
        return;
    }
    if (!d.contains("monomials") || !d["monomials"].is_array()) {
        r.fail("drift", "needs 'builtin' or a 'monomials' array");
        return;
    }
    const auto& list = d["monomials"];
    for (std::size_t i = 0; i < list.size(); ++i) {
        const std::string where = "drift.monomials[" + std::to_string(i) + "]";
        const auto& m = list[i];
        if (!m.is_object()) {
            r.fail(where, "expected an object");
            continue;
        }
        Monomial mono;
        bool ok = true;
        if (auto t = r.count(m, "target", where); t && *t >= 1 && *t <= cfg.n) {
            mono.target = static_cast<std::size_t>(*t - 1);
        } else {
            r.fail(where + ".target", "must be an integer in 1.." + std::to_string(cfg.n));
            ok = false;
        }
        for (const char* key : {"alpha", "beta"}) {
            if (!m.contains(key)) {
                r.fail(where, std::string("missing '") + key + "'");
                ok = false;
                continue;
            }
            auto e = r.exponents(m[key], where + "." + key);
            if (e.size() != cfg.n) {
                r.fail(where + "." + key, "length " + std::to_string(e.size()) + " does not match n = " +
                                              std::to_string(cfg.n));
                ok = false;
            }
            (std::string_view(key) == "alpha" ? mono.alpha : mono.beta) = std::move(e);
        }
        if (!m.contains("coeff")) {
            r.fail(where, "missing 'coeff'");
            ok = false;
        } else if (auto c = r.complex(m["coeff"], where + ".coeff")) {
            mono.coeff = *c;
        } else {
            ok = false;
        }
        if (ok) cfg.drift.monomials.push_back(std::move(mono));
    }
}

void parse_psi(Reader& r, const json& p, ScenarioConfig& cfg) {
    if (p.is_string()) {
        const auto s = p.get<std::string>();
        if (s == "identity") {
            cfg.psi = CMatrix::identity(cfg.n);
        } else if (s == "zero") {
            cfg.psi = CMatrix(cfg.n, cfg.n);
        } else {
            r.fail("psi", "unknown shorthand '" + s + "' (identity, zero)");
        }
        return;
    }
    if (!p.is_array() || p.empty() || !p[0].is_array()) {
        r.fail("psi", "expected a matrix (array of rows) or 'identity'");
        return;
    }
    if (p.size() != cfg.n) {
        r.fail("psi", "has " + std::to_string(p.size()) + " rows, expected n = " + std::to_string(cfg.n));
        return;
    }
    const std::size_t cols = p[0].size();
    CMatrix psi(cfg.n, cols);
    for (std::size_t i = 0; i < p.size(); ++i) {
        const std::string where = "psi[" + std::to_string(i) + "]";
        if (!p[i].is_array() || p[i].size() != cols) {
            r.fail(where, "rows must all have " + std::to_string(cols) + " entries");
            continue;
        }
        for (std::size_t j = 0; j < cols; ++j) {
            if (auto z = r.complex(p[i][j], where + "[" + std::to_string(j) + "]")) psi(i, j) = *z;
        }
    }
    cfg.psi = std::move(psi);
}

void parse_experiment(Reader& r, const json& e, ScenarioConfig& cfg) {
    auto& x = cfg.experiment;
    if (!e.is_object()) {
        r.fail("experiment", "expected an object");
        return;
    }
    r.check_keys(e, kExperimentKeys, "experiment");
    if (!e.contains("kind") || !e["kind"].is_string()) {
        r.fail("experiment.kind", "required (E1 .. E6)");
    } else {
        try {
            x.kind = experiment_kind_from_string(e["kind"].get<std::string>());
        } catch (const Error& err) {
            r.fail("experiment.kind", err.what());
        }
    }
    if (e.contains("epsilons")) x.epsilons = r.reals(e["epsilons"], "experiment.epsilons");
    if (x.epsilons.empty()) r.fail("experiment.epsilons", "at least one epsilon is required");
    for (double eps : x.epsilons) {
        if (!(eps > 0.0)) r.fail("experiment.epsilons", "epsilon must be positive (got " + format_double(eps) + ")");
    }
    if (auto v = r.number(e, "t_end", "experiment")) x.t_end = *v;
    if (!(x.t_end > 0.0)) r.fail("experiment.t_end", "must be positive");
    if (auto v = r.number(e, "dt_per_epsilon", "experiment")) x.dt_per_epsilon = *v;
    if (!(x.dt_per_epsilon >= 20.0)) r.fail("experiment.dt_per_epsilon", "must be at least 20");
    if (auto v = r.count(e, "n_traj", "experiment")) x.n_traj = *v;
    if (x.n_traj == 0) r.fail("experiment.n_traj", "must be positive");
    if (auto v = r.count(e, "seed", "experiment")) x.seed = *v;
    if (e.contains("taus")) x.taus = r.reals(e["taus"], "experiment.taus");
    for (double t : x.taus) {
        if (!(t >= 0.0) || t > x.t_end) r.fail("experiment.taus", "every tau must lie in [0, t_end]");
    }
    if (e.contains("tau_grid")) {
        const auto& g = e["tau_grid"];
        if (g.is_object()) {
            const auto start = r.number(g, "start", "experiment.tau_grid");
            const auto stop = r.number(g, "stop", "experiment.tau_grid");
            const auto step = r.number(g, "step", "experiment.tau_grid");
            if (!start || !stop || !step || !(*step > 0.0) || *stop < *start) {
                r.fail("experiment.tau_grid", "needs start <= stop and step > 0");
            } else {
                const auto count = static_cast<std::size_t>(std::floor((*stop - *start) / *step + 1e-9));
                for (std::size_t k = 0; k <= count; ++k) x.tau_grid.push_back(*start + *step * static_cast<double>(k));
            }
        } else {
            x.tau_grid = r.reals(g, "experiment.tau_grid");
        }
        for (std::size_t i = 0; i < x.tau_grid.size(); ++i) {
            if (!(x.tau_grid[i] >= 0.0) || (i > 0 && !(x.tau_grid[i] > x.tau_grid[i - 1]))) {
                r.fail("experiment.tau_grid", "must be nonnegative and strictly increasing");
                break;
            }
        }
    }
    if (x.kind == ExperimentKind::E6 && x.tau_grid.empty()) r.fail("experiment.tau_grid", "required for E6");
    if (auto v = r.count(e, "dict_size", "experiment")) x.dict_size = *v;
    if (auto v = r.count(e, "n_dirs", "experiment")) x.n_dirs = *v;
    if (x.n_dirs == 0) r.fail("experiment.n_dirs", "must be positive");
    if (auto v = r.count(e, "audit_points", "experiment")) x.audit_points = *v;
    if (auto v = r.number(e, "averaging_tol", "experiment")) x.averaging_tol = *v;
    if (!(x.averaging_tol > 0.0)) r.fail("experiment.averaging_tol", "must be positive");
    if (e.contains("stationary")) {
        const auto& s = e["stationary"];
        if (!s.is_object()) {
            r.fail("experiment.stationary", "expected an object");
        } else {
            r.check_keys(s, kStationaryKeys, "experiment.stationary");
            auto& st = x.stationary;
            if (auto v = r.number(s, "burn_in", "experiment.stationary")) st.burn_in = *v;
            if (auto v = r.number(s, "stride", "experiment.stationary")) st.stride = *v;
            if (auto v = r.count(s, "n_long_traj", "experiment.stationary")) st.n_long_traj = *v;
            if (auto v = r.count(s, "samples_per_traj", "experiment.stationary")) st.samples_per_traj = *v;
            if (s.contains("override_coercivity")) {
                if (s["override_coercivity"].is_boolean()) {
                    st.override_coercivity = s["override_coercivity"].get<bool>();
                } else {
                    r.fail("experiment.stationary.override_coercivity", "expected true or false");
                }
            }
            if (!(st.burn_in >= 0.0)) r.fail("experiment.stationary.burn_in", "must be nonnegative");
            if (!(st.stride > 0.0)) r.fail("experiment.stationary.stride", "must be positive");
            if (st.n_long_traj == 0 || st.samples_per_traj == 0) {
                r.fail("experiment.stationary", "n_long_traj and samples_per_traj must be positive");
            }
        }
    }
    x.tolerance = r.number(e, "tolerance", "experiment");
    if (x.tolerance && !(*x.tolerance > 0.0)) r.fail("experiment.tolerance", "must be positive");
    x.stationary_action_target = r.number(e, "stationary_action_target", "experiment");
}

void validate_model(Reader& r, ScenarioConfig& cfg) {
    if (!r.errors.empty()) return;
    try {
        const auto spectrum = build_spectrum(cfg);
        cfg.resonance = spectrum.resonance();
        for (const auto& w : spectrum.warnings()) cfg.warnings.push_back(w);
    } catch (const Error& e) {
        r.fail("lambdas", e.what());
    }
    try {
        const auto p = build_drift(cfg);
        if (p.merged_duplicates() > 0) {
            cfg.warnings.push_back("merged " + std::to_string(p.merged_duplicates()) +
                                   " duplicate monomial key(s) by summing coefficients");
        }
    } catch (const Error& e) {
        r.fail("drift", e.what());
    }
}

}  // namespace

std::string_view to_string(ExperimentKind k) {
    constexpr std::string_view names[] = {"E1", "E2", "E3", "E4", "E5", "E6"};
    return names[static_cast<int>(k)];
}

ExperimentKind experiment_kind_from_string(std::string_view s) {
    for (int k = 0; k < 6; ++k) {
        if (to_string(static_cast<ExperimentKind>(k)) == s) return static_cast<ExperimentKind>(k);
    }
    throw InvalidArgument("unknown experiment '" + std::string(s) + "' (E1 .. E6)");
}

double default_tolerance(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::E1: return 1e-3;
        case ExperimentKind::E2: return 0.10;
        case ExperimentKind::E3: return 0.08;
        case ExperimentKind::E4: return 0.08;
        case ExperimentKind::E5: return 0.05;
        case ExperimentKind::E6: return 0.15;
    }
    return 0.1;
}

ScenarioConfig parse_scenario(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        throw ScenarioError({"syntax error at " + line_column(text, e.byte) + ": " + e.what()});
    }
    Reader r;
    ScenarioConfig cfg;
    if (!doc.is_object()) throw ScenarioError({"top level must be an object"});
    r.check_keys(doc, kTopKeys, "scenario");

    if (doc.contains("name") && doc["name"].is_string()) {
        cfg.name = doc["name"].get<std::string>();
    } else {
        r.fail("name", "required string");
    }
    if (auto n = r.count(doc, "n", "scenario"); n && *n > 0) {
        cfg.n = *n;
    } else {
        r.fail("n", "required positive integer");
    }
    if (doc.contains("lambdas")) {
        cfg.lambdas = r.reals(doc["lambdas"], "lambdas");
        if (cfg.lambdas.size() != cfg.n) {
            r.fail("lambdas", "length " + std::to_string(cfg.lambdas.size()) + " does not match n = " +
                                  std::to_string(cfg.n));
        }
        for (std::size_t j = 0; j < cfg.lambdas.size(); ++j) {
            if (cfg.lambdas[j] == 0.0) r.fail("lambdas[" + std::to_string(j) + "]", "frequency must be nonzero");
        }
    } else {
        r.fail("lambdas", "required");
    }
    if (doc.contains("resonance")) {
        try {
            cfg.resonance = resonance_class_from_string(doc["resonance"].get<std::string>());
            cfg.resonance_declared = true;
        } catch (const std::exception& e) {
            r.fail("resonance", e.what());
        }
    }
    if (doc.contains("drift")) {
        parse_drift(r, doc["drift"], cfg);
    } else {
        r.fail("drift", "required");
    }
    if (doc.contains("psi")) {
        parse_psi(r, doc["psi"], cfg);
    } else {
        r.fail("psi", "required");
    }
    if (doc.contains("dispersion")) {
        const auto& d = doc["dispersion"];
        GeneralDispersionSpec g;
        if (!d.is_object()) {
            r.fail("dispersion", "expected an object");
        } else {
            r.check_keys(d, kDispersionKeys, "dispersion");
            if (!d.contains("builtin") || !d["builtin"].is_string() || d["builtin"].get<std::string>() != "saturating") {
                r.fail("dispersion.builtin", "only 'saturating' is available");
            }
            g.builtin = "saturating";
            if (auto s = r.number(d, "scale", "dispersion")) g.scale = *s;
            if (d.contains("smoothness")) {
                try {
                    g.smoothness = smoothness_from_string(d["smoothness"].get<std::string>());
                } catch (const std::exception& e) {
                    r.fail("dispersion.smoothness", e.what());
                }
            }
        }
        cfg.general_dispersion = g;
    }
    if (doc.contains("v0") && doc["v0"].is_array()) {
        const auto& v = doc["v0"];
        for (std::size_t j = 0; j < v.size(); ++j) {
            if (auto z = r.complex(v[j], "v0[" + std::to_string(j) + "]")) cfg.v0.push_back(*z);
        }
        if (v.size() != cfg.n) {
            r.fail("v0", "length " + std::to_string(v.size()) + " does not match n = " + std::to_string(cfg.n));
        }
    } else {
        r.fail("v0", "required array of complex numbers");
    }
    if (doc.contains("experiment")) {
        parse_experiment(r, doc["experiment"], cfg);
    } else {
        r.fail("experiment", "required");
    }
    validate_model(r, cfg);
    if (!r.errors.empty()) throw ScenarioError(std::move(r.errors));
    return cfg;
}

ScenarioConfig load_scenario(const std::filesystem::path& path) { return parse_scenario(read_text(path)); }

std::string serialize_scenario(const ScenarioConfig& cfg) {
    json doc;
    doc["name"] = cfg.name;
    doc["n"] = cfg.n;
    doc["lambdas"] = cfg.lambdas;
    doc["resonance"] = std::string(to_string(cfg.resonance));
    json drift;
    if (!cfg.drift.builtin.empty()) {
        drift["builtin"] = cfg.drift.builtin;
        drift["rate"] = cfg.drift.rate;
        drift["coupling"] = cfg.drift.coupling;
    } else {
        drift["monomials"] = json::array();
        const auto field = build_drift(cfg);
        for (const auto& m : field.monomials()) {
            json mono = json::object();
            mono["target"] = m.target + 1;
            mono["alpha"] = m.alpha;
            mono["beta"] = m.beta;
            mono["coeff"] = complex_json(m.coeff);
            drift["monomials"].push_back(std::move(mono));
        }
    }
    doc["drift"] = drift;
    json psi = json::array();
    for (std::size_t i = 0; i < cfg.psi.rows(); ++i) {
        json row = json::array();
        for (std::size_t j = 0; j < cfg.psi.cols(); ++j) row.push_back(complex_json(cfg.psi(i, j)));
        psi.push_back(row);
    }
    doc["psi"] = psi;
    if (cfg.general_dispersion) {
        doc["dispersion"] = {{"builtin", cfg.general_dispersion->builtin},
                             {"scale", cfg.general_dispersion->scale},
                             {"smoothness", std::string(to_string(cfg.general_dispersion->smoothness))}};
    }
    json v0 = json::array();
    for (const auto& z : cfg.v0) v0.push_back(complex_json(z));
    doc["v0"] = v0;

    const auto& x = cfg.experiment;
    json e;
    e["kind"] = std::string(to_string(x.kind));
    e["epsilons"] = x.epsilons;
    e["t_end"] = x.t_end;
    e["dt_per_epsilon"] = x.dt_per_epsilon;
    e["n_traj"] = x.n_traj;
    e["seed"] = x.seed;
    e["taus"] = x.taus;
    e["tau_grid"] = x.tau_grid;
    e["dict_size"] = x.dict_size;
    e["n_dirs"] = x.n_dirs;
    e["audit_points"] = x.audit_points;
    e["averaging_tol"] = x.averaging_tol;
    e["stationary"] = {{"burn_in", x.stationary.burn_in},
                       {"stride", x.stationary.stride},
                       {"n_long_traj", x.stationary.n_long_traj},
                       {"samples_per_traj", x.stationary.samples_per_traj},
                       {"override_coercivity", x.stationary.override_coercivity}};
    if (x.tolerance) e["tolerance"] = *x.tolerance;
    if (x.stationary_action_target) e["stationary_action_target"] = *x.stationary_action_target;
    doc["experiment"] = e;
    return doc.dump(2) + "\n";
}

std::uint64_t scenario_hash(const ScenarioConfig& cfg) { return fnv1a64(serialize_scenario(cfg)); }

PolynomialVectorField build_drift(const ScenarioConfig& cfg) {
    const auto& d = cfg.drift;
    if (d.builtin.empty()) return PolynomialVectorField(cfg.n, d.monomials);
    std::vector<Monomial> mons;
    for (std::size_t j = 0; j < cfg.n; ++j) {
        Monomial m{j, std::vector<unsigned>(cfg.n, 0), std::vector<unsigned>(cfg.n, 0), -d.rate};
        m.alpha[j] = 1;
        mons.push_back(std::move(m));
        if (d.builtin == "damping_swap" && d.coupling != 0.0) {
            Monomial c{j, std::vector<unsigned>(cfg.n, 0), std::vector<unsigned>(cfg.n, 0), d.coupling};
            c.alpha[cfg.n - 1 - j] = 1;
            mons.push_back(std::move(c));
        }
    }
    return PolynomialVectorField(cfg.n, std::move(mons));
}

FrequencySpectrum build_spectrum(const ScenarioConfig& cfg) {
    if (!cfg.resonance_declared) return FrequencySpectrum::infer(cfg.lambdas);
    return FrequencySpectrum(cfg.lambdas, cfg.resonance);
}

Model build_model(const ScenarioConfig& cfg) {
    return {EvaluableField(build_drift(cfg)), cfg.psi, build_spectrum(cfg), cfg.v0};
}

StateDependentDispersion build_general_dispersion(const ScenarioConfig& cfg) {
    if (!cfg.general_dispersion) return StateDependentDispersion::constant_from(cfg.psi);
    const double scale = cfg.general_dispersion->scale;
    const std::size_t n = cfg.n;
    StateDependentDispersion b;
    b.n = n;
    b.n2 = 2 * n;
    b.smoothness = cfg.general_dispersion->smoothness;
    b.eval = [n, scale](std::span<const Complex> v) {
        const double s = scale * std::min(1.0, norm(v));
        RMatrix m(2 * n, 2 * n);
        for (std::size_t i = 0; i < 2 * n; ++i) m(i, i) = s;
        return m;
    };
    return b;
}

}  // namespace resavg
