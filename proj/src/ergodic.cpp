#include "resavg/ergodic.hpp"

#include "resavg/errors.hpp"
#include "resavg/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <optional>

namespace resavg {

namespace {

constexpr std::uint64_t kCoercivitySeed = 0xC0E7'C1B1ULL;
constexpr double kAlphaGridLow = 1e-3;
constexpr double kAlphaGridHigh = 10.0;
constexpr int kAlphaGridPoints = 41;
constexpr double kTailFactor = 4.0;

constexpr std::uint64_t kInteractionSalt = 0x1;
constexpr std::uint64_t kEffectiveSalt = 0x2;
constexpr std::uint64_t kBracketSalt = 0x3;

struct CoercivitySample {
    ComplexState v;
    double radius;
    double g;
};

std::vector<ComplexState> sample_directions(std::size_t n, std::size_t count) {
    std::vector<ComplexState> dirs;
    // Coordinate axes (both signs, real and imaginary) first, then random unit vectors.
    for (std::size_t j = 0; j < n; ++j) {
        for (Complex unit : {Complex(1, 0), Complex(-1, 0), Complex(0, 1), Complex(0, -1)}) {
            ComplexState d(n);
            d[j] = unit;
            dirs.push_back(std::move(d));
        }
    }
    Rng rng(kCoercivitySeed);
    for (std::size_t k = 0; k < count; ++k) {
        ComplexState d(n);
        double s = 0.0;
        while (s == 0.0) {
            for (auto& z : d) z = rng.complex_gaussian();
            s = norm(d);
        }
        for (auto& z : d) z /= s;
        dirs.push_back(std::move(d));
    }
    return dirs;
}

PolynomialVectorField leading_part(const PolynomialVectorField& p) {
    std::vector<Monomial> top;
    for (const auto& m : p.monomials()) {
        if (m.degree() == p.degree()) top.push_back(m);
    }
    return PolynomialVectorField(p.dimension(), std::move(top));
}

std::vector<double> alpha_grid() {
    std::vector<double> g(kAlphaGridPoints);
    const double lo = std::log10(kAlphaGridLow), hi = std::log10(kAlphaGridHigh);
    for (int k = 0; k < kAlphaGridPoints; ++k) {
        g[static_cast<std::size_t>(k)] = std::pow(10.0, lo + (hi - lo) * k / (kAlphaGridPoints - 1));
    }
    return g;
}

}  // namespace

CoercivityReport check_coercivity(const PolynomialVectorField& p, double search_radius, std::size_t grid_density) {
    if (!(search_radius > 0.0) || grid_density < 2) {
        throw InvalidArgument("check_coercivity: need search_radius > 0 and grid_density >= 2");
    }
    const std::size_t n = p.dimension();
    CoercivityReport rep;
    const auto dirs = sample_directions(n, grid_density * 2 * n);

    if (p.empty()) {
        rep.message = "P = 0 has no dissipation";
        return rep;
    }
    const auto lead = leading_part(p);
    double lead_max = -std::numeric_limits<double>::infinity();
    for (const auto& u : dirs) lead_max = std::max(lead_max, inner(lead(u), u));
    if (!(lead_max < 0.0)) {
        rep.message = "leading homogeneous part of <P(v), v> is not negative on every sampled direction (max " +
                      std::to_string(lead_max) + ")";
        return rep;
    }

    std::vector<double> radii;
    for (std::size_t k = 0; k <= grid_density; ++k) {
        radii.push_back(search_radius * static_cast<double>(k) / static_cast<double>(grid_density));
    }
    radii.push_back(0.5);
    std::vector<CoercivitySample> inside, tail;
    for (const auto& u : dirs) {
        for (double r : radii) {
            if (r > search_radius) continue;
            ComplexState v(n);
            for (std::size_t j = 0; j < n; ++j) v[j] = r * u[j];
            inside.push_back({v, r, inner(p(v), v)});
        }
        for (std::size_t k = 1; k <= grid_density; ++k) {
            const double r =
                search_radius * (1.0 + (kTailFactor - 1.0) * static_cast<double>(k) / static_cast<double>(grid_density));
            ComplexState v(n);
            for (std::size_t j = 0; j < n; ++j) v[j] = r * u[j];
            tail.push_back({v, r, inner(p(v), v)});
        }
    }

    auto alpha2_for = [&](double a1) {
        double a2 = 0.0;
        for (const auto& s : inside) a2 = std::max(a2, s.g + a1 * s.radius);
        return a2;
    };
    auto tail_ok = [&](double a1, double a2) {
        return std::all_of(tail.begin(), tail.end(), [&](const auto& s) { return s.g + a1 * s.radius <= a2; });
    };

    std::optional<double> best;
    for (double a1 : alpha_grid()) {
        if (!tail_ok(a1, alpha2_for(a1))) continue;
        if (a1 <= 1.0 + 1e-12) {
            best = a1;  // grid ascends, so this ends at the largest feasible value <= 1
        } else if (!best) {
            best = a1;
            break;
        }
    }
    if (!best) {
        rep.message = "no alpha1 in [1e-3, 10] is feasible on the sampled tail";
        return rep;
    }
    rep.alpha1 = *best;
    rep.alpha2 = alpha2_for(rep.alpha1);
    rep.margin = -std::numeric_limits<double>::infinity();
    for (const auto* set : {&inside, &tail}) {
        for (const auto& s : *set) {
            const double m = s.g + rep.alpha1 * s.radius - rep.alpha2;
            if (m > rep.margin) {
                rep.margin = m;
                rep.worst_point = s.v;
            }
        }
    }
    rep.satisfied = rep.margin <= 0.0;
    rep.message = rep.satisfied ? "coercive on all samples" : "inequality violated on a sample";
    return rep;
}

StationaryEstimate estimate_stationary(SimulatorKind kind, const Model& model, const StationaryConfig& st,
                                       const SimulationConfig& base) {
    if (!(st.stride > 0.0)) throw InvalidArgument("stride must be positive");
    if (!(st.burn_in >= 0.0)) throw InvalidArgument("burn_in must be nonnegative");
    if (st.n_long_traj == 0 || st.samples_per_traj == 0) {
        throw InvalidArgument("need at least one long trajectory and one sample per trajectory");
    }
    if (!st.override_coercivity) {
        const auto* poly = model.drift.polynomial();
        if (!poly) {
            throw InvalidArgument("coercivity of an opaque drift cannot be checked; override explicitly");
        }
        const auto checked =
            kind == SimulatorKind::effective ? resonant_average_symbolic(*poly, model.spectrum) : *poly;
        const auto rep = check_coercivity(checked);
        if (!rep.satisfied) throw InvalidArgument("drift is not coercive: " + rep.message);
    }

    SimulationConfig cfg = base;
    cfg.n_traj = st.n_long_traj;
    cfg.t_end = st.burn_in + st.stride * static_cast<double>(st.samples_per_traj - 1);
    if (!(cfg.t_end > 0.0)) throw InvalidArgument("trajectory length must exceed burn_in");
    cfg.checkpoints.clear();
    for (std::size_t k = 0; k < st.samples_per_traj; ++k) {
        cfg.checkpoints.push_back(st.burn_in + st.stride * static_cast<double>(k));
    }
    const auto ens = simulate(kind, model, cfg);
    const std::size_t flagged = ens.flagged_count();
    if (static_cast<double>(flagged) > kMaxFlaggedFraction * static_cast<double>(ens.size())) {
        throw NumericalError("non-mixing: " + std::to_string(flagged) + " of " + std::to_string(ens.size()) +
                             " long trajectories blew up");
    }
    std::vector<double> flat;
    for (std::size_t t = 0; t < ens.size(); ++t) {
        if (ens.flagged(t)) continue;
        for (double tau : cfg.checkpoints) {
            for (const auto& z : ens.state(t, *ens.checkpoint_index(tau))) {
                flat.push_back(z.real());
                flat.push_back(z.imag());
            }
        }
    }
    return {EmpiricalMeasure(2 * ens.dim(), std::move(flat)), st.burn_in, st.stride, st.n_long_traj, flagged};
}

double rotation_invariance_test(const EmpiricalMeasure& mu, std::span<const double> lambdas, std::size_t n_angles,
                                Rng& rng) {
    const std::size_t n = lambdas.size();
    require_same_dimension(2 * n, mu.dim(), "rotation_invariance_test");
    std::vector<RealVector> original(mu.dim());
    for (std::size_t k = 0; k < mu.dim(); ++k) original[k] = mu.coordinate(k);
    double worst = 0.0;
    std::vector<double> w(n);
    for (std::size_t a = 0; a < n_angles; ++a) {
        const double theta = 2.0 * std::numbers::pi * rng.uniform();
        for (std::size_t j = 0; j < n; ++j) w[j] = theta * lambdas[j];
        std::vector<RealVector> pushed(mu.dim(), RealVector(mu.size()));
        for (std::size_t i = 0; i < mu.size(); ++i) {
            const auto x = mu.point(i);
            for (std::size_t j = 0; j < n; ++j) {
                const Complex z = std::polar(1.0, w[j]) * Complex(x[2 * j], x[2 * j + 1]);
                pushed[2 * j][i] = z.real();
                pushed[2 * j + 1][i] = z.imag();
            }
        }
        for (std::size_t k = 0; k < mu.dim(); ++k) worst = std::max(worst, ks_distance_1d(original[k], pushed[k]));
    }
    return worst;
}

double ks_band(std::size_t m, double alpha, std::size_t comparisons) {
    if (m == 0 || comparisons == 0 || !(alpha > 0.0 && alpha < 1.0)) {
        throw InvalidArgument("ks_band: need m > 0, comparisons > 0, alpha in (0, 1)");
    }
    const double a = alpha / static_cast<double>(comparisons);
    return std::sqrt(-std::log(a / 2.0) / 2.0) * std::sqrt(2.0 / static_cast<double>(m));
}

std::optional<CMatrix> linear_stationary_covariance(const PolynomialVectorField& drift, const CMatrix& a) {
    const std::size_t n = drift.dimension();
    require_same_dimension(n, a.rows(), "linear_stationary_covariance");
    CMatrix m(n, n);
    for (const auto& mono : drift.monomials()) {
        if (mono.degree() != 1 || std::accumulate(mono.beta.begin(), mono.beta.end(), 0u) != 0) return std::nullopt;
        const auto k = static_cast<std::size_t>(std::find(mono.alpha.begin(), mono.alpha.end(), 1u) - mono.alpha.begin());
        m(mono.target, k) += mono.coeff;
    }
    const auto eig = hermitian_eigen(Complex(0.5) * (m + adjoint(m)));
    if (!(eig.values.back() < 0.0)) return std::nullopt;  // dissipativity, which implies Hurwitz

    // Row (i, j) of the vectorized equation: sum_k M_ik S_kj + S_ik conj(M_jk) = -2 A_ij.
    CMatrix l(n * n, n * n);
    ComplexState rhs(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const std::size_t row = i * n + j;
            for (std::size_t k = 0; k < n; ++k) {
                l(row, k * n + j) += m(i, k);
                l(row, i * n + k) += std::conj(m(j, k));
            }
            rhs[row] = -2.0 * a(i, j);
        }
    }
    const auto x = solve(std::move(l), std::move(rhs));
    CMatrix cov(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) cov(i, j) = 0.5 * (x[i * n + j] + std::conj(x[j * n + i]));
    }
    return cov;
}

EmpiricalMeasure sample_complex_gaussian_measure(const CMatrix& cov, std::size_t m, Rng& rng) {
    // sqrt(cov / 2) xi has covariance cov because E[xi xi^*] = 2I.
    const CMatrix root = hermitian_sqrt(Complex(0.5) * cov);
    const std::size_t n = cov.rows();
    ComplexState xi(n), z(n);
    std::vector<double> flat;
    flat.reserve(2 * n * m);
    for (std::size_t s = 0; s < m; ++s) {
        apply_root_to_gaussian(root, rng, xi, z);
        for (const auto& c : z) {
            flat.push_back(c.real());
            flat.push_back(c.imag());
        }
    }
    return {2 * n, std::move(flat)};
}

SweepResult uniform_sweep(const Model& model, const SweepConfig& cfg) {
    if (cfg.epsilons.empty()) throw InvalidArgument("uniform_sweep: no epsilon values");
    if (cfg.tau_grid.empty()) throw InvalidArgument("uniform_sweep: empty tau grid");
    if (!std::is_sorted(cfg.tau_grid.begin(), cfg.tau_grid.end()) ||
        std::adjacent_find(cfg.tau_grid.begin(), cfg.tau_grid.end()) != cfg.tau_grid.end()) {
        throw InvalidArgument("uniform_sweep: tau grid must be strictly increasing");
    }
    if (!(cfg.dt_per_epsilon > 0.0)) throw InvalidArgument("uniform_sweep: dt_per_epsilon must be positive");

    SweepResult res;
    res.tau_max = cfg.tau_grid.back();
    const double eps_min = *std::min_element(cfg.epsilons.begin(), cfg.epsilons.end());

    SimulationConfig base;
    base.n_traj = cfg.n_traj;
    base.master_seed = cfg.master_seed;
    base.execution = cfg.execution;
    base.checkpoints = cfg.tau_grid;

    // The effective law does not depend on epsilon: one ensemble, at the finest step.
    SimulationConfig eff_cfg = base;
    eff_cfg.epsilon = eps_min;
    eff_cfg.dt = eps_min / cfg.dt_per_epsilon;
    eff_cfg.t_end = res.tau_max > 0.0 ? res.tau_max : eff_cfg.dt;
    eff_cfg.stream_salt = kEffectiveSalt;
    const auto eff_model = EffectiveModel::build(model.drift, model.psi, model.spectrum);
    const auto eff = simulate_effective(eff_model, model.v0, eff_cfg);

    std::size_t row_index = 0;
    for (double eps : cfg.epsilons) {
        SimulationConfig c = base;
        c.epsilon = eps;
        c.dt = eps / cfg.dt_per_epsilon;
        c.t_end = res.tau_max > 0.0 ? res.tau_max : c.dt;
        c.stream_salt = kInteractionSalt;
        const auto inter = simulate_interaction(model.drift, model.psi, model.spectrum, model.v0, c);
        double sup = 0.0;
        for (double tau : cfg.tau_grid) {
            Rng rng(derive_stream_seed(cfg.master_seed, row_index++, kBracketSalt));
            auto b = dual_lipschitz_bracket(checkpoint_measure(inter, tau), checkpoint_measure(eff, tau),
                                            cfg.dict_size, rng, cfg.execution);
            res.n_samples = b.n_samples;
            sup = std::max(sup, b.upper);
            res.rows.push_back({eps, tau, std::move(b)});
        }
        res.sup_upper.push_back(sup);
    }
    return res;
}

}  // namespace resavg
