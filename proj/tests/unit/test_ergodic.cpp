#include "resavg/ergodic.hpp"
#include "resavg/errors.hpp"
#include "resavg/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace resavg;

namespace {

const FrequencySpectrum kSpectrum({1.0, std::numbers::sqrt2}, ResonanceClass::non_resonant);
const ComplexState kV0{{1.0, 0.0}, {0.5, 0.5}};

Model ou_model() {
    return {PolynomialVectorField::linear(2, Complex{-1.0, 0.0}), CMatrix::identity(2), kSpectrum, kV0};
}

EmpiricalMeasure isotropic(std::size_t m, Rng& rng) {
    std::vector<ComplexState> pts(m);
    for (auto& p : pts) p = {rng.complex_gaussian(), rng.complex_gaussian()};
    return EmpiricalMeasure::from_complex(pts);
}

}  // namespace

TEST_CASE("coercivity of damping") {
    const auto rep = check_coercivity(PolynomialVectorField::linear(2, Complex{-1.0, 0.0}));
    CHECK(rep.satisfied);
    CHECK(rep.alpha1 == doctest::Approx(1.0));
    CHECK(rep.alpha2 == doctest::Approx(0.25).epsilon(0.01));
    CHECK(rep.margin <= 0.0);
}

TEST_CASE("coercivity fails for growth and survives a constant forcing") {
    CHECK_FALSE(check_coercivity(PolynomialVectorField::linear(2, Complex{1.0, 0.0})).satisfied);
    const auto forced = PolynomialVectorField::linear(2, Complex{-1.0, 0.0}) +
                        PolynomialVectorField(2, {Monomial{0, {0, 0}, {0, 0}, Complex{0.8, 0.0}}});
    const auto rep = check_coercivity(forced);
    CHECK(rep.satisfied);
    CHECK(rep.alpha2 > 0.25);
    // A purely rotational drift has a zero leading part, which is not strictly negative.
    CHECK_FALSE(check_coercivity(PolynomialVectorField::linear(2, Complex{0.0, 1.0})).satisfied);
    CHECK_THROWS_AS((void)check_coercivity(PolynomialVectorField(2), 0.0), InvalidArgument);
}

TEST_CASE("KS band formula") {
    const double c = std::sqrt(-std::log(0.025) / 2.0);
    CHECK(ks_band(1000, 0.05, 1) == doctest::Approx(c * std::sqrt(2.0 / 1000.0)));
    CHECK(ks_band(1000, 0.05, 10) > ks_band(1000, 0.05, 1));
    CHECK_THROWS((void)ks_band(0, 0.05, 1));
}

TEST_CASE("rotation invariance test oracles") {
    Rng rng(12);
    const std::size_t m = 2000;
    const auto cloud = isotropic(m, rng);
    CHECK(rotation_invariance_test(cloud, kSpectrum.lambdas(), 8, rng) <= ks_band(m, 0.05, 8 * 4));

    const auto point = EmpiricalMeasure::from_complex(std::vector<ComplexState>(50, kV0));
    CHECK(rotation_invariance_test(point, kSpectrum.lambdas(), 8, rng) > 0.99);

    const auto origin = EmpiricalMeasure::from_complex(std::vector<ComplexState>(50, ComplexState(2)));
    CHECK(rotation_invariance_test(origin, kSpectrum.lambdas(), 8, rng) == 0.0);
}

TEST_CASE("linear stationary covariance") {
    const auto s = linear_stationary_covariance(PolynomialVectorField::linear(2, Complex{-1.0, 0.0}),
                                                CMatrix::identity(2));
    REQUIRE(s.has_value());
    CHECK(max_abs_diff(*s, CMatrix::identity(2)) < 1e-12);

    const auto rotating = linear_stationary_covariance(PolynomialVectorField::linear(2, Complex{-2.0, 3.0}),
                                                       CMatrix::identity(2));
    REQUIRE(rotating.has_value());
    CHECK(max_abs_diff(*rotating, Complex{0.5, 0.0} * CMatrix::identity(2)) < 1e-12);

    const PolynomialVectorField cubic(2, {Monomial{0, {2, 0}, {1, 0}, Complex{-1.0, 0.0}}});
    CHECK_FALSE(linear_stationary_covariance(cubic, CMatrix::identity(2)).has_value());
    CHECK_FALSE(
        linear_stationary_covariance(PolynomialVectorField::linear(2, Complex{1.0, 0.0}), CMatrix::identity(2))
            .has_value());
}

TEST_CASE("exact complex Gaussian sampler has the requested covariance") {
    Rng rng(21);
    CMatrix cov(2, 2);
    cov(0, 0) = 1.0;
    cov(1, 1) = 2.0;
    cov(0, 1) = Complex{0.5, 0.3};
    cov(1, 0) = std::conj(cov(0, 1));
    const std::size_t m = 50000;
    const auto mu = sample_complex_gaussian_measure(cov, m, rng);
    CMatrix est(2, 2);
    for (std::size_t i = 0; i < m; ++i) {
        const auto p = mu.point(i);
        const Complex z[2] = {{p[0], p[1]}, {p[2], p[3]}};
        for (std::size_t a = 0; a < 2; ++a) {
            for (std::size_t b = 0; b < 2; ++b) est(a, b) += z[a] * std::conj(z[b]) / static_cast<double>(m);
        }
    }
    CHECK(max_abs_diff(est, cov) < 0.05);
}

TEST_CASE("stationary estimate for the OU model") {
    StationaryConfig st;
    st.burn_in = 5.0;
    st.n_long_traj = 100;
    st.samples_per_traj = 5;
    SimulationConfig base;
    base.epsilon = 0.1;
    base.dt = 0.1 / 40.0;
    base.master_seed = 3;
    const auto est = estimate_stationary(SimulatorKind::effective, ou_model(), st, base);
    CHECK(est.samples.size() == 500);
    CHECK(est.flagged == 0);
    double mean_action = 0.0;
    for (std::size_t i = 0; i < est.samples.size(); ++i) {
        const auto p = est.samples.point(i);
        mean_action += 0.5 * (p[0] * p[0] + p[1] * p[1]);
    }
    CHECK(mean_action / 500.0 == doctest::Approx(0.5).epsilon(0.2));
}

TEST_CASE("stationary estimate refuses drifts not shown coercive") {
    auto model = ou_model();
    model.drift = PolynomialVectorField::linear(2, Complex{1.0, 0.0});
    StationaryConfig st;
    SimulationConfig base;
    base.epsilon = 0.1;
    base.dt = 0.1 / 40.0;
    CHECK_THROWS_AS((void)estimate_stationary(SimulatorKind::original, model, st, base), InvalidArgument);
    st.stride = 0.0;
    CHECK_THROWS_AS((void)estimate_stationary(SimulatorKind::original, ou_model(), st, base), InvalidArgument);
}

TEST_CASE("uniform sweep at tau = 0 compares two Dirac masses") {
    SweepConfig cfg;
    cfg.epsilons = {0.1};
    cfg.tau_grid = {0.0};
    cfg.n_traj = 50;
    cfg.master_seed = 1;
    const auto res = uniform_sweep(ou_model(), cfg);
    REQUIRE(res.rows.size() == 1);
    CHECK(res.rows[0].bracket.lower == 0.0);
    CHECK(res.rows[0].bracket.upper == 0.0);
    cfg.tau_grid = {1.0, 0.5};
    CHECK_THROWS_AS((void)uniform_sweep(ou_model(), cfg), InvalidArgument);
}
