#include "random_models.hpp"

#include "resavg/errors.hpp"
#include "resavg/noisemodel.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace resavg;

namespace {

CMatrix real_matrix(std::initializer_list<std::initializer_list<double>> rows) {
    CMatrix m(rows.size(), rows.begin()->size());
    std::size_t i = 0;
    for (const auto& r : rows) {
        std::size_t j = 0;
        for (double x : r) m(i, j++) = x;
        ++i;
    }
    return m;
}

}  // namespace

TEST_CASE("effective diffusion oracles") {
    const FrequencySpectrum distinct({1.0, 2.0, 3.0}, ResonanceClass::completely_resonant);
    const auto diag = real_matrix({{2.0, 0.0, 0.0}, {0.0, -3.0, 0.0}, {0.0, 0.0, 0.5}});
    const auto a = effective_diffusion(diag, distinct);
    CHECK(max_abs_diff(a, real_matrix({{4.0, 0.0, 0.0}, {0.0, 9.0, 0.0}, {0.0, 0.0, 0.25}})) < 1e-15);

    Rng rng(3);
    const auto psi = testing::random_psi(3, 4, 3, rng);
    const auto full = effective_diffusion(psi, distinct);
    for (std::size_t k = 0; k < 3; ++k) {
        double row = 0.0;
        for (std::size_t l = 0; l < 4; ++l) row += std::norm(psi(k, l));
        CHECK(full(k, k).real() == doctest::Approx(row));
        for (std::size_t j = 0; j < 3; ++j) {
            if (j != k) CHECK(full(k, j) == Complex{});
        }
    }

    const FrequencySpectrum equal({1.0, 1.0}, ResonanceClass::completely_resonant);
    const auto coupled = effective_diffusion(real_matrix({{1.0, 0.0}, {1.0, 0.0}}), equal);
    CHECK(max_abs_diff(coupled, real_matrix({{1.0, 1.0}, {1.0, 1.0}})) < 1e-15);
}

TEST_CASE("hermitian square root oracles") {
    const auto id = CMatrix::identity(3);
    CHECK(max_abs_diff(hermitian_sqrt(id), id) < 1e-14);
    const auto ones = real_matrix({{1.0, 1.0}, {1.0, 1.0}});
    const double r = 1.0 / std::numbers::sqrt2;
    CHECK(max_abs_diff(hermitian_sqrt(ones), real_matrix({{r, r}, {r, r}})) < 1e-12);
    const CMatrix zero(2, 2);
    CHECK(max_abs(hermitian_sqrt(zero)) < 1e-14);
}

TEST_CASE("hermitian square root of random rank-deficient matrices") {
    Rng rng(11);
    for (int k = 0; k < 20; ++k) {
        const std::size_t n = 1 + rng.index(6);
        const auto psi = testing::random_psi(n, n, 1 + rng.index(n), rng);
        const auto a = psi * adjoint(psi);
        const auto b = hermitian_sqrt(a);
        CHECK(max_abs_diff(b, adjoint(b)) < 1e-12);
        CHECK(max_abs_diff(b * b, a) < 1e-10);
        CHECK(hermitian_eigen(b).values.front() > -1e-10);
    }
}

TEST_CASE("hermitian square root rejects invalid input") {
    CHECK_THROWS_AS((void)hermitian_sqrt(CMatrix(2, 3)), DimensionError);
    CHECK_THROWS_AS((void)hermitian_sqrt(real_matrix({{1.0, 2.0}, {0.0, 1.0}})), InvalidArgument);
    CHECK_THROWS_AS((void)hermitian_sqrt(real_matrix({{1.0, 0.0}, {0.0, -1.0}})), NumericalError);
}

TEST_CASE("noise increment covariance oracles") {
    Rng rng(5);
    const auto psi = testing::random_psi(2, 3, 2, rng);
    const FrequencySpectrum equal({1.5, 1.5}, ResonanceClass::completely_resonant);
    const double h = 0.013;
    const auto c = noise_increment_covariance(psi, equal, 0.1, 0.7, h);
    CHECK(max_abs_diff(c, Complex{2.0 * h, 0.0} * (psi * adjoint(psi))) < 1e-14);

    CHECK(max_abs(noise_increment_covariance(CMatrix(2, 2), equal, 0.1, 0.0, h)) == 0.0);

    const FrequencySpectrum one_two({1.0, 2.0}, ResonanceClass::completely_resonant);
    const double period = 2.0 * std::numbers::pi;
    const auto full = noise_increment_covariance(psi, one_two, 1.0, 0.0, period);
    CHECK(std::abs(full(0, 1)) < 1e-12);
    CHECK(std::abs(full(1, 0)) < 1e-12);
    for (std::size_t k = 0; k < 2; ++k) {
        double row = 0.0;
        for (std::size_t l = 0; l < 3; ++l) row += std::norm(psi(k, l));
        CHECK(full(k, k).real() == doctest::Approx(2.0 * period * row));
    }

    CHECK_THROWS_AS((void)noise_increment_covariance(psi, one_two, 0.0, 0.0, h), InvalidArgument);
    CHECK_THROWS_AS((void)noise_increment_covariance(psi, one_two, 1.0, 0.0, -h), InvalidArgument);
}

TEST_CASE("complex gaussian sampling conventions") {
    Rng rng(17);
    const auto z = sample_complex_gaussian(CMatrix(2, 2), rng);
    CHECK(z == ComplexState(2));

    const std::size_t m = 100000;
    const auto id = CMatrix::identity(2);
    double second[2] = {0.0, 0.0};
    Complex pseudo{};
    for (std::size_t k = 0; k < m; ++k) {
        const auto s = sample_complex_gaussian(id, rng);
        second[0] += std::norm(s[0]);
        second[1] += std::norm(s[1]);
        pseudo += s[0] * s[1];
    }
    CHECK(std::abs(second[0] / m - 2.0) < 0.03);
    CHECK(std::abs(second[1] / m - 2.0) < 0.03);
    CHECK(std::abs(pseudo / static_cast<double>(m)) < 0.03);
}

TEST_CASE("effective model assembles A and B") {
    const FrequencySpectrum spectrum({1.0, std::numbers::sqrt2}, ResonanceClass::non_resonant);
    const auto eff =
        EffectiveModel::build(PolynomialVectorField::linear(2, Complex{-1.0, 0.0}), CMatrix::identity(2), spectrum);
    eff.validate();
    CHECK(max_abs_diff(eff.diffusion, CMatrix::identity(2)) < 1e-15);
    CHECK(max_abs_diff(eff.dispersion, CMatrix::identity(2)) < 1e-14);
    REQUIRE(eff.drift.polynomial() != nullptr);
    CHECK(eff.drift.polynomial()->monomials().size() == 2);
}

TEST_CASE("averaged state diffusion oracles") {
    const FrequencySpectrum spectrum({1.0, std::numbers::sqrt2}, ResonanceClass::non_resonant);
    const ComplexState a{{0.4, -0.2}, {1.0, 0.5}};

    StateDependentDispersion identity{2, 4, [](std::span<const Complex>) { return RMatrix::identity(4); },
                                      DispersionSmoothness::constant, 0.0};
    CHECK(max_abs_diff(averaged_state_diffusion(identity, spectrum, a, 1e-8).value, RMatrix::identity(4)) < 1e-10);

    StateDependentDispersion zero{2, 4, [](std::span<const Complex>) { return RMatrix(4, 4); },
                                  DispersionSmoothness::constant, 0.0};
    CHECK(max_abs(to_complex(averaged_state_diffusion(zero, spectrum, a, 1e-8).value)) == 0.0);

    // Diagonal, depending on moduli only: the integrand does not depend on t.
    StateDependentDispersion radial{2, 4,
                                    [](std::span<const Complex> v) {
                                        RMatrix b(4, 4);
                                        for (std::size_t k = 0; k < 2; ++k) {
                                            const double s = 1.0 / (1.0 + std::abs(v[k]));
                                            b(2 * k, 2 * k) = s;
                                            b(2 * k + 1, 2 * k + 1) = s;
                                        }
                                        return b;
                                    },
                                    DispersionSmoothness::c2_smooth, 0.0};
    const auto b = radial(a);
    CHECK(max_abs_diff(averaged_state_diffusion(radial, spectrum, a, 1e-8).value, b * transpose(b)) < 1e-10);

    const auto root = state_dispersion_sqrt(
        [&](std::span<const Complex> v) { return averaged_state_diffusion(radial, spectrum, v, 1e-8).value; }, a);
    CHECK(max_abs_diff(root.root * root.root, b * transpose(b)) < 1e-10);
    CHECK(std::isfinite(root.local_lipschitz));
}

TEST_CASE("state dependent dispersion checks the shape of B(v)") {
    StateDependentDispersion wrong{2, 2, [](std::span<const Complex>) { return RMatrix(3, 2); },
                                   DispersionSmoothness::constant, 0.0};
    CHECK_THROWS((void)wrong(ComplexState(2)));
    const auto c = StateDependentDispersion::constant_from(CMatrix::identity(2));
    CHECK(c(ComplexState(2)).rows() == 4);
    CHECK(smoothness_from_string(to_string(DispersionSmoothness::nondegenerate)) ==
          DispersionSmoothness::nondegenerate);
}
