#include "random_models.hpp"

#include "resavg/errors.hpp"
#include "resavg/fields.hpp"
#include "resavg/frequency.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace resavg;

namespace {

Monomial mono(std::size_t target, std::vector<unsigned> alpha, std::vector<unsigned> beta, Complex c = 1.0) {
    return Monomial{target, std::move(alpha), std::move(beta), c};
}

const FrequencySpectrum kUnit({1.0}, ResonanceClass::completely_resonant);
const FrequencySpectrum kIrrational({1.0, std::numbers::sqrt2}, ResonanceClass::non_resonant);

}  // namespace

TEST_CASE("evaluate oracles") {
    const auto id = PolynomialVectorField::identity(3);
    const ComplexState v{{1.0, 2.0}, {-1.0, 0.5}, {0.0, 3.0}};
    CHECK(evaluate(id, v) == v);

    const PolynomialVectorField cubic(1, {mono(0, {2}, {1})});
    CHECK(std::abs(evaluate(cubic, ComplexState{{2.0, 0.0}})[0] - Complex{8.0, 0.0}) < 1e-14);

    const PolynomialVectorField empty(2);
    CHECK(empty.empty());
    const auto z = evaluate(empty, ComplexState{{1.0, 1.0}, {2.0, 2.0}});
    CHECK(z == ComplexState(2));
}

TEST_CASE("canonical form merges duplicates and drops zeros") {
    const PolynomialVectorField p(1, {mono(0, {1}, {0}, 2.0), mono(0, {1}, {0}, -0.5), mono(0, {2}, {0}, 0.0)});
    CHECK(p.monomials().size() == 1);
    CHECK(p.merged_duplicates() == 1);
    CHECK(p.monomials()[0].coeff == Complex{1.5, 0.0});
    CHECK(p.degree() == 1);
}

TEST_CASE("monomial validation") {
    CHECK_THROWS(PolynomialVectorField(2, {mono(2, {1, 0}, {0, 0})}));
    CHECK_THROWS(PolynomialVectorField(2, {mono(0, {1}, {0})}));
}

TEST_CASE("pushforward oracles") {
    const PolynomialVectorField sq(1, {mono(0, {2}, {0})});
    const ComplexState a{{0.3, -1.2}};
    CHECK(pushforward(sq, kUnit, 0.0, a) == evaluate(sq, a));
    for (double t : {0.4, 1.7, -2.5}) {
        const Complex expected = std::exp(Complex{0.0, -t}) * a[0] * a[0];
        CHECK(std::abs(pushforward(sq, kUnit, t, a)[0] - expected) < 1e-13);
        const auto id = PolynomialVectorField::identity(1);
        CHECK(std::abs(pushforward(id, kUnit, t, a)[0] - a[0]) < 1e-14);
    }
}

TEST_CASE("partial average oracles") {
    const PolynomialVectorField sq(1, {mono(0, {2}, {0})});
    const ComplexState a{{1.1, 0.4}};
    CHECK(std::abs(partial_average(sq, kUnit, a, 2.0 * std::numbers::pi, 4096)[0]) <= 1e-10);
    for (double horizon : {1.0, 3.3, 10.0, 57.0}) {
        CHECK(std::abs(partial_average(sq, kUnit, a, horizon, 4096)[0]) <= 2.0 * std::norm(a[0]) / horizon + 1e-12);
    }
    const auto id = PolynomialVectorField::identity(1);
    CHECK(std::abs(partial_average(id, kUnit, a, 5.0, 16)[0] - a[0]) < 1e-14);
}

TEST_CASE("average_numeric oracles") {
    const ComplexState a{{0.8, -0.6}};
    const auto id = average_numeric(PolynomialVectorField::identity(1), kUnit, a, 1e-6);
    CHECK(std::abs(id.value[0] - a[0]) < 1e-14);

    const PolynomialVectorField sq(1, {mono(0, {2}, {0})});
    CHECK(std::abs(average_numeric(sq, kUnit, a, 1e-4).value[0]) <= 1e-4);

    const PolynomialVectorField resonant(1, {mono(0, {2}, {1})});
    const auto r = average_numeric(resonant, kUnit, a, 1e-6);
    CHECK(std::abs(r.value[0] - a[0] * a[0] * std::conj(a[0])) < 1e-12);
}

TEST_CASE("resonant_average_symbolic oracles") {
    CHECK(resonant_average_symbolic(PolynomialVectorField(1, {mono(0, {2}, {0})}), kUnit).empty());
    const PolynomialVectorField kept(1, {mono(0, {2}, {1})});
    CHECK(resonant_average_symbolic(kept, kUnit).monomials().size() == 1);

    const FrequencySpectrum one_two({1.0, 2.0}, ResonanceClass::completely_resonant);
    const PolynomialVectorField p(2, {mono(1, {2, 0}, {0, 0}), mono(0, {0, 0}, {0, 1})});
    const auto avg = resonant_average_symbolic(p, one_two);
    REQUIRE(avg.monomials().size() == 1);
    CHECK(avg.monomials()[0].target == 1);
}

TEST_CASE("symbolic and numeric averages agree on random fields") {
    Rng rng(7);
    const FrequencySpectrum resonant({1.0, 1.0}, ResonanceClass::completely_resonant);
    for (const auto* spectrum : {&resonant, &kIrrational}) {
        for (int f = 0; f < 3; ++f) {
            const auto p = testing::random_field(2, 3, 6, rng);
            const auto sym = resonant_average_symbolic(p, *spectrum);
            for (int k = 0; k < 3; ++k) {
                const auto a = testing::random_point(2, rng);
                const auto num = average_numeric(p, *spectrum, a, 1e-4);
                const auto s = sym(a);
                for (std::size_t j = 0; j < 2; ++j) CHECK(std::abs(num.value[j] - s[j]) <= 1e-3);
            }
        }
    }
}

TEST_CASE("torus average oracles") {
    const ComplexState a{{0.5, 0.5}, {-1.0, 0.3}};
    const PolynomialVectorField lin(2, {mono(0, {0, 1}, {0, 0})});
    CHECK(std::abs(torus_average(lin, kIrrational, a, 64)[0]) < 1e-12);
    const PolynomialVectorField phase_free(2, {mono(0, {1, 1}, {0, 1})});
    const Complex expected = a[0] * std::norm(a[1]);
    CHECK(std::abs(torus_average(phase_free, kIrrational, a, 64)[0] - expected) < 1e-12);
    CHECK(std::abs(torus_average_lattice(phase_free, a, 64)[0] - expected) < 1e-12);
}

TEST_CASE("average_function oracles") {
    const ComplexState a{{1.0, 0.0}};
    ScalarFunction modulus{[](std::span<const Complex> z) { return Complex{std::norm(z[0]), 0.0}; }, 2, 2};
    CHECK(std::abs(average_function(modulus, kUnit, a, 1e-6).value - 1.0) < 1e-12);
    ScalarFunction real_part{[](std::span<const Complex> z) { return Complex{z[0].real(), 0.0}; }, 1, 1};
    CHECK(std::abs(average_function(real_part, kUnit, a, 1e-4).value) <= 1e-4);
    ScalarFunction constant{[](std::span<const Complex>) { return Complex{2.5, -1.0}; }, 0, 0};
    CHECK(std::abs(average_function(constant, kUnit, a, 1e-6).value - Complex{2.5, -1.0}) < 1e-14);
}

TEST_CASE("radial decomposition oracles") {
    const PolynomialVectorField damping(2, {mono(0, {1, 0}, {0, 0}, -1.0), mono(1, {0, 1}, {0, 0}, -1.0)});
    const auto r = radial_decomposition(damping, kIrrational);
    REQUIRE(r.size() == 2);
    const std::vector<double> x{0.7, 2.0};
    CHECK(r[0](x) == Complex{-1.0, 0.0});

    const PolynomialVectorField coupled(2, {mono(0, {1, 1}, {0, 1})});
    CHECK(radial_decomposition(coupled, kIrrational)[0](x) == Complex{2.0, 0.0});

    const PolynomialVectorField bad(2, {mono(0, {2, 0}, {0, 0})});
    CHECK_THROWS((void)radial_decomposition(bad, kIrrational));
}
