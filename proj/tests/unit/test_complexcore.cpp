#include "resavg/complexcore.hpp"
#include "resavg/errors.hpp"
#include "resavg/frequency.hpp"

#include <doctest.h>

#include <cmath>
#include <functional>
#include <numbers>

using namespace resavg;

TEST_CASE("rotate by zero is the identity and rotations preserve actions") {
    const ComplexState z{{1.0, 2.0}, {-0.5, 0.25}};
    const std::vector<double> zero{0.0, 0.0};
    CHECK(rotate(zero, z) == z);

    const std::vector<double> w{0.7, -2.3};
    const auto r = rotate(w, z);
    const auto i0 = actions(z), i1 = actions(r);
    for (std::size_t k = 0; k < 2; ++k) CHECK(i1[k] == doctest::Approx(i0[k]).epsilon(1e-15));

    const std::vector<double> back{-0.7, 2.3};
    const auto id = rotate(back, r);
    for (std::size_t k = 0; k < 2; ++k) CHECK(std::abs(id[k] - z[k]) < 1e-15);
}

TEST_CASE("rotate multiplies coordinate j by exp(i w_j)") {
    const ComplexState z{{1.0, 0.0}};
    const std::vector<double> w{std::numbers::pi / 2};
    const auto r = rotate(w, z);
    CHECK(std::abs(r[0] - Complex{0.0, 1.0}) < 1e-15);
}

TEST_CASE("rotate rejects mismatched dimensions") {
    const ComplexState z{{1.0, 0.0}, {0.0, 1.0}};
    const std::vector<double> w{1.0};
    CHECK_THROWS_AS((void)rotate(w, z), DimensionError);
}

TEST_CASE("actions and angles") {
    CHECK(actions(ComplexState{{1.0, 1.0}})[0] == doctest::Approx(1.0));
    CHECK(actions(ComplexState{{0.0, 0.0}})[0] == 0.0);
    CHECK(angles(ComplexState{{0.0, 1.0}})[0] == doctest::Approx(std::numbers::pi / 2));
    CHECK(angles(ComplexState{{0.0, 0.0}})[0] == 0.0);
    CHECK(angles(ComplexState{{-1.0, 0.0}})[0] == doctest::Approx(std::numbers::pi));
    const double phi = angles(ComplexState{{0.0, -1.0}})[0];
    CHECK(phi >= 0.0);
    CHECK(phi < 2.0 * std::numbers::pi);
    CHECK(phi == doctest::Approx(1.5 * std::numbers::pi));
}

TEST_CASE("inner product, norm and real coordinates") {
    const ComplexState x{{1.0, 2.0}, {3.0, -1.0}};
    const ComplexState y{{0.5, -1.0}, {2.0, 2.0}};
    CHECK(inner(x, y) == doctest::Approx(1.0 * 0.5 + 2.0 * -1.0 + 3.0 * 2.0 + -1.0 * 2.0));
    CHECK(norm(x) == doctest::Approx(std::sqrt(15.0)));
    const auto flat = decomplexify(x);
    REQUIRE(flat.size() == 4);
    CHECK(flat[1] == 2.0);
    CHECK(complexify(flat) == x);
    CHECK(all_finite(x));
    CHECK_FALSE(all_finite(ComplexState{{std::nan(""), 0.0}}));
}

namespace {

SampledPath scalar_path(std::size_t points, const std::function<Complex(double)>& u) {
    SampledPath p;
    for (std::size_t k = 0; k < points; ++k) {
        const double t = static_cast<double>(k) / static_cast<double>(points - 1);
        p.times.push_back(t);
        p.states.push_back({u(t)});
    }
    return p;
}

}  // namespace

TEST_CASE("holder norm oracles") {
    const Complex c{3.0, -4.0};
    CHECK(holder_norm(scalar_path(11, [&](double) { return c; }), 0.5) == doctest::Approx(5.0));
    CHECK(holder_norm(scalar_path(101, [](double t) { return Complex{t, 0.0}; }), 1.0 / 3.0) ==
          doctest::Approx(2.0));
}

TEST_CASE("holder norm at alpha = 1 does not decrease under refinement") {
    auto u = [](double t) { return Complex{std::sin(7.0 * t), std::cos(3.0 * t)}; };
    double prev = 0.0;
    for (std::size_t points : {3, 5, 9, 17, 33, 65}) {
        const double h = holder_norm(scalar_path(points, u), 1.0);
        CHECK(h >= prev - 1e-15);
        prev = h;
    }
}

TEST_CASE("holder norm validates its input") {
    SampledPath p;
    p.times = {0.0, 0.0};
    p.states = {{Complex{}}, {Complex{}}};
    CHECK_THROWS((void)holder_norm(p, 0.5));
    CHECK_THROWS((void)holder_norm(scalar_path(3, [](double) { return Complex{}; }), 0.0));
    CHECK_THROWS((void)holder_norm(scalar_path(3, [](double) { return Complex{}; }), 1.5));
}

TEST_CASE("frequency spectrum classification") {
    const auto resonant = FrequencySpectrum::infer({1.0, 2.0, 3.0});
    CHECK(resonant.resonance() == ResonanceClass::completely_resonant);
    CHECK(resonant.base_frequency() == doctest::Approx(1.0));
    CHECK(resonant.period() == doctest::Approx(2.0 * std::numbers::pi));
    CHECK(FrequencySpectrum::infer({0.5, 1.5}).base_frequency() == doctest::Approx(0.5));
    CHECK(FrequencySpectrum::infer({1.0, std::numbers::sqrt2}).resonance() != ResonanceClass::completely_resonant);
    CHECK_THROWS_AS(FrequencySpectrum({1.0, 0.0}, ResonanceClass::general), InvalidArgument);
    CHECK_THROWS_AS(FrequencySpectrum({}, ResonanceClass::general), InvalidArgument);
    CHECK(resonance_class_from_string(to_string(ResonanceClass::non_resonant)) == ResonanceClass::non_resonant);
}
