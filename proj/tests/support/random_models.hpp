#pragma once

#include "resavg/fields.hpp"
#include "resavg/matrix.hpp"
#include "resavg/rng.hpp"

#include <cmath>
#include <vector>

namespace resavg::testing {

/// `terms` random monomials of total degree in [0, max_degree].
inline PolynomialVectorField random_field(std::size_t n, unsigned max_degree, std::size_t terms, Rng& rng) {
    std::vector<Monomial> ms;
    for (std::size_t t = 0; t < terms; ++t) {
        Monomial m;
        m.target = rng.index(n);
        m.alpha.assign(n, 0);
        m.beta.assign(n, 0);
        const auto degree = static_cast<unsigned>(rng.index(max_degree + 1));
        for (unsigned d = 0; d < degree; ++d) {
            auto& slot = rng.uniform() < 0.5 ? m.alpha : m.beta;
            ++slot[rng.index(n)];
        }
        m.coeff = 0.5 * rng.complex_gaussian();
        ms.push_back(std::move(m));
    }
    return PolynomialVectorField(n, std::move(ms));
}

inline ComplexState random_point(std::size_t n, Rng& rng, double scale = 1.0) {
    ComplexState a(n);
    for (auto& z : a) z = scale * rng.complex_gaussian();
    return a;
}

/// n x cols complex Gaussian matrix; with rank < min(n, cols) the columns are
/// drawn as combinations of `rank` base columns.
inline CMatrix random_psi(std::size_t n, std::size_t cols, std::size_t rank, Rng& rng) {
    CMatrix base(n, rank);
    for (auto& z : base.data()) z = rng.complex_gaussian();
    CMatrix mix(rank, cols);
    for (auto& z : mix.data()) z = rng.complex_gaussian();
    return base * mix;
}

}  // namespace resavg::testing
