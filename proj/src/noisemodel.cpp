#include "resavg/noisemodel.hpp"

#include "resavg/errors.hpp"
#include "resavg/rng.hpp"

#include <algorithm>
#include <cmath>

namespace resavg {

namespace {
constexpr double kHermitianTol = 1e-10;
}

CMatrix effective_diffusion(const CMatrix& psi, const FrequencySpectrum& spectrum) {
    const std::size_t n = psi.rows();
    require_same_dimension(spectrum.size(), n, "effective_diffusion");
    CMatrix a(n, n);
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t j = 0; j < n; ++j) {
            if (std::abs(spectrum[k] - spectrum[j]) > kResonanceTol) continue;
            Complex acc{};
            for (std::size_t l = 0; l < psi.cols(); ++l) acc += psi(k, l) * std::conj(psi(j, l));
            a(k, j) = acc;
        }
    }
    for (std::size_t k = 0; k < n; ++k) a(k, k) = a(k, k).real();
    return a;
}

CMatrix hermitian_sqrt(const CMatrix& a) {
    if (!a.square()) {
        throw DimensionError("hermitian_sqrt: matrix is not square");
    }
    if (!is_hermitian(a, kHermitianTol * std::max(1.0, max_abs(a)))) {
        throw InvalidArgument("hermitian_sqrt: matrix is not Hermitian");
    }
    const auto eig = hermitian_eigen(a);
    const std::size_t n = a.rows();
    const double scale = std::max(1.0, max_abs(a));
    CMatrix b(n, n);
    for (std::size_t k = 0; k < n; ++k) {
        double ev = eig.values[k];
        if (ev < -kEigenClamp * scale) {
            throw NumericalError("hermitian_sqrt: eigenvalue " + std::to_string(ev) + " below -1e-10");
        }
        const double root = std::sqrt(std::max(ev, 0.0));
        if (root == 0.0) continue;
        for (std::size_t i = 0; i < n; ++i) {
            const Complex ui = eig.vectors(i, k) * root;
            for (std::size_t j = 0; j < n; ++j) b(i, j) += ui * std::conj(eig.vectors(j, k));
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        b(i, i) = b(i, i).real();
        for (std::size_t j = i + 1; j < n; ++j) {
            const Complex v = 0.5 * (b(i, j) + std::conj(b(j, i)));
            b(i, j) = v;
            b(j, i) = std::conj(v);
        }
    }
    return b;
}

RMatrix symmetric_sqrt(const RMatrix& a) {
    const CMatrix root = hermitian_sqrt(to_complex(a));
    RMatrix out(a.rows(), a.cols());
    for (std::size_t i = 0; i < out.data().size(); ++i) out.data()[i] = root.data()[i].real();
    return out;
}

CMatrix noise_increment_covariance(const CMatrix& psi, const FrequencySpectrum& spectrum, double eps, double tau,
                                   double h) {
    if (!(eps > 0.0)) throw InvalidArgument("noise_increment_covariance: epsilon must be positive");
    if (!(h > 0.0)) throw InvalidArgument("noise_increment_covariance: step must be positive");
    const std::size_t n = psi.rows();
    require_same_dimension(spectrum.size(), n, "noise_increment_covariance");
    CMatrix c(n, n);
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t j = 0; j < n; ++j) {
            Complex gram{};
            for (std::size_t l = 0; l < psi.cols(); ++l) gram += psi(k, l) * std::conj(psi(j, l));
            if (gram == Complex{}) continue;
            const double delta = spectrum[k] - spectrum[j];
            Complex integral;
            if (std::abs(delta) <= kResonanceTol) {
                integral = h;
            } else {
                const double w = delta / eps;
                integral = (std::polar(1.0, w * (tau + h)) - std::polar(1.0, w * tau)) / Complex(0.0, w);
            }
            c(k, j) = 2.0 * gram * integral;
        }
    }
    for (std::size_t k = 0; k < n; ++k) c(k, k) = c(k, k).real();
    return c;
}

void apply_root_to_gaussian(const CMatrix& root, Rng& rng, std::span<Complex> xi, std::span<Complex> out) {
    for (std::size_t l = 0; l < root.cols(); ++l) xi[l] = rng.complex_gaussian();
    multiply_into(root, xi, out);
}

ComplexState sample_complex_gaussian(const CMatrix& c, Rng& rng) {
    const CMatrix root = hermitian_sqrt(c);
    ComplexState xi(root.cols()), out(root.rows());
    apply_root_to_gaussian(root, rng, xi, out);
    return out;
}

EffectiveModel EffectiveModel::build(const EvaluableField& p, const CMatrix& psi, const FrequencySpectrum& spectrum,
                                     double numeric_tol) {
    require_same_dimension(spectrum.size(), p.dimension(), "EffectiveModel");
    require_same_dimension(spectrum.size(), psi.rows(), "EffectiveModel");
    CMatrix a = effective_diffusion(psi, spectrum);
    CMatrix b = hermitian_sqrt(a);
    if (const auto* poly = p.polynomial()) {
        return {EvaluableField(resonant_average_symbolic(*poly, spectrum)), std::move(a), std::move(b)};
    }
    auto routine = [p, spectrum, numeric_tol](std::span<const Complex> v, std::span<Complex> out) {
        const auto avg = average_numeric(p, spectrum, v, numeric_tol);
        std::copy(avg.value.begin(), avg.value.end(), out.begin());
    };
    return {EvaluableField(p.dimension(), routine, p.growth_order(), p.growth_constant(), p.quadrature_degree()),
            std::move(a), std::move(b)};
}

void EffectiveModel::validate() const {
    const std::size_t n = drift.dimension();
    if (diffusion.rows() != n || diffusion.cols() != n || dispersion.rows() != n || dispersion.cols() != n) {
        throw DimensionError("EffectiveModel: A and B must be n x n");
    }
    const double scale = std::max(1.0, max_abs(diffusion));
    if (!is_hermitian(diffusion, kHermitianTol * scale)) {
        throw InvalidArgument("EffectiveModel: A is not Hermitian");
    }
    if (max_abs_diff(dispersion * adjoint(dispersion), diffusion) > kHermitianTol * scale) {
        throw NumericalError("EffectiveModel: B B^* differs from A");
    }
}

std::string_view to_string(DispersionSmoothness s) {
    switch (s) {
        case DispersionSmoothness::constant: return "constant";
        case DispersionSmoothness::nondegenerate: return "nondegenerate";
        case DispersionSmoothness::c2_smooth: return "c2_smooth";
    }
    return "c2_smooth";
}

DispersionSmoothness smoothness_from_string(std::string_view s) {
    if (s == "constant") return DispersionSmoothness::constant;
    if (s == "nondegenerate") return DispersionSmoothness::nondegenerate;
    if (s == "c2_smooth") return DispersionSmoothness::c2_smooth;
    throw InvalidArgument("unknown dispersion smoothness class '" + std::string(s) + "'");
}

RMatrix StateDependentDispersion::operator()(std::span<const Complex> v) const {
    RMatrix m = eval(v);
    if (m.rows() != 2 * n || m.cols() != n2) {
        throw DimensionError("state-dependent dispersion returned a matrix of the wrong shape");
    }
    return m;
}

StateDependentDispersion StateDependentDispersion::constant_from(const CMatrix& psi) {
    RMatrix real = realify(psi);
    StateDependentDispersion out;
    out.n = psi.rows();
    out.n2 = 2 * psi.cols();
    out.eval = [real](std::span<const Complex>) { return real; };
    out.smoothness = DispersionSmoothness::constant;
    return out;
}

RMatrix rotation_blocks(std::span<const double> w) {
    const std::size_t n = w.size();
    RMatrix r(2 * n, 2 * n);
    for (std::size_t j = 0; j < n; ++j) {
        const double c = std::cos(w[j]), s = std::sin(w[j]);
        r(2 * j, 2 * j) = c;
        r(2 * j, 2 * j + 1) = -s;
        r(2 * j + 1, 2 * j) = s;
        r(2 * j + 1, 2 * j + 1) = c;
    }
    return r;
}

StateDiffusionResult averaged_state_diffusion(const StateDependentDispersion& b, const FrequencySpectrum& spectrum,
                                              std::span<const Complex> a, double tol) {
    const std::size_t n = a.size();
    require_same_dimension(spectrum.size(), n, "averaged_state_diffusion");
    require_same_dimension(b.n, n, "averaged_state_diffusion");
    const std::size_t d = 2 * n;
    ComplexState rotated(n);
    auto r = detail::time_average(spectrum, 4, tol, d * d, [&](double t, std::span<Complex> out) {
        for (std::size_t j = 0; j < n; ++j) rotated[j] = std::polar(1.0, -t * spectrum[j]) * a[j];
        const RMatrix rb = rotation_blocks(spectrum.scaled(t)) * b(rotated);
        const RMatrix prod = rb * transpose(rb);
        for (std::size_t i = 0; i < d * d; ++i) out[i] = prod.data()[i];
    });
    StateDiffusionResult res;
    res.value = RMatrix(d, d);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j)
            res.value(i, j) = 0.5 * (r.value[i * d + j].real() + r.value[j * d + i].real());
    res.horizon = r.horizon;
    return res;
}

StateRootResult state_dispersion_sqrt(const std::function<RMatrix(std::span<const Complex>)>& a0,
                                      std::span<const Complex> a, double probe) {
    StateRootResult out;
    out.root = symmetric_sqrt(a0(a));
    ComplexState shifted(a.begin(), a.end());
    for (std::size_t k = 0; k < 2 * a.size(); ++k) {
        const std::size_t j = k / 2;
        const Complex step = (k % 2 == 0) ? Complex(probe, 0.0) : Complex(0.0, probe);
        shifted[j] = a[j] + step;
        const RMatrix nearby = symmetric_sqrt(a0(shifted));
        out.local_lipschitz = std::max(out.local_lipschitz, max_abs_diff(nearby, out.root) / probe);
        shifted[j] = a[j];
    }
    return out;
}

}  // namespace resavg
