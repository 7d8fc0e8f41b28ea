#include "resavg/fields.hpp"

#include "resavg/errors.hpp"
#include "resavg/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>
#include <tuple>

namespace resavg {

namespace {

constexpr int kPanelsPerPeriodPerDegree = 8;
constexpr int kResonantStepsPerDegree = 256;

bool key_less(const Monomial& a, const Monomial& b) {
    return std::tie(a.target, a.alpha, a.beta) < std::tie(b.target, b.alpha, b.beta);
}

void check_shape(const Monomial& m, std::size_t n) {
    if (m.target >= n) {
        throw DimensionError("monomial target " + std::to_string(m.target + 1) + " outside 1.." +
                             std::to_string(n));
    }
    if (m.alpha.size() != n || m.beta.size() != n) {
        throw DimensionError("monomial exponent vectors must have length " + std::to_string(n));
    }
    if (!std::isfinite(m.coeff.real()) || !std::isfinite(m.coeff.imag())) {
        throw InvalidArgument("monomial coefficient must be finite");
    }
}

double max_norm_diff(std::span<const Complex> a, std::span<const Complex> b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace

unsigned Monomial::degree() const {
    return std::accumulate(alpha.begin(), alpha.end(), 0u) + std::accumulate(beta.begin(), beta.end(), 0u);
}

double Monomial::phase_frequency(std::span<const double> lambdas) const {
    double s = 0.0;
    for (std::size_t k = 0; k < lambdas.size(); ++k) {
        s += lambdas[k] * (static_cast<double>(alpha[k]) - static_cast<double>(beta[k]));
    }
    return s;
}

bool Monomial::same_key(const Monomial& other) const {
    return target == other.target && alpha == other.alpha && beta == other.beta;
}

PolynomialVectorField::PolynomialVectorField(std::size_t n, std::vector<Monomial> monomials)
    : n_(n), monomials_(std::move(monomials)) {
    canonicalize();
    growth_order_ = degree_;
    double total = 0.0;
    for (const auto& m : monomials_) total += std::abs(m.coeff);
    growth_constant_ = total > 0.0 ? total : 1.0;
}

PolynomialVectorField::PolynomialVectorField(std::size_t n, std::vector<Monomial> monomials,
                                             unsigned growth_order, double growth_constant)
    : n_(n), monomials_(std::move(monomials)), growth_order_(growth_order), growth_constant_(growth_constant) {
    canonicalize();
    if (!(growth_constant_ > 0.0) || !std::isfinite(growth_constant_)) {
        throw InvalidArgument("growth constant must be positive");
    }
}

PolynomialVectorField PolynomialVectorField::identity(std::size_t n) { return linear(n, 1.0); }

PolynomialVectorField PolynomialVectorField::linear(std::size_t n, Complex rate) {
    std::vector<Monomial> monos;
    for (std::size_t j = 0; j < n; ++j) {
        Monomial m{j, std::vector<unsigned>(n, 0), std::vector<unsigned>(n, 0), rate};
        m.alpha[j] = 1;
        monos.push_back(std::move(m));
    }
    return PolynomialVectorField(n, std::move(monos));
}

void PolynomialVectorField::canonicalize() {
    if (n_ == 0) {
        throw DimensionError("polynomial field dimension must be >= 1");
    }
    for (const auto& m : monomials_) check_shape(m, n_);
    std::stable_sort(monomials_.begin(), monomials_.end(), key_less);
    std::vector<Monomial> merged;
    merged.reserve(monomials_.size());
    merged_ = 0;
    for (auto& m : monomials_) {
        if (!merged.empty() && merged.back().same_key(m)) {
            merged.back().coeff += m.coeff;
            ++merged_;
        } else {
            merged.push_back(std::move(m));
        }
    }
    std::erase_if(merged, [](const Monomial& m) { return m.coeff == Complex{}; });
    monomials_ = std::move(merged);

    degree_ = 0;
    factors_.clear();
    factors_.reserve(monomials_.size());
    for (const auto& m : monomials_) {
        degree_ = std::max(degree_, m.degree());
        std::vector<Factor> f;
        for (std::size_t k = 0; k < n_; ++k) {
            for (unsigned e = 0; e < m.alpha[k]; ++e) f.push_back({static_cast<std::uint32_t>(k), false});
            for (unsigned e = 0; e < m.beta[k]; ++e) f.push_back({static_cast<std::uint32_t>(k), true});
        }
        factors_.push_back(std::move(f));
    }
}

void PolynomialVectorField::evaluate_into(std::span<const Complex> v, std::span<Complex> out) const {
    require_same_dimension(n_, v.size(), "evaluate");
    std::fill(out.begin(), out.end(), Complex{});
    for (std::size_t i = 0; i < monomials_.size(); ++i) {
        Complex prod = monomials_[i].coeff;
        for (const auto& f : factors_[i]) {
            prod *= f.conj ? std::conj(v[f.var]) : v[f.var];
        }
        out[monomials_[i].target] += prod;
    }
}

ComplexState PolynomialVectorField::operator()(std::span<const Complex> v) const {
    ComplexState out(n_);
    evaluate_into(v, out);
    return out;
}

double PolynomialVectorField::sampled_growth_ratio(std::size_t samples, double radius, Rng& rng) const {
    double worst = 0.0;
    ComplexState v(n_), out(n_);
    for (std::size_t s = 0; s < samples; ++s) {
        for (auto& c : v) c = rng.complex_gaussian();
        const double scale = radius * rng.uniform() / std::max(norm(v), 1e-300);
        for (auto& c : v) c *= scale;
        evaluate_into(v, out);
        worst = std::max(worst, norm(out) / std::pow(1.0 + norm(v), growth_order_));
    }
    return worst;
}

PolynomialVectorField operator+(const PolynomialVectorField& a, const PolynomialVectorField& b) {
    require_same_dimension(a.n_, b.n_, "polynomial sum");
    std::vector<Monomial> monos = a.monomials_;
    monos.insert(monos.end(), b.monomials_.begin(), b.monomials_.end());
    return PolynomialVectorField(a.n_, std::move(monos), std::max(a.growth_order_, b.growth_order_),
                                 a.growth_constant_ + b.growth_constant_);
}

PolynomialVectorField operator*(Complex s, const PolynomialVectorField& p) {
    std::vector<Monomial> monos = p.monomials_;
    for (auto& m : monos) m.coeff *= s;
    const double c = std::abs(s) * p.growth_constant_;
    return PolynomialVectorField(p.n_, std::move(monos), p.growth_order_, c > 0.0 ? c : 1.0);
}

bool PolynomialVectorField::operator==(const PolynomialVectorField& other) const {
    if (n_ != other.n_ || monomials_.size() != other.monomials_.size()) return false;
    for (std::size_t i = 0; i < monomials_.size(); ++i) {
        if (!monomials_[i].same_key(other.monomials_[i]) || monomials_[i].coeff != other.monomials_[i].coeff)
            return false;
    }
    return true;
}

std::string PolynomialVectorField::to_string() const {
    std::ostringstream os;
    os.precision(12);
    for (std::size_t j = 0; j < n_; ++j) {
        os << "P" << j + 1 << " =";
        bool any = false;
        for (const auto& m : monomials_) {
            if (m.target != j) continue;
            any = true;
            os << " + (" << m.coeff.real() << (m.coeff.imag() < 0 ? "-" : "+") << std::abs(m.coeff.imag())
               << "i)";
            for (std::size_t k = 0; k < n_; ++k) {
                if (m.alpha[k]) os << " a" << k + 1 << (m.alpha[k] > 1 ? "^" + std::to_string(m.alpha[k]) : "");
                if (m.beta[k]) os << " conj(a" << k + 1 << ")" << (m.beta[k] > 1 ? "^" + std::to_string(m.beta[k]) : "");
            }
        }
        if (!any) os << " 0";
        os << "\n";
    }
    return os.str();
}

EvaluableField::EvaluableField(PolynomialVectorField p)
    : n_(p.dimension()),
      growth_order_(p.growth_order()),
      growth_constant_(p.growth_constant()),
      quad_degree_(std::max(1u, p.degree())) {
    poly_ = std::move(p);
}

EvaluableField::EvaluableField(std::size_t n, Routine routine, unsigned growth_order, double growth_constant,
                               unsigned quadrature_degree)
    : n_(n),
      routine_(std::move(routine)),
      growth_order_(growth_order),
      growth_constant_(growth_constant),
      quad_degree_(std::max(1u, quadrature_degree)) {
    if (n_ == 0 || !routine_) {
        throw InvalidArgument("opaque field needs a dimension and a routine");
    }
}

void EvaluableField::evaluate_into(std::span<const Complex> v, std::span<Complex> out) const {
    require_same_dimension(n_, v.size(), "evaluate");
    if (poly_) {
        poly_->evaluate_into(v, out);
    } else {
        routine_(v, out);
    }
}

ComplexState EvaluableField::operator()(std::span<const Complex> v) const {
    ComplexState out(n_);
    evaluate_into(v, out);
    return out;
}

ComplexState evaluate(const EvaluableField& p, std::span<const Complex> v) { return p(v); }

namespace {

// out = rotate(t Lambda, P(rotate(-t Lambda, a))); scratch has size n.
void pushforward_into(const EvaluableField& p, std::span<const double> lambdas, double t,
                      std::span<const Complex> a, std::span<Complex> scratch, std::span<Complex> out) {
    const std::size_t n = a.size();
    for (std::size_t j = 0; j < n; ++j) scratch[j] = std::polar(1.0, -t * lambdas[j]) * a[j];
    p.evaluate_into(scratch, out);
    for (std::size_t j = 0; j < n; ++j) out[j] *= std::polar(1.0, t * lambdas[j]);
}

}  // namespace

ComplexState pushforward(const EvaluableField& p, const FrequencySpectrum& spectrum, double t,
                         std::span<const Complex> a) {
    require_same_dimension(p.dimension(), a.size(), "pushforward");
    require_same_dimension(spectrum.size(), a.size(), "pushforward");
    ComplexState scratch(a.size()), out(a.size());
    pushforward_into(p, spectrum.lambdas(), t, a, scratch, out);
    return out;
}

ComplexState partial_average(const EvaluableField& p, const FrequencySpectrum& spectrum,
                             std::span<const Complex> a, double horizon, int steps) {
    if (!(horizon > 0.0) || !std::isfinite(horizon)) {
        throw InvalidArgument("partial_average: horizon must be positive");
    }
    if (steps < 16) {
        throw InvalidArgument("partial_average: need at least 16 panels");
    }
    require_same_dimension(p.dimension(), a.size(), "partial_average");
    require_same_dimension(spectrum.size(), a.size(), "partial_average");
    const std::size_t n = a.size();
    ComplexState scratch(n), y(n), acc(n);
    const double h = horizon / steps;
    for (int k = 0; k <= steps; ++k) {
        pushforward_into(p, spectrum.lambdas(), k * h, a, scratch, y);
        const double w = (k == 0 || k == steps) ? 0.5 : 1.0;
        for (std::size_t j = 0; j < n; ++j) acc[j] += w * y[j];
    }
    for (auto& c : acc) c *= h / horizon;
    return acc;
}

namespace detail {

TimeAverageResult time_average(const FrequencySpectrum& spectrum, unsigned degree, double tol, std::size_t dim,
                               const std::function<void(double, std::span<Complex>)>& sample) {
    if (!(tol > 0.0)) {
        throw InvalidArgument("averaging tolerance must be positive");
    }
    std::vector<Complex> y(dim);
    TimeAverageResult res;
    res.value.assign(dim, Complex{});

    if (spectrum.resonance() == ResonanceClass::completely_resonant) {
        // Periodic integrand: the trapezoid rule over one period is spectrally accurate.
        const double period = spectrum.period();
        const int steps = kResonantStepsPerDegree * static_cast<int>(std::max(1u, degree));
        const double h = period / steps;
        for (int k = 0; k < steps; ++k) {
            sample(k * h, y);
            for (std::size_t i = 0; i < dim; ++i) res.value[i] += y[i];
        }
        for (auto& c : res.value) c /= static_cast<double>(steps);
        res.horizon = period;
        return res;
    }

    const double two_pi = 2.0 * std::numbers::pi;
    const double fastest = spectrum.max_abs() * (degree + 1);
    const double h_target = two_pi / (fastest * kPanelsPerPeriodPerDegree);
    const long long base_panels = std::max<long long>(16, static_cast<long long>(std::ceil(two_pi / h_target)));
    const double h = two_pi / static_cast<double>(base_panels);

    // Weighted Birkhoff average with the bump exp(-1/(s(1-s))) on [0, T']: for
    // quasi-periodic integrands the error falls faster than any power of 1/T', so
    // the difference between successive doublings bounds the error of the last one.
    // The uniform window decays only like 1/T' with an oscillating factor that can
    // make two doublings agree while both are still off.
    auto weighted = [&](long long panels, std::span<Complex> out) {
        std::fill(out.begin(), out.end(), Complex{});
        double total = 0.0;
        for (long long k = 1; k < panels; ++k) {
            const double s = static_cast<double>(k) / static_cast<double>(panels);
            const double w = std::exp(-1.0 / (s * (1.0 - s)));
            if (w == 0.0) continue;
            sample(static_cast<double>(k) * h, y);
            for (std::size_t i = 0; i < dim; ++i) out[i] += w * y[i];
            total += w;
        }
        for (auto& c : out) c /= total;
    };

    std::vector<Complex> prev(dim);
    long long panels = base_panels;
    weighted(panels, prev);
    int doublings = 0;
    while (true) {
        const double next_horizon = static_cast<double>(2 * panels) * h;
        if (next_horizon > kMaxAveragingHorizon) {
            throw ConvergenceError("averaging did not converge before T' = 1e7 (near-resonant small divisors?)");
        }
        panels *= 2;
        ++doublings;
        weighted(panels, res.value);
        if (max_norm_diff(res.value, prev) < tol) {
            res.horizon = next_horizon;
            res.doublings = doublings;
            return res;
        }
        prev = res.value;
    }
}

}  // namespace detail

AverageResult average_numeric(const EvaluableField& p, const FrequencySpectrum& spectrum,
                              std::span<const Complex> a, double tol) {
    require_same_dimension(p.dimension(), a.size(), "average_numeric");
    require_same_dimension(spectrum.size(), a.size(), "average_numeric");
    const std::size_t n = a.size();
    ComplexState scratch(n);
    auto r = detail::time_average(spectrum, p.quadrature_degree(), tol, n, [&](double t, std::span<Complex> out) {
        pushforward_into(p, spectrum.lambdas(), t, a, scratch, out);
    });
    return {std::move(r.value), r.horizon, r.doublings};
}

PolynomialVectorField resonant_average_symbolic(const PolynomialVectorField& p, const FrequencySpectrum& spectrum) {
    require_same_dimension(p.dimension(), spectrum.size(), "resonant_average_symbolic");
    std::vector<Monomial> kept;
    for (const auto& m : p.monomials()) {
        if (std::abs(m.phase_frequency(spectrum.lambdas()) - spectrum[m.target]) <= kResonanceTol) {
            kept.push_back(m);
        }
    }
    return PolynomialVectorField(p.dimension(), std::move(kept), p.growth_order(), p.growth_constant());
}

ComplexState torus_average_lattice(const EvaluableField& p, std::span<const Complex> a, std::size_t nodes) {
    require_same_dimension(p.dimension(), a.size(), "torus_average");
    if (nodes == 0) {
        throw InvalidArgument("torus_average: nodes must be positive");
    }
    const std::size_t n = a.size();
    // Korobov generating vector (1, g, g^2, ...) mod N with g ~ N / golden ratio.
    const auto big_n = static_cast<unsigned long long>(nodes);
    const auto g = static_cast<unsigned long long>(std::llround(static_cast<double>(nodes) / std::numbers::phi));
    std::vector<unsigned long long> z(n);
    unsigned long long zk = 1;
    for (std::size_t k = 0; k < n; ++k) {
        z[k] = zk % big_n;
        zk = (zk * std::max<unsigned long long>(g, 1)) % big_n;
    }
    const double two_pi = 2.0 * std::numbers::pi;
    ComplexState rotated(n), y(n), acc(n);
    for (unsigned long long i = 0; i < big_n; ++i) {
        std::vector<double> w(n);
        for (std::size_t k = 0; k < n; ++k) {
            w[k] = two_pi * static_cast<double>((i * z[k]) % big_n) / static_cast<double>(big_n);
            rotated[k] = std::polar(1.0, -w[k]) * a[k];
        }
        p.evaluate_into(rotated, y);
        for (std::size_t k = 0; k < n; ++k) acc[k] += std::polar(1.0, w[k]) * y[k];
    }
    for (auto& c : acc) c /= static_cast<double>(big_n);
    return acc;
}

ComplexState torus_average(const EvaluableField& p, const FrequencySpectrum& spectrum, std::span<const Complex> a,
                           std::size_t nodes) {
    if (spectrum.resonance() != ResonanceClass::non_resonant) {
        throw InvalidArgument("torus_average requires a non-resonant frequency vector");
    }
    require_same_dimension(spectrum.size(), a.size(), "torus_average");
    if (const auto* poly = p.polynomial()) {
        const std::size_t n = a.size();
        std::vector<Monomial> kept;
        for (const auto& m : poly->monomials()) {
            bool survives = true;
            for (std::size_t k = 0; k < n && survives; ++k) {
                const int diff = static_cast<int>(m.alpha[k]) - static_cast<int>(m.beta[k]);
                survives = diff == (k == m.target ? 1 : 0);
            }
            if (survives) kept.push_back(m);
        }
        return PolynomialVectorField(n, std::move(kept))(a);
    }
    return torus_average_lattice(p, a, nodes);
}

ScalarAverageResult average_function(const ScalarFunction& f, const FrequencySpectrum& spectrum,
                                     std::span<const Complex> a, double tol) {
    require_same_dimension(spectrum.size(), a.size(), "average_function");
    if (!f.f) {
        throw InvalidArgument("average_function: empty function");
    }
    const std::size_t n = a.size();
    ComplexState rotated(n);
    auto r = detail::time_average(spectrum, f.quadrature_degree, tol, 1, [&](double t, std::span<Complex> out) {
        for (std::size_t j = 0; j < n; ++j) rotated[j] = std::polar(1.0, -t * spectrum[j]) * a[j];
        out[0] = f.f(rotated);
    });
    return {r.value[0], r.horizon, r.doublings};
}

Complex RadialPolynomial::operator()(std::span<const double> x) const {
    Complex acc{};
    for (const auto& t : terms) {
        double prod = 1.0;
        for (std::size_t k = 0; k < t.gamma.size(); ++k) {
            for (unsigned e = 0; e < t.gamma[k]; ++e) prod *= x[k];
        }
        acc += t.coeff * prod;
    }
    return acc;
}

std::vector<RadialPolynomial> radial_decomposition(const PolynomialVectorField& averaged,
                                                   const FrequencySpectrum& spectrum) {
    if (spectrum.resonance() != ResonanceClass::non_resonant) {
        throw InvalidArgument("radial_decomposition requires a non-resonant frequency vector");
    }
    const std::size_t n = averaged.dimension();
    require_same_dimension(n, spectrum.size(), "radial_decomposition");
    std::vector<RadialPolynomial> out(n);
    for (const auto& m : averaged.monomials()) {
        for (std::size_t k = 0; k < n; ++k) {
            const int diff = static_cast<int>(m.alpha[k]) - static_cast<int>(m.beta[k]);
            if (diff != (k == m.target ? 1 : 0)) {
                throw InvalidArgument("non-radial monomial in component " + std::to_string(m.target + 1) +
                                      ": averaged field is not of the form a_j R_j(|a|)");
            }
        }
        out[m.target].terms.push_back({m.coeff, m.beta});
    }
    return out;
}

}  // namespace resavg
