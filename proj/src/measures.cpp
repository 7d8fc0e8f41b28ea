#include "resavg/measures.hpp"

#include "resavg/errors.hpp"
#include "resavg/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace resavg {

namespace {

constexpr std::uint64_t kResampleSeed = 0x5EED'0001ULL;
constexpr double kRidgeScales[] = {0.25, 1.0, 4.0};

void require_nonempty(std::span<const double> x, const char* what) {
    if (x.empty()) throw InvalidArgument(std::string(what) + ": empty sample");
}

double sorted_w1(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
    return s / static_cast<double>(a.size());
}

std::vector<double> resample_values(std::span<const double> x, std::size_t m, Rng& rng) {
    std::vector<double> out(m);
    for (auto& v : out) v = x[rng.index(x.size())];
    return out;
}

double distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
    return std::sqrt(s);
}

// Shortest augmenting path assignment with potentials, O(m^3).
double min_cost_assignment(const std::vector<double>& cost, std::size_t m) {
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(m + 1, 0.0), v(m + 1, 0.0), minv(m + 1);
    std::vector<std::size_t> p(m + 1, 0), way(m + 1, 0);
    std::vector<char> used(m + 1);
    for (std::size_t i = 1; i <= m; ++i) {
        p[0] = i;
        std::size_t j0 = 0;
        std::fill(minv.begin(), minv.end(), inf);
        std::fill(used.begin(), used.end(), 0);
        do {
            used[j0] = 1;
            const std::size_t i0 = p[j0];
            double delta = inf;
            std::size_t j1 = 0;
            const double* row = cost.data() + (i0 - 1) * m;
            for (std::size_t j = 1; j <= m; ++j) {
                if (used[j]) continue;
                const double cur = row[j - 1] - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= m; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const std::size_t j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    double total = 0.0;
    for (std::size_t j = 1; j <= m; ++j) total += cost[(p[j] - 1) * m + (j - 1)];
    return total;
}

/// Brings both clouds to the same size by resampling the larger one.
std::pair<EmpiricalMeasure, EmpiricalMeasure> equalize(const EmpiricalMeasure& x, const EmpiricalMeasure& y,
                                                       Rng& rng) {
    if (x.size() == y.size()) return {x, y};
    if (x.size() > y.size()) return {x.resample(y.size(), rng), y};
    return {x, y.resample(x.size(), rng)};
}

struct TestFunction {
    enum Kind { cone, ridge } kind;
    std::vector<double> centre;  // cone centre or ridge frequency w
    double phase = 0.0;
    double scale = 0.0;  // ridge amplitude 1 / (2 (1 + |w|))

    double operator()(std::span<const double> x) const {
        if (kind == cone) return 0.5 * std::max(0.0, 1.0 - distance(x, centre));
        double s = phase;
        for (std::size_t k = 0; k < x.size(); ++k) s += centre[k] * x[k];
        return scale * std::cos(s);
    }
};

double mean_of(const TestFunction& f, const EmpiricalMeasure& m) {
    double s = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) s += f(m.point(i));
    return s / static_cast<double>(m.size());
}

}  // namespace

EmpiricalMeasure::EmpiricalMeasure(std::size_t dim, std::vector<double> flat) : dim_(dim), flat_(std::move(flat)) {
    if (dim_ == 0) throw InvalidArgument("EmpiricalMeasure: dimension must be positive");
    if (flat_.empty()) throw InvalidArgument("EmpiricalMeasure: no points");
    if (flat_.size() % dim_ != 0) throw DimensionError("EmpiricalMeasure: storage is not a whole number of points");
    for (double v : flat_) {
        if (!std::isfinite(v)) throw InvalidArgument("EmpiricalMeasure: non-finite entry");
    }
}

EmpiricalMeasure EmpiricalMeasure::from_points(const std::vector<RealVector>& points) {
    if (points.empty()) throw InvalidArgument("EmpiricalMeasure: no points");
    const std::size_t d = points.front().size();
    std::vector<double> flat;
    flat.reserve(points.size() * d);
    for (const auto& p : points) {
        require_same_dimension(d, p.size(), "EmpiricalMeasure point");
        flat.insert(flat.end(), p.begin(), p.end());
    }
    return {d, std::move(flat)};
}

EmpiricalMeasure EmpiricalMeasure::from_complex(const std::vector<ComplexState>& states) {
    if (states.empty()) throw InvalidArgument("EmpiricalMeasure: no points");
    const std::size_t n = states.front().size();
    std::vector<double> flat;
    flat.reserve(states.size() * 2 * n);
    for (const auto& s : states) {
        require_same_dimension(n, s.size(), "EmpiricalMeasure point");
        for (const auto& z : s) {
            flat.push_back(z.real());
            flat.push_back(z.imag());
        }
    }
    return {2 * n, std::move(flat)};
}

RealVector EmpiricalMeasure::coordinate(std::size_t k) const {
    if (k >= dim_) throw DimensionError("EmpiricalMeasure::coordinate out of range");
    RealVector out(size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = flat_[i * dim_ + k];
    return out;
}

RealVector EmpiricalMeasure::project(std::span<const double> theta) const {
    require_same_dimension(dim_, theta.size(), "EmpiricalMeasure::project");
    RealVector out(size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        double s = 0.0;
        for (std::size_t k = 0; k < dim_; ++k) s += theta[k] * flat_[i * dim_ + k];
        out[i] = s;
    }
    return out;
}

EmpiricalMeasure EmpiricalMeasure::resample(std::size_t m, Rng& rng) const {
    if (m == 0) throw InvalidArgument("resample: size must be positive");
    std::vector<double> flat;
    flat.reserve(m * dim_);
    for (std::size_t i = 0; i < m; ++i) {
        const auto p = point(rng.index(size()));
        flat.insert(flat.end(), p.begin(), p.end());
    }
    return {dim_, std::move(flat)};
}

double mc_floor(std::size_t n) {
    if (n == 0) throw InvalidArgument("mc_floor: no samples");
    return 2.0 / std::sqrt(static_cast<double>(n));
}

double wasserstein1_1d(std::span<const double> x, std::span<const double> y, bool* resampled) {
    require_nonempty(x, "wasserstein1_1d");
    require_nonempty(y, "wasserstein1_1d");
    if (resampled) *resampled = x.size() != y.size();
    if (x.size() == y.size()) {
        return sorted_w1({x.begin(), x.end()}, {y.begin(), y.end()});
    }
    Rng rng(kResampleSeed);
    if (x.size() > y.size()) return sorted_w1(resample_values(x, y.size(), rng), {y.begin(), y.end()});
    return sorted_w1({x.begin(), x.end()}, resample_values(y, x.size(), rng));
}

double sliced_w1(const EmpiricalMeasure& x, const EmpiricalMeasure& y, std::size_t n_dirs, Rng& rng,
                 Execution execution) {
    require_same_dimension(x.dim(), y.dim(), "sliced_w1");
    if (n_dirs == 0) throw InvalidArgument("sliced_w1: n_dirs must be positive");
    const std::size_t d = x.dim();
    // Directions are drawn serially so the result does not depend on the thread count.
    std::vector<double> dirs(n_dirs * d);
    for (std::size_t k = 0; k < n_dirs; ++k) {
        double s = 0.0;
        do {
            s = 0.0;
            for (std::size_t i = 0; i < d; ++i) {
                dirs[k * d + i] = rng.gaussian();
                s += dirs[k * d + i] * dirs[k * d + i];
            }
        } while (s == 0.0);
        const double inv = 1.0 / std::sqrt(s);
        for (std::size_t i = 0; i < d; ++i) dirs[k * d + i] *= inv;
    }
    const auto [xs, ys] = equalize(x, y, rng);

    std::vector<double> per_dir(n_dirs);
    const auto nd = static_cast<long long>(n_dirs);
#pragma omp parallel for schedule(static) if (execution == Execution::parallel)
    for (long long k = 0; k < nd; ++k) {
        const std::span<const double> theta(dirs.data() + static_cast<std::size_t>(k) * d, d);
        per_dir[static_cast<std::size_t>(k)] = sorted_w1(xs.project(theta), ys.project(theta));
    }
    double total = 0.0;
    for (double v : per_dir) total += v;
    return total / static_cast<double>(n_dirs);
}

double exact_w1(const EmpiricalMeasure& x, const EmpiricalMeasure& y) {
    require_same_dimension(x.dim(), y.dim(), "exact_w1");
    Rng rng(kResampleSeed);
    const auto [xs, ys] = equalize(x, y, rng);
    const std::size_t m = xs.size();
    std::vector<double> cost(m * m);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) cost[i * m + j] = distance(xs.point(i), ys.point(j));
    }
    return min_cost_assignment(cost, m) / static_cast<double>(m);
}

DistanceBracket dual_lipschitz_bracket(const EmpiricalMeasure& x, const EmpiricalMeasure& y,
                                       std::size_t dict_size, Rng& rng, Execution execution) {
    require_same_dimension(x.dim(), y.dim(), "dual_lipschitz_bracket");
    const std::size_t d = x.dim();

    // Sequential generation: the first k entries do not depend on dict_size.
    std::vector<TestFunction> dict;
    dict.reserve(kConeCentres + dict_size);
    const std::size_t pooled = x.size() + y.size();
    for (std::size_t c = 0; c < kConeCentres; ++c) {
        const std::size_t idx = rng.index(pooled);
        const auto p = idx < x.size() ? x.point(idx) : y.point(idx - x.size());
        dict.push_back({TestFunction::cone, {p.begin(), p.end()}, 0.0, 0.0});
    }
    for (std::size_t k = 0; k < dict_size; ++k) {
        const double scale = kRidgeScales[k % std::size(kRidgeScales)];
        std::vector<double> w(d);
        double w2 = 0.0;
        for (auto& wi : w) {
            wi = scale * rng.gaussian();
            w2 += wi * wi;
        }
        const double phase = 2.0 * std::numbers::pi * rng.uniform();
        dict.push_back({TestFunction::ridge, std::move(w), phase, 0.5 / (1.0 + std::sqrt(w2))});
    }

    std::vector<double> gaps(dict.size());
    const auto nd = static_cast<long long>(dict.size());
#pragma omp parallel for schedule(static) if (execution == Execution::parallel)
    for (long long k = 0; k < nd; ++k) {
        const auto& f = dict[static_cast<std::size_t>(k)];
        gaps[static_cast<std::size_t>(k)] = std::abs(mean_of(f, x) - mean_of(f, y));
    }

    DistanceBracket b;
    b.lower = *std::max_element(gaps.begin(), gaps.end());
    b.lower_method = "dictionary(" + std::to_string(dict.size()) + ")";
    b.n_samples = std::min(x.size(), y.size());
    double w1 = 0.0;
    if (std::max(x.size(), y.size()) <= kExactAssignmentLimit) {
        w1 = exact_w1(x, y);
        b.upper_method = "exact_w1";
    } else {
        w1 = sliced_w1(x, y, kUpperSlicedDirections, rng, execution);
        b.upper_method = "sliced_w1(" + std::to_string(kUpperSlicedDirections) + ")";
    }
    b.upper = std::min(2.0, w1);
    // Sliced W1 under-estimates W1, so it can fall below a certified lower bound.
    b.upper = std::max(b.upper, b.lower);
    return b;
}

double ks_distance_1d(std::span<const double> x, std::span<const double> y) {
    require_nonempty(x, "ks_distance_1d");
    require_nonempty(y, "ks_distance_1d");
    std::vector<double> a(x.begin(), x.end()), b(y.begin(), y.end());
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double sup = 0.0;
    while (i < a.size() || j < b.size()) {
        double t;
        if (j == b.size() || (i < a.size() && a[i] <= b[j])) {
            t = a[i];
        } else {
            t = b[j];
        }
        while (i < a.size() && a[i] <= t) ++i;
        while (j < b.size() && b[j] <= t) ++j;
        sup = std::max(sup, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return sup;
}

EmpiricalMeasure checkpoint_measure(const SdeEnsemble& e, double tau) {
    const double taus[] = {tau};
    return path_measure(e, taus);
}

EmpiricalMeasure path_measure(const SdeEnsemble& e, std::span<const double> taus) {
    if (taus.empty()) throw InvalidArgument("path_measure: no checkpoints requested");
    std::vector<std::size_t> idx;
    for (double tau : taus) {
        const auto c = e.checkpoint_index(tau);
        if (!c) throw InvalidArgument("missing checkpoint tau = " + std::to_string(tau));
        idx.push_back(*c);
    }
    std::vector<double> flat;
    for (std::size_t t = 0; t < e.size(); ++t) {
        if (e.flagged(t)) continue;
        for (auto c : idx) {
            for (const auto& z : e.state(t, c)) {
                flat.push_back(z.real());
                flat.push_back(z.imag());
            }
        }
    }
    if (flat.empty()) throw NumericalError("every trajectory was flagged");
    return {2 * e.dim() * idx.size(), std::move(flat)};
}

EmpiricalMeasure action_pushforward(const SdeEnsemble& e, double tau) {
    const auto c = e.checkpoint_index(tau);
    if (!c) throw InvalidArgument("missing checkpoint tau = " + std::to_string(tau));
    std::vector<double> flat;
    for (std::size_t t = 0; t < e.size(); ++t) {
        if (e.flagged(t)) continue;
        const auto act = actions(e.state(t, *c));
        flat.insert(flat.end(), act.begin(), act.end());
    }
    if (flat.empty()) throw NumericalError("every trajectory was flagged");
    return {e.dim(), std::move(flat)};
}

EmpiricalMeasure action_measure(const ActionEnsemble& e, double tau) {
    const auto c = e.checkpoint_index(tau);
    if (!c) throw InvalidArgument("missing checkpoint tau = " + std::to_string(tau));
    std::vector<double> flat;
    for (std::size_t t = 0; t < e.size(); ++t) {
        if (e.flagged(t)) continue;
        const auto s = e.state(t, *c);
        flat.insert(flat.end(), s.begin(), s.end());
    }
    if (flat.empty()) throw NumericalError("every trajectory was flagged");
    return {e.dim(), std::move(flat)};
}

double marginal_w1(const EmpiricalMeasure& x, const EmpiricalMeasure& y) {
    require_same_dimension(x.dim(), y.dim(), "marginal_w1");
    double m = 0.0;
    for (std::size_t k = 0; k < x.dim(); ++k) m = std::max(m, wasserstein1_1d(x.coordinate(k), y.coordinate(k)));
    return m;
}

}  // namespace resavg
