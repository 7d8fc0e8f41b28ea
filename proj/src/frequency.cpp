#include "resavg/frequency.hpp"

#include "resavg/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

namespace resavg {

namespace {

constexpr double kIntegerTol = 1e-12;
constexpr int kRelationBound = 20;
constexpr double kRelationTol = 1e-9;
constexpr std::size_t kMaxRelationHalf = 3'000'000;

struct Fraction {
    long long p = 0;
    long long q = 1;
};

// First continued-fraction convergent of x within kIntegerTol (relative) whose
// denominator stays below max_den.
bool rational_fit(double x, long long max_den, Fraction& out) {
    const double target_tol = kIntegerTol * std::max(1.0, std::abs(x));
    long double rest = x;
    long long p_prev = 1, q_prev = 0;
    long long p_cur = static_cast<long long>(std::floor(rest));
    long long q_cur = 1;
    for (int iter = 0; iter < 64; ++iter) {
        if (std::abs(x - static_cast<double>(p_cur) / static_cast<double>(q_cur)) <= target_tol) {
            out = {p_cur, q_cur};
            return true;
        }
        const long double frac = rest - std::floor(rest);
        if (frac < 1e-18L) {
            break;
        }
        rest = 1.0L / frac;
        const long long a = static_cast<long long>(std::floor(rest));
        const long long p_next = a * p_cur + p_prev;
        const long long q_next = a * q_cur + q_prev;
        if (q_next > max_den || q_next <= 0) {
            break;
        }
        p_prev = p_cur;
        q_prev = q_cur;
        p_cur = p_next;
        q_cur = q_next;
    }
    return false;
}

}  // namespace

std::string_view to_string(ResonanceClass cls) {
    switch (cls) {
        case ResonanceClass::completely_resonant: return "completely_resonant";
        case ResonanceClass::non_resonant: return "non_resonant";
        case ResonanceClass::general: return "general";
    }
    return "general";
}

ResonanceClass resonance_class_from_string(std::string_view text) {
    if (text == "completely_resonant") return ResonanceClass::completely_resonant;
    if (text == "non_resonant") return ResonanceClass::non_resonant;
    if (text == "general") return ResonanceClass::general;
    throw InvalidArgument("unknown resonance class '" + std::string(text) + "'");
}

double common_base_frequency(std::span<const double> lambdas, long long max_denominator) {
    if (lambdas.empty()) {
        return 0.0;
    }
    const double ref = lambdas[0];
    std::vector<Fraction> fits(lambdas.size());
    long long lcm = 1;
    for (std::size_t j = 0; j < lambdas.size(); ++j) {
        if (!rational_fit(lambdas[j] / ref, max_denominator, fits[j])) {
            return 0.0;
        }
        lcm = std::lcm(lcm, fits[j].q);
        if (lcm > 1'000'000'000'000LL) {
            return 0.0;
        }
    }
    long long g = 0;
    for (const auto& f : fits) {
        g = std::gcd(g, std::llabs(f.p * (lcm / f.q)));
    }
    if (g == 0) {
        return 0.0;
    }
    const double base = std::abs(ref) * static_cast<double>(g) / static_cast<double>(lcm);
    for (double l : lambdas) {
        const double ratio = l / base;
        if (std::abs(ratio - std::round(ratio)) > kIntegerTol * std::max(1.0, std::abs(ratio))) {
            return 0.0;
        }
    }
    return base;
}

std::vector<int> find_integer_relation(std::span<const double> lambdas, int bound, double tol,
                                       bool* searched) {
    const std::size_t n = lambdas.size();
    const std::size_t h1 = n / 2;
    const std::size_t h2 = n - h1;
    const std::size_t width = static_cast<std::size_t>(2 * bound + 1);
    auto count_for = [&](std::size_t len) {
        std::size_t c = 1;
        for (std::size_t i = 0; i < len; ++i) {
            if (c > kMaxRelationHalf / width) return kMaxRelationHalf + 1;
            c *= width;
        }
        return c;
    };
    const std::size_t c1 = count_for(h1);
    const std::size_t c2 = count_for(h2);
    if (searched) *searched = c1 <= kMaxRelationHalf && c2 <= kMaxRelationHalf;
    if (c1 > kMaxRelationHalf || c2 > kMaxRelationHalf) {
        return {};
    }

    auto decode = [&](std::size_t code, std::size_t offset, std::size_t len, std::vector<int>& m) {
        for (std::size_t i = 0; i < len; ++i) {
            m[offset + i] = static_cast<int>(code % width) - bound;
            code /= width;
        }
    };
    auto partial_sum = [&](std::size_t code, std::size_t offset, std::size_t len) {
        double s = 0.0;
        for (std::size_t i = 0; i < len; ++i) {
            s += (static_cast<int>(code % width) - bound) * lambdas[offset + i];
            code /= width;
        }
        return s;
    };

    // Index of the all-zero combination in each half.
    auto zero_code = [&](std::size_t len) {
        std::size_t code = 0, mult = 1;
        for (std::size_t i = 0; i < len; ++i) {
            code += static_cast<std::size_t>(bound) * mult;
            mult *= width;
        }
        return code;
    };
    const std::size_t zero1 = zero_code(h1);
    const std::size_t zero2 = zero_code(h2);

    std::vector<std::pair<double, std::size_t>> left(c1);
    for (std::size_t code = 0; code < c1; ++code) {
        left[code] = {partial_sum(code, 0, h1), code};
    }
    std::sort(left.begin(), left.end());

    for (std::size_t code = 0; code < c2; ++code) {
        const double s2 = partial_sum(code, h1, h2);
        auto it = std::lower_bound(left.begin(), left.end(), std::make_pair(-s2 - tol, std::size_t{0}));
        for (; it != left.end() && it->first <= -s2 + tol; ++it) {
            if (it->second == zero1 && code == zero2) {
                continue;
            }
            std::vector<int> m(n);
            decode(it->second, 0, h1, m);
            decode(code, h1, h2, m);
            return m;
        }
    }
    return {};
}

FrequencySpectrum::FrequencySpectrum(std::vector<double> lambdas, ResonanceClass declared)
    : lambdas_(std::move(lambdas)), class_(declared), declared_(true) {
    if (lambdas_.empty()) {
        throw InvalidArgument("frequency vector must be nonempty");
    }
    for (double l : lambdas_) {
        if (!std::isfinite(l)) {
            throw InvalidArgument("frequency must be finite");
        }
        if (l == 0.0) {
            throw InvalidArgument("frequency must be nonzero");
        }
    }
    switch (class_) {
        case ResonanceClass::completely_resonant:
            base_ = common_base_frequency(lambdas_);
            if (base_ == 0.0) {
                throw InvalidArgument(
                    "frequencies declared completely resonant are not integer multiples of a common "
                    "base frequency");
            }
            break;
        case ResonanceClass::non_resonant: {
            bool searched = false;
            auto rel = find_integer_relation(lambdas_, kRelationBound, kRelationTol, &searched);
            if (!searched) {
                warnings_.emplace_back("integer-relation search skipped for dimension " +
                                       std::to_string(lambdas_.size()));
            } else if (!rel.empty()) {
                std::ostringstream os;
                os << "frequencies declared non-resonant satisfy sum m_j lambda_j ~ 0 with m = (";
                for (std::size_t i = 0; i < rel.size(); ++i) {
                    os << (i ? ", " : "") << rel[i];
                }
                os << ")";
                warnings_.push_back(os.str());
            }
            break;
        }
        case ResonanceClass::general:
            base_ = common_base_frequency(lambdas_);
            break;
    }
}

FrequencySpectrum FrequencySpectrum::infer(std::vector<double> lambdas) {
    const double base = common_base_frequency(lambdas);
    FrequencySpectrum s(std::move(lambdas), base > 0.0 ? ResonanceClass::completely_resonant
                                                       : ResonanceClass::general);
    s.declared_ = false;
    return s;
}

double FrequencySpectrum::period() const {
    if (base_ <= 0.0) {
        throw InvalidArgument("period is defined only for completely resonant frequencies");
    }
    return 2.0 * std::numbers::pi / base_;
}

double FrequencySpectrum::max_abs() const noexcept {
    double m = 0.0;
    for (double l : lambdas_) m = std::max(m, std::abs(l));
    return m;
}

double FrequencySpectrum::min_abs() const noexcept {
    double m = std::abs(lambdas_.front());
    for (double l : lambdas_) m = std::min(m, std::abs(l));
    return m;
}

std::vector<double> FrequencySpectrum::scaled(double t) const {
    std::vector<double> out(lambdas_.size());
    for (std::size_t j = 0; j < out.size(); ++j) out[j] = t * lambdas_[j];
    return out;
}

}  // namespace resavg
