#include "resavg/complexcore.hpp"

#include "resavg/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace resavg {

ScenarioError::ScenarioError(std::vector<std::string> problems_in)
    : Error([&] {
          std::string msg = "invalid scenario:";
          for (const auto& p : problems_in) {
              msg += "\n  - " + p;
          }
          return msg;
      }()),
      problems(std::move(problems_in)) {}

void require_same_dimension(std::size_t expected, std::size_t actual, const char* what) {
    if (expected != actual) {
        throw DimensionError(std::string(what) + ": dimension mismatch (expected " +
                             std::to_string(expected) + ", got " + std::to_string(actual) + ")");
    }
}

ComplexState rotate(std::span<const double> w, std::span<const Complex> z) {
    require_same_dimension(z.size(), w.size(), "rotate");
    ComplexState out(z.size());
    for (std::size_t j = 0; j < z.size(); ++j) {
        out[j] = std::polar(1.0, w[j]) * z[j];
    }
    return out;
}

RealVector actions(std::span<const Complex> z) {
    RealVector out(z.size());
    std::transform(z.begin(), z.end(), out.begin(), [](Complex c) { return 0.5 * std::norm(c); });
    return out;
}

RealVector angles(std::span<const Complex> z) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    RealVector out(z.size());
    for (std::size_t j = 0; j < z.size(); ++j) {
        if (z[j] == Complex{}) {
            out[j] = 0.0;
            continue;
        }
        double phi = std::atan2(z[j].imag(), z[j].real());
        if (phi < 0.0) {
            phi += two_pi;
        }
        if (phi >= two_pi) {
            phi = 0.0;
        }
        out[j] = phi;
    }
    return out;
}

double inner(std::span<const Complex> x, std::span<const Complex> y) {
    require_same_dimension(x.size(), y.size(), "inner");
    double acc = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
        acc += (x[j] * std::conj(y[j])).real();
    }
    return acc;
}

double norm(std::span<const Complex> z) {
    double acc = 0.0;
    for (const auto& c : z) {
        acc += std::norm(c);
    }
    return std::sqrt(acc);
}

bool all_finite(std::span<const Complex> z) {
    return std::all_of(z.begin(), z.end(), [](Complex c) {
        return std::isfinite(c.real()) && std::isfinite(c.imag());
    });
}

RealVector decomplexify(std::span<const Complex> z) {
    RealVector out(2 * z.size());
    for (std::size_t j = 0; j < z.size(); ++j) {
        out[2 * j] = z[j].real();
        out[2 * j + 1] = z[j].imag();
    }
    return out;
}

ComplexState complexify(std::span<const double> x) {
    if (x.size() % 2 != 0) {
        throw DimensionError("complexify: odd real dimension");
    }
    ComplexState out(x.size() / 2);
    for (std::size_t j = 0; j < out.size(); ++j) {
        out[j] = {x[2 * j], x[2 * j + 1]};
    }
    return out;
}

void SampledPath::validate() const {
    if (times.size() != states.size()) {
        throw DimensionError("SampledPath: times and states differ in length");
    }
    if (!times.empty() && times.front() != 0.0) {
        throw InvalidArgument("SampledPath: first time must be 0");
    }
    for (std::size_t i = 1; i < times.size(); ++i) {
        if (!(times[i] > times[i - 1])) {
            throw InvalidArgument("SampledPath: times must be strictly increasing");
        }
    }
}

double holder_norm(const SampledPath& path, double alpha) {
    if (!(alpha > 0.0 && alpha <= 1.0)) {
        throw InvalidArgument("holder_norm: alpha must lie in (0, 1]");
    }
    if (path.states.size() < 2 || path.times.size() != path.states.size()) {
        throw InvalidArgument("holder_norm: need at least two samples");
    }
    path.validate();
    const std::size_t m = path.states.size();
    double sup = 0.0;
    for (const auto& s : path.states) {
        sup = std::max(sup, norm(s));
    }
    double semi = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const auto& si = path.states[i];
        for (std::size_t j = i + 1; j < m; ++j) {
            const auto& sj = path.states[j];
            double d2 = 0.0;
            for (std::size_t k = 0; k < si.size(); ++k) {
                d2 += std::norm(sj[k] - si[k]);
            }
            const double ratio = std::sqrt(d2) / std::pow(path.times[j] - path.times[i], alpha);
            semi = std::max(semi, ratio);
        }
    }
    return sup + semi;
}

}  // namespace resavg
