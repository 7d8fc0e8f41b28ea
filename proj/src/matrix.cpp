#include "resavg/matrix.hpp"

#include "resavg/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace resavg {

namespace {
constexpr double kJacobiTol = 1e-13;
constexpr int kJacobiMaxSweeps = 64;
}  // namespace

CMatrix adjoint(const CMatrix& m) {
    CMatrix out(m.cols(), m.rows());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) out(j, i) = std::conj(m(i, j));
    return out;
}

RMatrix transpose(const RMatrix& m) {
    RMatrix out(m.cols(), m.rows());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) out(j, i) = m(i, j);
    return out;
}

template <typename T>
static Matrix<T> multiply(const Matrix<T>& a, const Matrix<T>& b) {
    if (a.cols() != b.rows()) {
        throw DimensionError("matrix product: inner dimensions differ");
    }
    Matrix<T> out(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const T aik = a(i, k);
            for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
        }
    return out;
}

CMatrix operator*(const CMatrix& a, const CMatrix& b) { return multiply(a, b); }
RMatrix operator*(const RMatrix& a, const RMatrix& b) { return multiply(a, b); }

CMatrix operator+(const CMatrix& a, const CMatrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw DimensionError("matrix sum: shapes differ");
    }
    CMatrix out = a;
    for (std::size_t i = 0; i < out.data().size(); ++i) out.data()[i] += b.data()[i];
    return out;
}

CMatrix operator*(Complex s, const CMatrix& m) {
    CMatrix out = m;
    for (auto& x : out.data()) x *= s;
    return out;
}

RMatrix operator*(double s, const RMatrix& m) {
    RMatrix out = m;
    for (auto& x : out.data()) x *= s;
    return out;
}

void multiply_into(const CMatrix& m, std::span<const Complex> x, std::span<Complex> y) {
    for (std::size_t i = 0; i < m.rows(); ++i) {
        Complex acc{};
        const auto r = m.row(i);
        for (std::size_t j = 0; j < m.cols(); ++j) acc += r[j] * x[j];
        y[i] = acc;
    }
}

void multiply_into(const RMatrix& m, std::span<const double> x, std::span<double> y) {
    for (std::size_t i = 0; i < m.rows(); ++i) {
        double acc = 0.0;
        const auto r = m.row(i);
        for (std::size_t j = 0; j < m.cols(); ++j) acc += r[j] * x[j];
        y[i] = acc;
    }
}

double max_abs_diff(const CMatrix& a, const CMatrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw DimensionError("max_abs_diff: shapes differ");
    }
    double m = 0.0;
    for (std::size_t i = 0; i < a.data().size(); ++i) m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
    return m;
}

double max_abs_diff(const RMatrix& a, const RMatrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw DimensionError("max_abs_diff: shapes differ");
    }
    double m = 0.0;
    for (std::size_t i = 0; i < a.data().size(); ++i) m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
    return m;
}

double max_abs(const CMatrix& m) {
    double out = 0.0;
    for (const auto& x : m.data()) out = std::max(out, std::abs(x));
    return out;
}

CMatrix to_complex(const RMatrix& m) {
    CMatrix out(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.data().size(); ++i) out.data()[i] = m.data()[i];
    return out;
}

RMatrix realify(const CMatrix& m) {
    RMatrix out(2 * m.rows(), 2 * m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) {
            const double p = m(i, j).real();
            const double q = m(i, j).imag();
            out(2 * i, 2 * j) = p;
            out(2 * i, 2 * j + 1) = -q;
            out(2 * i + 1, 2 * j) = q;
            out(2 * i + 1, 2 * j + 1) = p;
        }
    return out;
}

bool is_hermitian(const CMatrix& m, double tol) {
    if (!m.square()) return false;
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = i; j < m.cols(); ++j)
            if (std::abs(m(i, j) - std::conj(m(j, i))) > tol) return false;
    return true;
}

HermitianEigen hermitian_eigen(const CMatrix& input) {
    if (!input.square()) {
        throw DimensionError("hermitian_eigen: matrix is not square");
    }
    const std::size_t n = input.rows();
    CMatrix a = input;
    // Symmetrize so that round-off asymmetry in the input does not leak.
    for (std::size_t i = 0; i < n; ++i) {
        a(i, i) = a(i, i).real();
        for (std::size_t j = i + 1; j < n; ++j) {
            const Complex v = 0.5 * (a(i, j) + std::conj(a(j, i)));
            a(i, j) = v;
            a(j, i) = std::conj(v);
        }
    }
    CMatrix v = CMatrix::identity(n);

    double frob = 0.0;
    for (const auto& x : a.data()) frob += std::norm(x);
    frob = std::sqrt(frob);
    const double threshold = kJacobiTol * std::max(frob, 1e-300);

    int sweep = 0;
    for (; sweep < kJacobiMaxSweeps; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off += 2.0 * std::norm(a(p, q));
        if (std::sqrt(off) <= threshold) break;

        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const Complex apq = a(p, q);
                const double mag = std::abs(apq);
                if (mag == 0.0) continue;
                const Complex e = apq / mag;
                const double app = a(p, p).real();
                const double aqq = a(q, q).real();
                const double theta = (aqq - app) / (2.0 * mag);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                const Complex ce = std::conj(e);

                // A <- A U, V <- V U with U = diag(1, conj(e)) * [[c, s], [-s, c]] on (p, q).
                for (std::size_t k = 0; k < n; ++k) {
                    const Complex akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * ce * akq;
                    a(k, q) = s * akp + c * ce * akq;
                    const Complex vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - s * ce * vkq;
                    v(k, q) = s * vkp + c * ce * vkq;
                }
                // A <- U^* A
                for (std::size_t k = 0; k < n; ++k) {
                    const Complex apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * e * aqk;
                    a(q, k) = s * apk + c * e * aqk;
                }
                a(p, q) = 0.0;
                a(q, p) = 0.0;
                a(p, p) = a(p, p).real();
                a(q, q) = a(q, q).real();
            }
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t i, std::size_t j) { return a(i, i).real() < a(j, j).real(); });
    HermitianEigen out;
    out.sweeps = sweep;
    out.values.resize(n);
    out.vectors = CMatrix(n, n);
    for (std::size_t k = 0; k < n; ++k) {
        out.values[k] = a(order[k], order[k]).real();
        for (std::size_t i = 0; i < n; ++i) out.vectors(i, k) = v(i, order[k]);
    }
    return out;
}

HermitianEigen symmetric_eigen(const RMatrix& a) { return hermitian_eigen(to_complex(a)); }

ComplexState solve(CMatrix m, ComplexState rhs) {
    const std::size_t n = m.rows();
    if (!m.square() || rhs.size() != n) throw DimensionError("solve: shapes do not match");
    const double scale = std::max(max_abs(m), 1e-300);
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r) {
            if (std::abs(m(r, col)) > std::abs(m(piv, col))) piv = r;
        }
        if (std::abs(m(piv, col)) <= 1e-14 * scale) throw NumericalError("solve: matrix is singular");
        if (piv != col) {
            for (std::size_t c = 0; c < n; ++c) std::swap(m(piv, c), m(col, c));
            std::swap(rhs[piv], rhs[col]);
        }
        for (std::size_t r = col + 1; r < n; ++r) {
            const Complex f = m(r, col) / m(col, col);
            if (f == Complex{}) continue;
            for (std::size_t c = col; c < n; ++c) m(r, c) -= f * m(col, c);
            rhs[r] -= f * rhs[col];
        }
    }
    ComplexState x(n);
    for (std::size_t i = n; i-- > 0;) {
        Complex acc = rhs[i];
        for (std::size_t c = i + 1; c < n; ++c) acc -= m(i, c) * x[c];
        x[i] = acc / m(i, i);
    }
    return x;
}

}  // namespace resavg
