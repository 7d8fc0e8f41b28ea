#pragma once

#include "resavg/complexcore.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace resavg {

/// Small dense row-major matrix. Dimensions here are the state dimension n
/// (or 2n), so no blocking or expression templates.
template <typename T>
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, T fill = T{})
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = T{1};
        return m;
    }

    [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
    [[nodiscard]] std::size_t cols() const noexcept { return cols_; }
    [[nodiscard]] bool square() const noexcept { return rows_ == cols_; }

    T& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    const T& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    [[nodiscard]] std::span<T> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
    [[nodiscard]] std::span<const T> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

    [[nodiscard]] std::span<T> data() noexcept { return data_; }
    [[nodiscard]] std::span<const T> data() const noexcept { return data_; }

    bool operator==(const Matrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<T> data_;
};

using CMatrix = Matrix<Complex>;
using RMatrix = Matrix<double>;

[[nodiscard]] CMatrix adjoint(const CMatrix& m);
[[nodiscard]] RMatrix transpose(const RMatrix& m);
[[nodiscard]] CMatrix operator*(const CMatrix& a, const CMatrix& b);
[[nodiscard]] RMatrix operator*(const RMatrix& a, const RMatrix& b);
[[nodiscard]] CMatrix operator+(const CMatrix& a, const CMatrix& b);
[[nodiscard]] CMatrix operator*(Complex s, const CMatrix& m);
[[nodiscard]] RMatrix operator*(double s, const RMatrix& m);

/// y = M x
void multiply_into(const CMatrix& m, std::span<const Complex> x, std::span<Complex> y);
void multiply_into(const RMatrix& m, std::span<const double> x, std::span<double> y);

[[nodiscard]] double max_abs_diff(const CMatrix& a, const CMatrix& b);
[[nodiscard]] double max_abs_diff(const RMatrix& a, const RMatrix& b);
[[nodiscard]] double max_abs(const CMatrix& m);

[[nodiscard]] CMatrix to_complex(const RMatrix& m);

/// Real 2n x 2m matrix of the R-linear map z -> M z on C^m ~ R^2m, with the
/// interleaved (Re, Im) coordinate order used by decomplexify.
[[nodiscard]] RMatrix realify(const CMatrix& m);

/// Solves M x = rhs by Gaussian elimination with partial pivoting. Throws
/// NumericalError when M is singular to working precision.
[[nodiscard]] ComplexState solve(CMatrix m, ComplexState rhs);

/// Hermitian within tol (entrywise, absolute).
[[nodiscard]] bool is_hermitian(const CMatrix& m, double tol);

struct HermitianEigen {
    std::vector<double> values;  // ascending
    CMatrix vectors;             // columns are eigenvectors
    int sweeps = 0;
};

/// Cyclic complex Jacobi. Stops when the off-diagonal Frobenius mass drops
/// below 1e-13 times the matrix scale, or after 64 sweeps.
[[nodiscard]] HermitianEigen hermitian_eigen(const CMatrix& a);

/// Symmetric real input, routed through the complex Jacobi solver.
[[nodiscard]] HermitianEigen symmetric_eigen(const RMatrix& a);

}  // namespace resavg
