#pragma once

// Direct solution of the principal-submatrix systems A_I y = rhs that every
// subproblem reduces to, plus Z/M-matrix structure certificates.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "mtcp/tensor.hpp"

namespace mtcp {

struct DenseMatrix {
    int n = 0;
    std::vector<double> entries;  // row-major

    DenseMatrix() = default;
    explicit DenseMatrix(int size)
        : n(size), entries(static_cast<std::size_t>(size) * static_cast<std::size_t>(size), 0.0) {
        detail::require(size >= 0, "DenseMatrix: negative size");
    }
    DenseMatrix(int size, std::vector<double> vals) : n(size), entries(std::move(vals)) {
        detail::require(entries.size() ==
                            static_cast<std::size_t>(size) * static_cast<std::size_t>(size),
                        "DenseMatrix: entry count must be n*n");
    }

    double& operator()(int i, int j) {
        return entries[static_cast<std::size_t>(i) * static_cast<std::size_t>(n) +
                       static_cast<std::size_t>(j)];
    }
    double operator()(int i, int j) const {
        return entries[static_cast<std::size_t>(i) * static_cast<std::size_t>(n) +
                       static_cast<std::size_t>(j)];
    }

    /// Principal submatrix on I, remapped to |I| x |I| in the order of I.
    DenseMatrix principal(const IndexSet& I) const {
        const int p = static_cast<int>(I.size());
        DenseMatrix S(p);
        for (int r = 0; r < p; ++r)
            for (int c = 0; c < p; ++c)
                S(r, c) = (*this)(I[static_cast<std::size_t>(r)], I[static_cast<std::size_t>(c)]);
        return S;
    }
};

struct SingularSystemError : std::runtime_error {
    int pivot_index;
    explicit SingularSystemError(int idx)
        : std::runtime_error("numerically singular pivot at index " + std::to_string(idx)),
          pivot_index(idx) {}
};

/// LU factorization with partial (row) pivoting of a small dense matrix.
/// Pivot magnitudes below 1e-14 * ||A||_inf are treated as singular; the
/// principal submatrices of a nonsingular M-matrix never get near that.
class LuFactors {
public:
    static LuFactors factor(DenseMatrix A) {
        LuFactors f;
        const int n = A.n;
        f.perm_.resize(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) f.perm_[static_cast<std::size_t>(i)] = i;

        double norm_inf = 0.0;
        for (int i = 0; i < n; ++i) {
            double row = 0.0;
            for (int j = 0; j < n; ++j) row += std::abs(A(i, j));
            norm_inf = std::max(norm_inf, row);
        }
        const double tiny = 1e-14 * norm_inf;

        for (int k = 0; k < n; ++k) {
            int piv = k;
            for (int i = k + 1; i < n; ++i)
                if (std::abs(A(i, k)) > std::abs(A(piv, k))) piv = i;
            if (!(std::abs(A(piv, k)) > tiny)) throw SingularSystemError(k);
            if (piv != k) {
                for (int j = 0; j < n; ++j) std::swap(A(k, j), A(piv, j));
                std::swap(f.perm_[static_cast<std::size_t>(k)],
                          f.perm_[static_cast<std::size_t>(piv)]);
            }
            for (int i = k + 1; i < n; ++i) {
                const double mult = A(i, k) / A(k, k);
                A(i, k) = mult;
                for (int j = k + 1; j < n; ++j) A(i, j) -= mult * A(k, j);
            }
        }
        f.lu_ = std::move(A);
        return f;
    }

    RealVector solve(const RealVector& rhs) const {
        const int n = lu_.n;
        detail::require(rhs.size() == static_cast<std::size_t>(n),
                        "LuFactors::solve: rhs length mismatch");
        RealVector y(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {  // forward, unit lower triangle
            double acc = rhs[static_cast<std::size_t>(perm_[static_cast<std::size_t>(i)])];
            for (int j = 0; j < i; ++j) acc -= lu_(i, j) * y[static_cast<std::size_t>(j)];
            y[static_cast<std::size_t>(i)] = acc;
        }
        for (int i = n - 1; i >= 0; --i) {  // backward
            double acc = y[static_cast<std::size_t>(i)];
            for (int j = i + 1; j < n; ++j) acc -= lu_(i, j) * y[static_cast<std::size_t>(j)];
            y[static_cast<std::size_t>(i)] = acc / lu_(i, i);
        }
        return y;
    }

    int size() const { return lu_.n; }

private:
    DenseMatrix lu_;
    std::vector<int> perm_;
};

/// Solve A_I y = rhs for the principal submatrix on I.
inline RealVector solve_principal(const DenseMatrix& A, const IndexSet& I,
                                  const RealVector& rhs) {
    detail::require(!I.empty(), "solve_principal: empty index set");
    detail::require(rhs.size() == I.size(), "solve_principal: rhs length must equal |I|");
    for (int i : I) detail::require(i < A.n, "solve_principal: index out of range");
    return LuFactors::factor(A.principal(I)).solve(rhs);
}

/// Z-matrix: all off-diagonal entries nonpositive.
inline bool z_matrix_check(const DenseMatrix& A) {
    for (int i = 0; i < A.n; ++i)
        for (int j = 0; j < A.n; ++j)
            if (i != j && A(i, j) > 0.0) return false;
    return true;
}

/// Sufficient certificate for nonsingular-M structure: Z-matrix with A e > 0
/// componentwise. A false return is inconclusive.
inline bool m_matrix_certificate(const DenseMatrix& A) {
    if (!z_matrix_check(A)) return false;
    for (int i = 0; i < A.n; ++i) {
        double row = 0.0;
        for (int j = 0; j < A.n; ++j) row += A(i, j);
        if (!(row > 0.0)) return false;
    }
    return true;
}

}  // namespace mtcp
