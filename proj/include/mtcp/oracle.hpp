#pragma once

// Independent ground-truth solvers for small instances, used by tests and the
// acceptance suite. Both enumerate candidate active sets I (smallest
// cardinality first, then lexicographic) for the equivalent system
//   F_i(x) = 0 for i in I,   x_i = 0 for i not in I,
// and return the first candidate that is feasible for the complementarity
// problem. They share no code path with the iterative solvers beyond the LU
// kernel.

#include <cmath>
#include <stdexcept>
#include <vector>

#include "mtcp/linalg.hpp"
#include "mtcp/solver.hpp"
#include "mtcp/tensor.hpp"

namespace mtcp {

struct OracleSolution {
    RealVector x;
    IndexSet active_set;
    bool certified = false;
};

struct OracleFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

constexpr double kOracleFeasTol = 1e-10;

// Visit subsets of {0..n-1} ordered by cardinality, then lexicographically on
// the member list. Visitor returns true to stop.
template <class Visit>
void enumerate_index_sets(int n, Visit&& visit) {
    std::vector<int> comb;
    for (int card = 0; card <= n; ++card) {
        comb.resize(static_cast<std::size_t>(card));
        for (int i = 0; i < card; ++i) comb[static_cast<std::size_t>(i)] = i;
        for (;;) {
            if (visit(comb)) return;
            if (card == 0) break;
            int k = card - 1;
            while (k >= 0 && comb[static_cast<std::size_t>(k)] == n - card + k) --k;
            if (k < 0) break;
            ++comb[static_cast<std::size_t>(k)];
            for (int j = k + 1; j < card; ++j)
                comb[static_cast<std::size_t>(j)] = comb[static_cast<std::size_t>(j - 1)] + 1;
        }
    }
}

}  // namespace detail

/// Exhaustive LCP oracle: A x - b with A an (assumed) M-matrix, n <= 12.
inline OracleSolution lcp_enumerate(const DenseMatrix& A, const RealVector& b) {
    detail::require(A.n <= 12, "lcp_enumerate: n must be <= 12");
    detail::require(b.size() == static_cast<std::size_t>(A.n), "lcp_enumerate: length mismatch");
    const int n = A.n;
    OracleSolution sol;
    bool found = false;

    detail::enumerate_index_sets(n, [&](const std::vector<int>& members) {
        IndexSet I(members);
        RealVector x(static_cast<std::size_t>(n), 0.0);
        if (!I.empty()) {
            RealVector y;
            try {
                y = solve_principal(A, I, detail::subvector(b, I));
            } catch (const SingularSystemError&) {
                return false;
            }
            for (std::size_t k = 0; k < I.size(); ++k) {
                if (y[k] < -detail::kOracleFeasTol) return false;
                x[static_cast<std::size_t>(I[k])] = y[k];
            }
        }
        for (int i = 0; i < n; ++i) {
            if (I.contains(i)) continue;
            double f = -b[static_cast<std::size_t>(i)];
            for (int j = 0; j < n; ++j) f += A(i, j) * x[static_cast<std::size_t>(j)];
            if (f < -detail::kOracleFeasTol) return false;
        }
        sol.x = std::move(x);
        sol.active_set = std::move(I);
        sol.certified = true;
        found = true;
        return true;
    });

    if (!found)
        throw OracleFailure("lcp_enumerate: no feasible index set (input is not an M-matrix LCP?)");
    return sol;
}

namespace detail {

// Jacobian of z -> S z^{m-1} for a dense subtensor S at the point z:
//   J[i][j] = sum over positions p of sum over tuples with i_p = j of
//             a_{i i2...im} * prod_{q != p} z_{i_q}.
inline DenseMatrix tensor_jacobian(const DenseTensor& S, const RealVector& z) {
    const int p = S.dim;
    DenseMatrix J(p);
    std::vector<int> digits(static_cast<std::size_t>(S.order - 1), 0);
    const std::size_t block = S.block_size();
    for (int i = 0; i < p; ++i) {
        const double* a = S.entries.data() + static_cast<std::size_t>(i) * block;
        std::fill(digits.begin(), digits.end(), 0);
        for (std::size_t t = 0; t < block; ++t) {
            if (a[t] != 0.0) {
                for (std::size_t pos = 0; pos < digits.size(); ++pos) {
                    double prod = a[t];
                    for (std::size_t q = 0; q < digits.size(); ++q)
                        if (q != pos) prod *= z[static_cast<std::size_t>(digits[q])];
                    J(i, digits[pos]) += prod;
                }
            }
            for (int k = S.order - 2; k >= 0; --k) {
                if (++digits[static_cast<std::size_t>(k)] < p) break;
                digits[static_cast<std::size_t>(k)] = 0;
            }
        }
    }
    return J;
}

inline double inf_norm(const RealVector& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

// Damped Newton on G(z) = S z^{m-1} - b_I. Returns true on ||G||_inf <= tol.
inline bool damped_newton(const DenseTensor& S, const RealVector& bI, RealVector& z,
                          int max_iter, double tol) {
    RealVector g = contract_power(S, z);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] -= bI[i];
    double gnorm = inf_norm(g);
    for (int it = 0; it < max_iter; ++it) {
        if (gnorm <= tol) return true;
        RealVector step;
        try {
            step = LuFactors::factor(tensor_jacobian(S, z)).solve(g);
        } catch (const SingularSystemError&) {
            return false;
        }
        double t = 1.0;
        for (;;) {
            RealVector trial = z;
            for (std::size_t i = 0; i < trial.size(); ++i) trial[i] -= t * step[i];
            RealVector gt = contract_power(S, trial);
            for (std::size_t i = 0; i < gt.size(); ++i) gt[i] -= bI[i];
            const double gtnorm = inf_norm(gt);
            if (gtnorm < (1.0 - 1e-4 * t) * gnorm || gtnorm <= tol) {
                z = std::move(trial);
                g = std::move(gt);
                gnorm = gtnorm;
                break;
            }
            t *= 0.5;
            if (t < 1e-12) return false;
        }
    }
    return gnorm <= tol;
}

}  // namespace detail

/// Brute-force TCP oracle for n <= 4, m <= 4. The lower-dimensional tensor
/// equation on each candidate set is solved by damped Newton started from the
/// root-lifted linear estimate A_I^{-1} b_I.
inline OracleSolution tcp_brute_small(const ProblemInstance& p) {
    detail::require(p.tensor.dim <= 4 && p.tensor.order <= 4,
                    "tcp_brute_small: requires n <= 4 and m <= 4");
    const int n = p.tensor.dim;
    const int m = p.tensor.order;
    const MajorizationSplit split = majorization_split(p.tensor);
    const DenseMatrix A(n, split.matrix);
    OracleSolution sol;
    bool found = false;

    detail::enumerate_index_sets(n, [&](const std::vector<int>& members) {
        IndexSet I(members);
        RealVector x(static_cast<std::size_t>(n), 0.0);
        if (!I.empty()) {
            const DenseTensor sub = principal_subtensor(p.tensor, I);
            const RealVector bI = detail::subvector(p.rhs, I);
            RealVector z(I.size(), 0.0);
            try {
                RealVector y = solve_principal(A, I, bI);
                for (std::size_t k = 0; k < z.size(); ++k)
                    z[k] = detail::root_1_over(std::max(y[k], 0.0), m);
            } catch (const SingularSystemError&) {
                return false;
            }
            if (!detail::damped_newton(sub, bI, z, 200, 1e-12)) return false;
            for (std::size_t k = 0; k < I.size(); ++k) {
                if (z[k] < -detail::kOracleFeasTol) return false;
                x[static_cast<std::size_t>(I[k])] = z[k];
            }
        }
        const RealVector f = eval_F(p, x);
        for (int i = 0; i < n; ++i) {
            if (I.contains(i)) continue;
            if (f[static_cast<std::size_t>(i)] < -detail::kOracleFeasTol) return false;
        }
        sol.x = std::move(x);
        sol.active_set = std::move(I);
        sol.certified = true;
        found = true;
        return true;
    });

    if (!found) throw OracleFailure("tcp_brute_small: no candidate set produced a solution");
    return sol;
}

}  // namespace mtcp
