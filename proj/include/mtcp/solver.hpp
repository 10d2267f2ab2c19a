#pragma once

// The two sequential lower-dimensional linear-equation solvers for the
// M-tensor complementarity problem
//
//     x >= 0,   F(x) = A x^{m-1} - b >= 0,   x^T F(x) = 0.
//
// ld_leqa: at each iteration solve, on the active set I_k = {i | F_i(x) < 0},
//
//     A_{I_k} y = A_{I_k} (x_{I_k})^[m-1] - alpha * F_{I_k}(x),
//
// then x_{I_k} <- y^[1/(m-1)], zero off I_k. Iterates and index sets grow
// monotonically and the coefficient matrix freezes after finitely many steps.
//
// ld_a_newton: same skeleton with the right-hand side shifted by a clamped
// correction eps that pushes the step toward the Newton step for F_{I}(x) = 0.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "mtcp/linalg.hpp"
#include "mtcp/tensor.hpp"

namespace mtcp {

struct ProblemInstance {
    DenseTensor tensor;
    RealVector rhs;
    struct Meta {
        std::string generator = "unknown";
        std::uint64_t seed = 0;
        int m = 0;
        int n = 0;
    } meta;
    std::optional<RealVector> witness;  // interior solution used to build rhs, if known

    ProblemInstance(DenseTensor t, RealVector b) : tensor(std::move(t)), rhs(std::move(b)) {
        detail::require(rhs.size() == static_cast<std::size_t>(tensor.dim),
                        "ProblemInstance: rhs length must equal tensor dim");
        meta.m = tensor.order;
        meta.n = tensor.dim;
    }
};

enum class InitStrategy { zero, lower_dim_equation };
enum class SolveStatus { converged, iteration_cap, error };

inline const char* to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::converged: return "converged";
        case SolveStatus::iteration_cap: return "iteration_cap";
        default: return "error";
    }
}

struct SolverConfig {
    double alpha = 1.0;
    double eta = 1e-8;
    int max_iter = 1000;
    InitStrategy init_strategy = InitStrategy::zero;
    double rho_fallback = 0.5;
    int epsilon_resolve_cap = 1;
    bool strict_theory = false;   // restrict alpha to (0,1) as the convergence theory assumes
    bool record_detail = false;   // keep per-iteration x, F and eps clamps in the trace

    void validate() const {
        detail::require(alpha > 0.0 && alpha <= 1.0, "SolverConfig: alpha must lie in (0,1]");
        if (strict_theory)
            detail::require(alpha < 1.0, "SolverConfig: strict_theory requires alpha < 1");
        detail::require(eta > 0.0, "SolverConfig: eta must be positive");
        detail::require(max_iter >= 1, "SolverConfig: max_iter must be >= 1");
        detail::require(rho_fallback > 0.0 && rho_fallback < 1.0,
                        "SolverConfig: rho_fallback must lie in (0,1)");
        detail::require(epsilon_resolve_cap >= 1,
                        "SolverConfig: epsilon_resolve_cap must be >= 1");
    }
};

struct IterationRecord {
    int k = 0;
    IndexSet index_set;          // I_k used for this step
    double residual = 0.0;       // ||min{F(x^(k)), x^(k)}||_2
    int epsilon_resolves = 0;    // eps=0 re-solve cycles this iteration (ld_a_newton)

    // Filled only when SolverConfig::record_detail is set.
    RealVector iterate;          // x^(k)
    RealVector f_value;          // F(x^(k))
    RealVector eps;              // correction prepared for the next step, over next_index_set
    RealVector eps_lo;           // (1-alpha) F_{I_{k+1}}(x^(k+1))
    RealVector eps_hi;           // -alpha    F_{I_{k+1}}(x^(k+1))
};

struct SolveOutcome {
    RealVector x;
    SolveStatus status = SolveStatus::error;
    int iterations = 0;
    double final_residual = 0.0;
    std::vector<IterationRecord> trace;
    int index_set_updates = 0;       // #{k : I_{k+1} != I_k}
    int total_epsilon_resolves = 0;  // the K statistic
    double wall_time_s = 0.0;
    bool init_fallback = false;      // lower_dim_equation init fell back to zero
    std::string error_message;
};

inline RealVector eval_F(const ProblemInstance& p, const RealVector& x) {
    RealVector f = contract_power(p.tensor, x);
    for (std::size_t i = 0; i < f.size(); ++i) f[i] -= p.rhs[i];
    return f;
}

/// ||min{F, x}||_2 — zero exactly at complementarity points.
inline double residual(const RealVector& f_val, const RealVector& x) {
    detail::require(f_val.size() == x.size(), "residual: length mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double m = std::min(f_val[i], x[i]);
        acc += m * m;
    }
    return std::sqrt(acc);
}

struct InitialPoint {
    RealVector x;
    IndexSet index_set;
    bool fell_back_to_zero = false;
};

namespace detail {

inline RealVector subvector(const RealVector& v, const IndexSet& I) {
    RealVector s(I.size());
    for (std::size_t k = 0; k < I.size(); ++k)
        s[k] = v[static_cast<std::size_t>(I[k])];
    return s;
}

// A_I * (x_I)^[m-1] without forming the submatrix.
inline RealVector majorization_times_power(const DenseMatrix& A, const IndexSet& I,
                                           const RealVector& x, int m) {
    RealVector xp(I.size());
    for (std::size_t k = 0; k < I.size(); ++k)
        xp[k] = std::pow(x[static_cast<std::size_t>(I[k])], m - 1);
    RealVector out(I.size(), 0.0);
    for (std::size_t r = 0; r < I.size(); ++r) {
        double acc = 0.0;
        for (std::size_t c = 0; c < I.size(); ++c) acc += A(I[r], I[c]) * xp[c];
        out[r] = acc;
    }
    return out;
}

inline double root_1_over(double y, int m) {
    if (m == 2) return y;
    if (m == 3) return std::sqrt(y);
    return std::pow(y, 1.0 / (m - 1));
}

struct NegativeRootDomain : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Lift y = (x_I)^[m-1] back to a full iterate: x_I = y^[1/(m-1)], zero off I.
// Roundoff can push y a hair negative; anything past the tolerance means the
// subproblem was not the monotone one the theory describes.
inline RealVector lift_root(const RealVector& y, const IndexSet& I, int m, int n) {
    double ymax = 0.0;
    for (double v : y) ymax = std::max(ymax, std::abs(v));
    const double tol = 1e-10 * (1.0 + ymax);
    RealVector x(static_cast<std::size_t>(n), 0.0);
    for (std::size_t k = 0; k < I.size(); ++k) {
        double v = y[k];
        if (v < 0.0) {
            if (v < -tol)
                throw NegativeRootDomain("subproblem solution has negative component " +
                                         std::to_string(I[k]) + " = " + std::to_string(v));
            v = 0.0;
        }
        x[static_cast<std::size_t>(I[k])] = root_1_over(v, m);
    }
    return x;
}

// r_I(x) = 1/(m-1) (F_I(x) + b_I) - A_I (x_I)^[m-1], with F already evaluated.
inline RealVector r_value(const RealVector& f_val, const RealVector& b, const DenseMatrix& A,
                          const IndexSet& I, const RealVector& x, int m) {
    RealVector r = majorization_times_power(A, I, x, m);
    const double scale = 1.0 / (m - 1);
    for (std::size_t k = 0; k < I.size(); ++k) {
        const auto i = static_cast<std::size_t>(I[k]);
        r[k] = scale * (f_val[i] + b[i]) - r[k];
    }
    return r;
}

// Single-slot factorization cache: I_k is non-decreasing and freezes, so the
// previous factorization is the only one worth keeping.
class PrincipalLuCache {
public:
    explicit PrincipalLuCache(const DenseMatrix& A) : A_(A) {}

    RealVector solve(const IndexSet& I, const RealVector& rhs) {
        if (!lu_ || !(key_ == I)) {
            lu_ = LuFactors::factor(A_.principal(I));
            key_ = I;
        }
        return lu_->solve(rhs);
    }

private:
    const DenseMatrix& A_;
    IndexSet key_;
    std::optional<LuFactors> lu_;
};

}  // namespace detail

/// r_{I}(x) = 1/(m-1) (F_I(x) + b_I) - A_I (x_I)^[m-1].
inline RealVector compute_r(const ProblemInstance& p, const IndexSet& I, const RealVector& x) {
    detail::require(!I.empty(), "compute_r: empty index set");
    detail::require(x.size() == static_cast<std::size_t>(p.tensor.dim),
                    "compute_r: x length mismatch");
    const MajorizationSplit split = majorization_split(p.tensor);
    const DenseMatrix A(p.tensor.dim, split.matrix);
    return detail::r_value(eval_F(p, x), p.rhs, A, I, x, p.tensor.order);
}

/// Initial point and index set. Strategy zero: x0 = 0, I0 = {i | b_i > 0}.
/// Strategy lower_dim_equation: solve A_{I0} y = b_{I0}, lift the root, and
/// shrink by rho when the lifted point leaves no strictly infeasible
/// component to work on.
inline InitialPoint initial_point(const ProblemInstance& p, const SolverConfig& cfg) {
    InitialPoint ip;
    const auto n = static_cast<std::size_t>(p.tensor.dim);
    std::vector<int> pos;
    for (std::size_t i = 0; i < n; ++i)
        if (p.rhs[i] > 0.0) pos.push_back(static_cast<int>(i));
    IndexSet I0(std::move(pos));

    ip.x.assign(n, 0.0);
    if (I0.empty() || cfg.init_strategy == InitStrategy::zero) {
        ip.index_set = I0;
        return ip;
    }

    const MajorizationSplit split = majorization_split(p.tensor);
    const DenseMatrix A(p.tensor.dim, split.matrix);
    try {
        RealVector y = solve_principal(A, I0, detail::subvector(p.rhs, I0));
        for (double v : y)
            if (v < -1e-12) throw detail::NegativeRootDomain("initial equation solution negative");
        for (auto& v : y) v = std::max(v, 0.0);
        RealVector x0 = detail::lift_root(y, I0, p.tensor.order, p.tensor.dim);

        // Every positive component must sit strictly inside {F < 0}, or the
        // first update would zero it and break monotonicity; shrinking by rho
        // restores strict infeasibility on I0.
        auto needs_scaling = [&](const RealVector& x) {
            const RealVector f = eval_F(p, x);
            for (std::size_t i = 0; i < n; ++i)
                if (x[i] > 0.0 && f[i] >= 0.0) return true;
            return IndexSet::where_negative(f).empty();
        };
        if (needs_scaling(x0))
            for (auto& v : x0) v *= cfg.rho_fallback;
        if (needs_scaling(x0)) {  // degenerate beyond what one scaling fixes
            ip.index_set = I0;
            ip.fell_back_to_zero = true;
            return ip;
        }
        ip.x = std::move(x0);
        ip.index_set = IndexSet::where_negative(eval_F(p, ip.x));
        return ip;
    } catch (const std::exception&) {
        ip.x.assign(n, 0.0);
        ip.index_set = I0;
        ip.fell_back_to_zero = true;
        return ip;
    }
}

/// TCP solution test: x >= -tol, F(x) >= -tol, |x.F(x)| <= tol (1 + ||x|| ||F||).
inline bool verify_solution(const ProblemInstance& p, const RealVector& x, double tol) {
    detail::require(tol > 0.0, "verify_solution: tol must be positive");
    if (x.size() != static_cast<std::size_t>(p.tensor.dim)) return false;
    const RealVector f = eval_F(p, x);
    double xmin = 0.0, fmin = 0.0, dot = 0.0, xnorm = 0.0, fnorm = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        xmin = std::min(xmin, x[i]);
        fmin = std::min(fmin, f[i]);
        dot += x[i] * f[i];
        xnorm += x[i] * x[i];
        fnorm += f[i] * f[i];
    }
    return xmin >= -tol && fmin >= -tol &&
           std::abs(dot) <= tol * (1.0 + std::sqrt(xnorm) * std::sqrt(fnorm));
}

namespace detail {

struct LoopState {
    SolveOutcome out;
    RealVector x;
    RealVector f;
    IndexSet index_set;
    DenseMatrix A;
    std::chrono::steady_clock::time_point t0;
};

inline LoopState begin_solve(const ProblemInstance& p, const SolverConfig& cfg) {
    cfg.validate();
    LoopState s;
    s.t0 = std::chrono::steady_clock::now();
    const MajorizationSplit split = majorization_split(p.tensor);
    s.A = DenseMatrix(p.tensor.dim, split.matrix);
    InitialPoint ip = initial_point(p, cfg);
    s.out.init_fallback = ip.fell_back_to_zero;
    s.x = std::move(ip.x);
    s.index_set = std::move(ip.index_set);
    s.f = eval_F(p, s.x);
    return s;
}

inline SolveOutcome finish_solve(LoopState&& s) {
    s.out.x = std::move(s.x);
    s.out.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - s.t0).count();
    return std::move(s.out);
}

// Returns true when the outer loop should stop (converged / cap / dead end).
inline bool stop_check(LoopState& s, const SolverConfig& cfg, int k, double res) {
    if (res <= cfg.eta) {
        s.out.status = SolveStatus::converged;
        s.out.iterations = k;
        s.out.final_residual = res;
        return true;
    }
    if (k >= cfg.max_iter) {
        s.out.status = SolveStatus::iteration_cap;
        s.out.iterations = k;
        s.out.final_residual = res;
        return true;
    }
    if (s.index_set.empty()) {
        s.out.status = SolveStatus::error;
        s.out.iterations = k;
        s.out.final_residual = res;
        s.out.error_message = "index set empty but residual above tolerance";
        return true;
    }
    return false;
}

}  // namespace detail

/// Algorithm: sequential lower-dimensional linear-equation approach (LD-LEQA).
inline SolveOutcome ld_leqa(const ProblemInstance& p, const SolverConfig& cfg) {
    detail::LoopState s = detail::begin_solve(p, cfg);
    detail::PrincipalLuCache cache(s.A);
    const int m = p.tensor.order;

    for (int k = 0;; ++k) {
        const double res = residual(s.f, s.x);
        if (detail::stop_check(s, cfg, k, res)) break;
        try {
            RealVector rhs = detail::majorization_times_power(s.A, s.index_set, s.x, m);
            for (std::size_t j = 0; j < rhs.size(); ++j)
                rhs[j] -= cfg.alpha * s.f[static_cast<std::size_t>(s.index_set[j])];
            RealVector x_next =
                detail::lift_root(cache.solve(s.index_set, rhs), s.index_set, m, p.tensor.dim);
            RealVector f_next = eval_F(p, x_next);
            // The monotone closure of {i | F_i < 0}. With alpha < 1 the two
            // coincide (F stays strictly negative on I_k); at alpha = 1
            // roundoff can lift F_i to +0 on components carrying x_i > 0, and
            // dropping them would zero the component and cycle.
            IndexSet next_set = IndexSet::where_negative(f_next).union_with(s.index_set);

            IterationRecord rec;
            rec.k = k;
            rec.index_set = s.index_set;
            rec.residual = res;
            if (cfg.record_detail) {
                rec.iterate = s.x;
                rec.f_value = s.f;
            }
            s.out.trace.push_back(std::move(rec));
            if (!(next_set == s.index_set)) ++s.out.index_set_updates;
            s.x = std::move(x_next);
            s.f = std::move(f_next);
            s.index_set = std::move(next_set);
        } catch (const std::exception& e) {
            s.out.status = SolveStatus::error;
            s.out.iterations = k;
            s.out.final_residual = res;
            s.out.error_message = e.what();
            break;
        }
    }
    return detail::finish_solve(std::move(s));
}

/// Algorithm: sequential lower-dimensional approximate Newton approach
/// (LD-A-Newton). The first step coincides with ld_leqa (eps = 0).
inline SolveOutcome ld_a_newton(const ProblemInstance& p, const SolverConfig& cfg) {
    detail::LoopState s = detail::begin_solve(p, cfg);
    detail::PrincipalLuCache cache(s.A);
    const int m = p.tensor.order;
    RealVector eps(s.index_set.size(), 0.0);  // pinned to the current index set

    for (int k = 0;; ++k) {
        const double res = residual(s.f, s.x);
        if (detail::stop_check(s, cfg, k, res)) break;
        try {
            RealVector base = detail::majorization_times_power(s.A, s.index_set, s.x, m);
            RealVector x_bar, f_bar;
            int resolves = 0;
            for (;;) {
                RealVector rhs = base;
                for (std::size_t j = 0; j < rhs.size(); ++j)
                    rhs[j] -= cfg.alpha * s.f[static_cast<std::size_t>(s.index_set[j])] + eps[j];
                x_bar = detail::lift_root(cache.solve(s.index_set, rhs), s.index_set, m,
                                          p.tensor.dim);
                f_bar = eval_F(p, x_bar);
                bool accept = true;
                for (int i : s.index_set)
                    if (!(f_bar[static_cast<std::size_t>(i)] < 0.0)) {
                        accept = false;
                        break;
                    }
                if (accept) break;
                // Retry once with eps = 0 (an LD-LEQA step); past the cap the
                // candidate is accepted as-is. With alpha < 1 the retry always
                // passes the test, so the cap only matters at alpha = 1.
                if (resolves >= cfg.epsilon_resolve_cap) break;
                eps.assign(eps.size(), 0.0);
                ++resolves;
            }

            // Monotone closure, as in ld_leqa.
            IndexSet next_set = IndexSet::where_negative(f_bar).union_with(s.index_set);
            IterationRecord rec;
            rec.k = k;
            rec.index_set = s.index_set;
            rec.residual = res;
            rec.epsilon_resolves = resolves;
            if (cfg.record_detail) {
                rec.iterate = s.x;
                rec.f_value = s.f;
            }

            // Step 4: next correction on the updated set,
            //   eps = max{ min{eps+, r_{I'}(x') - r_{I'}(x)}, eps- },
            // eps+ = -alpha F_{I'}(x'), eps- = (1-alpha) F_{I'}(x').
            eps.assign(next_set.size(), 0.0);
            if (!next_set.empty()) {
                const RealVector r_new = detail::r_value(f_bar, p.rhs, s.A, next_set, x_bar, m);
                const RealVector r_old = detail::r_value(s.f, p.rhs, s.A, next_set, s.x, m);
                RealVector lo(next_set.size()), hi(next_set.size());
                for (std::size_t j = 0; j < next_set.size(); ++j) {
                    const double fj = f_bar[static_cast<std::size_t>(next_set[j])];
                    hi[j] = -cfg.alpha * fj;
                    lo[j] = (1.0 - cfg.alpha) * fj;
                    eps[j] = std::max(std::min(hi[j], r_new[j] - r_old[j]), lo[j]);
                }
                if (cfg.record_detail) {
                    rec.eps = eps;
                    rec.eps_lo = std::move(lo);
                    rec.eps_hi = std::move(hi);
                }
            }

            s.out.trace.push_back(std::move(rec));
            s.out.total_epsilon_resolves += resolves;
            if (!(next_set == s.index_set)) ++s.out.index_set_updates;
            s.x = std::move(x_bar);
            s.f = std::move(f_bar);
            s.index_set = std::move(next_set);
        } catch (const std::exception& e) {
            s.out.status = SolveStatus::error;
            s.out.iterations = k;
            s.out.final_residual = res;
            s.out.error_message = e.what();
            break;
        }
    }
    return detail::finish_solve(std::move(s));
}

// --- line-oriented outcome record (the `solve` command output) ---

inline std::string format_record(const SolveOutcome& out) {
    std::ostringstream os;
    os << "status " << to_string(out.status) << '\n'
       << "iterations " << out.iterations << '\n'
       << "final_residual " << detail::format_shortest(out.final_residual) << '\n'
       << "index_set_updates " << out.index_set_updates << '\n'
       << "K " << out.total_epsilon_resolves << '\n'
       << "wall_time_s " << detail::format_shortest(out.wall_time_s) << '\n';
    if (!out.error_message.empty()) os << "error " << out.error_message << '\n';
    return os.str();
}

inline std::string format_trace(const SolveOutcome& out) {
    std::ostringstream os;
    for (const IterationRecord& r : out.trace)
        os << "trace " << r.k << ' ' << r.index_set.size() << ' '
           << detail::format_shortest(r.residual) << ' ' << r.epsilon_resolves << '\n';
    return os.str();
}

}  // namespace mtcp
