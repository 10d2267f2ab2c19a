#pragma once

// Seeded generators for the three M-tensor test families, all of the shape
// A = s*I - B with B >= 0, plus the b = A xt^{m-1} right-hand-side rule that
// plants a known interior solution xt.
//
// Randomness: xoshiro256** substreams of the instance seed, tag 0 for B and
// tag 1 for xt, so instances are bit-reproducible from (kind, m, n, seed).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "mtcp/rng.hpp"
#include "mtcp/solver.hpp"
#include "mtcp/tensor.hpp"

namespace mtcp {

struct GeneratorSpec {
    enum class Kind { P1, P2, P3 };
    Kind kind = Kind::P1;
    int m = 3;
    int n = 10;
    std::uint64_t seed = 1;
    double eps = 0.01;  // the s = (1+eps)*max rule for P1/P2

    void validate() const {
        detail::require(m >= 2, "GeneratorSpec: m must be >= 2");
        detail::require(n >= 1, "GeneratorSpec: n must be >= 1");
        if (kind != Kind::P3) detail::require(eps > 0.0, "GeneratorSpec: eps must be positive");
    }
};

inline const char* to_string(GeneratorSpec::Kind k) {
    switch (k) {
        case GeneratorSpec::Kind::P1: return "P1";
        case GeneratorSpec::Kind::P2: return "P2";
        default: return "P3";
    }
}

/// b = T xt^{m-1} with xt ~ U(0,1) from substream 1 of `seed`.
/// Returns (b, xt); xt stays with the instance as a solution witness.
inline std::pair<RealVector, RealVector> gen_rhs(const DenseTensor& T, std::uint64_t seed) {
    Xoshiro256ss rng = substream(seed, 1);
    RealVector xt(static_cast<std::size_t>(T.dim));
    for (auto& v : xt) v = rng.uniform_open01();
    return {contract_power(T, xt), xt};
}

namespace detail {

// s = (1+eps) * max_i (B e^{m-1})_i; (B e^{m-1})_i is the sum of block i.
inline double scale_above_row_sums(const DenseTensor& B, double eps) {
    const std::size_t block = B.block_size();
    double maxrow = 0.0;
    for (int i = 0; i < B.dim; ++i) {
        double row = 0.0;
        const double* a = B.entries.data() + static_cast<std::size_t>(i) * block;
        for (std::size_t t = 0; t < block; ++t) row += a[t];
        maxrow = std::max(maxrow, row);
    }
    return (1.0 + eps) * maxrow;
}

inline ProblemInstance finish_instance(DenseTensor B, double s, const GeneratorSpec& spec) {
    // T = s*I - B in place.
    for (auto& e : B.entries) e = -e;
    const std::size_t diag_stride = diagonal_stride(B.order, B.dim) *
                                        static_cast<std::size_t>(B.dim) + 1;
    for (int i = 0; i < B.dim; ++i)
        B.entries[static_cast<std::size_t>(i) * diag_stride] += s;
    auto [b, xt] = gen_rhs(B, spec.seed);
    ProblemInstance p(std::move(B), std::move(b));
    p.meta.generator = to_string(spec.kind);
    p.meta.seed = spec.seed;
    p.witness = std::move(xt);
    return p;
}

// Average each entry over all m! permutations of its multi-index. Equivalent
// to averaging over the distinct permutations of the index multiset, done in
// two passes keyed by the sorted index tuple.
inline void symmetrize(DenseTensor& B) {
    const auto n = static_cast<std::size_t>(B.dim);
    std::vector<double> sum(B.entries.size(), 0.0);
    std::vector<std::uint32_t> count(B.entries.size(), 0);
    std::vector<int> digits(static_cast<std::size_t>(B.order), 0);
    std::vector<int> sorted(static_cast<std::size_t>(B.order), 0);
    for (std::size_t t = 0; t < B.entries.size(); ++t) {
        sorted = digits;
        std::sort(sorted.begin(), sorted.end());
        std::size_t canon = 0;
        for (int d : sorted) canon = canon * n + static_cast<std::size_t>(d);
        sum[canon] += B.entries[t];
        count[canon] += 1;
        for (int k = B.order - 1; k >= 0; --k) {
            if (++digits[static_cast<std::size_t>(k)] < B.dim) break;
            digits[static_cast<std::size_t>(k)] = 0;
        }
    }
    std::fill(digits.begin(), digits.end(), 0);
    for (std::size_t t = 0; t < B.entries.size(); ++t) {
        sorted = digits;
        std::sort(sorted.begin(), sorted.end());
        std::size_t canon = 0;
        for (int d : sorted) canon = canon * n + static_cast<std::size_t>(d);
        B.entries[t] = sum[canon] / count[canon];
        for (int k = B.order - 1; k >= 0; --k) {
            if (++digits[static_cast<std::size_t>(k)] < B.dim) break;
            digits[static_cast<std::size_t>(k)] = 0;
        }
    }
}

}  // namespace detail

/// Problem 1: B ~ i.i.d. U(0,1), s = (1+eps) * max_i (B e^{m-1})_i.
inline ProblemInstance gen_problem1(const GeneratorSpec& spec) {
    spec.validate();
    detail::require(spec.kind == GeneratorSpec::Kind::P1, "gen_problem1: wrong kind");
    Xoshiro256ss rng = substream(spec.seed, 0);
    DenseTensor B(spec.m, spec.n);
    for (auto& e : B.entries) e = rng.uniform_open01();
    const double s = detail::scale_above_row_sums(B, spec.eps);
    return detail::finish_instance(std::move(B), s, spec);
}

/// Problem 2: as Problem 1 with B symmetrized by permutation averaging.
inline ProblemInstance gen_problem2(const GeneratorSpec& spec) {
    spec.validate();
    detail::require(spec.kind == GeneratorSpec::Kind::P2, "gen_problem2: wrong kind");
    Xoshiro256ss rng = substream(spec.seed, 0);
    DenseTensor B(spec.m, spec.n);
    for (auto& e : B.entries) e = rng.uniform_open01();
    detail::symmetrize(B);
    const double s = detail::scale_above_row_sums(B, spec.eps);
    return detail::finish_instance(std::move(B), s, spec);
}

/// Problem 3: b_{i1...im} = |sin(i1+...+im)| with 1-based indices, s = n^{m-1}.
/// The tensor is deterministic; only the right-hand side uses the seed.
inline ProblemInstance gen_problem3(const GeneratorSpec& spec) {
    spec.validate();
    detail::require(spec.kind == GeneratorSpec::Kind::P3, "gen_problem3: wrong kind");
    DenseTensor B(spec.m, spec.n);
    std::vector<int> digits(static_cast<std::size_t>(spec.m), 0);
    for (std::size_t t = 0; t < B.entries.size(); ++t) {
        int s = spec.m;  // 1-based index sum = 0-based sum + m
        for (int d : digits) s += d;
        B.entries[t] = std::abs(std::sin(static_cast<double>(s)));
        for (int k = spec.m - 1; k >= 0; --k) {
            if (++digits[static_cast<std::size_t>(k)] < spec.n) break;
            digits[static_cast<std::size_t>(k)] = 0;
        }
    }
    const double s = std::pow(static_cast<double>(spec.n), spec.m - 1);
    return detail::finish_instance(std::move(B), s, spec);
}

inline ProblemInstance generate(const GeneratorSpec& spec) {
    switch (spec.kind) {
        case GeneratorSpec::Kind::P1: return gen_problem1(spec);
        case GeneratorSpec::Kind::P2: return gen_problem2(spec);
        default: return gen_problem3(spec);
    }
}

/// Sufficient strong-M certificate: Z-tensor (off-diagonal-like entries <= 0)
/// with T e^{m-1} > 0 componentwise. False is inconclusive.
inline bool strong_m_certificate(const DenseTensor& T) {
    const std::size_t diag_stride = detail::diagonal_stride(T.order, T.dim) *
                                        static_cast<std::size_t>(T.dim) + 1;
    std::size_t next_diag = 0;
    for (std::size_t t = 0; t < T.entries.size(); ++t) {
        if (t == next_diag) {
            next_diag += diag_stride;
            continue;
        }
        if (T.entries[t] > 0.0) return false;
    }
    const RealVector v = contract_power(T, RealVector(static_cast<std::size_t>(T.dim), 1.0));
    for (double x : v)
        if (!(x > 0.0)) return false;
    return true;
}

/// FNV-1a over (m, n, tensor bits, rhs bits); used to confirm that paired
/// benchmark runs really saw the same instance.
inline std::uint64_t instance_hash(const ProblemInstance& p) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    auto mix = [&h](std::uint64_t v) {
        for (int k = 0; k < 8; ++k) {
            h ^= (v >> (8 * k)) & 0xFF;
            h *= 0x100000001B3ULL;
        }
    };
    mix(static_cast<std::uint64_t>(p.tensor.order));
    mix(static_cast<std::uint64_t>(p.tensor.dim));
    auto bits = [](double d) {
        std::uint64_t u;
        static_assert(sizeof u == sizeof d);
        __builtin_memcpy(&u, &d, sizeof u);
        return u;
    };
    for (double e : p.tensor.entries) mix(bits(e));
    for (double e : p.rhs) mix(bits(e));
    return h;
}

// --- .mtcp problem file format -------------------------------------------
// line 1: m n generator seed
// line 2: n rhs values
// line 3: n witness values, or "-" if unknown
// then n^m tensor entries in canonical layout, shortest round-trip decimals.

inline void write_mtcp(std::ostream& os, const ProblemInstance& p) {
    os << p.tensor.order << ' ' << p.tensor.dim << ' ' << p.meta.generator << ' '
       << p.meta.seed << '\n';
    for (std::size_t i = 0; i < p.rhs.size(); ++i)
        os << detail::format_shortest(p.rhs[i]) << (i + 1 == p.rhs.size() ? '\n' : ' ');
    if (p.witness) {
        const RealVector& w = *p.witness;
        for (std::size_t i = 0; i < w.size(); ++i)
            os << detail::format_shortest(w[i]) << (i + 1 == w.size() ? '\n' : ' ');
    } else {
        os << "-\n";
    }
    const std::size_t block = p.tensor.block_size();
    for (std::size_t t = 0; t < p.tensor.entries.size(); ++t) {
        os << detail::format_shortest(p.tensor.entries[t]);
        os << ((t % block == block - 1) ? '\n' : ' ');
    }
}

inline ProblemInstance read_mtcp(std::istream& is) {
    int m = 0, n = 0;
    std::string generator;
    std::uint64_t seed = 0;
    if (!(is >> m >> n >> generator >> seed)) throw std::runtime_error("mtcp: malformed header");
    if (m < 2 || n < 1) throw std::runtime_error("mtcp: invalid order/dim");
    RealVector rhs(static_cast<std::size_t>(n));
    for (auto& v : rhs)
        if (!(is >> v)) throw std::runtime_error("mtcp: truncated rhs");

    std::string first;
    if (!(is >> first)) throw std::runtime_error("mtcp: missing witness line");
    std::optional<RealVector> witness;
    if (first != "-") {
        RealVector w(static_cast<std::size_t>(n));
        std::istringstream head(first);
        if (!(head >> w[0])) throw std::runtime_error("mtcp: malformed witness");
        for (std::size_t i = 1; i < w.size(); ++i)
            if (!(is >> w[i])) throw std::runtime_error("mtcp: truncated witness");
        witness = std::move(w);
    }

    DenseTensor T(m, n);
    for (auto& e : T.entries)
        if (!(is >> e)) throw std::runtime_error("mtcp: truncated tensor entries");
    if (!T.finite() || !detail::all_finite(rhs))
        throw std::runtime_error("mtcp: non-finite value");

    ProblemInstance p(std::move(T), std::move(rhs));
    p.meta.generator = generator;
    p.meta.seed = seed;
    p.witness = std::move(witness);
    return p;
}

}  // namespace mtcp
