#pragma once

// Dense m-th order tensors, the tensor-vector contraction A x^{m-1}, and the
// majorization split A x^{m-1} = M(A) x^[m-1] + complement(A) x^{m-1}.
//
// Entry (i1,...,im) lives at flat offset (((i1*n)+i2)*n+...)*n+im with 0-based
// indices: the last index varies fastest. In the 1-based convention used by
// the file formats this is offset sum_k (i_k - 1) * n^(m-k).

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <istream>
#include <iterator>
#include <limits>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mtcp {

using RealVector = std::vector<double>;

namespace detail {

inline void require(bool ok, const char* msg) {
    if (!ok) throw std::invalid_argument(msg);
}

inline std::size_t checked_pow(int base, int exp) {
    require(base >= 1 && exp >= 0, "checked_pow: base >= 1 and exp >= 0 required");
    std::size_t r = 1;
    const auto b = static_cast<std::size_t>(base);
    for (int k = 0; k < exp; ++k) {
        require(r <= std::numeric_limits<std::size_t>::max() / b,
                "tensor size overflows size_t");
        r *= b;
    }
    return r;
}

inline bool all_finite(std::span<const double> v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

// Shortest decimal that round-trips the exact double value.
inline std::string format_shortest(double x) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
    (void)ec;
    return std::string(buf, ptr);
}

}  // namespace detail

/// Strictly increasing list of 0-based component indices.
class IndexSet {
public:
    IndexSet() = default;

    explicit IndexSet(std::vector<int> members) : members_(std::move(members)) {
        for (std::size_t k = 0; k < members_.size(); ++k) {
            detail::require(members_[k] >= 0, "IndexSet: negative index");
            detail::require(k == 0 || members_[k - 1] < members_[k],
                            "IndexSet: members must be strictly increasing");
        }
    }

    static IndexSet from_unsorted(std::vector<int> v) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
        return IndexSet(std::move(v));
    }

    static IndexSet full(int n) {
        std::vector<int> v(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = i;
        return IndexSet(std::move(v));
    }

    /// {i | v_i < 0} — the active-set rule shared by both algorithms.
    static IndexSet where_negative(const RealVector& v) {
        std::vector<int> idx;
        for (std::size_t i = 0; i < v.size(); ++i)
            if (v[i] < 0.0) idx.push_back(static_cast<int>(i));
        return IndexSet(std::move(idx));
    }

    bool contains(int i) const {
        return std::binary_search(members_.begin(), members_.end(), i);
    }

    IndexSet union_with(const IndexSet& other) const {
        std::vector<int> merged;
        merged.reserve(members_.size() + other.members_.size());
        std::set_union(members_.begin(), members_.end(), other.members_.begin(),
                       other.members_.end(), std::back_inserter(merged));
        return IndexSet(std::move(merged));
    }

    bool subset_of(const IndexSet& other) const {
        return std::includes(other.members_.begin(), other.members_.end(),
                             members_.begin(), members_.end());
    }

    std::size_t size() const { return members_.size(); }
    bool empty() const { return members_.empty(); }
    const std::vector<int>& members() const { return members_; }
    int operator[](std::size_t k) const { return members_[k]; }
    auto begin() const { return members_.begin(); }
    auto end() const { return members_.end(); }
    bool operator==(const IndexSet&) const = default;

private:
    std::vector<int> members_;
};

struct DenseTensor {
    int order = 2;  // m
    int dim = 1;    // n
    std::vector<double> entries;

    DenseTensor(int m, int n)
        : order(m), dim(n), entries(detail::checked_pow(n, m), 0.0) {
        detail::require(m >= 2, "DenseTensor: order must be >= 2");
        detail::require(n >= 1, "DenseTensor: dim must be >= 1");
    }

    /// n^(m-1), the number of entries per leading-index block.
    std::size_t block_size() const {
        return entries.size() / static_cast<std::size_t>(dim);
    }

    std::size_t offset(std::span<const int> idx) const {
        std::size_t off = 0;
        for (int i : idx) off = off * static_cast<std::size_t>(dim) + static_cast<std::size_t>(i);
        return off;
    }

    double& at(std::initializer_list<int> idx) {
        return entries[offset(std::span<const int>(idx.begin(), idx.size()))];
    }
    double at(std::initializer_list<int> idx) const {
        return entries[offset(std::span<const int>(idx.begin(), idx.size()))];
    }

    bool finite() const { return detail::all_finite(entries); }
};

/// Majorization matrix A with A[i][j] = a_{ij...j}. The complement tensor is
/// never materialized; complement_apply evaluates it against the source.
struct MajorizationSplit {
    std::vector<double> matrix;  // dim x dim, row-major
    const DenseTensor* source = nullptr;

    double operator()(int i, int j) const {
        return matrix[static_cast<std::size_t>(i) * static_cast<std::size_t>(source->dim) +
                      static_cast<std::size_t>(j)];
    }
};

namespace detail {

// Weights w_t = x_{i2} * ... * x_{im} over all (m-1)-tuples, flat-indexed with
// the same last-index-fastest layout as a tensor block. Built by repeated
// outer product so every contraction shares one deterministic product order.
inline std::vector<double> tuple_weights(const DenseTensor& T, const RealVector& x) {
    std::vector<double> w{1.0};
    const auto n = static_cast<std::size_t>(T.dim);
    for (int r = 1; r < T.order; ++r) {
        std::vector<double> next(w.size() * n);
        for (std::size_t a = 0; a < w.size(); ++a)
            for (std::size_t b = 0; b < n; ++b) next[a * n + b] = w[a] * x[b];
        w.swap(next);
    }
    return w;
}

// Flat stride between consecutive diagonal tuples (j,j,...,j) of length m-1:
// sum_{r=0}^{m-2} n^r.
inline std::size_t diagonal_stride(int m, int n) {
    std::size_t s = 0, p = 1;
    for (int r = 0; r < m - 1; ++r) {
        s += p;
        p *= static_cast<std::size_t>(n);
    }
    return s;
}

}  // namespace detail

/// (A x^{m-1})_i = sum over all (i2,...,im) of a_{i i2...im} x_{i2}...x_{im}.
inline RealVector contract_power(const DenseTensor& T, const RealVector& x) {
    detail::require(x.size() == static_cast<std::size_t>(T.dim),
                    "contract_power: x length must equal tensor dim");
    const std::vector<double> w = detail::tuple_weights(T, x);
    const std::size_t block = T.block_size();
    RealVector v(static_cast<std::size_t>(T.dim), 0.0);
    for (int i = 0; i < T.dim; ++i) {
        const double* a = T.entries.data() + static_cast<std::size_t>(i) * block;
        double acc = 0.0;
        for (std::size_t t = 0; t < block; ++t) acc += a[t] * w[t];
        v[static_cast<std::size_t>(i)] = acc;
    }
    return v;
}

/// A x^m = x . (A x^{m-1}).
inline double full_form(const DenseTensor& T, const RealVector& x) {
    RealVector v = contract_power(T, x);
    double acc = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) acc += x[i] * v[i];
    return acc;
}

/// Component-wise power x^[alpha]. Fractional alpha requires x >= 0.
inline RealVector elementwise_power(const RealVector& x, double alpha) {
    const bool integral = alpha == std::floor(alpha);
    RealVector r(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!integral && x[i] < 0.0)
            throw std::domain_error("elementwise_power: negative component with fractional exponent");
        r[i] = std::pow(x[i], alpha);
    }
    return r;
}

inline MajorizationSplit majorization_split(const DenseTensor& T) {
    const auto n = static_cast<std::size_t>(T.dim);
    const std::size_t stride = detail::diagonal_stride(T.order, T.dim);
    MajorizationSplit split;
    split.source = &T;
    split.matrix.resize(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            split.matrix[i * n + j] = T.entries[i * T.block_size() + j * stride];
    return split;
}

/// complement(T) x^{m-1}: the contraction restricted to index tuples NOT of
/// the form (i,j,j,...,j). Computed by skipping those tuples, not by
/// subtracting M(A) x^[m-1] from the full contraction.
inline RealVector complement_apply(const DenseTensor& T, const RealVector& x) {
    detail::require(x.size() == static_cast<std::size_t>(T.dim),
                    "complement_apply: x length must equal tensor dim");
    const std::vector<double> w = detail::tuple_weights(T, x);
    const std::size_t block = T.block_size();
    const std::size_t stride = detail::diagonal_stride(T.order, T.dim);
    RealVector v(static_cast<std::size_t>(T.dim), 0.0);
    for (int i = 0; i < T.dim; ++i) {
        const double* a = T.entries.data() + static_cast<std::size_t>(i) * block;
        double acc = 0.0;
        std::size_t next_diag = 0;  // flat position of tuple (j,j,...,j), j = 0,1,...
        for (std::size_t t = 0; t < block; ++t) {
            if (t == next_diag) {
                next_diag += stride;
                continue;
            }
            acc += a[t] * w[t];
        }
        v[static_cast<std::size_t>(i)] = acc;
    }
    return v;
}

/// Subtensor on index set I, remapped to dimension |I| in the order of I.
inline DenseTensor principal_subtensor(const DenseTensor& T, const IndexSet& I) {
    detail::require(!I.empty(), "principal_subtensor: empty index set");
    for (int i : I)
        detail::require(i < T.dim, "principal_subtensor: index out of range");
    const int p = static_cast<int>(I.size());
    DenseTensor S(T.order, p);
    std::vector<int> digits(static_cast<std::size_t>(T.order), 0);
    std::vector<int> mapped(static_cast<std::size_t>(T.order), 0);
    for (std::size_t t = 0; t < S.entries.size(); ++t) {
        for (std::size_t k = 0; k < digits.size(); ++k)
            mapped[k] = I[static_cast<std::size_t>(digits[k])];
        S.entries[t] = T.entries[T.offset(mapped)];
        for (int k = T.order - 1; k >= 0; --k) {  // odometer, last index fastest
            if (++digits[static_cast<std::size_t>(k)] < p) break;
            digits[static_cast<std::size_t>(k)] = 0;
        }
    }
    return S;
}

/// Identity tensor: a_{i...i} = 1, all other entries 0.
inline DenseTensor identity_tensor(int m, int n) {
    DenseTensor T(m, n);
    const std::size_t stride = detail::diagonal_stride(m, n) * static_cast<std::size_t>(n) + 1;
    for (int i = 0; i < n; ++i)
        T.entries[static_cast<std::size_t>(i) * stride] = 1.0;
    return T;
}

// --- .mtt text format: line "m n", then n^m entries in canonical layout. ---

inline void write_mtt(std::ostream& os, const DenseTensor& T) {
    os << T.order << ' ' << T.dim << '\n';
    const std::size_t block = T.block_size();
    for (std::size_t t = 0; t < T.entries.size(); ++t) {
        os << detail::format_shortest(T.entries[t]);
        os << ((t % block == block - 1) ? '\n' : ' ');
    }
}

inline DenseTensor read_mtt(std::istream& is) {
    int m = 0, n = 0;
    if (!(is >> m >> n)) throw std::runtime_error("mtt: malformed header");
    if (m < 2 || n < 1) throw std::runtime_error("mtt: invalid order/dim");
    DenseTensor T(m, n);
    for (auto& e : T.entries)
        if (!(is >> e)) throw std::runtime_error("mtt: truncated entry list");
    if (!T.finite()) throw std::runtime_error("mtt: non-finite entry");
    return T;
}

}  // namespace mtcp
