#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "mtcp/rng.hpp"
#include "mtcp/tensor.hpp"

using namespace mtcp;

namespace {

// Independent contraction oracle: decode every flat offset into its index
// tuple and multiply term by term. Shares nothing with tuple_weights.
RealVector oracle_contract(const DenseTensor& T, const RealVector& x) {
    const int n = T.dim;
    RealVector v(static_cast<std::size_t>(n), 0.0);
    for (std::size_t t = 0; t < T.entries.size(); ++t) {
        std::size_t rem = t;
        std::vector<int> idx(static_cast<std::size_t>(T.order));
        for (int k = T.order - 1; k >= 0; --k) {
            idx[static_cast<std::size_t>(k)] = static_cast<int>(rem % static_cast<std::size_t>(n));
            rem /= static_cast<std::size_t>(n);
        }
        double term = T.entries[t];
        for (int k = 1; k < T.order; ++k) term *= x[static_cast<std::size_t>(idx[static_cast<std::size_t>(k)])];
        v[static_cast<std::size_t>(idx[0])] += term;
    }
    return v;
}

// The running m=3, n=2 example: a_111=1, a_122=2, a_211=3, all others zero.
DenseTensor example_tensor() {
    DenseTensor T(3, 2);
    T.at({0, 0, 0}) = 1.0;
    T.at({0, 1, 1}) = 2.0;
    T.at({1, 0, 0}) = 3.0;
    return T;
}

DenseTensor random_tensor(Xoshiro256ss& rng, int m, int n, bool signed_entries) {
    DenseTensor T(m, n);
    for (auto& e : T.entries) {
        e = rng.uniform_open01();
        if (signed_entries) e = 2.0 * e - 1.0;
    }
    return T;
}

RealVector random_vector(Xoshiro256ss& rng, int n, bool nonneg) {
    RealVector x(static_cast<std::size_t>(n));
    for (auto& v : x) v = nonneg ? rng.uniform_open01() : 2.0 * rng.uniform_open01() - 1.0;
    return x;
}

double inf_norm(const RealVector& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

}  // namespace

TEST_CASE("contract_power: identity tensor gives elementwise power") {
    const DenseTensor id = identity_tensor(3, 2);
    const RealVector v = contract_power(id, {2.0, 3.0});
    CHECK(v[0] == doctest::Approx(4.0).epsilon(1e-15));
    CHECK(v[1] == doctest::Approx(9.0).epsilon(1e-15));
}

TEST_CASE("contract_power: m=3 example matches the decode oracle") {
    const DenseTensor T = example_tensor();
    const RealVector x{1.0, 2.0};
    const RealVector expect = oracle_contract(T, x);
    CHECK(expect[0] == doctest::Approx(9.0));
    CHECK(expect[1] == doctest::Approx(3.0));
    const RealVector v = contract_power(T, x);
    CHECK(v[0] == doctest::Approx(expect[0]).epsilon(1e-14));
    CHECK(v[1] == doctest::Approx(expect[1]).epsilon(1e-14));
}

TEST_CASE("contract_power: zero vector annihilates") {
    Xoshiro256ss rng(7);
    const DenseTensor T = random_tensor(rng, 4, 3, true);
    for (double v : contract_power(T, RealVector(3, 0.0))) CHECK(v == 0.0);
}

TEST_CASE("contract_power: dimension mismatch throws") {
    const DenseTensor T = example_tensor();
    CHECK_THROWS_AS(contract_power(T, {1.0, 2.0, 3.0}), std::invalid_argument);
}

TEST_CASE("full_form examples") {
    CHECK(full_form(identity_tensor(3, 2), {2.0, 3.0}) == doctest::Approx(35.0));
    CHECK(full_form(DenseTensor(3, 2), {5.0, -1.0}) == 0.0);
    CHECK(full_form(example_tensor(), {1.0, 2.0}) == doctest::Approx(15.0));
}

TEST_CASE("elementwise_power") {
    const RealVector a = elementwise_power({4.0, 9.0}, 0.5);
    CHECK(a[0] == doctest::Approx(2.0));
    CHECK(a[1] == doctest::Approx(3.0));
    const RealVector b = elementwise_power({2.0, 3.0}, 2.0);
    CHECK(b[0] == doctest::Approx(4.0));
    CHECK(b[1] == doctest::Approx(9.0));
    const RealVector c = elementwise_power({0.0, 5.0}, 1.0 / 3.0);
    CHECK(c[0] == 0.0);
    CHECK(c[1] == doctest::Approx(std::cbrt(5.0)).epsilon(1e-12));
    CHECK_THROWS_AS(elementwise_power({-1.0, 2.0}, 0.5), std::domain_error);
    CHECK(elementwise_power({-2.0, 2.0}, 3.0)[0] == doctest::Approx(-8.0));
}

TEST_CASE("majorization_split examples") {
    SUBCASE("identity tensor") {
        const DenseTensor id = identity_tensor(3, 2);
        const MajorizationSplit s = majorization_split(id);
        CHECK(s(0, 0) == 1.0);
        CHECK(s(0, 1) == 0.0);
        CHECK(s(1, 0) == 0.0);
        CHECK(s(1, 1) == 1.0);
    }
    SUBCASE("example tensor reads entries (i,j,j)") {
        const DenseTensor T = example_tensor();
        const MajorizationSplit s = majorization_split(T);
        CHECK(s(0, 0) == 1.0);
        CHECK(s(0, 1) == 2.0);
        CHECK(s(1, 0) == 3.0);
        CHECK(s(1, 1) == 0.0);
    }
    SUBCASE("zero tensor") {
        const DenseTensor z(3, 2);
        for (double v : majorization_split(z).matrix) CHECK(v == 0.0);
    }
}

TEST_CASE("complement_apply examples") {
    SUBCASE("identity equals its own majorization tensor") {
        const DenseTensor id = identity_tensor(3, 3);
        for (double v : complement_apply(id, {1.0, -2.0, 0.5})) CHECK(v == 0.0);
    }
    SUBCASE("example tensor: all entries sit at (i,j,j)") {
        const RealVector v = complement_apply(example_tensor(), {1.0, 2.0});
        CHECK(v[0] == 0.0);
        CHECK(v[1] == 0.0);
    }
    SUBCASE("a_112 only: (1,1,2) is not of form (i,j,j)") {
        DenseTensor T(3, 2);
        T.at({0, 0, 1}) = 5.0;
        const RealVector expect = oracle_contract(T, {1.0, 2.0});  // majorization matrix is zero
        const RealVector v = complement_apply(T, {1.0, 2.0});
        CHECK(v[0] == doctest::Approx(expect[0]));
        CHECK(v[0] == doctest::Approx(10.0));
        CHECK(v[1] == 0.0);
    }
}

TEST_CASE("principal_subtensor") {
    const DenseTensor T = example_tensor();
    SUBCASE("full set reproduces the tensor") {
        const DenseTensor S = principal_subtensor(T, IndexSet::full(2));
        REQUIRE(S.entries.size() == T.entries.size());
        for (std::size_t t = 0; t < T.entries.size(); ++t) CHECK(S.entries[t] == T.entries[t]);
    }
    SUBCASE("singleton picks the diagonal entry") {
        const DenseTensor S = principal_subtensor(T, IndexSet({0}));
        CHECK(S.dim == 1);
        CHECK(S.entries.size() == 1);
        CHECK(S.entries[0] == 1.0);
    }
    SUBCASE("identity stays identity under index selection") {
        const DenseTensor S = principal_subtensor(identity_tensor(3, 3), IndexSet({0, 2}));
        const DenseTensor expect = identity_tensor(3, 2);
        for (std::size_t t = 0; t < S.entries.size(); ++t) CHECK(S.entries[t] == expect.entries[t]);
    }
    SUBCASE("empty set throws") { CHECK_THROWS_AS(principal_subtensor(T, IndexSet()), std::invalid_argument); }
}

TEST_CASE("identity_tensor") {
    SUBCASE("m=2 is the identity matrix") {
        const DenseTensor id = identity_tensor(2, 3);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) CHECK(id.at({i, j}) == (i == j ? 1.0 : 0.0));
    }
    SUBCASE("m=3 n=2 has exactly two unit entries") {
        const DenseTensor id = identity_tensor(3, 2);
        CHECK(id.at({0, 0, 0}) == 1.0);
        CHECK(id.at({1, 1, 1}) == 1.0);
        double sum = 0.0;
        for (double v : id.entries) sum += v;
        CHECK(sum == 2.0);
    }
    SUBCASE("contract with m=4 gives cubes") {
        const RealVector v = contract_power(identity_tensor(4, 3), {1.0, 2.0, 3.0});
        CHECK(v[0] == doctest::Approx(1.0));
        CHECK(v[1] == doctest::Approx(8.0));
        CHECK(v[2] == doctest::Approx(27.0));
    }
}

TEST_CASE("property: split identity over random tensors") {
    Xoshiro256ss rng(20260808);
    for (int trial = 0; trial < 100; ++trial) {
        const int m = 3 + static_cast<int>(rng.next() % 3);
        const int n = 2 + static_cast<int>(rng.next() % 7);
        const DenseTensor T = random_tensor(rng, m, n, true);
        const RealVector x = random_vector(rng, n, true);
        const MajorizationSplit s = majorization_split(T);
        const RealVector full = contract_power(T, x);
        RealVector recomposed = complement_apply(T, x);
        for (int i = 0; i < n; ++i) {
            double acc = 0.0;
            for (int j = 0; j < n; ++j)
                acc += s(i, j) * std::pow(x[static_cast<std::size_t>(j)], m - 1);
            recomposed[static_cast<std::size_t>(i)] += acc;
        }
        double err = 0.0;
        for (int i = 0; i < n; ++i)
            err = std::max(err, std::abs(full[static_cast<std::size_t>(i)] -
                                         recomposed[static_cast<std::size_t>(i)]));
        CHECK(err <= 1e-12 * (1.0 + inf_norm(full)));
    }
}

TEST_CASE("property: contraction is (m-1)-homogeneous") {
    Xoshiro256ss rng(99);
    for (int trial = 0; trial < 40; ++trial) {
        const int m = 3 + static_cast<int>(rng.next() % 3);
        const int n = 2 + static_cast<int>(rng.next() % 5);
        const DenseTensor T = random_tensor(rng, m, n, true);
        const RealVector x = random_vector(rng, n, false);
        const double t = 0.25 + 2.0 * rng.uniform_open01();
        RealVector tx = x;
        for (auto& v : tx) v *= t;
        const RealVector lhs = contract_power(T, tx);
        const RealVector rhs = contract_power(T, x);
        const double scale = std::pow(t, m - 1);
        for (int i = 0; i < n; ++i) {
            const double want = scale * rhs[static_cast<std::size_t>(i)];
            CHECK(std::abs(lhs[static_cast<std::size_t>(i)] - want) <=
                  1e-12 * (1.0 + std::abs(want)));
        }
    }
}

TEST_CASE("property: m=2 contraction equals matrix-vector product") {
    Xoshiro256ss rng(424242);
    for (int trial = 0; trial < 25; ++trial) {
        const int n = 1 + static_cast<int>(rng.next() % 8);
        const DenseTensor T = random_tensor(rng, 2, n, true);
        const RealVector x = random_vector(rng, n, false);
        const RealVector v = contract_power(T, x);
        for (int i = 0; i < n; ++i) {
            double want = 0.0;
            for (int j = 0; j < n; ++j) want += T.at({i, j}) * x[static_cast<std::size_t>(j)];
            CHECK(std::abs(v[static_cast<std::size_t>(i)] - want) <= 1e-14 * (1.0 + std::abs(want)));
        }
    }
}

TEST_CASE("property: contract_power matches the decode oracle on random tensors") {
    Xoshiro256ss rng(555);
    for (int trial = 0; trial < 30; ++trial) {
        const int m = 2 + static_cast<int>(rng.next() % 4);
        const int n = 1 + static_cast<int>(rng.next() % 6);
        const DenseTensor T = random_tensor(rng, m, n, true);
        const RealVector x = random_vector(rng, n, false);
        const RealVector got = contract_power(T, x);
        const RealVector want = oracle_contract(T, x);
        for (int i = 0; i < n; ++i)
            CHECK(std::abs(got[static_cast<std::size_t>(i)] - want[static_cast<std::size_t>(i)]) <=
                  1e-12 * (1.0 + std::abs(want[static_cast<std::size_t>(i)])));
    }
}

TEST_CASE("IndexSet basics") {
    CHECK_THROWS_AS(IndexSet({2, 1}), std::invalid_argument);
    CHECK_THROWS_AS(IndexSet({-1}), std::invalid_argument);
    const IndexSet s = IndexSet::from_unsorted({3, 1, 3, 0});
    CHECK(s.members() == std::vector<int>{0, 1, 3});
    CHECK(s.contains(3));
    CHECK(!s.contains(2));
    CHECK(IndexSet({0, 1}).subset_of(IndexSet({0, 1, 3})));
    CHECK(!IndexSet({2}).subset_of(IndexSet({0, 1, 3})));
    const IndexSet neg = IndexSet::where_negative({-1.0, 0.0, -0.5, 2.0});
    CHECK(neg.members() == std::vector<int>{0, 2});
}

TEST_CASE("mtt round-trip preserves exact values") {
    Xoshiro256ss rng(31337);
    DenseTensor T = random_tensor(rng, 3, 4, true);
    T.entries[5] = 0.1 + 0.2;  // classic shortest-round-trip stress value
    std::stringstream ss;
    write_mtt(ss, T);
    const DenseTensor back = read_mtt(ss);
    REQUIRE(back.order == T.order);
    REQUIRE(back.dim == T.dim);
    for (std::size_t t = 0; t < T.entries.size(); ++t) CHECK(back.entries[t] == T.entries[t]);
}

TEST_CASE("mtt rejects malformed input") {
    std::stringstream bad1("2");
    CHECK_THROWS_AS(read_mtt(bad1), std::runtime_error);
    std::stringstream bad2("2 2\n1 2 3");
    CHECK_THROWS_AS(read_mtt(bad2), std::runtime_error);
}
