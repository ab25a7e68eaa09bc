#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "orthant/guess.hpp"

using namespace orthant;

namespace {

// C_0 = 1, C_{n+1} = C_n * 2(2n+1)/(n+2), computed mod p.
std::vector<std::uint64_t> catalan(int count, const PrimeField& f) {
    std::vector<std::uint64_t> c{1};
    for (int n = 0; (int)c.size() < count; ++n)
        c.push_back(f.mul(c.back(), f.mul(f.reduce(2 * (2 * (std::uint64_t)n + 1)),
                                          f.inv(f.reduce((std::uint64_t)n + 2)))));
    return c;
}

}  // namespace

TEST_CASE("catalan: order-1 degree-1 recurrence from 60 terms") {
    PrimeField f;
    auto terms = catalan(60, f);
    auto cand = guess_recurrence(terms, 4, 4);
    REQUIRE(cand.has_value());
    CHECK(cand->kind == OperatorCandidate::Kind::Recurrence);
    CHECK(cand->order == 1);
    CHECK(cand->degree == 1);
    // (4n + 2) a_n - (n + 2) a_{n+1} = 0, normalized to lead coefficient 1
    std::uint64_t inv2 = f.inv(2);
    CHECK(cand->coeffs[0][0] == 1);                     // lead: constant term of p_0
    CHECK(cand->coeffs[0][1] == 2);                     // p_0(n) = 2n + 1 after dividing by 2
    CHECK(cand->coeffs[1][0] == f.neg(1));              // p_1(n) = -(n/2 + 1)
    CHECK(cand->coeffs[1][1] == f.neg(inv2));
    // the relation keeps holding on a longer prefix it never saw
    CHECK(verify_relation(*cand, catalan(200, f)));
}

TEST_CASE("catalan: low-order ode") {
    PrimeField f;
    auto terms = catalan(80, f);
    auto cand = guess_ode(terms, 3, 4);
    REQUIRE(cand.has_value());
    CHECK(cand->kind == OperatorCandidate::Kind::Ode);
    CHECK(cand->order <= 2);
    CHECK(verify_relation(*cand, catalan(250, f)));
}

TEST_CASE("simple sequences hit the expected minimal operators") {
    PrimeField f;
    std::vector<std::uint64_t> ones(50, 1);
    auto flat = guess_recurrence(ones, 3, 3);
    REQUIRE(flat.has_value());
    CHECK(flat->order == 1);
    CHECK(flat->degree == 0);

    std::vector<std::uint64_t> geo{1};
    while (geo.size() < 50) geo.push_back(f.mul(geo.back(), 2));
    auto g = guess_recurrence(geo, 3, 3);
    REQUIRE(g.has_value());
    CHECK(g->order == 1);
    CHECK(g->degree == 0);
    // a_{n+1} = 2 a_n: coefficients 1 and -1/2 after normalization
    CHECK(g->coeffs[0][0] == 1);
    CHECK(g->coeffs[1][0] == f.neg(f.inv(2)));

    // 1/(1-x): (1 - x) y' - y = 0, order 1 degree 1
    auto ode = guess_ode(ones, 3, 3);
    REQUIRE(ode.has_value());
    CHECK(ode->order == 1);
    CHECK(ode->degree == 1);
}

TEST_CASE("random sequences are rejected") {
    PrimeField f;
    SplitMix64 rng(211);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<std::uint64_t> terms;
        for (int n = 0; n < 80; ++n) terms.push_back(rng.next() % f.modulus());
        CHECK(!guess_recurrence(terms, 4, 4));
        CHECK(!guess_ode(terms, 4, 4));
    }
}

TEST_CASE("verdicts agree across two primes") {
    for (std::uint64_t p : {kMersenne61, kAltPrime}) {
        PrimeField f(p);
        auto cand = guess_recurrence(catalan(60, f), 4, 4, 20, p);
        REQUIRE(cand.has_value());
        CHECK(cand->order == 1);
        CHECK(cand->degree == 1);
        CHECK(cand->prime == p);
    }
}

TEST_CASE("insufficient terms throws instead of guessing blind") {
    std::vector<std::uint64_t> few(10, 1);
    CHECK_THROWS_AS((void)guess_recurrence(few, 4, 4), InsufficientTerms);
    CHECK_THROWS_AS((void)guess_ode(few, 4, 4), InsufficientTerms);
    // exactly at the threshold it runs: (r+1)(d+1) + holdout + r terms
    std::vector<std::uint64_t> enough((4 + 1) * (4 + 1) + 20 + 4, 1);
    CHECK(guess_recurrence(enough, 4, 4).has_value());
}
