#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "orthant/field.hpp"

using namespace orthant;

TEST_CASE("field axioms on random residues") {
    for (std::uint64_t p : {kMersenne61, kAltPrime}) {
        PrimeField f(p);
        SplitMix64 rng(7);
        for (int i = 0; i < 2000; ++i) {
            std::uint64_t a = rng.next() % p, b = rng.next() % p, c = rng.next() % p;
            CHECK(f.add(a, b) == f.add(b, a));
            CHECK(f.mul(a, b) == f.mul(b, a));
            CHECK(f.mul(a, f.add(b, c)) == f.add(f.mul(a, b), f.mul(a, c)));
            CHECK(f.add(a, f.neg(a)) == 0);
            CHECK(f.sub(a, b) == f.add(a, f.neg(b)));
        }
    }
}

TEST_CASE("mersenne fold agrees with plain modular multiplication") {
    PrimeField f(kMersenne61);
    SplitMix64 rng(11);
    for (int i = 0; i < 5000; ++i) {
        std::uint64_t a = rng.next() % kMersenne61, b = rng.next() % kMersenne61;
        std::uint64_t ref = (std::uint64_t)((unsigned __int128)a * b % kMersenne61);
        CHECK(f.mul(a, b) == ref);
    }
}

TEST_CASE("pow and inv") {
    for (std::uint64_t p : {kMersenne61, kAltPrime}) {
        PrimeField f(p);
        SplitMix64 rng(13);
        for (int i = 0; i < 200; ++i) {
            std::uint64_t a = rng.nonzero_residue(f);
            CHECK(f.mul(a, f.inv(a)) == 1);
            CHECK(f.pow(a, p - 1) == 1);  // Fermat
            CHECK(f.pow(a, 0) == 1);
            CHECK(f.pow(a, 5) == f.mul(f.mul(f.mul(f.mul(a, a), a), a), a));
        }
        CHECK_THROWS_AS((void)f.inv(0), SingularEvaluation);
    }
}

TEST_CASE("batch inverse matches elementwise inverse") {
    PrimeField f;
    SplitMix64 rng(17);
    std::vector<std::uint64_t> vals(257), ref;
    for (auto& v : vals) v = rng.nonzero_residue(f);
    for (auto v : vals) ref.push_back(f.inv(v));
    f.batch_inverse(vals.data(), vals.size());
    CHECK(vals == ref);

    std::uint64_t with_zero[3] = {1, 0, 2};
    CHECK_THROWS_AS(f.batch_inverse(with_zero, 3), SingularEvaluation);
}

TEST_CASE("random points are deterministic, nonzero, and seed-sensitive") {
    PrimeField f;
    auto a = random_points(6, 42, 4, f);
    auto b = random_points(6, 42, 4, f);
    auto c = random_points(6, 43, 4, f);
    REQUIRE(a.size() == 6);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (int j = 0; j < 4; ++j) {
            CHECK(a[i].coords[j] == b[i].coords[j]);
            CHECK(a[i].coords[j] != 0);
            CHECK(a[i].coords[j] < f.modulus());
        }
    bool differs = false;
    for (std::size_t i = 0; i < a.size(); ++i)
        for (int j = 0; j < 4; ++j) differs = differs || a[i].coords[j] != c[i].coords[j];
    CHECK(differs);
}
