#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace orthant {

// Thrown when an evaluation hits a zero where a nonzero value is required
// (zero coordinate, zero denominator, singular generator image).
struct SingularEvaluation : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline constexpr std::uint64_t kMersenne61 = (std::uint64_t{1} << 61) - 1;

// A second large prime for double-checking guesses with an independent modulus.
inline constexpr std::uint64_t kAltPrime = 2305843009213693967ULL;

// Arithmetic modulo a fixed odd prime p < 2^62. Elements are plain uint64_t
// residues in [0, p). The default modulus 2^61-1 gets a fast folding reduction.
class PrimeField {
public:
    explicit PrimeField(std::uint64_t prime = kMersenne61) : p_(prime) {}

    std::uint64_t modulus() const { return p_; }

    std::uint64_t reduce(std::uint64_t a) const { return a % p_; }

    std::uint64_t add(std::uint64_t a, std::uint64_t b) const {
        std::uint64_t s = a + b;
        if (s >= p_) s -= p_;
        return s;
    }

    std::uint64_t sub(std::uint64_t a, std::uint64_t b) const {
        return a >= b ? a - b : a + p_ - b;
    }

    std::uint64_t neg(std::uint64_t a) const { return a == 0 ? 0 : p_ - a; }

    std::uint64_t mul(std::uint64_t a, std::uint64_t b) const {
        unsigned __int128 t = (unsigned __int128)a * b;
        if (p_ == kMersenne61) {
            // 2^61 == 1 (mod p): fold the high part twice.
            std::uint64_t lo = (std::uint64_t)(t & kMersenne61);
            std::uint64_t hi = (std::uint64_t)(t >> 61);
            std::uint64_t s = lo + hi;
            if (s >= kMersenne61) s -= kMersenne61;
            return s;
        }
        return (std::uint64_t)(t % p_);
    }

    std::uint64_t pow(std::uint64_t a, std::uint64_t e) const {
        std::uint64_t r = 1;
        while (e) {
            if (e & 1) r = mul(r, a);
            a = mul(a, a);
            e >>= 1;
        }
        return r;
    }

    std::uint64_t inv(std::uint64_t a) const {
        if (a == 0) throw SingularEvaluation("inverse of zero");
        return pow(a, p_ - 2);
    }

    // In-place Montgomery batch inversion: one pow, 3(n-1) multiplications.
    // Throws if any input is zero.
    void batch_inverse(std::uint64_t* vals, std::size_t n) const {
        if (n == 0) return;
        std::vector<std::uint64_t> prefix(n);
        std::uint64_t acc = 1;
        for (std::size_t i = 0; i < n; ++i) {
            if (vals[i] == 0) throw SingularEvaluation("batch inverse of zero");
            prefix[i] = acc;
            acc = mul(acc, vals[i]);
        }
        std::uint64_t ainv = inv(acc);
        for (std::size_t i = n; i-- > 0;) {
            std::uint64_t vi = vals[i];
            vals[i] = mul(ainv, prefix[i]);
            ainv = mul(ainv, vi);
        }
    }

private:
    std::uint64_t p_;
};

// splitmix64, the usual seed expander. Deterministic across platforms.
struct SplitMix64 {
    std::uint64_t state;

    explicit SplitMix64(std::uint64_t seed) : state(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [1, p-1] by rejection.
    std::uint64_t nonzero_residue(const PrimeField& f) {
        for (;;) {
            std::uint64_t v = next() & ((std::uint64_t{1} << 62) - 1);
            if (v != 0 && v < f.modulus()) return v;
        }
    }
};

// An evaluation point: D nonzero field elements.
struct EvaluationPoint {
    int D = 0;
    std::uint64_t coords[4] = {0, 0, 0, 0};
};

inline std::vector<EvaluationPoint> random_points(int count, std::uint64_t seed, int D,
                                                  const PrimeField& f = PrimeField{}) {
    if (count < 1) throw std::invalid_argument("random_points: count must be >= 1");
    SplitMix64 rng(seed);
    std::vector<EvaluationPoint> pts((std::size_t)count);
    for (auto& pt : pts) {
        pt.D = D;
        for (int i = 0; i < D; ++i) pt.coords[i] = rng.nonzero_residue(f);
    }
    return pts;
}

}  // namespace orthant
