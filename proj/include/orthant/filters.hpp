#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <stdexcept>
#include <vector>

#include "counting.hpp"
#include "stepset.hpp"

namespace orthant {

// --- exact rationals for the dimension certificate (tiny systems only) ---

struct Rat {
    long long num = 0;
    long long den = 1;

    Rat() = default;
    Rat(long long n, long long d = 1) : num(n), den(d) { normalize(); }

    void normalize() {
        if (den == 0) throw std::overflow_error("Rat: zero denominator");
        if (den < 0) {
            num = -num;
            den = -den;
        }
        long long g = std::gcd(num < 0 ? -num : num, den);
        if (g > 1) {
            num /= g;
            den /= g;
        }
    }

    static Rat from128(__int128 n, __int128 d) {
        if (d < 0) {
            n = -n;
            d = -d;
        }
        __int128 a = n < 0 ? -n : n;
        __int128 g = d;
        while (a) {
            __int128 t = g % a;
            g = a;
            a = t;
        }
        if (g > 1) {
            n /= g;
            d /= g;
        }
        constexpr __int128 lim = (__int128)0x7fffffffffffffffLL;
        if (n > lim || n < -lim || d > lim) throw std::overflow_error("Rat: overflow");
        Rat r;
        r.num = (long long)n;
        r.den = (long long)d;
        return r;
    }

    friend Rat operator+(const Rat& a, const Rat& b) {
        return from128((__int128)a.num * b.den + (__int128)b.num * a.den, (__int128)a.den * b.den);
    }
    friend Rat operator-(const Rat& a, const Rat& b) {
        return from128((__int128)a.num * b.den - (__int128)b.num * a.den, (__int128)a.den * b.den);
    }
    friend Rat operator*(const Rat& a, const Rat& b) {
        return from128((__int128)a.num * b.num, (__int128)a.den * b.den);
    }
    friend bool operator==(const Rat& a, const Rat& b) { return a.num == b.num && a.den == b.den; }
    friend bool operator<(const Rat& a, const Rat& b) {
        return (__int128)a.num * b.den < (__int128)b.num * a.den;
    }
    friend bool operator<=(const Rat& a, const Rat& b) { return a == b || a < b; }

    bool negative() const { return num < 0; }
    bool nonneg() const { return num >= 0; }
};

// --- unused steps -----------------------------------------------------------

// Steps that can never occur in any confined walk: fixed point of reachability
// BFS from the origin inside [0, box_bound]^D with the currently kept steps.
inline StepSet unused_steps(const StepSet& s, int box_bound = 8) {
    if (box_bound < 1) throw std::invalid_argument("unused_steps: box_bound must be >= 1");
    int D = s.D;
    int side = box_bound + 1;
    std::size_t cells = 1;
    std::int64_t stride[4];
    for (int j = D - 1; j >= 0; --j) {
        stride[j] = (std::int64_t)cells;
        cells *= (std::size_t)side;
    }
    auto steps = s.steps();
    std::vector<char> kept(steps.size(), 1);
    std::vector<char> visited(cells);
    std::vector<std::size_t> queue;
    queue.reserve(cells);

    for (;;) {
        std::fill(visited.begin(), visited.end(), 0);
        queue.clear();
        queue.push_back(0);
        visited[0] = 1;
        std::vector<char> used(steps.size(), 0);
        for (std::size_t qi = 0; qi < queue.size(); ++qi) {
            std::size_t idx = queue[qi];
            int c[4];
            std::size_t rem = idx;
            for (int j = 0; j < D; ++j) {
                c[j] = (int)(rem / (std::size_t)stride[j]);
                rem %= (std::size_t)stride[j];
            }
            for (std::size_t si = 0; si < steps.size(); ++si) {
                if (!kept[si]) continue;
                bool ok = true;
                std::int64_t tgt = (std::int64_t)idx;
                for (int j = 0; j < D; ++j) {
                    int t = c[j] + steps[si].s[(std::size_t)j];
                    if (t < 0 || t > box_bound) {
                        ok = false;
                        break;
                    }
                    tgt += (std::int64_t)steps[si].s[(std::size_t)j] * stride[j];
                }
                if (!ok) continue;
                used[si] = 1;
                if (!visited[(std::size_t)tgt]) {
                    visited[(std::size_t)tgt] = 1;
                    queue.push_back((std::size_t)tgt);
                }
            }
        }
        if (used == kept) break;
        kept = used;
    }

    StepSet unused;
    unused.D = D;
    for (std::size_t si = 0; si < steps.size(); ++si)
        if (!kept[si]) unused.insert(encode_step(steps[si]));
    return unused;
}

// --- model dimension --------------------------------------------------------

struct RedundancyWitness {
    bool exact = false;
    std::vector<Rat> multipliers;  // indexed by coordinate; entry for i itself is 0
    int heuristic_depth = 0;       // set when exact == false
};

struct DimensionCertificate {
    std::vector<int> redundant_coords;
    std::map<int, RedundancyWitness> witnesses;
};

namespace detail {

struct LinRow {
    std::vector<Rat> a;  // coefficients
    Rat b;               // sum a_j v_j <= b
};

// Fourier-Motzkin feasibility with witness extraction. Rows use m variables,
// all additionally constrained to be >= 0 (those rows must be included by the
// caller). Returns a satisfying assignment or nullopt.
inline std::optional<std::vector<Rat>> fourier_motzkin(std::vector<LinRow> rows, int m) {
    std::vector<std::vector<LinRow>> levels;
    for (int v = m - 1; v >= 0; --v) {
        levels.push_back(rows);
        std::vector<LinRow> next;
        std::vector<const LinRow*> pos, neg;
        for (const auto& r : rows) {
            if (r.a[(std::size_t)v].num > 0) pos.push_back(&r);
            else if (r.a[(std::size_t)v].num < 0) neg.push_back(&r);
            else next.push_back(r);
        }
        for (const auto* p : pos)
            for (const auto* q : neg) {
                // (-a_q)*p + a_p*q eliminates v
                Rat cp = Rat(0) - q->a[(std::size_t)v];  // > 0
                Rat cq = p->a[(std::size_t)v];           // > 0
                LinRow r;
                r.a.resize((std::size_t)v);
                for (int j = 0; j < v; ++j)
                    r.a[(std::size_t)j] = cp * p->a[(std::size_t)j] + cq * q->a[(std::size_t)j];
                r.b = cp * p->b + cq * q->b;
                next.push_back(std::move(r));
            }
        for (auto& r : next) r.a.resize((std::size_t)v);
        // dedupe (rows over {-1,0,1}-ish data repeat heavily)
        std::sort(next.begin(), next.end(), [](const LinRow& x, const LinRow& y) {
            for (std::size_t j = 0; j < x.a.size(); ++j) {
                if (x.a[j].num != y.a[j].num) return x.a[j].num < y.a[j].num;
                if (x.a[j].den != y.a[j].den) return x.a[j].den < y.a[j].den;
            }
            if (x.b.num != y.b.num) return x.b.num < y.b.num;
            return x.b.den < y.b.den;
        });
        next.erase(std::unique(next.begin(), next.end(),
                               [](const LinRow& x, const LinRow& y) {
                                   return x.a == y.a && x.b == y.b;
                               }),
                   next.end());
        rows = std::move(next);
    }
    for (const auto& r : rows)
        if (r.b.negative()) return std::nullopt;

    // back-substitute, picking each variable's greatest lower bound
    std::vector<Rat> sol((std::size_t)m);
    for (int v = 0; v < m; ++v) {
        const auto& lvl = levels[(std::size_t)(m - 1 - v)];
        Rat lower(0);
        bool have_lower = false;
        for (const auto& r : lvl) {
            if (r.a[(std::size_t)v].num >= 0) continue;
            Rat rest = r.b;
            for (int j = 0; j < v; ++j) rest = rest - r.a[(std::size_t)j] * sol[(std::size_t)j];
            // a_v * x <= rest with a_v < 0  =>  x >= rest / a_v
            Rat bound = Rat::from128((__int128)rest.num * r.a[(std::size_t)v].den,
                                     (__int128)rest.den * r.a[(std::size_t)v].num);
            if (!have_lower || lower < bound) {
                lower = bound;
                have_lower = true;
            }
        }
        sol[(std::size_t)v] = have_lower ? lower : Rat(0);
    }
    return sol;
}

}  // namespace detail

// Exact sufficient certificate: nonnegative rationals lambda_j (j != i) with
// s_i >= sum_j lambda_j s_j for every step s. Returns multipliers indexed by
// coordinate (entry i is 0), or nullopt if the system is infeasible.
inline std::optional<std::vector<Rat>> exact_redundancy_certificate(const StepSet& s, int coord) {
    int D = s.D;
    int m = D - 1;
    std::vector<int> vars;  // variable index -> coordinate
    for (int j = 0; j < D; ++j)
        if (j != coord) vars.push_back(j);
    std::vector<detail::LinRow> rows;
    for (const Step& st : s.steps()) {
        detail::LinRow r;
        r.a.resize((std::size_t)m);
        for (int v = 0; v < m; ++v) r.a[(std::size_t)v] = Rat(st.s[(std::size_t)vars[(std::size_t)v]]);
        r.b = Rat(st.s[(std::size_t)coord]);
        rows.push_back(std::move(r));
    }
    for (int v = 0; v < m; ++v) {
        detail::LinRow r;
        r.a.resize((std::size_t)m);
        r.a[(std::size_t)v] = Rat(-1);
        r.b = Rat(0);
        rows.push_back(std::move(r));
    }
    auto sol = detail::fourier_motzkin(std::move(rows), m);
    if (!sol) return std::nullopt;
    std::vector<Rat> lambda((std::size_t)D);
    for (int v = 0; v < m; ++v) lambda[(std::size_t)vars[(std::size_t)v]] = (*sol)[(std::size_t)v];
    // verify by direct substitution
    for (const Step& st : s.steps()) {
        Rat lhs(0);
        for (int j = 0; j < D; ++j)
            if (j != coord) lhs = lhs + lambda[(std::size_t)j] * Rat(st.s[(std::size_t)j]);
        if (!(lhs <= Rat(st.s[(std::size_t)coord])))
            throw InternalInconsistency("exact_redundancy_certificate: witness fails substitution");
    }
    for (int j = 0; j < D; ++j)
        if (!lambda[(std::size_t)j].nonneg())
            throw InternalInconsistency("exact_redundancy_certificate: negative multiplier");
    return lambda;
}

namespace detail {

// Per-length totals with and without the nonnegativity constraint on `coord`.
inline bool relaxed_counts_equal(const StepSet& s, int coord, int depth, std::uint64_t prime) {
    CountOptions base;
    base.mode = CountMode::Modular;
    base.prime = prime;
    base.restriction_mask = (s.D == 4 ? 0xFu : (1u << s.D) - 1);
    CountOptions relaxed = base;
    relaxed.restriction_mask &= ~(1u << coord);
    auto a = count_walks(s, depth, base);
    auto b = count_walks(s, depth, relaxed);
    return a.residues == b.residues;
}

}  // namespace detail

// Dimension = D minus the number of redundant coordinates. A coordinate is
// redundant if the exact certificate exists, or (heuristically, flagged) if
// counting with and without its constraint agrees through check_depth.
inline std::pair<int, DimensionCertificate> model_dimension(const StepSet& s, int check_depth = 12,
                                                            std::uint64_t prime = kMersenne61) {
    if (check_depth < 4) throw std::invalid_argument("model_dimension: check_depth must be >= 4");
    DimensionCertificate cert;
    int quick_depth = std::min(4, check_depth);
    for (int i = 0; i < s.D; ++i) {
        // cheap disproof first: a count difference at small depth settles "essential"
        if (!detail::relaxed_counts_equal(s, i, quick_depth, prime)) continue;
        if (auto lambda = exact_redundancy_certificate(s, i)) {
            cert.redundant_coords.push_back(i);
            RedundancyWitness w;
            w.exact = true;
            w.multipliers = std::move(*lambda);
            cert.witnesses.emplace(i, std::move(w));
            continue;
        }
        if (detail::relaxed_counts_equal(s, i, check_depth, prime)) {
            cert.redundant_coords.push_back(i);
            RedundancyWitness w;
            w.exact = false;
            w.heuristic_depth = check_depth;
            cert.witnesses.emplace(i, std::move(w));
        }
    }
    return {s.D - (int)cert.redundant_coords.size(), cert};
}

// --- Hadamard decomposition --------------------------------------------------

struct HadamardSplit {
    std::vector<int> part1;                  // coordinate indices, ascending, nonempty proper
    std::vector<std::vector<std::int8_t>> V;  // part1-projections of steps vanishing on part2
    std::vector<std::vector<std::int8_t>> U;  // part1-projections of the remaining steps
    std::vector<std::vector<std::int8_t>> W;  // part2-projections of the remaining steps (nonzero)
};

inline StepSet hadamard_reconstruct(const HadamardSplit& split, int D) {
    std::vector<int> part2;
    {
        std::set<int> p1(split.part1.begin(), split.part1.end());
        for (int j = 0; j < D; ++j)
            if (!p1.count(j)) part2.push_back(j);
    }
    StepSet out;
    out.D = D;
    auto emit = [&](const std::vector<std::int8_t>& a, const std::vector<std::int8_t>& b) {
        Step st;
        st.D = D;
        for (std::size_t j = 0; j < split.part1.size(); ++j) st.s[(std::size_t)split.part1[j]] = a[j];
        for (std::size_t j = 0; j < part2.size(); ++j) st.s[(std::size_t)part2[j]] = b[j];
        out.insert(encode_step(st));
    };
    std::vector<std::int8_t> zero2(part2.size(), 0);
    for (const auto& v : split.V) emit(v, zero2);
    for (const auto& u : split.U)
        for (const auto& w : split.W) emit(u, w);
    return out;
}

// First split (ascending by part1 subset mask) with S = (V x {0}) u (U x W),
// or nullopt. The reconstruction identity is asserted before returning.
inline std::optional<HadamardSplit> hadamard_decomposition(const StepSet& s) {
    int D = s.D;
    auto steps = s.steps();
    for (unsigned p1mask = 1; p1mask + 1 < (1u << D); ++p1mask) {
        std::vector<int> part1, part2;
        for (int j = 0; j < D; ++j)
            ((p1mask >> j) & 1 ? part1 : part2).push_back(j);

        auto proj = [](const Step& st, const std::vector<int>& coords) {
            std::vector<std::int8_t> out;
            out.reserve(coords.size());
            for (int j : coords) out.push_back(st.s[(std::size_t)j]);
            return out;
        };
        std::set<std::vector<std::int8_t>> V, U, W;
        std::set<std::pair<std::vector<std::int8_t>, std::vector<std::int8_t>>> remaining;
        for (const Step& st : steps) {
            auto a = proj(st, part1);
            auto b = proj(st, part2);
            bool part2_zero = std::all_of(b.begin(), b.end(), [](std::int8_t v) { return v == 0; });
            if (part2_zero) {
                V.insert(a);
            } else {
                U.insert(a);
                W.insert(b);
                remaining.emplace(std::move(a), std::move(b));
            }
        }
        if (remaining.size() != U.size() * W.size()) continue;
        bool product = true;
        for (const auto& u : U) {
            for (const auto& w : W)
                if (!remaining.count({u, w})) {
                    product = false;
                    break;
                }
            if (!product) break;
        }
        if (!product) continue;

        HadamardSplit split;
        split.part1 = part1;
        split.V.assign(V.begin(), V.end());
        split.U.assign(U.begin(), U.end());
        split.W.assign(W.begin(), W.end());
        if (!(hadamard_reconstruct(split, D) == s))
            throw InternalInconsistency("hadamard_decomposition: reconstruction mismatch");
        return split;
    }
    return std::nullopt;
}

}  // namespace orthant
