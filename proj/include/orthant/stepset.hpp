#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "field.hpp"

namespace orthant {

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

using Mask = unsigned __int128;

inline constexpr int pow3(int d) {
    int r = 1;
    for (int i = 0; i < d; ++i) r *= 3;
    return r;
}

// Number of possible small steps in dimension D: 3^D - 1 (the zero step is excluded).
inline constexpr int num_step_indices(int D) { return pow3(D) - 1; }

// A single small step: D coordinates in {-1,0,1}, not all zero.
struct Step {
    int D = 0;
    std::array<std::int8_t, 4> s{0, 0, 0, 0};

    bool operator==(const Step&) const = default;
};

// Bit index of a step: ternary code of (s_1+1,...,s_D+1), s_1 most significant,
// with the all-zero step's slot removed. A bijection {-1,0,1}^D \ {0} -> [0, 3^D-2].
inline int encode_step(const Step& st) {
    int code = 0;
    for (int j = 0; j < st.D; ++j) code = code * 3 + (st.s[(std::size_t)j] + 1);
    int zero_code = (pow3(st.D) - 1) / 2;
    if (code == zero_code) throw std::invalid_argument("encode_step: all-zero step");
    return code < zero_code ? code : code - 1;
}

inline Step decode_step(int D, int idx) {
    int zero_code = (pow3(D) - 1) / 2;
    int code = idx < zero_code ? idx : idx + 1;
    Step st;
    st.D = D;
    for (int j = D - 1; j >= 0; --j) {
        st.s[(std::size_t)j] = (std::int8_t)(code % 3 - 1);
        code /= 3;
    }
    return st;
}

// A step set as a bitmask over the 3^D - 1 step indices.
struct StepSet {
    int D = 0;
    Mask mask = 0;

    bool operator==(const StepSet&) const = default;

    int cardinality() const {
        std::uint64_t lo = (std::uint64_t)mask;
        std::uint64_t hi = (std::uint64_t)(mask >> 64);
        return __builtin_popcountll(lo) + __builtin_popcountll(hi);
    }

    bool contains(int idx) const { return (mask >> idx) & 1; }
    void insert(int idx) { mask |= (Mask)1 << idx; }

    std::vector<Step> steps() const {
        std::vector<Step> out;
        out.reserve((std::size_t)cardinality());
        for (int i = 0; i < num_step_indices(D); ++i)
            if (contains(i)) out.push_back(decode_step(D, i));
        return out;
    }

    std::vector<int> indices() const {
        std::vector<int> out;
        out.reserve((std::size_t)cardinality());
        for (int i = 0; i < num_step_indices(D); ++i)
            if (contains(i)) out.push_back(i);
        return out;
    }
};

// A bijection on coordinate positions {0,...,D-1}. perm[j] is where position j goes.
struct CoordinatePermutation {
    int D = 0;
    std::array<int, 4> perm{0, 1, 2, 3};

    bool operator==(const CoordinatePermutation&) const = default;

    Step apply(const Step& st) const {
        Step out;
        out.D = st.D;
        for (int j = 0; j < st.D; ++j) out.s[(std::size_t)perm[(std::size_t)j]] = st.s[(std::size_t)j];
        return out;
    }

    CoordinatePermutation inverse() const {
        CoordinatePermutation inv;
        inv.D = D;
        for (int j = 0; j < D; ++j) inv.perm[(std::size_t)perm[(std::size_t)j]] = j;
        return inv;
    }
};

inline std::vector<CoordinatePermutation> all_permutations(int D) {
    std::array<int, 4> idx{0, 1, 2, 3};
    std::vector<CoordinatePermutation> out;
    std::vector<int> v(idx.begin(), idx.begin() + D);
    do {
        CoordinatePermutation p;
        p.D = D;
        for (int j = 0; j < D; ++j) p.perm[(std::size_t)j] = v[(std::size_t)j];
        out.push_back(p);
    } while (std::next_permutation(v.begin(), v.end()));
    return out;
}

// Precomputed bit-index relabelling tables, one per permutation of S_D.
struct PermTables {
    std::vector<CoordinatePermutation> perms;
    std::vector<std::array<std::uint8_t, 80>> bit_map;  // bit_map[p][idx] = image index

    static const PermTables& get(int D) {
        static PermTables tables[5] = {make(0), make(1), make(2), make(3), make(4)};
        return tables[D];
    }

private:
    static PermTables make(int D) {
        PermTables t;
        if (D == 0) return t;
        t.perms = all_permutations(D);
        t.bit_map.resize(t.perms.size());
        int n = num_step_indices(D);
        for (std::size_t p = 0; p < t.perms.size(); ++p)
            for (int i = 0; i < n; ++i)
                t.bit_map[p][(std::size_t)i] = (std::uint8_t)encode_step(t.perms[p].apply(decode_step(D, i)));
        return t;
    }
};

inline StepSet apply_permutation(const CoordinatePermutation& p, const StepSet& s) {
    StepSet out;
    out.D = s.D;
    const auto& tables = PermTables::get(s.D);
    // find the matching table (perms are few, linear search is fine)
    for (std::size_t i = 0; i < tables.perms.size(); ++i) {
        if (tables.perms[i] == p) {
            for (int b = 0; b < num_step_indices(s.D); ++b)
                if (s.contains(b)) out.insert(tables.bit_map[i][(std::size_t)b]);
            return out;
        }
    }
    throw std::invalid_argument("apply_permutation: dimension mismatch");
}

inline Step parse_step_token(const std::string& tok, int D) {
    if ((int)tok.size() != D)
        throw ParseError("step token '" + tok + "' has length " + std::to_string(tok.size()) +
                         ", expected " + std::to_string(D));
    Step st;
    st.D = D;
    bool all_zero = true;
    for (int j = 0; j < D; ++j) {
        char c = tok[(std::size_t)j];
        if (c == '-') st.s[(std::size_t)j] = -1;
        else if (c == '0') st.s[(std::size_t)j] = 0;
        else if (c == '+') st.s[(std::size_t)j] = 1;
        else throw ParseError("invalid character '" + std::string(1, c) + "' in step token '" + tok + "'");
        if (st.s[(std::size_t)j] != 0) all_zero = false;
    }
    if (all_zero) throw ParseError("all-zero step token '" + tok + "'");
    return st;
}

inline std::string render_step_token(const Step& st) {
    std::string out;
    for (int j = 0; j < st.D; ++j)
        out += st.s[(std::size_t)j] < 0 ? '-' : (st.s[(std::size_t)j] == 0 ? '0' : '+');
    return out;
}

// Comma-separated tokens over {-,0,+}; duplicates collapse. Empty text -> empty set.
inline StepSet parse_step_set(const std::string& text, int D) {
    StepSet s;
    s.D = D;
    if (text.empty()) return s;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t comma = text.find(',', pos);
        std::string tok = text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
        s.insert(encode_step(parse_step_token(tok, D)));
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return s;
}

// Tokens in ascending bit-index order; inverse of parse_step_set.
inline std::string render_step_set(const StepSet& s) {
    std::string out;
    bool first = true;
    for (int i = 0; i < num_step_indices(s.D); ++i) {
        if (!s.contains(i)) continue;
        if (!first) out += ',';
        out += render_step_token(decode_step(s.D, i));
        first = false;
    }
    return out;
}

// Minimal mask (as an integer) over all D! coordinate permutations, plus a
// permutation achieving it. Constant on symmetry orbits and idempotent.
inline std::pair<StepSet, CoordinatePermutation> canonical_form(const StepSet& s) {
    const auto& tables = PermTables::get(s.D);
    auto idx = s.indices();
    Mask best = ~(Mask)0;
    std::size_t best_p = 0;
    for (std::size_t p = 0; p < tables.perms.size(); ++p) {
        Mask m = 0;
        for (int i : idx) m |= (Mask)1 << tables.bit_map[p][(std::size_t)i];
        if (m < best) {
            best = m;
            best_p = p;
        }
    }
    if (idx.empty()) best = 0;
    StepSet out;
    out.D = s.D;
    out.mask = best;
    return {out, tables.perms[best_p]};
}

inline bool is_canonical(const StepSet& s) {
    const auto& tables = PermTables::get(s.D);
    auto idx = s.indices();
    for (std::size_t p = 1; p < tables.perms.size(); ++p) {
        Mask m = 0;
        for (int i : idx) m |= (Mask)1 << tables.bit_map[p][(std::size_t)i];
        if (m < s.mask) return false;
    }
    return true;
}

// --- combination ranking (colex order == ascending numeric mask order) ---

inline std::uint64_t binomial(int n, int k) {
    if (k < 0 || k > n) return 0;
    if (k > n - k) k = n - k;
    unsigned __int128 r = 1;
    for (int i = 1; i <= k; ++i) {
        r = r * (unsigned)(n - k + i) / (unsigned)i;
    }
    return (std::uint64_t)r;
}

// Colex unrank: the rank-r combination (ascending indices) of k elements from [0,n).
inline void combination_unrank(int n, int k, std::uint64_t rank, int* out) {
    for (int j = k; j >= 1; --j) {
        // largest c with C(c, j) <= rank
        int c = j - 1;
        while (c + 1 < n && binomial(c + 1, j) <= rank) ++c;
        out[j - 1] = c;
        rank -= binomial(c, j);
        n = c;
    }
}

// Advance ascending-index combination in colex order. Returns false at the end.
inline bool combination_next(int n, int k, int* c) {
    for (int i = 0; i < k; ++i) {
        int limit = (i + 1 < k) ? c[i + 1] - 1 : n - 1;
        if (c[i] < limit) {
            ++c[i];
            for (int j = 0; j < i; ++j) c[j] = j;
            return true;
        }
    }
    return false;
}

struct EnumerationCounts {
    std::uint64_t raw = 0;
    std::uint64_t canonical = 0;
};

// Visit each canonical representative of the symmetry classes of step sets with
// the given cardinality, in ascending mask order. Returns raw and canonical counts.
inline EnumerationCounts enumerate_step_sets(int D, int cardinality,
                                             const std::function<void(const StepSet&)>& visitor) {
    int n = num_step_indices(D);
    if (cardinality < 0 || cardinality > n)
        throw std::invalid_argument("enumerate_step_sets: cardinality out of range");
    EnumerationCounts counts;
    if (cardinality == 0) {
        counts.raw = 1;
        counts.canonical = 1;
        visitor(StepSet{D, 0});
        return counts;
    }
    int c[80];
    for (int i = 0; i < cardinality; ++i) c[i] = i;
    do {
        ++counts.raw;
        StepSet s;
        s.D = D;
        for (int i = 0; i < cardinality; ++i) s.insert(c[i]);
        if (is_canonical(s)) {
            ++counts.canonical;
            visitor(s);
        }
    } while (combination_next(n, cardinality, c));
    return counts;
}

// P_S evaluated at a point with nonzero coordinates: sum over steps of
// prod_j x_j^{s_j}, exponent -1 meaning the field inverse.
inline std::uint64_t step_polynomial_eval(const StepSet& s, const EvaluationPoint& pt,
                                          const PrimeField& f = PrimeField{}) {
    std::uint64_t inv[4];
    for (int j = 0; j < s.D; ++j) {
        if (pt.coords[j] == 0) throw SingularEvaluation("step_polynomial_eval: zero coordinate");
        inv[j] = f.inv(pt.coords[j]);
    }
    std::uint64_t total = 0;
    for (const Step& st : s.steps()) {
        std::uint64_t m = 1;
        for (int j = 0; j < s.D; ++j) {
            if (st.s[(std::size_t)j] == 1) m = f.mul(m, pt.coords[j]);
            else if (st.s[(std::size_t)j] == -1) m = f.mul(m, inv[j]);
        }
        total = f.add(total, m);
    }
    return total;
}

}  // namespace orthant
