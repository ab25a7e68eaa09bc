#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "expr.hpp"
#include "field.hpp"
#include "stepset.hpp"

namespace orthant {

struct GroupUndefined : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Raised when the data violates an internal contract (e.g. the same group
// element is reached by words of both parities, so signs are ill-defined).
struct InternalInconsistency : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// The birational involution for coordinate i:
//   x_i -> x_i^{-1} * A_{i,-}(x) / A_{i,+}(x),
// where A_{i,+/-} sum the step monomials with s_i = +/-1 and the x_i factor removed.
struct BirationalGenerator {
    int index = 0;
    std::vector<Step> numerator_steps;    // steps with s_i = -1, i-th coordinate zeroed
    std::vector<Step> denominator_steps;  // steps with s_i = +1, i-th coordinate zeroed
};

inline std::vector<BirationalGenerator> generators(const StepSet& s) {
    std::vector<BirationalGenerator> gens((std::size_t)s.D);
    auto steps = s.steps();
    for (int i = 0; i < s.D; ++i) {
        gens[(std::size_t)i].index = i;
        for (const Step& st : steps) {
            Step reduced = st;
            reduced.s[(std::size_t)i] = 0;
            if (st.s[(std::size_t)i] == -1) gens[(std::size_t)i].numerator_steps.push_back(reduced);
            else if (st.s[(std::size_t)i] == 1) gens[(std::size_t)i].denominator_steps.push_back(reduced);
        }
        if (gens[(std::size_t)i].numerator_steps.empty() || gens[(std::size_t)i].denominator_steps.empty())
            throw GroupUndefined("group undefined for this model: coordinate " + std::to_string(i + 1) +
                                 " lacks a +1 or -1 step");
    }
    return gens;
}

// A batch of k evaluation points with cached coordinate inverses.
// Layout: x[pt*D + j].
struct FPoints {
    int D = 0;
    int k = 0;
    std::vector<std::uint64_t> x;
    std::vector<std::uint64_t> xin;

    static FPoints from(const std::vector<EvaluationPoint>& pts, const PrimeField& f) {
        FPoints out;
        out.k = (int)pts.size();
        out.D = pts.empty() ? 0 : pts[0].D;
        out.x.resize((std::size_t)(out.k * out.D));
        out.xin = out.x;
        for (int t = 0; t < out.k; ++t)
            for (int j = 0; j < out.D; ++j) {
                out.x[(std::size_t)(t * out.D + j)] = pts[(std::size_t)t].coords[j];
                out.xin[(std::size_t)(t * out.D + j)] = pts[(std::size_t)t].coords[j];
            }
        f.batch_inverse(out.xin.data(), out.xin.size());
        return out;
    }
};

namespace detail {

// Sum of step monomials at one point, the i-th coordinate already zeroed out.
inline std::uint64_t laurent_sum(const std::vector<Step>& steps, const std::uint64_t* x,
                                 const std::uint64_t* xin, int D, const PrimeField& f) {
    std::uint64_t total = 0;
    for (const Step& st : steps) {
        std::uint64_t m = 1;
        for (int j = 0; j < D; ++j) {
            std::int8_t e = st.s[(std::size_t)j];
            if (e == 1) m = f.mul(m, x[j]);
            else if (e == -1) m = f.mul(m, xin[j]);
        }
        total = f.add(total, m);
    }
    return total;
}

}  // namespace detail

// Apply generator gen to all points in-place. Throws SingularEvaluation if any
// A-sum or image coordinate vanishes.
inline void apply_generator(const BirationalGenerator& gen, FPoints& pts, const PrimeField& f) {
    int D = pts.D, k = pts.k, i = gen.index;
    // A_minus and A_plus per point, inverted in one batch.
    std::vector<std::uint64_t> am((std::size_t)k), ap((std::size_t)k), inv_both((std::size_t)(2 * k));
    for (int t = 0; t < k; ++t) {
        const std::uint64_t* x = &pts.x[(std::size_t)(t * D)];
        const std::uint64_t* xin = &pts.xin[(std::size_t)(t * D)];
        am[(std::size_t)t] = detail::laurent_sum(gen.numerator_steps, x, xin, D, f);
        ap[(std::size_t)t] = detail::laurent_sum(gen.denominator_steps, x, xin, D, f);
        if (am[(std::size_t)t] == 0 || ap[(std::size_t)t] == 0)
            throw SingularEvaluation("singular generator evaluation");
        inv_both[(std::size_t)t] = ap[(std::size_t)t];
        inv_both[(std::size_t)(k + t)] = am[(std::size_t)t];
    }
    f.batch_inverse(inv_both.data(), inv_both.size());
    for (int t = 0; t < k; ++t) {
        std::uint64_t old_x = pts.x[(std::size_t)(t * D + i)];
        std::uint64_t old_xin = pts.xin[(std::size_t)(t * D + i)];
        std::uint64_t nx = f.mul(old_xin, f.mul(am[(std::size_t)t], inv_both[(std::size_t)t]));
        std::uint64_t nxin = f.mul(old_x, f.mul(ap[(std::size_t)t], inv_both[(std::size_t)(k + t)]));
        pts.x[(std::size_t)(t * D + i)] = nx;
        pts.xin[(std::size_t)(t * D + i)] = nxin;
    }
}

// A group element identified by the images of the k reference points.
struct GroupElement {
    std::vector<std::uint64_t> fingerprint;  // k*D residues, the x-part of the images
    int parent = -1;                         // previous element on a shortest word
    int gen = -1;                            // last generator applied
    int depth = 0;                           // word length; sign = (-1)^depth
};

struct GroupResult {
    int D = 0;
    StepSet model;
    int bound = 800;
    bool exceeds_bound = false;
    bool parity_consistent = true;
    int k = 4;
    std::uint64_t seed = 0;          // the seed that produced the reference points
    std::uint64_t prime = kMersenne61;
    int max_depth = 0;
    std::vector<GroupElement> elements;  // element 0 is the identity
    std::vector<BirationalGenerator> gens;
    FPoints ref;  // reference points (identity fingerprint)

    bool finite() const { return !exceeds_bound; }
    int order() const { return (int)elements.size(); }
    int sign(int idx) const { return elements[(std::size_t)idx].depth % 2 == 0 ? 1 : -1; }

    // Generator word of an element, in application order (leftmost applied first).
    std::vector<int> word(int idx) const {
        std::vector<int> w;
        for (int e = idx; e > 0; e = elements[(std::size_t)e].parent)
            w.push_back(elements[(std::size_t)e].gen);
        std::reverse(w.begin(), w.end());
        return w;
    }
};

namespace detail {

struct FingerprintHash {
    std::size_t operator()(const std::vector<std::uint64_t>& v) const {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (std::uint64_t x : v) {
            h ^= x;
            h *= 0x100000001b3ULL;
            h ^= h >> 29;
        }
        return (std::size_t)h;
    }
};

}  // namespace detail

// Breadth-first closure of {identity} under post-composition with the D
// generators, elements identified by fingerprints at k seeded random points.
// On singular evaluations the whole point set is resampled (at most 5 retries).
inline GroupResult group_bfs(const StepSet& s, int bound = 800, int k_points = 4,
                             std::uint64_t seed = 1, const PrimeField& f = PrimeField{}) {
    if (bound < 1) throw std::invalid_argument("group_bfs: bound must be >= 1");
    if (k_points < 2) throw std::invalid_argument("group_bfs: k_points must be >= 2");
    auto gens = generators(s);
    for (int attempt = 0; attempt < 5; ++attempt) {
        std::uint64_t attempt_seed = seed + 0x9e3779b97f4a7c15ULL * (std::uint64_t)attempt;
        auto pts = random_points(k_points, attempt_seed, s.D, f);
        try {
            GroupResult g;
            g.D = s.D;
            g.model = s;
            g.bound = bound;
            g.k = k_points;
            g.seed = attempt_seed;
            g.prime = f.modulus();
            g.gens = gens;
            g.ref = FPoints::from(pts, f);

            std::vector<FPoints> images;
            std::unordered_map<std::vector<std::uint64_t>, int, detail::FingerprintHash> seen;
            g.elements.push_back(GroupElement{g.ref.x, -1, -1, 0});
            images.push_back(g.ref);
            seen.emplace(g.ref.x, 0);

            for (std::size_t cur = 0; cur < g.elements.size(); ++cur) {
                for (int i = 0; i < s.D; ++i) {
                    FPoints next = images[cur];
                    apply_generator(gens[(std::size_t)i], next, f);
                    auto it = seen.find(next.x);
                    int new_depth = g.elements[cur].depth + 1;
                    if (it == seen.end()) {
                        if ((int)g.elements.size() >= bound) {
                            g.exceeds_bound = true;
                            g.elements.clear();
                            return g;
                        }
                        g.elements.push_back(GroupElement{next.x, (int)cur, i, new_depth});
                        if (new_depth > g.max_depth) g.max_depth = new_depth;
                        seen.emplace(next.x, (int)g.elements.size() - 1);
                        images.push_back(std::move(next));
                    } else if ((g.elements[(std::size_t)it->second].depth & 1) != (new_depth & 1)) {
                        g.parity_consistent = false;
                    }
                }
            }
            return g;
        } catch (const SingularEvaluation&) {
            continue;
        }
    }
    throw SingularEvaluation("group_bfs: persistent singular evaluations after 5 retries");
}

// A group with only the identity, for degenerate cases and tests.
inline GroupResult trivial_group(int D, std::uint64_t seed = 1, int k_points = 4,
                                 const PrimeField& f = PrimeField{}) {
    GroupResult g;
    g.D = D;
    g.k = k_points;
    g.seed = seed;
    g.prime = f.modulus();
    g.ref = FPoints::from(random_points(k_points, seed, D, f), f);
    g.elements.push_back(GroupElement{g.ref.x, -1, -1, 0});
    return g;
}

// Image of an arbitrary point under the element's word of generators.
inline EvaluationPoint element_image(const GroupResult& g, int idx, const EvaluationPoint& pt,
                                     const PrimeField& f = PrimeField{}) {
    FPoints p = FPoints::from({pt}, f);
    for (int gi : g.word(idx)) apply_generator(g.gens[(std::size_t)gi], p, f);
    EvaluationPoint out;
    out.D = g.D;
    for (int j = 0; j < g.D; ++j) out.coords[j] = p.x[(std::size_t)j];
    return out;
}

// Sum over elements of (sign if signed_convention) * product of image coordinates.
inline std::uint64_t orbit_sum_eval(const GroupResult& g, const EvaluationPoint& pt,
                                    bool signed_convention, const PrimeField& f = PrimeField{}) {
    if (!g.finite()) throw std::invalid_argument("orbit_sum_eval: group not finite");
    if (signed_convention && !g.parity_consistent)
        throw InternalInconsistency("orbit_sum_eval: parity inconsistent, signed sum refused");
    std::uint64_t total = 0;
    for (int idx = 0; idx < g.order(); ++idx) {
        EvaluationPoint img = element_image(g, idx, pt, f);
        std::uint64_t m = 1;
        for (int j = 0; j < g.D; ++j) m = f.mul(m, img.coords[j]);
        if (signed_convention && g.sign(idx) < 0) total = f.sub(total, m);
        else total = f.add(total, m);
    }
    return total;
}

// Coarse upper bound on the total degree of the orbit sum as a rational
// function: composing L coordinate maps multiplies degrees by at most 2D each.
inline long double orbit_sum_log2_degree_bound(const GroupResult& g) {
    long double log2_gen = std::log2((long double)(2 * g.D));
    return std::log2((long double)g.D) + (long double)g.max_depth * log2_gen;
}

struct OrbitSumZeroResult {
    bool zero_signed = true;
    bool zero_unsigned = true;
    int points_used = 0;
    long double log2_error_bound = 0;  // probability a nonzero sum passed as zero
};

// Probabilistic zero test per sign convention. The number of points is raised
// if needed so the reported error bound is below 2^-128.
inline OrbitSumZeroResult orbit_sum_zero_test(const GroupResult& g, int n_points = 8,
                                              std::uint64_t seed = 2,
                                              const PrimeField& f = PrimeField{}) {
    if (!g.finite()) throw std::invalid_argument("orbit_sum_zero_test: group not finite");
    long double log2_per_point =
        orbit_sum_log2_degree_bound(g) - std::log2((long double)(f.modulus() - 1));
    int needed = (int)std::ceil(128.0L / -log2_per_point);
    int use_points = std::max(n_points, needed);

    OrbitSumZeroResult res;
    SplitMix64 rng(seed);
    int done = 0;
    int attempts = 0;
    while (done < use_points) {
        if (++attempts > use_points + 50)
            throw SingularEvaluation("orbit_sum_zero_test: persistent singular evaluations");
        auto pt = random_points(1, rng.next(), g.D, f)[0];
        try {
            std::uint64_t unsigned_v = orbit_sum_eval(g, pt, false, f);
            if (unsigned_v != 0) res.zero_unsigned = false;
            if (g.parity_consistent) {
                std::uint64_t signed_v = orbit_sum_eval(g, pt, true, f);
                if (signed_v != 0) res.zero_signed = false;
            }
            ++done;
        } catch (const SingularEvaluation&) {
            continue;  // resample
        }
    }
    res.points_used = use_points;
    res.log2_error_bound = (long double)use_points * log2_per_point;
    return res;
}

struct OrbitSumMatch {
    CoordinatePermutation assignment;  // variable j of var_names maps to coordinate perm[j]
    bool signed_convention = true;
    bool negated = false;
};

// Search all D! variable-to-coordinate assignments and both sign conventions
// (and an overall sign) for one under which the expression equals the orbit sum
// at n_points random points.
inline std::optional<OrbitSumMatch> verify_orbit_sum_expression(
    const GroupResult& g, const RationalExpr& e, const std::vector<std::string>& var_names,
    int n_points = 12, std::uint64_t seed = 3, const PrimeField& f = PrimeField{}) {
    if (!g.finite()) throw std::invalid_argument("verify_orbit_sum_expression: group not finite");
    if ((int)var_names.size() != g.D)
        throw std::invalid_argument("verify_orbit_sum_expression: need exactly D variable names");

    // Evaluate the orbit sums once per point, then try all assignments.
    std::vector<EvaluationPoint> pts;
    std::vector<std::uint64_t> os_signed, os_unsigned;
    SplitMix64 rng(seed);
    int attempts = 0;
    while ((int)pts.size() < n_points) {
        if (++attempts > n_points + 50)
            throw SingularEvaluation("verify_orbit_sum_expression: persistent singular evaluations");
        auto pt = random_points(1, rng.next(), g.D, f)[0];
        try {
            std::uint64_t u = orbit_sum_eval(g, pt, false, f);
            std::uint64_t sv = g.parity_consistent ? orbit_sum_eval(g, pt, true, f) : 0;
            pts.push_back(pt);
            os_unsigned.push_back(u);
            os_signed.push_back(sv);
        } catch (const SingularEvaluation&) {
            continue;
        }
    }

    for (const auto& perm : all_permutations(g.D)) {
        // expression values under this assignment, shared by all conventions
        std::vector<std::uint64_t> ev(pts.size());
        bool usable = true;
        for (std::size_t t = 0; t < pts.size(); ++t) {
            std::map<std::string, std::uint64_t> env;
            for (int j = 0; j < g.D; ++j)
                env[var_names[(std::size_t)j]] = pts[t].coords[perm.perm[(std::size_t)j]];
            try {
                ev[t] = eval_expr(e, env, f);
            } catch (const SingularEvaluation&) {
                usable = false;  // denominator vanished under this assignment
                break;
            }
        }
        if (!usable) continue;
        for (bool conv_signed : {true, false}) {
            if (conv_signed && !g.parity_consistent) continue;
            const auto& os = conv_signed ? os_signed : os_unsigned;
            bool plus = true, minus = true;
            for (std::size_t t = 0; t < pts.size(); ++t) {
                if (ev[t] != os[t]) plus = false;
                if (f.neg(ev[t]) != os[t]) minus = false;
            }
            if (plus || minus) return OrbitSumMatch{perm, conv_signed, !plus};
        }
    }
    return std::nullopt;
}

// Histogram of element orders, computed by iterating each element's word-action
// on the reference points until the identity fingerprint recurs (cap: group order).
inline std::map<int, int> group_signature(const GroupResult& g, const PrimeField& f = PrimeField{}) {
    if (!g.finite()) throw std::invalid_argument("group_signature: group not finite");
    std::map<int, int> hist;
    for (int idx = 0; idx < g.order(); ++idx) {
        auto w = g.word(idx);
        FPoints cur = g.ref;
        int ord = 0;
        do {
            for (int gi : w) apply_generator(g.gens[(std::size_t)gi], cur, f);
            ++ord;
        } while (cur.x != g.ref.x && ord < g.order());
        ++hist[ord];
    }
    return hist;
}

}  // namespace orthant
