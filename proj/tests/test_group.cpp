#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <map>
#include <numeric>

#include "orthant/group.hpp"

using namespace orthant;

namespace {

const char* kOrder24 = "---0,--0-,--++,-+00,+0--,+00+,+0+0";
const char* kOrder36 = "-0-0,0--+,-00+,0-0-,++00,-0+-,0-+0";
const char* kOrder120 = "0-00,00-0,000-,+000,-+++";
const char* kS5Nonzero = "000-,+0-0,-+00,00+0,0-0+";

// Order histogram of S_n by brute force over all permutations.
std::map<int, int> sym_histogram(int n) {
    std::vector<int> p((std::size_t)n);
    std::iota(p.begin(), p.end(), 0);
    std::map<int, int> hist;
    do {
        std::vector<char> seen((std::size_t)n, 0);
        int order = 1;
        for (int i = 0; i < n; ++i) {
            if (seen[(std::size_t)i]) continue;
            int len = 0, j = i;
            while (!seen[(std::size_t)j]) {
                seen[(std::size_t)j] = 1;
                j = p[(std::size_t)j];
                ++len;
            }
            order = std::lcm(order, len);
        }
        ++hist[order];
    } while (std::next_permutation(p.begin(), p.end()));
    return hist;
}

// Histogram of a direct product from factor histograms: order = lcm of parts.
std::map<int, int> product_histogram(const std::map<int, int>& a, const std::map<int, int>& b) {
    std::map<int, int> hist;
    for (auto [oa, ca] : a)
        for (auto [ob, cb] : b) hist[std::lcm(oa, ob)] += ca * cb;
    return hist;
}

std::map<int, int> c2_histogram() { return {{1, 1}, {2, 1}}; }

}  // namespace

TEST_CASE("generators: axis steps invert coordinates") {
    PrimeField f;
    StepSet axes;
    axes.D = 4;
    for (int j = 0; j < 4; ++j)
        for (int v : {-1, 1}) {
            Step st;
            st.D = 4;
            st.s[(std::size_t)j] = (std::int8_t)v;
            axes.insert(encode_step(st));
        }
    auto gens = generators(axes);
    auto pts = random_points(4, 5, 4, f);
    FPoints p = FPoints::from(pts, f);
    for (int i = 0; i < 4; ++i) {
        FPoints q = p;
        apply_generator(gens[(std::size_t)i], q, f);
        for (int t = 0; t < q.k; ++t)
            for (int j = 0; j < 4; ++j) {
                std::uint64_t want = j == i ? f.inv(p.x[(std::size_t)(t * 4 + j)])
                                            : p.x[(std::size_t)(t * 4 + j)];
                CHECK(q.x[(std::size_t)(t * 4 + j)] == want);
            }
    }
}

TEST_CASE("generators: undefined when a coordinate lacks a +1 or -1 step") {
    CHECK_THROWS_AS((void)generators(parse_step_set("+000,-000,0+00", 4)), GroupUndefined);
    CHECK_THROWS_AS((void)generators(parse_step_set("+000", 4)), GroupUndefined);
}

TEST_CASE("generators are involutions at random points") {
    PrimeField f;
    for (const char* model : {kOrder24, kOrder36, kOrder120, kS5Nonzero}) {
        StepSet s = parse_step_set(model, 4);
        auto gens = generators(s);
        SplitMix64 rng(71);
        int done = 0;
        while (done < 100) {
            auto pts = random_points(1, rng.next(), 4, f);
            FPoints p = FPoints::from(pts, f);
            try {
                for (const auto& gen : gens) {
                    FPoints q = p;
                    apply_generator(gen, q, f);
                    apply_generator(gen, q, f);
                    CHECK(q.x == p.x);
                }
            } catch (const SingularEvaluation&) {
                continue;
            }
            ++done;
        }
    }
}

TEST_CASE("generator images match an independent evaluation of the formula") {
    // second implementation, straight from the definition: x_i -> x_i^{-1} A_-/A_+
    // with A_+/- the sums over steps with s_i = +/-1 of the monomial divided by x_i^{s_i}
    PrimeField f;
    StepSet s = parse_step_set(kS5Nonzero, 4);
    auto gens = generators(s);
    auto pts = random_points(8, 77, 4, f);
    for (const auto& pt : pts) {
        for (int i = 0; i < 4; ++i) {
            std::uint64_t aminus = 0, aplus = 0;
            for (const Step& st : s.steps()) {
                if (st.s[(std::size_t)i] == 0) continue;
                std::uint64_t m = 1;
                for (int j = 0; j < 4; ++j) {
                    if (j == i) continue;
                    if (st.s[(std::size_t)j] == 1) m = f.mul(m, pt.coords[j]);
                    if (st.s[(std::size_t)j] == -1) m = f.mul(m, f.inv(pt.coords[j]));
                }
                if (st.s[(std::size_t)i] == -1) aminus = f.add(aminus, m);
                else aplus = f.add(aplus, m);
            }
            std::uint64_t want = f.mul(f.inv(pt.coords[i]), f.mul(aminus, f.inv(aplus)));

            FPoints p = FPoints::from({pt}, f);
            apply_generator(gens[(std::size_t)i], p, f);
            CHECK(p.x[(std::size_t)i] == want);
            for (int j = 0; j < 4; ++j)
                if (j != i) CHECK(p.x[(std::size_t)j] == pt.coords[j]);
        }
    }
}

TEST_CASE("group orders of the named models") {
    PrimeField f;
    auto g24 = group_bfs(parse_step_set(kOrder24, 4));
    auto g36 = group_bfs(parse_step_set(kOrder36, 4));
    auto g120 = group_bfs(parse_step_set(kOrder120, 4));
    REQUIRE(g24.finite());
    REQUIRE(g36.finite());
    REQUIRE(g120.finite());
    CHECK(g24.order() == 24);
    CHECK(g36.order() == 36);
    CHECK(g120.order() == 120);
    CHECK(g24.parity_consistent);
    CHECK(g36.parity_consistent);
    CHECK(g120.parity_consistent);

    // diagonal 2D walks: two commuting coordinate inversions, order 4
    auto gd = group_bfs(parse_step_set("++,--,+-,-+", 2));
    REQUIRE(gd.finite());
    CHECK(gd.order() == 4);

    // order is seed-invariant
    for (const char* model : {kOrder24, kOrder36, kOrder120}) {
        auto a = group_bfs(parse_step_set(model, 4), 800, 4, 1, f);
        auto b = group_bfs(parse_step_set(model, 4), 800, 4, 987654321, f);
        CHECK(a.order() == b.order());
    }
}

TEST_CASE("bfs closure and exceeds-bound verdicts") {
    PrimeField f;
    auto g = group_bfs(parse_step_set(kOrder24, 4));
    // closure: every element composed with every generator stays in the set
    std::vector<std::vector<std::uint64_t>> fps;
    for (const auto& el : g.elements) fps.push_back(el.fingerprint);
    for (int idx = 0; idx < g.order(); ++idx) {
        FPoints cur = g.ref;
        for (int gi : g.word(idx)) apply_generator(g.gens[(std::size_t)gi], cur, f);
        CHECK(cur.x == g.elements[(std::size_t)idx].fingerprint);
        for (int i = 0; i < 4; ++i) {
            FPoints nxt = cur;
            apply_generator(g.gens[(std::size_t)i], nxt, f);
            CHECK(std::find(fps.begin(), fps.end(), nxt.x) != fps.end());
        }
    }

    // an infinite-group model exceeds a small bound, and the default one
    auto inf_small = group_bfs(parse_step_set("++,--", 2), 10);
    CHECK(!inf_small.finite());
    CHECK(inf_small.elements.empty());
    auto inf = group_bfs(parse_step_set("++,--", 2));
    CHECK(!inf.finite());
}

TEST_CASE("orbit sum evaluation") {
    PrimeField f;
    // trivial group: the monomial itself
    auto t = trivial_group(4);
    EvaluationPoint pt;
    pt.D = 4;
    pt.coords[0] = 2;
    pt.coords[1] = 3;
    pt.coords[2] = 5;
    pt.coords[3] = 7;
    CHECK(orbit_sum_eval(t, pt, true, f) == 210);
    CHECK(orbit_sum_eval(t, pt, false, f) == 210);
    auto tz = orbit_sum_zero_test(t);
    CHECK(!tz.zero_signed);
    CHECK(!tz.zero_unsigned);

    // "recurrence" model: zero under the signed convention
    auto g36 = group_bfs(parse_step_set(kOrder36, 4));
    auto z36 = orbit_sum_zero_test(g36);
    CHECK(z36.zero_signed);
    CHECK(z36.log2_error_bound < -120);

    // the S_5 nonzero model: nonzero under both conventions
    auto g120 = group_bfs(parse_step_set(kS5Nonzero, 4));
    auto z120 = orbit_sum_zero_test(g120);
    CHECK(!z120.zero_signed);
    CHECK(!z120.zero_unsigned);
}

TEST_CASE("verify printed orbit sum expressions") {
    PrimeField f;
    auto g = group_bfs(parse_step_set(kS5Nonzero, 4));
    const std::string text =
        "((w^2 - y)*(w*y - x)*(w*x - y^2)*(w*x - z)*(w*z - 1)*(w*z - x*y)*(x*z - y)*"
        "(w - y*z)*(x^2 - y*z)*(x - z^2))/(w^4*x^4*y^4*z^4)";
    auto e = parse_rational_expr(text);
    auto match = verify_orbit_sum_expression(g, e, {"x", "y", "z", "w"});
    REQUIRE(match.has_value());

    // perturbation oracle: scaling the expression must break the match
    auto doubled = parse_rational_expr("2*(" + text + ")");
    CHECK(!verify_orbit_sum_expression(g, doubled, {"x", "y", "z", "w"}));

    // trivial group with the plain monomial
    auto t = trivial_group(4);
    auto mono = parse_rational_expr("x1*x2*x3*x4");
    CHECK(verify_orbit_sum_expression(t, mono, {"x1", "x2", "x3", "x4"}).has_value());
}

TEST_CASE("group signatures match abstract order profiles") {
    PrimeField f;
    auto s3 = sym_histogram(3);
    CHECK(s3 == std::map<int, int>{{1, 1}, {2, 3}, {3, 2}});
    auto c2c2s3 = product_histogram(product_histogram(c2_histogram(), c2_histogram()), s3);
    auto s3s3 = product_histogram(s3, s3);
    auto s5 = sym_histogram(5);

    auto g24 = group_bfs(parse_step_set(kOrder24, 4));
    CHECK(group_signature(g24, f) == c2c2s3);
    auto g36 = group_bfs(parse_step_set(kOrder36, 4));
    CHECK(group_signature(g36, f) == s3s3);
    auto g120 = group_bfs(parse_step_set(kOrder120, 4));
    CHECK(group_signature(g120, f) == s5);

    CHECK(group_signature(trivial_group(4), f) == std::map<int, int>{{1, 1}});

    // the three profiles are pairwise distinct, so the hint separates the types
    CHECK(c2c2s3 != s3s3);
    CHECK(s3s3 != s5);
    CHECK(c2c2s3 != s5);
}
