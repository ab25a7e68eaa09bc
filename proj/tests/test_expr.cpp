#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <map>

#include "orthant/expr.hpp"

using namespace orthant;

namespace {

// A random AST over the given variables, depth-bounded.
int random_ast(RationalExpr& e, SplitMix64& rng, const std::vector<std::string>& vars, int depth) {
    using K = RationalExpr::Kind;
    if (depth == 0 || rng.next() % 4 == 0) {
        if (rng.next() % 2 == 0)
            return e.add_node({K::Num, (std::int64_t)(rng.next() % 100), "", -1, -1, 0});
        return e.add_node({K::Var, 0, vars[rng.next() % vars.size()], -1, -1, 0});
    }
    switch (rng.next() % 6) {
        case 0: return e.add_node({K::Add, 0, "", random_ast(e, rng, vars, depth - 1),
                                   random_ast(e, rng, vars, depth - 1), 0});
        case 1: return e.add_node({K::Sub, 0, "", random_ast(e, rng, vars, depth - 1),
                                   random_ast(e, rng, vars, depth - 1), 0});
        case 2: return e.add_node({K::Mul, 0, "", random_ast(e, rng, vars, depth - 1),
                                   random_ast(e, rng, vars, depth - 1), 0});
        case 3: return e.add_node({K::Div, 0, "", random_ast(e, rng, vars, depth - 1),
                                   random_ast(e, rng, vars, depth - 1), 0});
        case 4: return e.add_node({K::Neg, 0, "", random_ast(e, rng, vars, depth - 1), -1, 0});
        default:
            return e.add_node({K::Pow, 0, "", random_ast(e, rng, vars, depth - 1), -1,
                               (std::int64_t)(rng.next() % 7) - 3});
    }
}

}  // namespace

TEST_CASE("grammar examples") {
    PrimeField f;
    std::map<std::string, std::uint64_t> env{{"w", 2}, {"x", 3}, {"y", 5}, {"z", 7}};

    auto e = parse_rational_expr("(w^2 - y)*(w*y - x)/(w^4*x^4*y^4*z^4)");
    // (4-5)*(10-3) / (16*81*625*2401)
    std::uint64_t den = f.mul(f.mul(16, 81), f.mul(625, 2401));
    CHECK(eval_expr(e, env, f) == f.mul(f.neg(7), f.inv(den)));
    CHECK(e.variables() == std::vector<std::string>{"w", "x", "y", "z"});

    CHECK(eval_expr(parse_rational_expr("x"), env, f) == 3);
    CHECK(eval_expr(parse_rational_expr("1/(1 - 0)"), env, f) == 1);
    CHECK(eval_expr(parse_rational_expr("x + y"), env, f) == 8);
    CHECK(eval_expr(parse_rational_expr("x^-1"), env, f) == f.inv(3));
    CHECK(eval_expr(parse_rational_expr("-x^2"), env, f) == 9);  // '-' base binds first: (-x)^2
    CHECK(eval_expr(parse_rational_expr("2*x + 3"), env, f) == 9);
    CHECK(eval_expr(parse_rational_expr("(x + y)^3"), env, f) == 512);
    CHECK(eval_expr(parse_rational_expr("x - y - z"), env, f) == f.neg(9));  // left assoc
    CHECK(eval_expr(parse_rational_expr("12/x/2"), env, f) == 2);
}

TEST_CASE("parse errors carry a position") {
    CHECK_THROWS_AS((void)parse_rational_expr("x +"), ExprError);
    CHECK_THROWS_AS((void)parse_rational_expr("(x"), ExprError);
    CHECK_THROWS_AS((void)parse_rational_expr("x ? y"), ExprError);
    CHECK_THROWS_AS((void)parse_rational_expr("x^y"), ExprError);  // exponent must be an integer
    CHECK_THROWS_AS((void)parse_rational_expr(""), ExprError);
    try {
        (void)parse_rational_expr("x * # y");
        CHECK(false);
    } catch (const ExprError& err) {
        CHECK(err.position == 4);
    }
}

TEST_CASE("evaluation errors") {
    PrimeField f;
    std::map<std::string, std::uint64_t> env{{"x", 2}};
    CHECK_THROWS_AS((void)eval_expr(parse_rational_expr("1/(x - 2)"), env, f), SingularEvaluation);
    CHECK_THROWS_AS((void)eval_expr(parse_rational_expr("(x - 2)^-1"), env, f), SingularEvaluation);
    CHECK_THROWS_AS((void)eval_expr(parse_rational_expr("x + y"), env, f), UnboundVariable);
}

TEST_CASE("value-level print/parse round trip on random ASTs") {
    PrimeField f;
    SplitMix64 rng(31);
    std::vector<std::string> vars{"w", "x", "y", "z"};
    int done = 0;
    while (done < 300) {
        RationalExpr e;
        e.root = random_ast(e, rng, vars, 5);
        std::map<std::string, std::uint64_t> env;
        for (const auto& v : vars) env[v] = rng.nonzero_residue(f);
        std::uint64_t direct;
        try {
            direct = eval_expr(e, env, f);
        } catch (const SingularEvaluation&) {
            continue;  // random AST hit a zero denominator; draw another
        }
        auto reparsed = parse_rational_expr(to_string(e));
        CHECK(eval_expr(reparsed, env, f) == direct);
        ++done;
    }
}

TEST_CASE("probabilistic zero test rejects planted nonzero expressions") {
    PrimeField f;
    SplitMix64 rng(37);
    // expressions that are nonzero as rational functions but close to cancelling
    const char* planted[] = {
        "(x + y)^2 - x^2 - 2*x*y - y^2 + 1",
        "(x - y)*(x + y) - x^2 + y^2 + x",
        "x*y*z*w - w*z*y*x + x^3",
        "(x^2 - y^2)/(x - y) - x - y + z^10",
    };
    for (const char* text : planted) {
        auto e = parse_rational_expr(text);
        int zeros = 0;
        for (int k = 0; k < 4; ++k) {
            std::map<std::string, std::uint64_t> env;
            for (const char* v : {"w", "x", "y", "z"}) env[v] = rng.nonzero_residue(f);
            std::uint64_t val;
            try {
                val = eval_expr(e, env, f);
            } catch (const SingularEvaluation&) {
                val = 1;  // x == y draw; counts as nonzero evidence anyway
            }
            if (val == 0) ++zeros;
        }
        CHECK(zeros == 0);
    }
    // and a true identity evaluates to zero everywhere
    auto zero = parse_rational_expr("(x + y)^2 - x^2 - 2*x*y - y^2");
    for (int k = 0; k < 8; ++k) {
        std::map<std::string, std::uint64_t> env;
        for (const char* v : {"x", "y"}) env[v] = rng.nonzero_residue(f);
        CHECK(eval_expr(zero, env, f) == 0);
    }
}
