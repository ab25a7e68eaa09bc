#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "field.hpp"

namespace orthant {

struct ExprError : std::runtime_error {
    std::size_t position;
    ExprError(const std::string& msg, std::size_t pos)
        : std::runtime_error(msg + " at position " + std::to_string(pos)), position(pos) {}
};

// AST of a multivariate rational expression. Nodes live in a pool so the
// expression is an ordinary value type.
struct RationalExpr {
    enum class Kind { Num, Var, Add, Sub, Mul, Div, Neg, Pow };

    struct Node {
        Kind kind;
        std::int64_t num = 0;      // Num
        std::string name;          // Var
        int a = -1, b = -1;        // children
        std::int64_t exponent = 0; // Pow
    };

    std::vector<Node> nodes;
    int root = -1;

    int add_node(Node n) {
        nodes.push_back(std::move(n));
        return (int)nodes.size() - 1;
    }

    // All variable names occurring in the expression, sorted and deduplicated.
    std::vector<std::string> variables() const {
        std::vector<std::string> out;
        for (const auto& n : nodes)
            if (n.kind == Kind::Var) out.push_back(n.name);
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    }
};

namespace detail {

class ExprParser {
public:
    ExprParser(const std::string& text) : text_(text) {}

    RationalExpr parse() {
        int r = parse_expr();
        skip_ws();
        if (pos_ != text_.size())
            throw ExprError("unexpected character '" + std::string(1, text_[pos_]) + "'", pos_);
        expr_.root = r;
        return std::move(expr_);
    }

private:
    const std::string& text_;
    std::size_t pos_ = 0;
    RationalExpr expr_;

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace((unsigned char)text_[pos_])) ++pos_;
    }

    bool eat(char c) {
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    char peek() {
        skip_ws();
        return pos_ < text_.size() ? text_[pos_] : '\0';
    }

    int parse_expr() {
        int lhs = parse_term();
        for (;;) {
            if (eat('+')) {
                int rhs = parse_term();
                lhs = expr_.add_node({RationalExpr::Kind::Add, 0, "", lhs, rhs, 0});
            } else if (eat('-')) {
                int rhs = parse_term();
                lhs = expr_.add_node({RationalExpr::Kind::Sub, 0, "", lhs, rhs, 0});
            } else {
                return lhs;
            }
        }
    }

    int parse_term() {
        int lhs = parse_factor();
        for (;;) {
            if (eat('*')) {
                int rhs = parse_factor();
                lhs = expr_.add_node({RationalExpr::Kind::Mul, 0, "", lhs, rhs, 0});
            } else if (eat('/')) {
                int rhs = parse_factor();
                lhs = expr_.add_node({RationalExpr::Kind::Div, 0, "", lhs, rhs, 0});
            } else {
                return lhs;
            }
        }
    }

    int parse_factor() {
        int base = parse_base();
        if (eat('^')) {
            std::int64_t e = parse_signed_int();
            base = expr_.add_node({RationalExpr::Kind::Pow, 0, "", base, -1, e});
        }
        return base;
    }

    int parse_base() {
        char c = peek();
        if (c == '(') {
            eat('(');
            int inner = parse_expr();
            if (!eat(')')) throw ExprError("expected ')'", pos_);
            return inner;
        }
        if (c == '-') {
            eat('-');
            int inner = parse_base();
            return expr_.add_node({RationalExpr::Kind::Neg, 0, "", inner, -1, 0});
        }
        if (std::isdigit((unsigned char)c)) {
            std::int64_t v = 0;
            while (pos_ < text_.size() && std::isdigit((unsigned char)text_[pos_])) {
                v = v * 10 + (text_[pos_] - '0');
                ++pos_;
            }
            return expr_.add_node({RationalExpr::Kind::Num, v, "", -1, -1, 0});
        }
        if (std::isalpha((unsigned char)c) || c == '_') {
            std::string name;
            while (pos_ < text_.size() &&
                   (std::isalnum((unsigned char)text_[pos_]) || text_[pos_] == '_')) {
                name += text_[pos_];
                ++pos_;
            }
            return expr_.add_node({RationalExpr::Kind::Var, 0, name, -1, -1, 0});
        }
        if (c == '\0') throw ExprError("unexpected end of input", pos_);
        throw ExprError("unknown character '" + std::string(1, c) + "'", pos_);
    }

    std::int64_t parse_signed_int() {
        skip_ws();
        bool negative = false;
        if (eat('-')) negative = true;
        else eat('+');
        skip_ws();
        if (pos_ >= text_.size() || !std::isdigit((unsigned char)text_[pos_]))
            throw ExprError("expected integer exponent", pos_);
        std::int64_t v = 0;
        while (pos_ < text_.size() && std::isdigit((unsigned char)text_[pos_])) {
            v = v * 10 + (text_[pos_] - '0');
            ++pos_;
        }
        return negative ? -v : v;
    }
};

}  // namespace detail

inline RationalExpr parse_rational_expr(const std::string& text) {
    return detail::ExprParser(text).parse();
}

struct UnboundVariable : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline std::uint64_t eval_expr(const RationalExpr& e,
                               const std::map<std::string, std::uint64_t>& assignment,
                               const PrimeField& f = PrimeField{}) {
    struct Eval {
        const RationalExpr& e;
        const std::map<std::string, std::uint64_t>& env;
        const PrimeField& f;

        std::uint64_t run(int i) const {
            const auto& n = e.nodes[(std::size_t)i];
            using K = RationalExpr::Kind;
            switch (n.kind) {
                case K::Num: {
                    std::int64_t v = n.num % (std::int64_t)f.modulus();
                    return v >= 0 ? (std::uint64_t)v : (std::uint64_t)(v + (std::int64_t)f.modulus());
                }
                case K::Var: {
                    auto it = env.find(n.name);
                    if (it == env.end()) throw UnboundVariable("unbound variable '" + n.name + "'");
                    return it->second;
                }
                case K::Add: return f.add(run(n.a), run(n.b));
                case K::Sub: return f.sub(run(n.a), run(n.b));
                case K::Mul: return f.mul(run(n.a), run(n.b));
                case K::Div: {
                    std::uint64_t d = run(n.b);
                    if (d == 0) throw SingularEvaluation("division by zero");
                    return f.mul(run(n.a), f.inv(d));
                }
                case K::Neg: return f.neg(run(n.a));
                case K::Pow: {
                    std::uint64_t base = run(n.a);
                    if (n.exponent >= 0) return f.pow(base, (std::uint64_t)n.exponent);
                    if (base == 0) throw SingularEvaluation("zero to a negative power");
                    return f.pow(f.inv(base), (std::uint64_t)(-n.exponent));
                }
            }
            throw std::logic_error("eval_expr: bad node");
        }
    };
    return Eval{e, assignment, f}.run(e.root);
}

// Parenthesized rendering; parse(to_string(e)) evaluates identically to e.
inline std::string to_string(const RationalExpr& e, int i = -2) {
    if (i == -2) i = e.root;
    const auto& n = e.nodes[(std::size_t)i];
    using K = RationalExpr::Kind;
    switch (n.kind) {
        case K::Num: return std::to_string(n.num);
        case K::Var: return n.name;
        case K::Add: return "(" + to_string(e, n.a) + " + " + to_string(e, n.b) + ")";
        case K::Sub: return "(" + to_string(e, n.a) + " - " + to_string(e, n.b) + ")";
        case K::Mul: return "(" + to_string(e, n.a) + "*" + to_string(e, n.b) + ")";
        case K::Div: return "(" + to_string(e, n.a) + "/" + to_string(e, n.b) + ")";
        // "(0 - x)" not "(-x)": a '-base' prefix would bind a following '^'
        // to the negated value, changing the meaning for Pow children.
        case K::Neg: return "(0 - " + to_string(e, n.a) + ")";
        case K::Pow: return "(" + to_string(e, n.a) + ")^" +
                            (n.exponent < 0 ? "-" + std::to_string(-n.exponent)
                                            : std::to_string(n.exponent));
    }
    return "";
}

}  // namespace orthant
