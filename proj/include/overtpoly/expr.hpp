#pragma once

#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "overtpoly/interval.hpp"

namespace overtpoly {

enum class ExprKind { Constant, Variable, Unary, Binary };
enum class UnaryFn { Neg, Sin, Cos, Tan, Asin, Acos, Atan, Exp, Log };
enum class BinOp { Add, Sub, Mul, Div };

// Immutable expression handle; cheap to copy, safe to share across threads.
// Variables are 1-based (x1..xn); each node caches its free-variable set.
class Expr {
public:
    Expr() = default;

    static Expr constant(double value);
    static Expr variable(int index);
    static Expr unary(UnaryFn fn, Expr child);
    static Expr binary(BinOp op, Expr lhs, Expr rhs);

    explicit operator bool() const { return node_ != nullptr; }

    ExprKind kind() const;
    double value() const;     // Constant only
    int var_index() const;    // Variable only
    UnaryFn fn() const;       // Unary only
    BinOp op() const;         // Binary only
    const Expr& child() const;
    const Expr& lhs() const;
    const Expr& rhs() const;

    // Sorted, deduplicated variable indices.
    const std::vector<int>& free_vars() const;
    int max_var() const;

private:
    struct Node;
    explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
    std::shared_ptr<const Node> node_;
};

bool struct_equal(const Expr& a, const Expr& b);

struct ParseError : std::runtime_error {
    ParseError(const std::string& message, std::size_t position);
    std::size_t position;
};

// Grammar:
//   expr   := term (("+"|"-") term)*
//   term   := factor (("*"|"/") factor)*
//   factor := number | var | func "(" expr ")" | "(" expr ")" | "-" factor
//   var    := "x" digit+        func := sin|cos|tan|asin|acos|atan|exp|log
// A "-" directly in front of a numeric literal folds into the constant.
Expr parse_expression(std::string_view source);

// Minimal-parenthesis printer; parse(to_string(e)) reproduces e structurally.
std::string to_string(const Expr& e);

// x[i-1] holds the value of variable xi.
double evaluate(const Expr& e, std::span<const double> x);

// Symbolic derivative, simplified by constant folding and the unit
// identities (0+e, 1*e, 0*e, e-0, e/1) only, so results are deterministic.
Expr differentiate(const Expr& e, int var);

// box[i-1] covers variable xi. Sound, not tight.
Interval interval_evaluate(const Expr& e, std::span<const Interval> box);

// Rooted tree whose leaves hold sub-expressions of at most one variable and
// whose internal nodes carry a rational operator over an ordered child list.
struct SyntaxTree {
    Expr func;
    BinOp op = BinOp::Add;  // meaningful only when !leaf
    bool leaf = false;
    std::vector<SyntaxTree> children;

    int arity() const { return static_cast<int>(children.size()); }
};

// Collapses maximal univariate subtrees into leaves. Throws when the
// expression applies an elementary function to a multivariate argument,
// which the enclosure calculus cannot bound.
SyntaxTree decompose_to_syntax_tree(const Expr& e);

} // namespace overtpoly
