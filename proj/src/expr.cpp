#include "overtpoly/expr.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <map>

namespace overtpoly {

struct Expr::Node {
    ExprKind kind;
    double value = 0.0;
    int var = 0;
    UnaryFn fn = UnaryFn::Neg;
    BinOp op = BinOp::Add;
    Expr a, b;
    std::vector<int> free_vars;
};

Expr Expr::constant(double value) {
    auto n = std::make_shared<Node>();
    n->kind = ExprKind::Constant;
    n->value = value;
    return Expr(std::move(n));
}

Expr Expr::variable(int index) {
    if (index < 1) throw std::invalid_argument("variable index must be >= 1");
    auto n = std::make_shared<Node>();
    n->kind = ExprKind::Variable;
    n->var = index;
    n->free_vars = {index};
    return Expr(std::move(n));
}

Expr Expr::unary(UnaryFn fn, Expr child) {
    auto n = std::make_shared<Node>();
    n->kind = ExprKind::Unary;
    n->fn = fn;
    n->free_vars = child.free_vars();
    n->a = std::move(child);
    return Expr(std::move(n));
}

Expr Expr::binary(BinOp op, Expr lhs, Expr rhs) {
    auto n = std::make_shared<Node>();
    n->kind = ExprKind::Binary;
    n->op = op;
    std::vector<int> vars = lhs.free_vars();
    const auto& rv = rhs.free_vars();
    vars.insert(vars.end(), rv.begin(), rv.end());
    std::sort(vars.begin(), vars.end());
    vars.erase(std::unique(vars.begin(), vars.end()), vars.end());
    n->free_vars = std::move(vars);
    n->a = std::move(lhs);
    n->b = std::move(rhs);
    return Expr(std::move(n));
}

ExprKind Expr::kind() const { return node_->kind; }
double Expr::value() const { return node_->value; }
int Expr::var_index() const { return node_->var; }
UnaryFn Expr::fn() const { return node_->fn; }
BinOp Expr::op() const { return node_->op; }
const Expr& Expr::child() const { return node_->a; }
const Expr& Expr::lhs() const { return node_->a; }
const Expr& Expr::rhs() const { return node_->b; }
const std::vector<int>& Expr::free_vars() const { return node_->free_vars; }
int Expr::max_var() const { return node_->free_vars.empty() ? 0 : node_->free_vars.back(); }

bool struct_equal(const Expr& a, const Expr& b) {
    if (!a || !b) return !a && !b;
    if (a.kind() != b.kind()) return false;
    switch (a.kind()) {
        case ExprKind::Constant: return a.value() == b.value();
        case ExprKind::Variable: return a.var_index() == b.var_index();
        case ExprKind::Unary: return a.fn() == b.fn() && struct_equal(a.child(), b.child());
        case ExprKind::Binary:
            return a.op() == b.op() && struct_equal(a.lhs(), b.lhs()) && struct_equal(a.rhs(), b.rhs());
    }
    return false;
}

ParseError::ParseError(const std::string& message, std::size_t pos)
    : std::runtime_error(message + " at position " + std::to_string(pos)), position(pos) {}

namespace {

const std::map<std::string, UnaryFn, std::less<>> kFunctions = {
    {"sin", UnaryFn::Sin},   {"cos", UnaryFn::Cos},   {"tan", UnaryFn::Tan},
    {"asin", UnaryFn::Asin}, {"acos", UnaryFn::Acos}, {"atan", UnaryFn::Atan},
    {"exp", UnaryFn::Exp},   {"log", UnaryFn::Log},
};

class Parser {
public:
    explicit Parser(std::string_view src) : src_(src) {}

    Expr run() {
        Expr e = expr();
        skip_ws();
        if (pos_ != src_.size()) throw ParseError("unexpected trailing input", pos_);
        return e;
    }

private:
    std::string_view src_;
    std::size_t pos_ = 0;

    void skip_ws() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }

    char peek() {
        skip_ws();
        return pos_ < src_.size() ? src_[pos_] : '\0';
    }

    Expr expr() {
        Expr e = term();
        while (true) {
            const char c = peek();
            if (c != '+' && c != '-') return e;
            ++pos_;
            e = Expr::binary(c == '+' ? BinOp::Add : BinOp::Sub, std::move(e), term());
        }
    }

    Expr term() {
        Expr e = factor();
        while (true) {
            const char c = peek();
            if (c != '*' && c != '/') return e;
            ++pos_;
            e = Expr::binary(c == '*' ? BinOp::Mul : BinOp::Div, std::move(e), factor());
        }
    }

    Expr factor() {
        const char c = peek();
        if (c == '\0') throw ParseError("unexpected end of input", pos_);
        if (c == '-') {
            ++pos_;
            skip_ws();
            if (pos_ < src_.size() &&
                (std::isdigit(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '.'))
                return number(true);
            return Expr::unary(UnaryFn::Neg, factor());
        }
        if (c == '(') {
            ++pos_;
            Expr e = expr();
            if (peek() != ')') throw ParseError("expected ')'", pos_);
            ++pos_;
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number(false);
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
        throw ParseError(std::string("unexpected character '") + c + "'", pos_);
    }

    Expr number(bool negative) {
        skip_ws();
        const std::size_t start = pos_;
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        if (pos_ < src_.size() && src_[pos_] == '.') {
            ++pos_;
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        }
        if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
            std::size_t mark = pos_++;
            if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
            if (pos_ >= src_.size() || !std::isdigit(static_cast<unsigned char>(src_[pos_])))
                pos_ = mark;  // the 'e' was not an exponent
            else
                while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        }
        double v = 0.0;
        const auto res = std::from_chars(src_.data() + start, src_.data() + pos_, v);
        if (res.ec != std::errc() || res.ptr != src_.data() + pos_)
            throw ParseError("malformed number", start);
        return Expr::constant(negative ? -v : v);
    }

    Expr identifier() {
        skip_ws();
        const std::size_t start = pos_;
        while (pos_ < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
            ++pos_;
        const std::string_view name = src_.substr(start, pos_ - start);
        if (name.size() >= 2 && name[0] == 'x' &&
            std::all_of(name.begin() + 1, name.end(),
                        [](char ch) { return std::isdigit(static_cast<unsigned char>(ch)); })) {
            int idx = 0;
            std::from_chars(name.data() + 1, name.data() + name.size(), idx);
            if (idx < 1) throw ParseError("variable index must be >= 1", start);
            return Expr::variable(idx);
        }
        const auto it = kFunctions.find(name);
        if (it == kFunctions.end())
            throw ParseError("unknown identifier '" + std::string(name) + "'", start);
        if (peek() != '(') throw ParseError("expected '(' after function name", pos_);
        ++pos_;
        Expr arg = expr();
        if (peek() != ')') throw ParseError("expected ')'", pos_);
        ++pos_;
        return Expr::unary(it->second, std::move(arg));
    }
};

const char* fn_name(UnaryFn fn) {
    switch (fn) {
        case UnaryFn::Neg: return "-";
        case UnaryFn::Sin: return "sin";
        case UnaryFn::Cos: return "cos";
        case UnaryFn::Tan: return "tan";
        case UnaryFn::Asin: return "asin";
        case UnaryFn::Acos: return "acos";
        case UnaryFn::Atan: return "atan";
        case UnaryFn::Exp: return "exp";
        case UnaryFn::Log: return "log";
    }
    return "?";
}

std::string format_double(double v) {
    std::array<char, 32> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), res.ptr);
}

int precedence(BinOp op) { return (op == BinOp::Add || op == BinOp::Sub) ? 1 : 2; }

void print(const Expr& e, std::string& out) {
    switch (e.kind()) {
        case ExprKind::Constant:
            out += format_double(e.value());
            return;
        case ExprKind::Variable:
            out += "x" + std::to_string(e.var_index());
            return;
        case ExprKind::Unary:
            if (e.fn() == UnaryFn::Neg) {
                out += '-';
                const bool parens = e.child().kind() == ExprKind::Binary ||
                                    (e.child().kind() == ExprKind::Constant && e.child().value() >= 0);
                if (parens) out += '(';
                print(e.child(), out);
                if (parens) out += ')';
            } else {
                out += fn_name(e.fn());
                out += '(';
                print(e.child(), out);
                out += ')';
            }
            return;
        case ExprKind::Binary: {
            const int p = precedence(e.op());
            const bool lp = e.lhs().kind() == ExprKind::Binary && precedence(e.lhs().op()) < p;
            const bool rp = e.rhs().kind() == ExprKind::Binary && precedence(e.rhs().op()) <= p;
            // A negative constant on the right would fuse with the operator sign.
            const bool rneg = !rp && ((e.rhs().kind() == ExprKind::Constant && e.rhs().value() < 0) ||
                                      (e.rhs().kind() == ExprKind::Unary && e.rhs().fn() == UnaryFn::Neg));
            if (lp) out += '(';
            print(e.lhs(), out);
            if (lp) out += ')';
            switch (e.op()) {
                case BinOp::Add: out += " + "; break;
                case BinOp::Sub: out += " - "; break;
                case BinOp::Mul: out += " * "; break;
                case BinOp::Div: out += " / "; break;
            }
            if (rp || rneg) out += '(';
            print(e.rhs(), out);
            if (rp || rneg) out += ')';
            return;
        }
    }
}

} // namespace

Expr parse_expression(std::string_view source) { return Parser(source).run(); }

std::string to_string(const Expr& e) {
    std::string out;
    print(e, out);
    return out;
}

double evaluate(const Expr& e, std::span<const double> x) {
    switch (e.kind()) {
        case ExprKind::Constant: return e.value();
        case ExprKind::Variable: {
            const int i = e.var_index();
            if (i > static_cast<int>(x.size())) throw std::out_of_range("no value for x" + std::to_string(i));
            return x[i - 1];
        }
        case ExprKind::Unary: {
            const double v = evaluate(e.child(), x);
            switch (e.fn()) {
                case UnaryFn::Neg: return -v;
                case UnaryFn::Sin: return std::sin(v);
                case UnaryFn::Cos: return std::cos(v);
                case UnaryFn::Tan: return std::tan(v);
                case UnaryFn::Asin:
                    if (v < -1.0 || v > 1.0) throw DomainError("asin argument outside [-1, 1]");
                    return std::asin(v);
                case UnaryFn::Acos:
                    if (v < -1.0 || v > 1.0) throw DomainError("acos argument outside [-1, 1]");
                    return std::acos(v);
                case UnaryFn::Atan: return std::atan(v);
                case UnaryFn::Exp: return std::exp(v);
                case UnaryFn::Log:
                    if (v <= 0.0) throw DomainError("log of a non-positive value");
                    return std::log(v);
            }
            break;
        }
        case ExprKind::Binary: {
            const double a = evaluate(e.lhs(), x);
            const double b = evaluate(e.rhs(), x);
            switch (e.op()) {
                case BinOp::Add: return a + b;
                case BinOp::Sub: return a - b;
                case BinOp::Mul: return a * b;
                case BinOp::Div:
                    if (b == 0.0) throw DomainError("division by zero");
                    return a / b;
            }
            break;
        }
    }
    throw std::logic_error("unreachable expression kind");
}

Interval interval_evaluate(const Expr& e, std::span<const Interval> box) {
    switch (e.kind()) {
        case ExprKind::Constant: return Interval(e.value());
        case ExprKind::Variable: {
            const int i = e.var_index();
            if (i > static_cast<int>(box.size())) throw std::out_of_range("no interval for x" + std::to_string(i));
            return box[i - 1];
        }
        case ExprKind::Unary: {
            const Interval v = interval_evaluate(e.child(), box);
            switch (e.fn()) {
                case UnaryFn::Neg: return -v;
                case UnaryFn::Sin: return sin(v);
                case UnaryFn::Cos: return cos(v);
                case UnaryFn::Tan: return tan(v);
                case UnaryFn::Asin: return asin(v);
                case UnaryFn::Acos: return acos(v);
                case UnaryFn::Atan: return atan(v);
                case UnaryFn::Exp: return exp(v);
                case UnaryFn::Log: return log(v);
            }
            break;
        }
        case ExprKind::Binary: {
            const Interval a = interval_evaluate(e.lhs(), box);
            const Interval b = interval_evaluate(e.rhs(), box);
            switch (e.op()) {
                case BinOp::Add: return a + b;
                case BinOp::Sub: return a - b;
                case BinOp::Mul: return a * b;
                case BinOp::Div: return a / b;
            }
            break;
        }
    }
    throw std::logic_error("unreachable expression kind");
}

namespace {

bool is_const(const Expr& e, double v) {
    return e.kind() == ExprKind::Constant && e.value() == v;
}

double apply_unary(UnaryFn fn, double v) {
    const double xs[1] = {v};
    return evaluate(Expr::unary(fn, Expr::variable(1)), xs);
}

Expr fold_unary(UnaryFn fn, Expr c) {
    if (c.kind() == ExprKind::Constant) return Expr::constant(apply_unary(fn, c.value()));
    return Expr::unary(fn, std::move(c));
}

Expr fold_binary(BinOp op, Expr a, Expr b) {
    if (a.kind() == ExprKind::Constant && b.kind() == ExprKind::Constant) {
        switch (op) {
            case BinOp::Add: return Expr::constant(a.value() + b.value());
            case BinOp::Sub: return Expr::constant(a.value() - b.value());
            case BinOp::Mul: return Expr::constant(a.value() * b.value());
            case BinOp::Div: return Expr::constant(a.value() / b.value());
        }
    }
    switch (op) {
        case BinOp::Add:
            if (is_const(a, 0)) return b;
            if (is_const(b, 0)) return a;
            break;
        case BinOp::Sub:
            if (is_const(b, 0)) return a;
            if (is_const(a, 0)) return fold_unary(UnaryFn::Neg, std::move(b));
            break;
        case BinOp::Mul:
            if (is_const(a, 0) || is_const(b, 0)) return Expr::constant(0.0);
            if (is_const(a, 1)) return b;
            if (is_const(b, 1)) return a;
            break;
        case BinOp::Div:
            if (is_const(b, 1)) return a;
            if (is_const(a, 0)) return Expr::constant(0.0);
            break;
    }
    return Expr::binary(op, std::move(a), std::move(b));
}

Expr add(Expr a, Expr b) { return fold_binary(BinOp::Add, std::move(a), std::move(b)); }
Expr sub(Expr a, Expr b) { return fold_binary(BinOp::Sub, std::move(a), std::move(b)); }
Expr mul(Expr a, Expr b) { return fold_binary(BinOp::Mul, std::move(a), std::move(b)); }
Expr divide(Expr a, Expr b) { return fold_binary(BinOp::Div, std::move(a), std::move(b)); }
Expr neg(Expr a) { return fold_unary(UnaryFn::Neg, std::move(a)); }

} // namespace

Expr differentiate(const Expr& e, int var) {
    switch (e.kind()) {
        case ExprKind::Constant: return Expr::constant(0.0);
        case ExprKind::Variable: return Expr::constant(e.var_index() == var ? 1.0 : 0.0);
        case ExprKind::Unary: {
            const Expr& u = e.child();
            Expr du = differentiate(u, var);
            switch (e.fn()) {
                case UnaryFn::Neg: return neg(std::move(du));
                case UnaryFn::Sin: return mul(Expr::unary(UnaryFn::Cos, u), std::move(du));
                case UnaryFn::Cos: return mul(neg(Expr::unary(UnaryFn::Sin, u)), std::move(du));
                case UnaryFn::Tan: {
                    Expr c = Expr::unary(UnaryFn::Cos, u);
                    return divide(std::move(du), mul(c, c));
                }
                case UnaryFn::Asin:
                case UnaryFn::Acos: {
                    // 1/sqrt(1-u^2) written as 1/exp(0.5*log(1-u*u)), which stays
                    // inside the supported operator set.
                    Expr one_minus = sub(Expr::constant(1.0), mul(u, u));
                    Expr root = Expr::unary(UnaryFn::Exp,
                                            mul(Expr::constant(0.5), Expr::unary(UnaryFn::Log, std::move(one_minus))));
                    Expr d = divide(std::move(du), std::move(root));
                    return e.fn() == UnaryFn::Asin ? d : neg(std::move(d));
                }
                case UnaryFn::Atan:
                    return divide(std::move(du), add(Expr::constant(1.0), mul(u, u)));
                case UnaryFn::Exp: return mul(Expr::unary(UnaryFn::Exp, u), std::move(du));
                case UnaryFn::Log: return divide(std::move(du), u);
            }
            break;
        }
        case ExprKind::Binary: {
            const Expr& a = e.lhs();
            const Expr& b = e.rhs();
            Expr da = differentiate(a, var);
            Expr db = differentiate(b, var);
            switch (e.op()) {
                case BinOp::Add: return add(std::move(da), std::move(db));
                case BinOp::Sub: return sub(std::move(da), std::move(db));
                case BinOp::Mul: return add(mul(std::move(da), b), mul(a, std::move(db)));
                case BinOp::Div:
                    return divide(sub(mul(std::move(da), b), mul(a, std::move(db))), mul(b, b));
            }
            break;
        }
    }
    throw std::logic_error("unreachable expression kind");
}

namespace {

// A binary root always becomes an internal node so the bounding recursion has
// at least one operator to compose over; below the root, univariate subtrees
// collapse maximally into leaves.
SyntaxTree decompose(const Expr& e, bool root) {
    if (e.free_vars().size() <= 1 && (!root || e.kind() != ExprKind::Binary)) {
        SyntaxTree t;
        t.func = e;
        t.leaf = true;
        return t;
    }
    if (e.kind() == ExprKind::Unary) {
        // -g(x,y) is the rational node 0 - g; other multivariate unary
        // applications have no univariate decomposition.
        if (e.fn() != UnaryFn::Neg)
            throw std::invalid_argument(std::string("cannot bound '") + fn_name(e.fn()) +
                                        "' applied to a multivariate argument");
        return decompose(Expr::binary(BinOp::Sub, Expr::constant(0.0), e.child()), root);
    }
    SyntaxTree t;
    t.func = e;
    t.leaf = false;
    t.op = e.op();
    t.children.push_back(decompose(e.lhs(), false));
    t.children.push_back(decompose(e.rhs(), false));
    return t;
}

} // namespace

SyntaxTree decompose_to_syntax_tree(const Expr& e) { return decompose(e, true); }

} // namespace overtpoly
