#include "radflow/expression.hpp"

#include "radflow/error.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <utility>

namespace radflow::expr {

namespace {

struct FuncInfo {
    Func f;
    std::string_view name;
    int arity;
};

constexpr std::array<FuncInfo, 12> kFuncs{{
    {Func::Sin, "sin", 1},
    {Func::Cos, "cos", 1},
    {Func::Sinh, "sinh", 1},
    {Func::Cosh, "cosh", 1},
    {Func::Tanh, "tanh", 1},
    {Func::Exp, "exp", 1},
    {Func::Log, "log", 1},
    {Func::Sqrt, "sqrt", 1},
    {Func::Abs, "abs", 1},
    {Func::Min, "min", 2},
    {Func::Max, "max", 2},
    {Func::Pospart, "pospart", 1},
}};

NodePtr make_node(Op op, std::vector<NodePtr> children = {}, double number = 0.0, Func f = Func::Sin) {
    auto n = std::make_shared<Node>();
    n->op = op;
    n->number = number;
    n->func = f;
    n->children = std::move(children);
    return n;
}

// ---------------------------------------------------------------- parsing

class Parser {
public:
    Parser(std::string_view src, std::string_view variable) : src_(src), variable_(variable) {}

    NodePtr parse_all() {
        NodePtr e = parse_sum();
        skip_ws();
        if (pos_ != src_.size()) {
            throw ParseError(pos_, {"operator", "end of input"}, "unexpected '" + std::string(1, src_[pos_]) + "'");
        }
        return e;
    }

private:
    void skip_ws() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }

    bool accept(char c) {
        skip_ws();
        if (pos_ < src_.size() && src_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    NodePtr parse_sum() {
        NodePtr lhs = parse_product();
        for (;;) {
            if (accept('+')) {
                lhs = make_node(Op::Add, {lhs, parse_product()});
            } else if (accept('-')) {
                lhs = make_node(Op::Sub, {lhs, parse_product()});
            } else {
                return lhs;
            }
        }
    }

    NodePtr parse_product() {
        NodePtr lhs = parse_unary();
        for (;;) {
            if (accept('*')) {
                lhs = make_node(Op::Mul, {lhs, parse_unary()});
            } else if (accept('/')) {
                lhs = make_node(Op::Div, {lhs, parse_unary()});
            } else {
                return lhs;
            }
        }
    }

    NodePtr parse_unary() {
        if (accept('-')) return make_node(Op::Negate, {parse_unary()});
        return parse_power();
    }

    NodePtr parse_power() {
        NodePtr base = parse_primary();
        if (accept('^')) return make_node(Op::Pow, {base, parse_unary()});
        return base;
    }

    NodePtr parse_primary() {
        skip_ws();
        if (pos_ >= src_.size()) {
            throw ParseError(pos_, {"number", "identifier", "(", "-"}, "unexpected end of input");
        }
        const char c = src_[pos_];
        if (c == '(') {
            ++pos_;
            NodePtr inner = parse_sum();
            expect(')');
            return inner;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_identifier();
        throw ParseError(pos_, {"number", "identifier", "(", "-"}, "unexpected '" + std::string(1, c) + "'");
    }

    void expect(char c) {
        skip_ws();
        if (pos_ < src_.size() && src_[pos_] == c) {
            ++pos_;
            return;
        }
        std::string detail = pos_ < src_.size() ? "unexpected '" + std::string(1, src_[pos_]) + "'"
                                                : std::string("unexpected end of input");
        throw ParseError(pos_, {std::string(1, c)}, detail);
    }

    NodePtr parse_number() {
        const std::size_t start = pos_;
        auto digits = [&] {
            std::size_t n = 0;
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
                ++pos_;
                ++n;
            }
            return n;
        };
        std::size_t mantissa = digits();
        if (pos_ < src_.size() && src_[pos_] == '.') {
            ++pos_;
            mantissa += digits();
        }
        if (mantissa == 0) throw ParseError(start, {"digit"}, "malformed number");
        if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
            ++pos_;
            if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
            if (digits() == 0) throw ParseError(pos_, {"digit"}, "malformed exponent");
        }
        double value = 0.0;
        const auto* first = src_.data() + start;
        const auto* last = src_.data() + pos_;
        auto [ptr, ec] = std::from_chars(first, last, value);
        if (ec != std::errc() || ptr != last) throw ParseError(start, {"number"}, "number out of range");
        return make_node(Op::Number, {}, value);
    }

    NodePtr parse_identifier() {
        const std::size_t start = pos_;
        while (pos_ < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
            ++pos_;
        }
        const std::string_view name = src_.substr(start, pos_ - start);
        if (name == variable_) return make_node(Op::Variable);
        for (const auto& info : kFuncs) {
            if (info.name != name) continue;
            expect('(');
            std::vector<NodePtr> args;
            args.push_back(parse_sum());
            for (int i = 1; i < info.arity; ++i) {
                expect(',');
                args.push_back(parse_sum());
            }
            expect(')');
            return make_node(Op::Call, std::move(args), 0.0, info.f);
        }
        std::vector<std::string> expected{std::string(variable_)};
        for (const auto& info : kFuncs) expected.emplace_back(info.name);
        throw ParseError(start, std::move(expected), "unknown identifier '" + std::string(name) + "'");
    }

    std::string_view src_;
    std::string_view variable_;
    std::size_t pos_ = 0;
};

// ------------------------------------------------------------- evaluation

[[noreturn]] void domain_error(const std::string& what) { fail(ErrorCode::EvalDomainError, what); }

// Chain rule for g(a): value g, first derivative g1, second derivative g2 at a.value.
Jet chain(const Jet& a, double g, double g1, double g2) {
    return {g, g1 * a.d1, g2 * a.d1 * a.d1 + g1 * a.d2};
}

Jet mul(const Jet& a, const Jet& b) {
    return {a.value * b.value, a.d1 * b.value + a.value * b.d1,
            a.d2 * b.value + 2.0 * a.d1 * b.d1 + a.value * b.d2};
}

Jet pow_jet(const Jet& a, const Jet& b) {
    const bool const_exponent = b.d1 == 0.0 && b.d2 == 0.0;
    if (const_exponent) {
        const double c = b.value;
        const bool integral = std::floor(c) == c;
        if (a.value < 0.0 && !integral) domain_error("negative base with non-integer exponent");
        if (a.value == 0.0 && c < 0.0) domain_error("zero base with negative exponent");
        if (c == 0.0) return {1.0, 0.0, 0.0};
        const double v = std::pow(a.value, c);
        const double g1 = c == 1.0 ? 1.0 : c * std::pow(a.value, c - 1.0);
        const double g2 = (c == 1.0) ? 0.0 : (c == 2.0 ? 2.0 : c * (c - 1.0) * std::pow(a.value, c - 2.0));
        return chain(a, v, g1, g2);
    }
    if (a.value <= 0.0) domain_error("nonpositive base with variable exponent");
    // a^b = exp(b log a)
    const double la = std::log(a.value);
    const Jet log_a = chain(a, la, 1.0 / a.value, -1.0 / (a.value * a.value));
    const Jet e = mul(b, log_a);
    const double v = std::exp(e.value);
    return chain(e, v, v, v);
}

Jet eval_node(const Node& n, double x) {
    switch (n.op) {
        case Op::Number: return {n.number, 0.0, 0.0};
        case Op::Variable: return {x, 1.0, 0.0};
        case Op::Negate: {
            const Jet a = eval_node(*n.children[0], x);
            return {-a.value, -a.d1, -a.d2};
        }
        case Op::Add:
        case Op::Sub: {
            const Jet a = eval_node(*n.children[0], x);
            const Jet b = eval_node(*n.children[1], x);
            const double s = n.op == Op::Add ? 1.0 : -1.0;
            return {a.value + s * b.value, a.d1 + s * b.d1, a.d2 + s * b.d2};
        }
        case Op::Mul: return mul(eval_node(*n.children[0], x), eval_node(*n.children[1], x));
        case Op::Div: {
            const Jet a = eval_node(*n.children[0], x);
            const Jet b = eval_node(*n.children[1], x);
            if (b.value == 0.0) domain_error("division by zero");
            const double ib = 1.0 / b.value;
            const Jet inv = chain(b, ib, -ib * ib, 2.0 * ib * ib * ib);
            return mul(a, inv);
        }
        case Op::Pow: return pow_jet(eval_node(*n.children[0], x), eval_node(*n.children[1], x));
        case Op::Call: {
            const Jet a = eval_node(*n.children[0], x);
            const double v = a.value;
            switch (n.func) {
                case Func::Sin: return chain(a, std::sin(v), std::cos(v), -std::sin(v));
                case Func::Cos: return chain(a, std::cos(v), -std::sin(v), -std::cos(v));
                case Func::Sinh: return chain(a, std::sinh(v), std::cosh(v), std::sinh(v));
                case Func::Cosh: return chain(a, std::cosh(v), std::sinh(v), std::cosh(v));
                case Func::Tanh: {
                    const double t = std::tanh(v);
                    const double s = 1.0 - t * t;
                    return chain(a, t, s, -2.0 * t * s);
                }
                case Func::Exp: {
                    const double e = std::exp(v);
                    return chain(a, e, e, e);
                }
                case Func::Log:
                    if (v <= 0.0) domain_error("log of a nonpositive value");
                    return chain(a, std::log(v), 1.0 / v, -1.0 / (v * v));
                case Func::Sqrt: {
                    if (v < 0.0) domain_error("sqrt of a negative value");
                    const double s = std::sqrt(v);
                    return chain(a, s, 0.5 / s, -0.25 / (s * v));
                }
                case Func::Abs: {
                    const double sg = v < 0.0 ? -1.0 : 1.0;
                    return chain(a, std::abs(v), sg, 0.0);
                }
                case Func::Pospart:
                    if (v > 0.0) return a;
                    return {0.0, 0.0, 0.0};
                case Func::Min:
                case Func::Max: {
                    const Jet b = eval_node(*n.children[1], x);
                    const bool take_a = n.func == Func::Min ? a.value <= b.value : a.value >= b.value;
                    return take_a ? a : b;
                }
            }
        }
    }
    domain_error("malformed expression");
}

// ---------------------------------------------------------------- printing

int precedence(const Node& n) {
    switch (n.op) {
        case Op::Add:
        case Op::Sub: return 1;
        case Op::Mul:
        case Op::Div: return 2;
        case Op::Negate: return 3;
        case Op::Pow: return 4;
        case Op::Number: return std::signbit(n.number) ? 3 : 5;
        default: return 5;
    }
}

std::string format_number(double v) {
    char buf[32];
    // Shortest representation that round-trips, to keep printed trees readable.
    for (int digits = 1; digits <= 17; ++digits) {
        std::snprintf(buf, sizeof buf, "%.*g", digits, v);
        double back = 0.0;
        const std::string candidate(buf);
        std::from_chars(candidate.data(), candidate.data() + candidate.size(), back);
        if (back == v) return candidate;
    }
    return buf;
}

void print(const Node& n, const std::string& var, std::string& out);

void print_child(const Node& child, bool parens, const std::string& var, std::string& out) {
    if (parens) out += '(';
    print(child, var, out);
    if (parens) out += ')';
}

void print(const Node& n, const std::string& var, std::string& out) {
    switch (n.op) {
        case Op::Number:
            if (std::signbit(n.number)) out += '-';
            out += format_number(std::abs(n.number));
            return;
        case Op::Variable: out += var; return;
        case Op::Negate:
            out += '-';
            print_child(*n.children[0], precedence(*n.children[0]) < 3, var, out);
            return;
        case Op::Add:
        case Op::Sub:
        case Op::Mul:
        case Op::Div: {
            const int p = precedence(n);
            const char* sym = n.op == Op::Add ? " + " : n.op == Op::Sub ? " - " : n.op == Op::Mul ? "*" : "/";
            print_child(*n.children[0], precedence(*n.children[0]) < p, var, out);
            out += sym;
            print_child(*n.children[1], precedence(*n.children[1]) <= p, var, out);
            return;
        }
        case Op::Pow:
            print_child(*n.children[0], precedence(*n.children[0]) <= 4, var, out);
            out += '^';
            print_child(*n.children[1], precedence(*n.children[1]) < 3, var, out);
            return;
        case Op::Call:
            out += func_name(n.func);
            out += '(';
            for (std::size_t i = 0; i < n.children.size(); ++i) {
                if (i) out += ", ";
                print(*n.children[i], var, out);
            }
            out += ')';
            return;
    }
}

}  // namespace

std::string_view func_name(Func f) noexcept {
    for (const auto& info : kFuncs) {
        if (info.f == f) return info.name;
    }
    return "?";
}

int func_arity(Func f) noexcept {
    for (const auto& info : kFuncs) {
        if (info.f == f) return info.arity;
    }
    return 0;
}

Expr Expr::parse(std::string_view source, std::string_view variable) {
    Parser p(source, variable);
    return Expr(p.parse_all(), std::string(variable));
}

Expr Expr::number(double value) { return Expr(make_node(Op::Number, {}, value), "r"); }

Expr Expr::var(std::string_view name) { return Expr(make_node(Op::Variable), std::string(name)); }

Expr Expr::negate(const Expr& operand) {
    return Expr(make_node(Op::Negate, {operand.root_}), operand.variable_);
}

Expr Expr::binary(Op op, const Expr& lhs, const Expr& rhs) {
    if (op != Op::Add && op != Op::Sub && op != Op::Mul && op != Op::Div && op != Op::Pow) {
        fail(ErrorCode::InvalidArgument, "binary() needs an arithmetic operator");
    }
    const std::string& v = lhs.root_ && lhs.root_->op != Op::Number ? lhs.variable_ : rhs.variable_;
    return Expr(make_node(op, {lhs.root_, rhs.root_}), v);
}

Expr Expr::call(Func f, const std::vector<Expr>& args) {
    if (static_cast<int>(args.size()) != func_arity(f)) {
        fail(ErrorCode::InvalidArgument, "wrong number of arguments for " + std::string(func_name(f)));
    }
    std::vector<NodePtr> children;
    std::string v = "r";
    for (const auto& a : args) {
        children.push_back(a.root_);
        if (a.root_->op != Op::Number) v = a.variable_;
    }
    return Expr(make_node(Op::Call, std::move(children), 0.0, f), v);
}

double Expr::eval(double x) const { return eval_jet(x).value; }

Jet Expr::eval_jet(double x) const {
    if (!root_) fail(ErrorCode::InvalidArgument, "evaluating an empty expression");
    return eval_node(*root_, x);
}

std::string Expr::to_string() const {
    std::string out;
    if (root_) print(*root_, variable_, out);
    return out;
}

}  // namespace radflow::expr
