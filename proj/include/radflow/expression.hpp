#pragma once

#include <array>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace radflow::expr {

/// Value together with its first and second derivative in the free variable.
struct Jet {
    double value = 0.0;
    double d1 = 0.0;
    double d2 = 0.0;
};

enum class Op { Number, Variable, Negate, Add, Sub, Mul, Div, Pow, Call };

enum class Func { Sin, Cos, Sinh, Cosh, Tanh, Exp, Log, Sqrt, Abs, Min, Max, Pospart };

std::string_view func_name(Func f) noexcept;
int func_arity(Func f) noexcept;

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Node {
    Op op = Op::Number;
    double number = 0.0;
    Func func = Func::Sin;
    std::vector<NodePtr> children;
};

/// Immutable expression tree over one free variable.
///
/// Grammar (highest precedence first): `^` (right associative), unary minus,
/// `*` `/`, `+` `-`. Calls take one argument except `min`/`max`, which take two.
/// Evaluation is forward-mode: every node kind propagates a second-order jet,
/// so derivatives are exact up to rounding rather than finite differences.
class Expr {
public:
    Expr() = default;

    /// Throws ParseError with the byte offset of the offending token.
    static Expr parse(std::string_view source, std::string_view variable = "r");

    static Expr number(double value);
    static Expr var(std::string_view name = "r");
    static Expr negate(const Expr& operand);
    static Expr binary(Op op, const Expr& lhs, const Expr& rhs);
    static Expr call(Func f, const std::vector<Expr>& args);

    /// Throws Error(EvalDomainError) outside the natural domain of a node
    /// (log of a nonpositive value, division by zero, ...).
    [[nodiscard]] double eval(double x) const;
    [[nodiscard]] Jet eval_jet(double x) const;

    /// Minimal-parenthesis rendering that parses back to the same tree.
    [[nodiscard]] std::string to_string() const;

    [[nodiscard]] const std::string& variable() const noexcept { return variable_; }
    [[nodiscard]] const NodePtr& root() const noexcept { return root_; }
    [[nodiscard]] bool empty() const noexcept { return root_ == nullptr; }

private:
    Expr(NodePtr root, std::string variable) : root_(std::move(root)), variable_(std::move(variable)) {}

    NodePtr root_;
    std::string variable_ = "r";
};

}  // namespace radflow::expr
