#include "radflow/error.hpp"
#include "radflow/expression.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using radflow::ErrorCode;
using radflow::expr::Expr;
using radflow::expr::Func;
using radflow::expr::Op;

namespace {

// Random trees; `smooth` restricts to node kinds that are C² everywhere they are defined.
Expr random_tree(std::mt19937_64& rng, int depth, bool smooth) {
    std::uniform_int_distribution<int> pick(0, depth <= 0 ? 1 : 9);
    std::uniform_real_distribution<double> num(0.1, 3.0);
    switch (pick(rng)) {
        case 0: return Expr::number(std::round(num(rng) * 100.0) / 100.0);
        case 1: return Expr::var("r");
        case 2: return Expr::negate(random_tree(rng, depth - 1, smooth));
        case 3: return Expr::binary(Op::Add, random_tree(rng, depth - 1, smooth), random_tree(rng, depth - 1, smooth));
        case 4: return Expr::binary(Op::Sub, random_tree(rng, depth - 1, smooth), random_tree(rng, depth - 1, smooth));
        case 5: return Expr::binary(Op::Mul, random_tree(rng, depth - 1, smooth), random_tree(rng, depth - 1, smooth));
        case 6: {
            // Denominator bounded away from zero.
            Expr sq = Expr::binary(Op::Pow, random_tree(rng, depth - 1, smooth), Expr::number(2));
            return Expr::binary(Op::Div, random_tree(rng, depth - 1, smooth), Expr::binary(Op::Add, Expr::number(1), sq));
        }
        case 7: {
            std::uniform_int_distribution<int> e(2, 3);
            return Expr::binary(Op::Pow, random_tree(rng, depth - 1, smooth), Expr::number(e(rng)));
        }
        case 8: {
            const Func smooth_funcs[] = {Func::Sin, Func::Cos, Func::Tanh, Func::Sinh, Func::Cosh};
            std::uniform_int_distribution<int> f(0, 4);
            Expr inner = Expr::call(Func::Tanh, {random_tree(rng, depth - 1, smooth)});
            return Expr::call(smooth_funcs[f(rng)], {inner});
        }
        default: {
            if (smooth) return Expr::call(Func::Exp, {Expr::call(Func::Sin, {random_tree(rng, depth - 1, smooth)})});
            const Func kinks[] = {Func::Abs, Func::Pospart, Func::Min, Func::Max};
            std::uniform_int_distribution<int> f(0, 3);
            const Func fn = kinks[f(rng)];
            if (fn == Func::Min || fn == Func::Max) {
                return Expr::call(fn, {random_tree(rng, depth - 1, smooth), random_tree(rng, depth - 1, smooth)});
            }
            return Expr::call(fn, {random_tree(rng, depth - 1, smooth)});
        }
    }
}

}  // namespace

TEST(Expression, KnownValues) {
    const Expr s = Expr::parse("sinh(r)");
    EXPECT_NEAR(s.eval(1.0), std::sinh(1.0), 1e-15);
    EXPECT_NEAR(s.eval_jet(1.0).d1, std::cosh(1.0), 1e-15);
    EXPECT_NEAR(Expr::parse("r + r^3").eval_jet(1.0).d1, 4.0, 1e-15);
    EXPECT_NEAR(Expr::parse("r + r^3").eval_jet(1.0).d2, 6.0, 1e-15);
}

TEST(Expression, Precedence) {
    EXPECT_DOUBLE_EQ(Expr::parse("2^3^2").eval(0), 512.0);
    EXPECT_DOUBLE_EQ(Expr::parse("-2^2").eval(0), -4.0);
    EXPECT_DOUBLE_EQ(Expr::parse("2^-1").eval(0), 0.5);
    EXPECT_DOUBLE_EQ(Expr::parse("1 - 2 - 3").eval(0), -4.0);
    EXPECT_DOUBLE_EQ(Expr::parse("8 / 4 / 2").eval(0), 1.0);
    EXPECT_DOUBLE_EQ(Expr::parse("1 + 2 * 3").eval(0), 7.0);
    EXPECT_DOUBLE_EQ(Expr::parse("max(r, 2) + min(r, 2)").eval(5), 7.0);
    EXPECT_DOUBLE_EQ(Expr::parse("pospart(u - 1)", "u").eval(0.5), 0.0);
    EXPECT_DOUBLE_EQ(Expr::parse("1.5e1").eval(0), 15.0);
}

TEST(Expression, ParseErrorOffsets) {
    try {
        (void)Expr::parse("sin(");
        FAIL() << "expected a parse error";
    } catch (const radflow::ParseError& e) {
        EXPECT_EQ(e.offset(), 4u);
        EXPECT_FALSE(e.expected().empty());
    }
    try {
        (void)Expr::parse("r + foo(r)");
        FAIL();
    } catch (const radflow::ParseError& e) {
        EXPECT_EQ(e.offset(), 4u);
    }
    EXPECT_THROW((void)Expr::parse("r r"), radflow::ParseError);
    EXPECT_THROW((void)Expr::parse("min(r)"), radflow::ParseError);
    EXPECT_THROW((void)Expr::parse("u", "r"), radflow::ParseError);
}

TEST(Expression, DomainErrors) {
    try {
        (void)Expr::parse("log(r)").eval(0.0);
        FAIL();
    } catch (const radflow::Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::EvalDomainError);
    }
    EXPECT_THROW((void)Expr::parse("sqrt(r)").eval(-1.0), radflow::Error);
    EXPECT_THROW((void)Expr::parse("1/r").eval(0.0), radflow::Error);
    EXPECT_THROW((void)Expr::parse("r^0.5").eval(-1.0), radflow::Error);
}

TEST(Expression, PrintParseRoundTripOnRandomTrees) {
    std::mt19937_64 rng(7);
    for (int i = 0; i < 100; ++i) {
        const Expr e = random_tree(rng, 5, false);
        const std::string once = e.to_string();
        const std::string twice = Expr::parse(once).to_string();
        EXPECT_EQ(once, twice);
    }
    const Expr neg = Expr::binary(Op::Pow, Expr::number(-3.0), Expr::number(2.0));
    EXPECT_EQ(Expr::parse(neg.to_string()).to_string(), neg.to_string());
    EXPECT_DOUBLE_EQ(Expr::parse(neg.to_string()).eval(0), 9.0);
}

TEST(Expression, StructuralDerivativesMatchFiniteDifferences) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> xs(0.2, 1.5);
    int checked = 0;
    for (int i = 0; i < 100; ++i) {
        const Expr e = random_tree(rng, 4, true);
        for (int k = 0; k < 20; ++k) {
            const double x = xs(rng);
            const double h = 1e-5;
            const auto j = e.eval_jet(x);
            const auto jp = e.eval_jet(x + h);
            const auto jm = e.eval_jet(x - h);
            const double fd1 = (jp.value - jm.value) / (2 * h);
            const double fd2 = (jp.d1 - jm.d1) / (2 * h);
            EXPECT_LE(std::abs(fd1 - j.d1), 1e-6 * std::max(1.0, std::abs(j.d1))) << e.to_string() << " at " << x;
            EXPECT_LE(std::abs(fd2 - j.d2), 1e-6 * std::max(1.0, std::abs(j.d2))) << e.to_string() << " at " << x;
            ++checked;
        }
    }
    EXPECT_EQ(checked, 2000);
}
