#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "npk/error.hpp"
#include "npk/identities.hpp"
#include "npk/smooth_expr.hpp"

using namespace npk;

namespace {

double at(const Expr& f, std::vector<double> x) { return eval(f, x); }

std::vector<double> random_point(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> x(n);
  for (double& c : x) c = u(rng);
  return x;
}

}  // namespace

TEST(Parse, Precedence) {
  EXPECT_EQ(parse_expr("sin(x1)*x2", 2).op(), Op::Mul);
  EXPECT_EQ(parse_expr("x1^2 + 2*x1*x2", 2).op(), Op::Add);
  EXPECT_DOUBLE_EQ(at(parse_expr("-x1^2", 1), {3.0}), -9.0);
  EXPECT_DOUBLE_EQ(at(parse_expr("2^3^2", 0), {}), 512.0);
  EXPECT_DOUBLE_EQ(at(parse_expr("8/4/2", 0), {}), 1.0);
  EXPECT_DOUBLE_EQ(at(parse_expr("1-2-3", 0), {}), -4.0);
}

TEST(Parse, Aliases) {
  EXPECT_DOUBLE_EQ(at(parse_expr("x*y + z", 3), {2.0, 3.0, 4.0}), 10.0);
}

TEST(Parse, Errors) {
  EXPECT_THROW(parse_expr("x3", 2), UnknownVariable);
  EXPECT_THROW(parse_expr("foo(x1)", 1), UnknownVariable);
  EXPECT_THROW(parse_expr("sin(x1", 1), SyntaxError);
  try {
    parse_expr("x1 + * x2", 2);
    FAIL();
  } catch (const SyntaxError& e) {
    EXPECT_EQ(e.offset(), 5u);
  }
}

TEST(Parse, RoundTrip) {
  std::mt19937_64 rng(3);
  const std::vector<std::string> texts{"sin(x1)*x2", "x1^2 + 2*x1*x2", "-(x1 - x2)^3/(1 + x1^2)", "exp(-x1)*log(2 + x2)",
                                       "sqrt(1 + x1^2) - x1^(0.5 + 1)", "cos(x1)^-2"};
  for (const auto& t : texts) {
    const Expr e = parse_expr(t, 2);
    EXPECT_TRUE(structurally_equal(parse_expr(unparse(e), 2), e)) << t << " -> " << unparse(e);
  }
  for (int k = 0; k < 50; ++k) {
    const Expr e = random_smooth(3, rng);
    EXPECT_TRUE(structurally_equal(parse_expr(unparse(e), 3), e)) << unparse(e);
  }
}

TEST(Eval, Values) {
  EXPECT_NEAR(at(parse_expr("sin(x1)", 1), {std::numbers::pi / 2}), 1.0, 1e-15);
  EXPECT_NEAR(at(parse_expr("log(x1)", 1), {std::numbers::e}), 1.0, 1e-15);
  EXPECT_THROW(at(parse_expr("x1/x2", 2), {1.0, 0.0}), DomainError);
  EXPECT_THROW(at(parse_expr("log(x1)", 1), {-1.0}), DomainError);
  EXPECT_THROW(at(parse_expr("sqrt(x1)", 1), {-1.0}), DomainError);
}

TEST(Diff, TableRules) {
  EXPECT_TRUE(sampled_equal(diff(parse_expr("sin(x1)", 1), 0), parse_expr("cos(x1)", 1), 1));
  EXPECT_TRUE(sampled_equal(diff(parse_expr("x1*x2", 2), 0), parse_expr("x2", 2), 2));
  EXPECT_NEAR(at(diff(parse_expr("exp(x1^2)", 1), 0), {1.0}), 2.0 * std::numbers::e, 1e-12);
}

TEST(Diff, MatchesCentralDifferences) {
  std::mt19937_64 rng(5);
  const double h = 1e-5;
  for (int k = 0; k < 100; ++k) {
    const Expr f = random_smooth(3, rng);
    const auto x = random_point(3, rng);
    for (std::size_t i = 0; i < 3; ++i) {
      auto up = x, down = x;
      up[i] += h;
      down[i] -= h;
      const double fd = (eval(f, up) - eval(f, down)) / (2 * h);
      const double d = eval(diff(f, i), x);
      EXPECT_LE(std::abs(d - fd), 1e-5 * (1 + std::abs(d))) << unparse(f);
    }
  }
}

TEST(Diff, LinearityAndLeibniz) {
  std::mt19937_64 rng(6);
  for (int k = 0; k < 100; ++k) {
    const Expr f = random_smooth(2, rng), g = random_smooth(2, rng);
    EXPECT_TRUE(sampled_equal(diff(f + g, 1), diff(f, 1) + diff(g, 1), 2, 1, k));
    EXPECT_TRUE(sampled_equal(diff(f * g, 0), diff(f, 0) * g + f * diff(g, 0), 2, 1, k));
  }
}

TEST(Sampling, DistinguishesAndAgrees) {
  EXPECT_TRUE(sampled_equal(parse_expr("sin(x1)^2 + cos(x1)^2", 1), parse_expr("1", 1), 1));
  EXPECT_FALSE(sampled_equal(parse_expr("x1", 1), parse_expr("x1 + 1e-3", 1), 1));
  EXPECT_EQ(arity(parse_expr("x1 + x3", 3)), 3u);
}

TEST(VectorFieldsM, Brackets) {
  const VectorFieldM d1 = VectorFieldM::coordinate(2, 0), d2 = VectorFieldM::coordinate(2, 1);
  const VectorFieldM z = lie_bracket_m(d1, d2);
  for (const auto& c : z.components) EXPECT_TRUE(sampled_equal(c, Expr::constant(0.0), 2));

  const VectorFieldM x1d2 = parse_vector_field_m("0; x1", 2);
  const VectorFieldM b = lie_bracket_m(d1, x1d2);
  EXPECT_TRUE(sampled_equal(b.components[0], Expr::constant(0.0), 2));
  EXPECT_TRUE(sampled_equal(b.components[1], Expr::constant(1.0), 2));

  EXPECT_THROW(lie_bracket_m(d1, VectorFieldM::coordinate(3, 0)), DimensionMismatch);
}

TEST(VectorFieldsM, Jacobi) {
  std::mt19937_64 rng(7);
  for (int k = 0; k < 10; ++k) {
    const VectorFieldM a = random_field_m(3, rng), b = random_field_m(3, rng), c = random_field_m(3, rng);
    const VectorFieldM j =
        lie_bracket_m(a, lie_bracket_m(b, c)) + lie_bracket_m(b, lie_bracket_m(c, a)) + lie_bracket_m(c, lie_bracket_m(a, b));
    for (const auto& comp : j.components) {
      const auto x = random_point(3, rng);
      EXPECT_LE(std::abs(eval(comp, x)), 1e-8);
    }
  }
}

TEST(FormsM, ExteriorDerivative) {
  const FormM f = FormM::zero_form(2, parse_expr("x1*x2", 2));
  const FormM df = exterior_derivative_m(f);
  EXPECT_TRUE(sampled_equal(df.coefficient({0}), parse_expr("x2", 2), 2));
  EXPECT_TRUE(sampled_equal(df.coefficient({1}), parse_expr("x1", 2), 2));

  const FormM closed = parse_form_m("x2 dx(1) + x1 dx(2)", 2);
  EXPECT_TRUE(sampled_equal(exterior_derivative_m(closed).coefficient({0, 1}), Expr::constant(0.0), 2));

  const FormM w = parse_form_m("x1 dx(2)", 2);
  EXPECT_TRUE(sampled_equal(exterior_derivative_m(w).coefficient({0, 1}), Expr::constant(1.0), 2));
}

TEST(FormsM, SignedIndexSorting) {
  FormM w(3, 2);
  w.add_term(Expr::constant(1.0), {2, 0});
  EXPECT_TRUE(sampled_equal(w.coefficient({0, 2}), Expr::constant(-1.0), 3));
  w.add_term(Expr::constant(5.0), {1, 1});
  EXPECT_EQ(w.terms().size(), 1u);
  FormIndices idx{2, 1, 0};
  EXPECT_EQ(sort_with_sign(idx), -1);
}

TEST(FormsM, DSquaredVanishes) {
  std::mt19937_64 rng(8);
  for (std::size_t n = 2; n <= 3; ++n)
    for (std::size_t p = 0; p + 2 <= n; ++p)
      for (int k = 0; k < 10; ++k) {
        const FormM w = random_poly_form(n, p, rng, 3);
        const FormM dd = exterior_derivative_m(exterior_derivative_m(w));
        for (const auto& t : dd.terms())
          for (int s = 0; s < 50; ++s) EXPECT_LE(std::abs(eval(t.coeff, random_point(n, rng))), 1e-10);
      }
}

TEST(FormsM, WedgeAndContraction) {
  const FormM a = parse_form_m("dx(1)", 2), b = parse_form_m("dx(2)", 2);
  const FormM ab = wedge_m(a, b);
  EXPECT_TRUE(sampled_equal(ab.coefficient({0, 1}), Expr::constant(1.0), 2));
  const std::vector<VectorFieldM> f{VectorFieldM::coordinate(2, 0), VectorFieldM::coordinate(2, 1)};
  EXPECT_TRUE(sampled_equal(contract_m(ab, f), Expr::constant(1.0), 2));
  const std::vector<VectorFieldM> g{f[1], f[0]};
  EXPECT_TRUE(sampled_equal(contract_m(ab, g), Expr::constant(-1.0), 2));
}
