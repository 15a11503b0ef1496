#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "npk/error.hpp"
#include "npk/identities.hpp"
#include "npk/near_points.hpp"
#include "oracles.hpp"

using namespace npk;

namespace {

AElement el(std::initializer_list<double> c) { return AElement(std::vector<double>(c)); }

NearPoint point(const AlgebraPtr& A, std::vector<AElement> c) { return NearPoint(A, std::move(c)); }

/// Smooth functions that stay well inside every evaluation domain on the
/// unit box, including log and sqrt of 1 + (−0.5, 0.5).
Expr random_with_partial_ops(std::size_t n, std::mt19937_64& rng) {
  Expr f = random_smooth(n, rng);
  const Expr x = Expr::var(std::uniform_int_distribution<std::size_t>(0, n - 1)(rng));
  switch (std::uniform_int_distribution<int>(0, 3)(rng)) {
    case 0: return f + log(Expr::constant(1.0) + Expr::constant(0.4) * x);
    case 1: return f * sqrt(Expr::constant(1.0) + Expr::constant(0.4) * x);
    case 2: return f / (Expr::constant(2.0) + x);
    default: return f * pow(Expr::constant(1.2) + Expr::constant(0.3) * x, 2.5);
  }
}

}  // namespace

TEST(Charts, Parse) {
  const ChartModel b = ChartModel::parse("box:[-1,1]^2");
  EXPECT_EQ(b.dim(), 2u);
  EXPECT_EQ(b.kind(), ChartModel::Kind::Box);
  const ChartModel c = ChartModel::parse("box:[-1,1]x[0,3]");
  EXPECT_EQ(c.dim(), 2u);
  EXPECT_DOUBLE_EQ(c.intervals()[1].hi, 3.0);
  EXPECT_EQ(ChartModel::parse("circle").kind(), ChartModel::Kind::Circle);
  EXPECT_THROW(ChartModel::parse("sphere"), InvalidChart);
  EXPECT_THROW(ChartModel::parse("box:[1,-1]^2"), InvalidChart);
}

TEST(Charts, SamplesStayInside) {
  std::mt19937_64 rng(1);
  const ChartModel c = ChartModel::parse("box:[-1,1]x[2,3]");
  for (int k = 0; k < 200; ++k) EXPECT_TRUE(c.contains(c.sample_point(rng)));
}

TEST(NearPoints, BasePointMustLieInChart) {
  const auto A = WeilAlgebra::parse("R[x]/(x^2)");
  const ChartModel c = ChartModel::unit_box(1);
  EXPECT_NO_THROW(NearPoint(A, {el({0.5, 3.0})}, c));
  EXPECT_THROW(NearPoint(A, {el({1.5, 0.0})}, c), BasePointOutsideTarget);
  EXPECT_THROW(NearPoint(A, {el({0.5, 0.0, 0.0})}), DimensionMismatch);
}

TEST(NearPoints, JsonRoundTrip) {
  const auto A = WeilAlgebra::parse("R[x]/(x^2)");
  const NearPoint xi = NearPoint::from_json("[[1.0, 0.5], [2.0, -1.0]]", A, ChartModel::parse("box:[-5,5]^2"));
  EXPECT_EQ(xi.coord(1), el({2.0, -1.0}));
  const NearPoint back = NearPoint::from_json(xi.to_json(), A, ChartModel::parse("box:[-5,5]^2"));
  EXPECT_EQ(back.coords(), xi.coords());
  EXPECT_THROW(NearPoint::from_json("[[1.0, 0.5", A, ChartModel::unit_box(1)), SyntaxError);
}

TEST(Lift, DualSquare) {
  const auto A = WeilAlgebra::parse("R[x]/(x^2)");
  const double a = 0.7, b = -1.3;
  const AElement v = lift_f(parse_expr("x1^2", 1), point(A, {el({a, b})}));
  EXPECT_NEAR(v[0], a * a, 1e-15);
  EXPECT_NEAR(v[1], 2 * a * b, 1e-15);
}

TEST(Lift, SineToSecondOrder) {
  const auto A = WeilAlgebra::parse("R[t]/(t^3)");
  const double a = 0.4;
  const AElement v = lift_f(parse_expr("sin(x1)", 1), point(A, {el({a, 1.0, 0.0})}));
  EXPECT_LE(max_abs_diff(v, el({std::sin(a), std::cos(a), -std::sin(a) / 2})), 1e-15);
  const AElement z = lift_f(parse_expr("sin(x1)", 1), point(A, {el({0.0, 1.0, 0.0})}));
  EXPECT_LE(max_abs_diff(z, el({0, 1, 0})), 1e-15);
}

TEST(Lift, Constant) {
  const auto A = WeilAlgebra::parse("R[x,y]/(x^2,x*y,y^2)");
  EXPECT_EQ(lift_f(Expr::constant(2.5), point(A, {el({0.1, 1, 2})})), A->constant(2.5));
}

TEST(Lift, DomainError) {
  const auto A = WeilAlgebra::parse("R[x]/(x^2)");
  EXPECT_THROW(lift_f(parse_expr("log(x1)", 1), point(A, {el({-1.0, 1.0})})), DomainError);
}

class CatalogLift : public ::testing::TestWithParam<std::string> {};

TEST_P(CatalogLift, MatchesJetArithmetic) {
  const auto A = WeilAlgebra::parse(GetParam());
  std::mt19937_64 rng(21);
  const ChartModel chart = ChartModel::unit_box(2);
  for (int k = 0; k < 60; ++k) {
    const Expr f = random_with_partial_ops(2, rng);
    const NearPoint xi = random_near_point(A, chart, rng);
    EXPECT_LE(max_abs_diff(lift_f(f, xi), oracle::jet_eval(f, xi)), 1e-10) << unparse(f);
  }
}

TEST_P(CatalogLift, HomomorphismLaws) {
  const auto A = WeilAlgebra::parse(GetParam());
  std::mt19937_64 rng(22);
  const ChartModel chart = ChartModel::unit_box(3);
  for (int k = 0; k < 100; ++k) {
    const Expr f = random_smooth(3, rng), g = random_smooth(3, rng);
    const NearPoint xi = random_near_point(A, chart, rng);
    const double lambda = std::uniform_real_distribution<double>(-2, 2)(rng);
    EXPECT_LE(max_abs_diff(lift_f(f * g, xi), A->mul(lift_f(f, xi), lift_f(g, xi))), 1e-9);
    EXPECT_LE(max_abs_diff(lift_f(f + g, xi), lift_f(f, xi) + lift_f(g, xi)), 1e-9);
    EXPECT_LE(max_abs_diff(lift_f(Expr::constant(lambda) * f, xi), lambda * lift_f(f, xi)), 1e-9);
    EXPECT_NEAR(A->augmentation(lift_f(f, xi)), eval(f, xi.base()), 1e-14);
  }
}

TEST_P(CatalogLift, MapFunctoriality) {
  const auto A = WeilAlgebra::parse(GetParam());
  std::mt19937_64 rng(23);
  const ChartModel chart = ChartModel::unit_box(2);
  const std::vector<Expr> h{parse_expr("x1 + x2", 2), parse_expr("x1*x2", 2)};
  const Expr phi = parse_expr("x1*x2", 2);
  const Expr composed = parse_expr("(x1 + x2)*(x1*x2)", 2);
  for (int k = 0; k < 20; ++k) {
    const NearPoint xi = random_near_point(A, chart, rng);
    const NearPoint image = lift_map(h, xi, ChartModel::parse("box:[-10,10]^2"));
    EXPECT_LE(max_abs_diff(lift_f(phi, image), lift_f(composed, xi)), 1e-9);
  }
}

INSTANTIATE_TEST_SUITE_P(Catalog, CatalogLift, ::testing::ValuesIn(catalog_presentations()));

TEST(Lift, DualNumbersAreForwardDerivatives) {
  const auto A = WeilAlgebra::parse("R[x]/(x^2)");
  std::mt19937_64 rng(24);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int k = 0; k < 100; ++k) {
    const Expr f = random_with_partial_ops(1, rng);
    const double a = u(rng), b = u(rng);
    const AElement v = lift_f(f, point(A, {el({a, b})}));
    const std::vector<double> x{a};
    EXPECT_NEAR(v[0], eval(f, x), 1e-10);
    EXPECT_NEAR(v[1], eval(diff(f, 0), x) * b, 1e-10);
  }
}

TEST(LiftMap, IdentityAndOutsideTarget) {
  const auto A = WeilAlgebra::parse("R[x]/(x^3)");
  const NearPoint xi = point(A, {el({0.2, 1, 0.5}), el({-0.3, 0, 2})});
  const std::vector<Expr> id{Expr::var(0), Expr::var(1)};
  EXPECT_EQ(lift_map(id, xi, ChartModel::unit_box(2)).coords(), xi.coords());
  const std::vector<Expr> far{parse_expr("x1 + 5", 2)};
  EXPECT_THROW(lift_map(far, xi, ChartModel::unit_box(1)), BasePointOutsideTarget);
}

TEST(TangentVectors, Examples) {
  const auto A = WeilAlgebra::parse("R[x]/(x^2)");
  const double a = 0.3, b = 2.0;
  const NearPoint xi = point(A, {el({a, b})});
  const TangentVectorA e1{xi, {A->one()}};
  EXPECT_EQ(tv_eval(e1, Expr::var(0)), A->one());
  EXPECT_TRUE(tv_eval(e1, Expr::constant(4.0)).is_zero());
  const TangentVectorA eps{xi, {A->unit(1)}};
  EXPECT_LE(max_abs_diff(tv_eval(eps, parse_expr("x1^2", 1)), el({0, 2 * a})), 1e-15);
}

TEST(TangentVectors, Leibniz) {
  std::mt19937_64 rng(25);
  for (const auto& p : catalog_presentations()) {
    const auto A = WeilAlgebra::parse(p);
    for (int k = 0; k < 20; ++k) {
      const Expr f = random_smooth(2, rng), g = random_smooth(2, rng);
      const NearPoint xi = random_near_point(A, ChartModel::unit_box(2), rng);
      const TangentVectorA v{xi, {random_element(*A, rng), random_element(*A, rng)}};
      const AElement rhs = A->mul(tv_eval(v, f), lift_f(g, xi)) + A->mul(lift_f(f, xi), tv_eval(v, g));
      EXPECT_LE(max_abs_diff(tv_eval(v, f * g), rhs), 1e-9);
    }
  }
}
