#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <random>

#include "npk/error.hpp"
#include "npk/weil_algebra.hpp"
#include "oracles.hpp"

using namespace npk;

namespace {

AElement el(std::initializer_list<double> c) { return AElement(std::vector<double>(c)); }

AElement random_el(const WeilAlgebra& A, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  AElement a = A.zero();
  for (std::size_t k = 0; k < A.dim(); ++k) a[k] = u(rng);
  return a;
}

// Dimension of {μ : μ(ab) = μ(a)b + aμ(b)} from the rank of the Leibniz
// system, computed in floating point.
std::size_t derivation_dim_by_rank(const WeilAlgebra& A) {
  const std::size_t d = A.dim();
  Eigen::MatrixXd sys = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(d * d * d), static_cast<Eigen::Index>(d * d));
  auto unknown = [d](std::size_t row, std::size_t col) { return static_cast<Eigen::Index>(row * d + col); };
  for (std::size_t a = 0; a < d; ++a)
    for (std::size_t b = 0; b < d; ++b)
      for (std::size_t r = 0; r < d; ++r) {
        const auto eq = static_cast<Eigen::Index>((a * d + b) * d + r);
        for (std::size_t c = 0; c < d; ++c) {
          sys(eq, unknown(r, c)) += A.structure_constant(a, b, c);
          sys(eq, unknown(c, a)) -= A.structure_constant(c, b, r);
          sys(eq, unknown(c, b)) -= A.structure_constant(a, c, r);
        }
      }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(sys);
  return d * d - static_cast<std::size_t>(lu.rank());
}

}  // namespace

TEST(Presentation, DualNumbers) {
  const auto A = WeilAlgebra::parse("R[x]/(x^2)");
  EXPECT_EQ(A->dim(), 2u);
  EXPECT_EQ(A->height(), 1);
  EXPECT_EQ(A->basis_name(0), "1");
  EXPECT_EQ(A->basis_name(1), "x");
}

TEST(Presentation, TwoVariablesSquareZero) {
  const auto A = WeilAlgebra::parse("R[x,y]/(x^2,x*y,y^2)");
  ASSERT_EQ(A->dim(), 3u);
  EXPECT_EQ(A->height(), 1);
  EXPECT_EQ(A->product_index(1, 2), -1);
  EXPECT_TRUE(A->mul(A->unit(1), A->unit(2)).is_zero());
}

TEST(Presentation, CubicTruncation) {
  const auto A = WeilAlgebra::parse("R[x,y]/(x^3,x^2*y,x*y^2,y^3)");
  ASSERT_EQ(A->dim(), 6u);
  EXPECT_EQ(A->height(), 2);
  const std::vector<std::string> names{"1", "x", "y", "x^2", "x*y", "y^2"};
  for (std::size_t k = 0; k < names.size(); ++k) EXPECT_EQ(A->basis_name(k), names[k]);
}

TEST(Presentation, Reals) {
  const auto A = WeilAlgebra::parse("R");
  EXPECT_EQ(A->dim(), 1u);
  EXPECT_EQ(A->height(), 0);
  EXPECT_TRUE(derivation_basis(*A).empty());
}

TEST(Presentation, CanonicalNameRoundTrips) {
  for (const auto& p : catalog_presentations()) {
    const auto A = WeilAlgebra::parse(p);
    EXPECT_EQ(WeilAlgebra::parse(A->name())->name(), A->name());
  }
}

TEST(Presentation, Errors) {
  EXPECT_THROW(WeilAlgebra::parse("R[x,y]/(x^2)"), InfiniteDimensional);
  EXPECT_THROW(WeilAlgebra::parse("R[x]/()"), InfiniteDimensional);
  EXPECT_THROW(WeilAlgebra::parse("R[x]/(1)"), SyntaxError);
  EXPECT_THROW(WeilAlgebra::build({0, {}, {Exponents{}}}), EmptyPresentation);
  EXPECT_THROW(WeilAlgebra::build({1, {"x"}, {Exponents{1}}}), InvalidPresentation);
  EXPECT_THROW(WeilAlgebra::build({1, {"x"}, {Exponents{2, 0}}}), InvalidPresentation);
  EXPECT_EQ(WeilAlgebra::build({0, {}, {}})->dim(), 1u);
  EXPECT_THROW(WeilAlgebra::parse("R[x]/(y^2)"), Error);
  EXPECT_THROW(WeilAlgebra::parse("Q[x]/(x^2)"), SyntaxError);
}

TEST(Arithmetic, DualProduct) {
  const auto A = WeilAlgebra::parse("R[x]/(x^2)");
  EXPECT_EQ(A->mul(el({1, 2}), el({3, 1})), el({3, 7}));
}

TEST(Arithmetic, TruncatedCube) {
  const auto A = WeilAlgebra::parse("R[x]/(x^3)");
  EXPECT_TRUE(A->mul(A->unit(1), A->unit(2)).is_zero());
  EXPECT_EQ(A->pow(el({1, 1, 0}), 3), el({1, 3, 3}));
}

TEST(Arithmetic, Invert) {
  const auto D = WeilAlgebra::parse("R[x]/(x^2)");
  EXPECT_EQ(D->invert(el({1, 1})), el({1, -1}));
  EXPECT_THROW(D->invert(el({0, 1})), NotInvertible);

  const auto C = WeilAlgebra::parse("R[x]/(x^3)");
  const AElement inv = C->invert(el({2, 1, 0}));
  EXPECT_LE(max_abs_diff(inv, el({0.5, -0.25, 0.125})), 1e-15);
}

TEST(Arithmetic, DualCoefficient) {
  const auto A = WeilAlgebra::parse("R[x]/(x^2)");
  EXPECT_EQ(A->dual_coefficient(1, el({3, 5})), 5.0);
  EXPECT_EQ(A->dual_coefficient(0, A->one()), 1.0);
  EXPECT_EQ(A->dual_coefficient(1, A->one()), 0.0);
  EXPECT_THROW(A->dual_coefficient(2, A->one()), IndexOutOfRange);
}

TEST(Arithmetic, DimensionMismatch) {
  const auto A = WeilAlgebra::parse("R[x]/(x^2)");
  EXPECT_THROW(A->mul(el({1, 2, 3}), el({1, 0})), DimensionMismatch);
  EXPECT_THROW(max_abs_diff(el({1}), el({1, 0})), DimensionMismatch);
}

class CatalogAlgebra : public ::testing::TestWithParam<std::string> {};

TEST_P(CatalogAlgebra, ProductMatchesBruteForce) {
  const auto A = WeilAlgebra::parse(GetParam());
  std::mt19937_64 rng(11);
  for (int k = 0; k < 100; ++k) {
    const AElement a = random_el(*A, rng), b = random_el(*A, rng);
    EXPECT_LE(max_abs_diff(A->mul(a, b), oracle::brute_mul(*A, a, b)), 1e-14);
  }
}

TEST_P(CatalogAlgebra, RingAxioms) {
  const auto A = WeilAlgebra::parse(GetParam());
  std::mt19937_64 rng(12);
  for (int k = 0; k < 100; ++k) {
    const AElement a = random_el(*A, rng), b = random_el(*A, rng), c = random_el(*A, rng);
    EXPECT_LE(max_abs_diff(A->mul(a, b), A->mul(b, a)), 1e-12);
    EXPECT_LE(max_abs_diff(A->mul(A->mul(a, b), c), A->mul(a, A->mul(b, c))), 1e-12);
    EXPECT_LE(max_abs_diff(A->mul(A->one(), a), a), 1e-12);
    EXPECT_LE(std::abs(A->augmentation(A->mul(a, b)) - A->augmentation(a) * A->augmentation(b)), 1e-12);
  }
}

TEST_P(CatalogAlgebra, MaximalIdealIsNilpotentOfHeight) {
  const auto A = WeilAlgebra::parse(GetParam());
  std::mt19937_64 rng(13);
  for (int k = 0; k < 20; ++k) {
    const AElement m = A->nilpotent_part(random_el(*A, rng));
    EXPECT_TRUE(A->pow(m, A->height() + 1).is_zero());
  }
}

TEST_P(CatalogAlgebra, InverseIsTwoSided) {
  const auto A = WeilAlgebra::parse(GetParam());
  std::mt19937_64 rng(14);
  for (int k = 0; k < 20; ++k) {
    AElement a = random_el(*A, rng);
    a[0] += 2.0;
    EXPECT_LE(max_abs_diff(A->mul(a, A->invert(a)), A->one()), 1e-12);
  }
}

TEST_P(CatalogAlgebra, DerivationBasisDimensionMatchesRank) {
  const auto A = WeilAlgebra::parse(GetParam());
  const auto basis = derivation_basis(*A);
  EXPECT_EQ(basis.size(), derivation_dim_by_rank(*A));
  for (const auto& d : basis) EXPECT_LE(leibniz_residual(*A, d.endo()), 1e-12);
}

TEST_P(CatalogAlgebra, CommutatorOfDerivationsIsADerivation) {
  const auto A = WeilAlgebra::parse(GetParam());
  const auto basis = derivation_basis(*A);
  for (std::size_t i = 0; i < basis.size(); ++i)
    for (std::size_t j = 0; j < basis.size(); ++j)
      EXPECT_TRUE(is_derivation(*A, DerivationOfA::commutator(*A, basis[i], basis[j]).endo()));
}

INSTANTIATE_TEST_SUITE_P(Catalog, CatalogAlgebra, ::testing::ValuesIn(catalog_presentations()));

TEST(Derivations, KnownDimensions) {
  EXPECT_EQ(derivation_basis(*WeilAlgebra::parse("R[x]/(x^2)")).size(), 1u);
  EXPECT_EQ(derivation_basis(*WeilAlgebra::parse("R[x]/(x^3)")).size(), 2u);
  EXPECT_EQ(derivation_basis(*WeilAlgebra::parse("R[x]/(x^4)")).size(), 3u);
  EXPECT_EQ(derivation_basis(*WeilAlgebra::parse("R[x,y]/(x^2,x*y,y^2)")).size(), 4u);
  EXPECT_EQ(derivation_basis(*WeilAlgebra::parse("R[x,y]/(x^3,x^2*y,x*y^2,y^3)")).size(), 10u);
}

TEST(Derivations, DualNumberBasisIsEulerField) {
  const auto A = WeilAlgebra::parse("R[x]/(x^2)");
  const auto basis = derivation_basis(*A);
  ASSERT_EQ(basis.size(), 1u);
  const AElement img = basis[0](A->unit(1));
  EXPECT_EQ(img[0], 0.0);
  EXPECT_NE(img[1], 0.0);
  EXPECT_TRUE(basis[0](A->one()).is_zero());
}

TEST(Derivations, IsDerivation) {
  const auto A = WeilAlgebra::parse("R[x]/(x^2)");
  EXPECT_FALSE(is_derivation(*A, LinearEndo::identity(2)));
  EXPECT_TRUE(is_derivation(*A, LinearEndo(2)));
  LinearEndo euler(2);
  euler(1, 1) = 1.0;
  EXPECT_TRUE(is_derivation(*A, euler));
  EXPECT_THROW(DerivationOfA(*A, LinearEndo::identity(2)), NotADerivation);
}

TEST(Derivations, ScaledDerivation) {
  const auto A = WeilAlgebra::parse("R[x]/(x^3)");
  const auto basis = derivation_basis(*A);
  const auto s = DerivationOfA::scaled(*A, A->unit(1), basis[0]);
  EXPECT_TRUE(is_derivation(*A, s.endo()));
}

TEST(LinearEndoTest, ComposeWithIdentity) {
  LinearEndo m(3);
  m(0, 1) = 2.0;
  m(2, 0) = -1.0;
  const LinearEndo c = m.compose(LinearEndo::identity(3));
  for (std::size_t r = 0; r < 3; ++r)
    for (std::size_t k = 0; k < 3; ++k) EXPECT_EQ(c(r, k), m(r, k));
}
