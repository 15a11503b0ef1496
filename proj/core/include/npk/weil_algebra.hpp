#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace npk {

/// Exponent vector of a monomial in k variables.
using Exponents = std::vector<int>;

/// R[x_1..x_k]/I with I generated by monomials.
struct MonomialIdealPresentation {
  std::size_t num_vars = 0;
  std::vector<std::string> var_names;
  std::vector<Exponents> generators;
};

/// Parses `R[x,y]/(x^2,x*y,y^3)`. The bare string `R` denotes the reals.
MonomialIdealPresentation parse_presentation(std::string_view text);

/// Element of a Weil algebra: coordinates in the standard-monomial basis.
class AElement {
 public:
  AElement() = default;
  explicit AElement(std::vector<double> coeffs) : coeffs_(std::move(coeffs)) {}

  static AElement zero(std::size_t dim) { return AElement(std::vector<double>(dim, 0.0)); }
  static AElement unit(std::size_t dim, std::size_t alpha);

  std::size_t dim() const noexcept { return coeffs_.size(); }
  double operator[](std::size_t i) const { return coeffs_[i]; }
  double& operator[](std::size_t i) { return coeffs_[i]; }
  std::span<const double> coeffs() const noexcept { return coeffs_; }

  bool is_zero() const;
  double max_abs() const;

  AElement& operator+=(const AElement& other);
  AElement& operator-=(const AElement& other);
  AElement& operator*=(double s);

  friend AElement operator+(AElement a, const AElement& b) { return a += b; }
  friend AElement operator-(AElement a, const AElement& b) { return a -= b; }
  friend AElement operator*(double s, AElement a) { return a *= s; }
  friend AElement operator*(AElement a, double s) { return a *= s; }
  friend AElement operator-(AElement a) { return a *= -1.0; }
  friend bool operator==(const AElement&, const AElement&) = default;

 private:
  std::vector<double> coeffs_;
};

/// Max-norm distance; throws DimensionMismatch on length mismatch.
double max_abs_diff(const AElement& a, const AElement& b);

/// General R-linear map A -> A, stored as a dense row-major matrix whose
/// column beta holds the image of basis element beta.
class LinearEndo {
 public:
  LinearEndo() = default;
  explicit LinearEndo(std::size_t dim) : dim_(dim), m_(dim * dim, 0.0) {}

  static LinearEndo identity(std::size_t dim);

  std::size_t dim() const noexcept { return dim_; }
  double operator()(std::size_t row, std::size_t col) const { return m_[row * dim_ + col]; }
  double& operator()(std::size_t row, std::size_t col) { return m_[row * dim_ + col]; }

  AElement apply(const AElement& a) const;
  LinearEndo compose(const LinearEndo& inner) const;  // this ∘ inner

  LinearEndo& operator+=(const LinearEndo& other);
  LinearEndo& operator-=(const LinearEndo& other);
  friend LinearEndo operator-(LinearEndo a, const LinearEndo& b) { return a -= b; }
  friend LinearEndo operator+(LinearEndo a, const LinearEndo& b) { return a += b; }

 private:
  std::size_t dim_ = 0;
  std::vector<double> m_;
};

class WeilAlgebra;

/// A linear endomorphism known to satisfy the Leibniz rule.
class DerivationOfA {
 public:
  /// Throws NotADerivation if `endo` fails the Leibniz check.
  DerivationOfA(const WeilAlgebra& algebra, LinearEndo endo);

  const LinearEndo& endo() const noexcept { return endo_; }
  AElement operator()(const AElement& a) const { return endo_.apply(a); }

  /// Commutator d1∘d2 − d2∘d1, which is again a derivation.
  static DerivationOfA commutator(const WeilAlgebra& algebra, const DerivationOfA& d1,
                                  const DerivationOfA& d2);
  /// The derivation u ↦ a·d(u).
  static DerivationOfA scaled(const WeilAlgebra& algebra, const AElement& a,
                              const DerivationOfA& d);

 private:
  LinearEndo endo_;
};

/// Finite-dimensional local algebra R[x]/I on the basis of standard
/// monomials in graded-lexicographic order (constant first). Structure
/// constants are 0/1: a product of standard monomials is either standard
/// or lies in I.
class WeilAlgebra {
 public:
  /// Throws InfiniteDimensional, EmptyPresentation or InvalidPresentation.
  static std::shared_ptr<const WeilAlgebra> build(MonomialIdealPresentation pres);
  static std::shared_ptr<const WeilAlgebra> parse(std::string_view text);

  std::size_t dim() const noexcept { return basis_.size(); }
  int height() const noexcept { return height_; }
  std::size_t num_vars() const noexcept { return pres_.num_vars; }
  const std::vector<Exponents>& basis() const noexcept { return basis_; }
  const MonomialIdealPresentation& presentation() const noexcept { return pres_; }

  /// Canonical presentation string, e.g. `R[x,y]/(x^2,x*y,y^2)`.
  std::string name() const;
  /// Display name of basis monomial alpha (`1`, `x`, `x*y^2`, ...).
  std::string basis_name(std::size_t alpha) const;
  /// Total degree of basis monomial alpha.
  int degree(std::size_t alpha) const { return degrees_[alpha]; }
  /// Index of the basis monomial with exponents `e`, or -1 if `e` is in I.
  long index_of(const Exponents& e) const;

  /// Basis index of e_a·e_b, or -1 when the product vanishes.
  long product_index(std::size_t a, std::size_t b) const { return product_[a * dim() + b]; }
  double structure_constant(std::size_t a, std::size_t b, std::size_t c) const;

  AElement zero() const { return AElement::zero(dim()); }
  AElement one() const { return AElement::unit(dim(), 0); }
  AElement unit(std::size_t alpha) const;
  AElement constant(double c) const;

  AElement mul(const AElement& a, const AElement& b) const;
  AElement pow(const AElement& a, int k) const;
  /// Geometric series in the nilpotent part; throws NotInvertible when the
  /// augmentation is within 1e-12 of zero.
  AElement invert(const AElement& a) const;

  double augmentation(const AElement& a) const;
  /// a*_alpha(a); throws IndexOutOfRange.
  double dual_coefficient(std::size_t alpha, const AElement& a) const;
  /// The nilpotent part a − augmentation(a)·1.
  AElement nilpotent_part(const AElement& a) const;

  void check_element(const AElement& a) const;

 private:
  WeilAlgebra() = default;

  MonomialIdealPresentation pres_;
  std::vector<Exponents> basis_;
  std::vector<int> degrees_;
  std::vector<long> product_;
  int height_ = 0;
};

using AlgebraPtr = std::shared_ptr<const WeilAlgebra>;

/// True iff the Leibniz residual over all basis pairs is at most `tol`.
bool is_derivation(const WeilAlgebra& algebra, const LinearEndo& mu, double tol = 1e-10);

/// Max-norm Leibniz residual of `mu` over all basis pairs.
double leibniz_residual(const WeilAlgebra& algebra, const LinearEndo& mu);

/// Basis of Der(A), solved exactly over the rationals. Free unknowns are
/// ordered by (column, row) of the matrix, so the result is deterministic.
std::vector<DerivationOfA> derivation_basis(const WeilAlgebra& algebra);

/// The six algebras every property suite iterates over.
const std::vector<std::string>& catalog_presentations();

std::string to_string(const AElement& a);

}  // namespace npk
