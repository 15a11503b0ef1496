#pragma once

#include <complex>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "npk/a_forms.hpp"
#include "npk/near_points.hpp"
#include "npk/smooth_expr.hpp"
#include "npk/weil_algebra.hpp"

namespace npk {

using Rational = boost::multiprecision::cpp_rational;

/// Polynomial in x1..xn with exact rational coefficients.
class Polynomial {
 public:
  explicit Polynomial(std::size_t n = 0) : n_(n) {}

  static Polynomial constant(std::size_t n, const Rational& c);
  static Polynomial monomial(std::size_t n, const Exponents& e, const Rational& c);
  /// Throws NonPolynomialCoefficient for anything outside + − × ^k and
  /// division by constants. Double literals convert exactly.
  static Polynomial from_expr(const Expr& e, std::size_t n);

  std::size_t dim() const noexcept { return n_; }
  const std::map<Exponents, Rational>& terms() const noexcept { return terms_; }
  bool is_zero() const noexcept { return terms_.empty(); }
  int degree() const;

  Polynomial derivative(std::size_t i) const;
  Expr to_expr() const;
  double max_abs_coefficient() const;

  Polynomial& operator+=(const Polynomial& o);
  Polynomial& operator-=(const Polynomial& o);
  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b);
  friend Polynomial operator*(const Rational& c, const Polynomial& p);
  friend bool operator==(const Polynomial& a, const Polynomial& b) { return a.n_ == b.n_ && a.terms_ == b.terms_; }

 private:
  void add(const Exponents& e, const Rational& c);
  std::size_t n_;
  std::map<Exponents, Rational> terms_;
};

/// Form with polynomial coefficients on a box chart. The degree may reach
/// n + 1, where the form is necessarily zero.
class PolyForm {
 public:
  PolyForm(std::size_t n, std::size_t degree) : n_(n), degree_(degree) {}

  /// Throws NonPolynomialCoefficient.
  static PolyForm from_form(const FormM& w);
  FormM to_form() const;

  std::size_t dim() const noexcept { return n_; }
  std::size_t degree() const noexcept { return degree_; }
  const std::map<FormIndices, Polynomial>& terms() const noexcept { return terms_; }
  bool is_zero() const noexcept { return terms_.empty(); }

  void add_term(const Polynomial& g, FormIndices indices);

  PolyForm& operator+=(const PolyForm& o);
  friend PolyForm operator+(PolyForm a, const PolyForm& b) { return a += b; }
  friend PolyForm operator-(const PolyForm& a, const PolyForm& b);
  friend PolyForm operator*(const Rational& c, const PolyForm& w);
  friend bool operator==(const PolyForm& a, const PolyForm& b) {
    return a.n_ == b.n_ && a.degree_ == b.degree_ && a.terms_ == b.terms_;
  }

 private:
  std::size_t n_;
  std::size_t degree_;
  std::map<FormIndices, Polynomial> terms_;
};

PolyForm exterior_derivative(const PolyForm& w);

/// Homotopy operator about the origin: on g·dx_I with g of degree m,
/// Σ_k (−1)^k x_{i_k}·g/(m+p) dx_{I∖i_k}. Needs degree ≥ 1.
PolyForm homotopy(const PolyForm& w);

/// Checks that `chart` is a box containing the origin (NotStarShaped
/// otherwise) and applies homotopy. Throws NonPolynomialCoefficient.
FormM poincare_homotopy(const FormM& w, const ChartModel& chart);

/// Σ_j a_j·ω_j^A with polynomial ω_j of one degree.
struct ACombinationForm {
  AlgebraPtr algebra;
  std::size_t n = 0;
  std::size_t degree = 0;
  std::vector<std::pair<AElement, PolyForm>> terms;

  void add(const AElement& a, PolyForm w);
};

/// a·ω^A.
AFormMA inject(const AlgebraPtr& algebra, const AElement& a, const FormM& w);
AFormMA inject(const ACombinationForm& eta);

/// Max over basis coefficients α and form coefficients of |Σ_j a_j[α]·dω_j|.
double closure_residual(const ACombinationForm& eta);

/// Primitive Σ_j a_j·K(ω_j). Throws NotClosed when closure_residual
/// exceeds 1e-10, NotStarShaped for charts not containing the origin.
ACombinationForm a_primitive(const ACombinationForm& eta, const ChartModel& chart);

/// Max coefficientwise |d^A(inject(primitive)) − inject(eta)| over
/// `samples` random near points.
double certify_primitive(const ACombinationForm& eta, const ACombinationForm& primitive, const ChartModel& chart,
                         std::size_t samples, std::mt19937_64& rng);

/// Trigonometric polynomial Σ_{|k|≤N} c_k e^{ikx} with c_{−k} = conj(c_k).
class TrigPoly {
 public:
  static constexpr int kDefaultMaxFrequency = 8;

  explicit TrigPoly(int max_frequency = kDefaultMaxFrequency);

  /// Reads constants, sin/cos of a·x1 + b with integer a, sums, products
  /// and integer powers. Throws NonTrigPolynomial, including when a
  /// frequency exceeds max_frequency.
  static TrigPoly from_expr(const Expr& e, int max_frequency = kDefaultMaxFrequency);
  /// a_0 + Σ a_k cos(kx) + b_k sin(kx).
  static TrigPoly from_real(double a0, const std::vector<double>& a, const std::vector<double>& b,
                            int max_frequency = kDefaultMaxFrequency);

  int max_frequency() const noexcept { return n_; }
  std::complex<double> coefficient(int k) const { return c_[static_cast<std::size_t>(k + n_)]; }
  double mean() const { return c_[static_cast<std::size_t>(n_)].real(); }
  double eval(double x) const;
  TrigPoly derivative() const;
  /// Primitive of g − mean(g) with zero mean.
  TrigPoly integral() const;
  Expr to_expr() const;

  friend TrigPoly operator+(const TrigPoly& a, const TrigPoly& b);
  friend TrigPoly operator*(const TrigPoly& a, const TrigPoly& b);
  friend TrigPoly operator*(double s, const TrigPoly& a);

 private:
  int n_;
  std::vector<std::complex<double>> c_;
};

/// Degree-1 A-combination Σ_j a_j·g_j(x)dx on the circle.
struct CircleForm {
  AlgebraPtr algebra;
  std::vector<std::pair<AElement, TrigPoly>> terms;
};

/// Σ_j a_j·mean(g_j); the form is d^A-exact on trigonometric data iff
/// this vanishes.
AElement circle_h1_class(const CircleForm& eta);

/// Σ_j a_j·∫(g_j − mean g_j): η = class·dx + d(primitive).
std::vector<std::pair<AElement, TrigPoly>> circle_primitive(const CircleForm& eta);

struct H0Result {
  AElement value;
  double closure_residual = 0.0;
  double constancy_residual = 0.0;
};

/// Checks d^A φ = 0 at `samples` random near points (≤ 1e-9, NotClosed)
/// and that φ takes one value there (≤ 1e-8, NotConstant).
H0Result h0_check(const FnMA& phi, const ChartModel& chart, std::size_t samples, std::uint64_t seed);

}  // namespace npk
