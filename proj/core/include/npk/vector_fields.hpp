#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

#include "npk/near_points.hpp"
#include "npk/smooth_expr.hpp"
#include "npk/weil_algebra.hpp"

namespace npk {

/// The real function ξ ↦ a*_alpha(g^A(ξ)) on M^A.
struct ScalarGenerator {
  std::size_t alpha;
  Expr g;
};

struct FnTerm {
  AElement coeff;
  std::vector<ScalarGenerator> monomial;  // empty: constant term
};

/// Computable element of C∞(M^A, A): Σ_t coeff_t · Π_{s ∈ monomial_t} s(ξ).
///
/// Terms are merged on construction when their monomials agree as
/// multisets of (alpha, expression node); terms whose coefficient is
/// exactly zero are dropped. Term order is first-occurrence order, so it
/// does not depend on pointer values.
class FnMA {
 public:
  FnMA(AlgebraPtr algebra, std::size_t n) : algebra_(std::move(algebra)), n_(n) {}
  FnMA(AlgebraPtr algebra, std::size_t n, std::vector<FnTerm> terms);

  static FnMA constant(AlgebraPtr algebra, std::size_t n, const AElement& a);
  /// A single real generator with coefficient 1_A.
  static FnMA generator(AlgebraPtr algebra, std::size_t n, std::size_t alpha, const Expr& g);

  const AlgebraPtr& algebra() const noexcept { return algebra_; }
  std::size_t chart_dim() const noexcept { return n_; }
  const std::vector<FnTerm>& terms() const noexcept { return terms_; }
  bool empty() const noexcept { return terms_.empty(); }

  /// Throws AlgebraMismatch unless both live over the same algebra and chart.
  void check_compatible(const FnMA& other) const;

  friend FnMA operator+(const FnMA& a, const FnMA& b);
  friend FnMA operator-(const FnMA& a, const FnMA& b);
  friend FnMA operator-(const FnMA& a);
  friend FnMA operator*(const FnMA& a, const FnMA& b);
  friend FnMA operator*(const AElement& a, const FnMA& f);
  friend FnMA operator*(double s, const FnMA& f);

 private:
  AlgebraPtr algebra_;
  std::size_t n_;
  std::vector<FnTerm> terms_;
};

FnMA fnma_add(const FnMA& a, const FnMA& b);
FnMA fnma_mul(const FnMA& a, const FnMA& b);
FnMA fnma_scale(const AElement& a, const FnMA& f);

/// γ(f) = Σ_α e_α ⊗ (a*_α ∘ f^A).
FnMA gamma(const AlgebraPtr& algebra, std::size_t n, const Expr& f);

/// Literal evaluation at ξ. The Lifter overload shares lifts across calls
/// at the same point.
AElement eval_fnma(const FnMA& phi, const NearPoint& xi);
AElement eval_fnma(const FnMA& phi, Lifter& lifter);

/// Vector field on M^A as a derivation C∞(M) → C∞(M^A, A), stored by its
/// values c_i = X(x_i) on the coordinates.
class VectorFieldMA {
 public:
  VectorFieldMA(AlgebraPtr algebra, std::vector<FnMA> components);

  const AlgebraPtr& algebra() const noexcept { return algebra_; }
  std::size_t chart_dim() const noexcept { return components_.size(); }
  const std::vector<FnMA>& components() const noexcept { return components_; }
  const FnMA& component(std::size_t i) const { return components_.at(i); }

  void check_compatible(const VectorFieldMA& other) const;

  /// ∂_i^A: c_j = δ_ij·1_A.
  static VectorFieldMA coordinate(const AlgebraPtr& algebra, std::size_t n, std::size_t i);

  friend VectorFieldMA operator+(const VectorFieldMA& a, const VectorFieldMA& b);
  friend VectorFieldMA operator-(const VectorFieldMA& a, const VectorFieldMA& b);
  friend VectorFieldMA operator*(const FnMA& phi, const VectorFieldMA& x);
  friend VectorFieldMA operator*(const AElement& a, const VectorFieldMA& x);

 private:
  AlgebraPtr algebra_;
  std::vector<FnMA> components_;
};

/// X(f) = Σ_i γ(∂_i f)·c_i.
FnMA apply(const VectorFieldMA& x, const Expr& f);

/// X̃(φ): the A-linear derivation with X̃(f^A) = X(f) that maps real
/// functions to real functions. On a generator (α, g) it is a*_α ∘ X(g).
FnMA tilde_apply(const VectorFieldMA& x, const FnMA& phi);

/// [X, Y] with components X̃(Y(x_i)) − Ỹ(X(x_i)).
VectorFieldMA bracket(const VectorFieldMA& x, const VectorFieldMA& y);

/// θ^A: components γ(θ_i).
VectorFieldMA prolong(const AlgebraPtr& algebra, const VectorFieldM& theta);

/// d*: f ↦ (−d) ∘ f^A, components Σ_α (−d(e_α)) ⊗ (a*_α ∘ x_i^A).
VectorFieldMA from_derivation(const AlgebraPtr& algebra, std::size_t n, const DerivationOfA& d);
/// Throws NotADerivation when `mu` fails the Leibniz check.
VectorFieldMA from_derivation(const AlgebraPtr& algebra, std::size_t n, const LinearEndo& mu);

/// Componentwise values X(x_i)(ξ).
std::vector<AElement> eval_field(const VectorFieldMA& x, Lifter& lifter);

/// ṽ(φ) for a tangent vector v at ξ: the A-linear ξ̃-derivation with
/// ṽ(f^A) = v(f) that is real on real functions.
AElement tv_tilde(const TangentVectorA& v, const FnMA& phi);

/// FnMA literal: sum of `[c0, c1, ..] * gen(alpha, "expr") * ...` terms;
/// `gamma("expr")` expands to γ(expr).
FnMA parse_fnma(std::string_view text, const AlgebraPtr& algebra, std::size_t n);

/// Vector-field literal: `;`-separated FnMA literals, or one of the
/// shortcuts `prolong("x1; x1*x2")` and `dstar(k)` (k-th element of the
/// derivation basis).
VectorFieldMA parse_vector_field(std::string_view text, const AlgebraPtr& algebra, std::size_t n);

}  // namespace npk
