#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "npk/near_points.hpp"
#include "npk/smooth_expr.hpp"
#include "npk/vector_fields.hpp"
#include "npk/weil_algebra.hpp"

namespace npk {

struct AFormTerm {
  FnMA coeff;
  FormIndices indices;  // strictly increasing, 0-based
};

/// A-form Σ_I φ_I·(dx_I)^A of degree p on M^A, where (dx_I)^A evaluates
/// vector fields by the A-determinant of their coordinate components.
/// Terms are sorted by index tuple with distinct tuples.
class AFormMA {
 public:
  AFormMA(AlgebraPtr algebra, std::size_t n, std::size_t degree);

  const AlgebraPtr& algebra() const noexcept { return algebra_; }
  std::size_t dim() const noexcept { return n_; }
  std::size_t degree() const noexcept { return degree_; }
  const std::vector<AFormTerm>& terms() const noexcept { return terms_; }

  /// Adds φ·dx_I for an unsorted index list; repeated indices vanish.
  void add_term(const FnMA& phi, FormIndices indices);
  /// Coefficient of a sorted index tuple (empty FnMA when absent).
  FnMA coefficient(const FormIndices& sorted) const;

  static AFormMA zero_form(const FnMA& phi);

  friend AFormMA operator+(const AFormMA& a, const AFormMA& b);
  friend AFormMA operator-(const AFormMA& a, const AFormMA& b);
  friend AFormMA operator*(const FnMA& phi, const AFormMA& w);
  friend AFormMA operator*(const AElement& a, const AFormMA& w);

 private:
  void check_compatible(const AFormMA& other) const;

  AlgebraPtr algebra_;
  std::size_t n_;
  std::size_t degree_;
  std::vector<AFormTerm> terms_;
};

/// ω^A: coefficients γ(g_I).
AFormMA prolong_form(const AlgebraPtr& algebra, const FormM& w);

/// Σ_I φ_I(ξ)·det_A[X_j(x_{i_k})(ξ)]. Throws ArityMismatch, AlgebraMismatch.
AElement eval_form(const AFormMA& eta, std::span<const VectorFieldMA> fields, const NearPoint& xi);
AElement eval_form(const AFormMA& eta, std::span<const VectorFieldMA> fields, Lifter& lifter);

/// η(X_1..X_p) as an element of C∞(M^A, A), built symbolically.
FnMA contract(const AFormMA& eta, std::span<const VectorFieldMA> fields);

/// Throws DegreeOverflow when p + q > n.
AFormMA wedge(const AFormMA& a, const AFormMA& b);

/// d^A(Σ φ_I dx_I) = Σ_I Σ_i ∂̃_i^A(φ_I)·dx_i∧dx_I. Throws DegreeOverflow
/// when the degree is already n.
AFormMA dA(const AFormMA& eta);

/// The invariant formula for d^A evaluated on prolonged fields:
/// Σ_i (−1)^{i−1} θ̃_i^A[η(..θ̂_i..)] + Σ_{i<j} (−1)^{i+j} η([θ_i^A, θ_j^A], ..).
AElement palais_eval(const AFormMA& eta, std::span<const VectorFieldM> thetas, const NearPoint& xi);

/// `([1,0]*gamma("x2")) dx(1) + (gen(1, "x1")) dx(1)^dx(2)`: parenthesised
/// FnMA literals followed by wedge products of dx(i), joined by `+`.
/// A bare expression form such as `x2 dx(1) + x1 dx(2)` is read with
/// parse_form_m and prolonged.
AFormMA parse_aform(std::string_view text, const AlgebraPtr& algebra, std::size_t n);

}  // namespace npk
