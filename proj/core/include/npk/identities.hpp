#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "npk/a_forms.hpp"
#include "npk/near_points.hpp"
#include "npk/smooth_expr.hpp"
#include "npk/vector_fields.hpp"
#include "npk/weil_algebra.hpp"

namespace npk {

struct IdentityReport {
  std::string name;
  std::size_t samples = 0;  // near points evaluated
  double max_residual = 0.0;
  bool pass = false;
};

/// Data for the Lie-structure identities.
///
/// x, y, z and psi lie in the A-subalgebra generated by lifts γ(g): on
/// that class X ↦ X̃(ψ) is A-linear, which the scaling laws need. w and phi
/// are unrestricted (w carries a d* part and bare generators).
struct IdentityInputs {
  AlgebraPtr algebra;
  ChartModel chart;
  VectorFieldMA x, y, z, w;
  FnMA phi, psi;
  Expr f;
  VectorFieldM theta1, theta2;
  AElement a;
  std::vector<DerivationOfA> derivations;  // the d* checks range over all of them
};

/// Names accepted by check_identity, in suite order.
const std::vector<std::string>& identity_names();

/// Evaluates both sides of the named identity at `samples` random near
/// points of inputs.chart. Throws UnknownIdentity.
IdentityReport check_identity(std::string_view name, const IdentityInputs& inputs, std::size_t samples,
                              std::uint64_t seed, double tol);

/// Every identity in identity_names() on random_inputs drawn from `seed`.
std::vector<IdentityReport> run_lie_suite(const AlgebraPtr& algebra, const ChartModel& chart, std::size_t samples,
                                          std::uint64_t seed, double tol);

/// Max over sample points and pairs of |eval(lhs) − eval(rhs)|.
double max_pair_residual(const std::vector<std::pair<FnMA, FnMA>>& pairs, const AlgebraPtr& algebra,
                         const ChartModel& chart, std::size_t samples, std::mt19937_64& rng);

// Random data shared by the suites.

/// Polynomial with 1..3 terms, coefficients in {±1/2, ±1, ±3/2, ±2},
/// total degree ≤ max_degree.
Expr random_poly(std::size_t n, std::mt19937_64& rng, int max_degree = 2);
/// random_poly plus one transcendental term (sin, cos or exp of a
/// coordinate).
Expr random_smooth(std::size_t n, std::mt19937_64& rng);
/// Coefficients uniform in (−1,1).
AElement random_element(const WeilAlgebra& algebra, std::mt19937_64& rng);
VectorFieldM random_field_m(std::size_t n, std::mt19937_64& rng);
/// a₁·γ(p₁) + a₂·γ(p₂)·γ(p₃).
FnMA random_lift_fn(const AlgebraPtr& algebra, std::size_t n, std::mt19937_64& rng);
/// Components from random_lift_fn.
VectorFieldMA random_lift_field(const AlgebraPtr& algebra, std::size_t n, std::mt19937_64& rng);
/// random_lift_fn plus a bare generator term.
FnMA random_general_fn(const AlgebraPtr& algebra, std::size_t n, std::mt19937_64& rng);
/// random_lift_field plus a random d* (when Der(A) ≠ 0) and a field with
/// bare generator components.
VectorFieldMA random_general_field(const AlgebraPtr& algebra, std::size_t n, std::mt19937_64& rng);

/// Polynomial p-form: random_poly coefficients on a random nonempty set of
/// index tuples.
FormM random_poly_form(std::size_t n, std::size_t p, std::mt19937_64& rng, int max_degree = 2);
/// p-form with random_lift_fn coefficients (or random_general_fn when
/// `general`).
AFormMA random_aform(const AlgebraPtr& algebra, std::size_t n, std::size_t p, std::mt19937_64& rng,
                     bool general = false);

IdentityInputs random_inputs(const AlgebraPtr& algebra, const ChartModel& chart, std::mt19937_64& rng);

}  // namespace npk
