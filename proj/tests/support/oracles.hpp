#pragma once

// Reference computations that share no code path with the library routine
// they check.

#include <map>
#include <vector>

#include "npk/a_forms.hpp"
#include "npk/near_points.hpp"
#include "npk/smooth_expr.hpp"
#include "npk/vector_fields.hpp"
#include "npk/weil_algebra.hpp"

namespace oracle {

using npk::AElement;
using npk::AlgebraPtr;
using npk::Expr;
using npk::NearPoint;
using npk::WeilAlgebra;

/// Multiplies in R[x] by adding exponents, then discards every monomial
/// divisible by an ideal generator.
AElement brute_mul(const WeilAlgebra& A, const AElement& a, const AElement& b);

/// Evaluates f on A-elements node by node: each elementary function is
/// expanded in a one-variable series in the nilpotent part of its argument.
AElement jet_eval(const Expr& f, const NearPoint& xi);

/// Real coordinates ξ_{iα} = a*_α(ξ(x_i)), flattened i-major.
std::vector<double> flatten(const NearPoint& xi);
NearPoint unflatten(const AlgebraPtr& A, const std::vector<double>& v);

/// Velocity of X in the real coordinates of M^A.
std::vector<double> velocity(const npk::VectorFieldMA& x, const NearPoint& xi);

/// Central difference of φ along the velocity of X.
AElement directional(const npk::FnMA& phi, const npk::VectorFieldMA& x, const NearPoint& xi, double h = 1e-5);

/// Velocity of the real Lie bracket [X, Y] by central differences.
std::vector<double> bracket_velocity(const npk::VectorFieldMA& x, const npk::VectorFieldMA& y, const NearPoint& xi,
                                     double h = 1e-5);

/// Coefficients of the homotopy primitive ∫_0^1 t^{p-1} ι_x ω(tx) dt at x,
/// keyed by sorted index tuple, by Gauss-Legendre quadrature.
std::map<npk::FormIndices, double> homotopy_at(const npk::FormM& w, const std::vector<double>& x);

/// Mean of g over [0, 2π) from `points` equally spaced samples.
double sampled_mean(const Expr& g, int points = 64);

double max_diff(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace oracle
