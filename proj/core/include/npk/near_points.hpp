#pragma once

#include <cstddef>
#include <map>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "npk/smooth_expr.hpp"
#include "npk/weil_algebra.hpp"

namespace npk {

struct Interval {
  double lo;
  double hi;
};

/// Chart-local model of M: an open box in R^n (bounds may be infinite) or
/// the circle, a single coordinate read modulo 2π.
class ChartModel {
 public:
  enum class Kind { Box, Circle };

  static ChartModel box(std::vector<Interval> intervals);
  /// (−1,1)^n.
  static ChartModel unit_box(std::size_t n);
  static ChartModel circle();
  /// `box:[-1,1]^2`, `box:[-1,1]x[0,3]`, `circle`.
  static ChartModel parse(std::string_view text);

  Kind kind() const noexcept { return kind_; }
  std::size_t dim() const noexcept { return intervals_.size(); }
  const std::vector<Interval>& intervals() const noexcept { return intervals_; }
  bool contains(std::span<const double> x) const;
  std::string name() const;

  /// Uniform point well inside the domain; unbounded sides are cut to
  /// (−1,1) and bounded ones shrunk by 5% towards the centre.
  std::vector<double> sample_point(std::mt19937_64& rng) const;

 private:
  ChartModel(Kind kind, std::vector<Interval> intervals) : kind_(kind), intervals_(std::move(intervals)) {}
  Kind kind_;
  std::vector<Interval> intervals_;
};

/// ξ ∈ M^A given by its coordinates ξ(x_1)..ξ(x_n) in A.
class NearPoint {
 public:
  NearPoint(AlgebraPtr algebra, std::vector<AElement> coords);
  /// Also checks that the base point lies in `chart`.
  NearPoint(AlgebraPtr algebra, std::vector<AElement> coords, const ChartModel& chart);

  const AlgebraPtr& algebra() const noexcept { return algebra_; }
  std::size_t dim() const noexcept { return coords_.size(); }
  const std::vector<AElement>& coords() const noexcept { return coords_; }
  const AElement& coord(std::size_t i) const { return coords_.at(i); }
  /// Augmentations of the coordinates.
  std::vector<double> base() const;

  /// `[[1.0, 0.5], [2.0, -1.0]]`: one array of dim(A) reals per coordinate.
  static NearPoint from_json(std::string_view text, AlgebraPtr algebra, const ChartModel& chart);
  std::string to_json() const;

 private:
  AlgebraPtr algebra_;
  std::vector<AElement> coords_;
};

/// Base point drawn by ChartModel::sample_point, nilpotent parts uniform in
/// (−1,1)^{dim A − 1}.
NearPoint random_near_point(const AlgebraPtr& algebra, const ChartModel& chart, std::mt19937_64& rng);

/// Computes lifts f^A(ξ) at one near point, sharing partial derivatives,
/// their values at the base point and the powers ν^β across calls.
class Lifter {
 public:
  explicit Lifter(const NearPoint& xi);

  /// Σ_{|β|≤h} ∂^β f(x)/β! · ν^β with ν_i = ξ(x_i) − x_i.
  const AElement& lift(const Expr& f);

  const NearPoint& point() const noexcept { return xi_; }

 private:
  struct MultiIndex {
    std::vector<int> beta;
    std::size_t parent;    // index of β − e_var
    std::size_t var;
    double inv_factorial;  // 1/β!
  };

  NearPoint xi_;
  std::vector<double> base_;
  PointEvaluator evaluator_;
  std::vector<MultiIndex> indices_;  // graded order, indices_[0] = 0
  std::vector<AElement> nu_powers_;
  std::map<const Node*, std::pair<Expr, AElement>> cache_;
};

/// ξ(f), the value at ξ of the lift f^A. Throws DomainError.
AElement lift_f(const Expr& f, const NearPoint& xi);

/// h^A(ξ): coordinates ξ(h_j). Throws BasePointOutsideTarget.
NearPoint lift_map(std::span<const Expr> h, const NearPoint& xi, const ChartModel& target);

/// Tangent vector at ξ in component form u_i = v(x_i).
struct TangentVectorA {
  NearPoint at;
  std::vector<AElement> components;
};

/// v(f) = Σ_i ξ(∂_i f)·u_i.
AElement tv_eval(const TangentVectorA& v, const Expr& f);

}  // namespace npk
