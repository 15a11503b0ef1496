#include "npk/near_points.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numbers>
#include <regex>

#include "json.hpp"

#include "npk/error.hpp"

namespace npk {

namespace {

std::string format_bound(double v) {
  if (std::isinf(v)) return v < 0 ? "-inf" : "inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_bound(const std::string& s) {
  if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw InvalidChart("bad bound '" + s + "'");
  return v;
}

}  // namespace

ChartModel ChartModel::box(std::vector<Interval> intervals) {
  if (intervals.empty()) throw InvalidChart("box of dimension 0");
  for (const auto& iv : intervals)
    if (!(iv.lo < iv.hi)) throw InvalidChart("empty interval (" + format_bound(iv.lo) + ", " + format_bound(iv.hi) + ")");
  return ChartModel(Kind::Box, std::move(intervals));
}

ChartModel ChartModel::unit_box(std::size_t n) { return box(std::vector<Interval>(n, Interval{-1.0, 1.0})); }

ChartModel ChartModel::circle() {
  return ChartModel(Kind::Circle, {Interval{-std::numeric_limits<double>::infinity(),
                                            std::numeric_limits<double>::infinity()}});
}

ChartModel ChartModel::parse(std::string_view text) {
  std::string s;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) s += c;
  if (s == "circle") return circle();
  if (s.rfind("box:", 0) != 0) throw InvalidChart("expected 'box:...' or 'circle', got '" + std::string(text) + "'");
  s = s.substr(4);
  static const std::regex power(R"(^\[([^,\]]+),([^,\]]+)\]\^([0-9]+)$)");
  static const std::regex factor(R"(\[([^,\]]+),([^,\]]+)\])");
  std::smatch m;
  if (std::regex_match(s, m, power)) {
    const int n = std::stoi(m[3]);
    if (n < 1 || n > 16) throw InvalidChart("box dimension out of range");
    return box(std::vector<Interval>(static_cast<std::size_t>(n), Interval{parse_bound(m[1]), parse_bound(m[2])}));
  }
  std::vector<Interval> ivs;
  std::size_t pos = 0;
  while (pos < s.size()) {
    if (!ivs.empty()) {
      if (s[pos] != 'x') throw InvalidChart("expected 'x' between intervals");
      ++pos;
    }
    std::smatch f;
    const std::string rest = s.substr(pos);
    if (!std::regex_search(rest, f, factor, std::regex_constants::match_continuous))
      throw InvalidChart("bad interval in '" + std::string(text) + "'");
    ivs.push_back({parse_bound(f[1]), parse_bound(f[2])});
    pos += static_cast<std::size_t>(f.length(0));
  }
  return box(std::move(ivs));
}

bool ChartModel::contains(std::span<const double> x) const {
  if (x.size() != dim()) return false;
  if (kind_ == Kind::Circle) return std::isfinite(x[0]);
  for (std::size_t i = 0; i < x.size(); ++i)
    if (!(intervals_[i].lo < x[i] && x[i] < intervals_[i].hi)) return false;
  return true;
}

std::string ChartModel::name() const {
  if (kind_ == Kind::Circle) return "circle";
  const bool uniform = std::all_of(intervals_.begin(), intervals_.end(), [&](const Interval& iv) {
    return iv.lo == intervals_[0].lo && iv.hi == intervals_[0].hi;
  });
  auto one = [](const Interval& iv) { return "[" + format_bound(iv.lo) + "," + format_bound(iv.hi) + "]"; };
  if (uniform) return "box:" + one(intervals_[0]) + "^" + std::to_string(dim());
  std::string out = "box:";
  for (std::size_t i = 0; i < dim(); ++i) out += (i ? "x" : "") + one(intervals_[i]);
  return out;
}

std::vector<double> ChartModel::sample_point(std::mt19937_64& rng) const {
  std::vector<double> x(dim());
  if (kind_ == Kind::Circle) {
    x[0] = std::uniform_real_distribution<double>(0.0, 2.0 * std::numbers::pi)(rng);
    return x;
  }
  for (std::size_t i = 0; i < dim(); ++i) {
    double lo = intervals_[i].lo;
    double hi = intervals_[i].hi;
    if (std::isinf(lo) && std::isinf(hi)) {
      lo = -1.0;
      hi = 1.0;
    } else if (std::isinf(lo)) {
      lo = hi - 2.0;
    } else if (std::isinf(hi)) {
      hi = lo + 2.0;
    }
    const double mid = 0.5 * (lo + hi);
    const double half = 0.5 * (hi - lo) * 0.95;
    x[i] = std::uniform_real_distribution<double>(mid - half, mid + half)(rng);
  }
  return x;
}

NearPoint::NearPoint(AlgebraPtr algebra, std::vector<AElement> coords)
    : algebra_(std::move(algebra)), coords_(std::move(coords)) {
  for (const auto& c : coords_) algebra_->check_element(c);
}

NearPoint::NearPoint(AlgebraPtr algebra, std::vector<AElement> coords, const ChartModel& chart)
    : NearPoint(std::move(algebra), std::move(coords)) {
  if (coords_.size() != chart.dim())
    throw DimensionMismatch("near point has " + std::to_string(coords_.size()) + " coordinates, chart has " +
                            std::to_string(chart.dim()));
  if (!chart.contains(base())) throw BasePointOutsideTarget("base point outside chart " + chart.name());
}

std::vector<double> NearPoint::base() const {
  std::vector<double> x;
  x.reserve(coords_.size());
  for (const auto& c : coords_) x.push_back(c[0]);
  return x;
}

NearPoint NearPoint::from_json(std::string_view text, AlgebraPtr algebra, const ChartModel& chart) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw SyntaxError(std::string("near point JSON: ") + e.what(), e.byte > 0 ? e.byte - 1 : 0);
  }
  if (!j.is_array()) throw SyntaxError("near point must be a JSON array", 0);
  std::vector<AElement> coords;
  for (const auto& row : j) {
    if (!row.is_array()) throw SyntaxError("near point coordinate must be an array", 0);
    std::vector<double> c;
    for (const auto& v : row) {
      if (!v.is_number()) throw SyntaxError("near point entries must be numbers", 0);
      c.push_back(v.get<double>());
    }
    if (c.size() != algebra->dim())
      throw DimensionMismatch("coordinate of length " + std::to_string(c.size()) + " for algebra of dim " +
                              std::to_string(algebra->dim()));
    coords.emplace_back(std::move(c));
  }
  return NearPoint(std::move(algebra), std::move(coords), chart);
}

std::string NearPoint::to_json() const {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& c : coords_) j.push_back(std::vector<double>(c.coeffs().begin(), c.coeffs().end()));
  return j.dump();
}

NearPoint random_near_point(const AlgebraPtr& algebra, const ChartModel& chart, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const std::vector<double> x = chart.sample_point(rng);
  std::vector<AElement> coords;
  for (double xi : x) {
    AElement c = algebra->zero();
    c[0] = xi;
    for (std::size_t a = 1; a < algebra->dim(); ++a) c[a] = unit(rng);
    coords.push_back(std::move(c));
  }
  return NearPoint(algebra, std::move(coords), chart);
}

Lifter::Lifter(const NearPoint& xi) : xi_(xi), base_(xi.base()), evaluator_(base_) {
  const WeilAlgebra& A = *xi.algebra();
  const std::size_t n = xi.dim();
  const int h = A.height();

  std::vector<AElement> nu;
  for (const auto& c : xi.coords()) nu.push_back(A.nilpotent_part(c));

  // Multi-indices of total degree ≤ h, degree by degree; each one records
  // the parent obtained by lowering its first nonzero entry.
  indices_.push_back({std::vector<int>(n, 0), 0, 0, 1.0});
  nu_powers_.push_back(A.one());
  std::size_t prev_begin = 0;
  for (int deg = 1; deg <= h && n > 0; ++deg) {
    const std::size_t prev_end = indices_.size();
    std::map<std::vector<int>, std::size_t> seen;
    for (std::size_t p = prev_begin; p < prev_end; ++p) {
      for (std::size_t v = 0; v < n; ++v) {
        std::vector<int> beta = indices_[p].beta;
        // Only extend along variables at or after the first nonzero one so
        // each multi-index is generated once.
        std::size_t first_nz = n;
        for (std::size_t k = 0; k < n; ++k)
          if (beta[k] > 0) {
            first_nz = k;
            break;
          }
        if (v > first_nz) continue;
        beta[v] += 1;
        if (seen.count(beta)) continue;
        seen.emplace(beta, indices_.size());
        const double inv_fact = indices_[p].inv_factorial / beta[v];
        indices_.push_back({beta, p, v, inv_fact});
        nu_powers_.push_back(A.mul(nu_powers_[p], nu[v]));
      }
    }
    prev_begin = prev_end;
  }
}

const AElement& Lifter::lift(const Expr& f) {
  if (auto it = cache_.find(f.get()); it != cache_.end()) return it->second.second;
  const WeilAlgebra& A = *xi_.algebra();
  AElement out = A.zero();
  std::vector<Expr> partials(indices_.size());
  partials[0] = f;
  for (std::size_t k = 0; k < indices_.size(); ++k) {
    if (k > 0) partials[k] = diff(partials[indices_[k].parent], indices_[k].var);
    if (partials[k].is_constant(0.0)) continue;
    if (k > 0 && nu_powers_[k].is_zero()) continue;
    const double value = evaluator_(partials[k]) * indices_[k].inv_factorial;
    if (value == 0.0) continue;
    out += value * nu_powers_[k];
  }
  auto [it, inserted] = cache_.emplace(f.get(), std::make_pair(f, std::move(out)));
  return it->second.second;
}

AElement lift_f(const Expr& f, const NearPoint& xi) {
  Lifter lifter(xi);
  return lifter.lift(f);
}

NearPoint lift_map(std::span<const Expr> h, const NearPoint& xi, const ChartModel& target) {
  if (h.size() != target.dim())
    throw DimensionMismatch("map has " + std::to_string(h.size()) + " components, target chart has " +
                            std::to_string(target.dim()));
  Lifter lifter(xi);
  std::vector<AElement> coords;
  for (const auto& hj : h) coords.push_back(lifter.lift(hj));
  return NearPoint(xi.algebra(), std::move(coords), target);
}

AElement tv_eval(const TangentVectorA& v, const Expr& f) {
  const WeilAlgebra& A = *v.at.algebra();
  if (v.components.size() != v.at.dim())
    throw DimensionMismatch("tangent vector has " + std::to_string(v.components.size()) + " components at a point of "
                            "dimension " + std::to_string(v.at.dim()));
  Lifter lifter(v.at);
  AElement out = A.zero();
  for (std::size_t i = 0; i < v.components.size(); ++i) {
    const Expr d = diff(f, i);
    if (d.is_constant(0.0)) continue;
    out += A.mul(lifter.lift(d), v.components[i]);
  }
  return out;
}

}  // namespace npk
