#include "npk/identities.hpp"

#include <algorithm>
#include <cmath>

#include "npk/error.hpp"

namespace npk {

namespace {

using Pairs = std::vector<std::pair<FnMA, FnMA>>;

void add_field_pairs(Pairs& out, const VectorFieldMA& lhs, const VectorFieldMA& rhs) {
  for (std::size_t i = 0; i < lhs.chart_dim(); ++i) out.emplace_back(lhs.component(i), rhs.component(i));
}

VectorFieldMA zero_field(const AlgebraPtr& algebra, std::size_t n) {
  return VectorFieldMA(algebra, std::vector<FnMA>(n, FnMA(algebra, n)));
}

Pairs build_pairs(std::string_view name, const IdentityInputs& in) {
  const AlgebraPtr& A = in.algebra;
  const std::size_t n = in.chart.dim();
  const VectorFieldMA zero = zero_field(A, n);
  Pairs p;
  if (name == "jacobi") {
    const VectorFieldMA j = bracket(in.x, bracket(in.y, in.w)) + bracket(in.y, bracket(in.w, in.x)) +
                            bracket(in.w, bracket(in.x, in.y));
    add_field_pairs(p, j, zero);
  } else if (name == "antisymmetry") {
    add_field_pairs(p, bracket(in.x, in.w) + bracket(in.w, in.x), zero);
    add_field_pairs(p, bracket(in.w, in.w), zero);
  } else if (name == "a-bilinearity") {
    const VectorFieldMA xy = bracket(in.x, in.y);
    add_field_pairs(p, bracket(in.a * in.x, in.y), in.a * xy);
    add_field_pairs(p, bracket(in.x, in.a * in.y), in.a * xy);
    add_field_pairs(p, bracket(in.x + in.z, in.y), xy + bracket(in.z, in.y));
  } else if (name == "prop11-tilde-bracket") {
    p.emplace_back(tilde_apply(bracket(in.x, in.w), in.phi),
                   tilde_apply(in.x, tilde_apply(in.w, in.phi)) - tilde_apply(in.w, tilde_apply(in.x, in.phi)));
  } else if (name == "prop11-tilde-scale") {
    p.emplace_back(tilde_apply(in.phi * in.x, in.psi), in.phi * tilde_apply(in.x, in.psi));
  } else if (name == "prop12") {
    add_field_pairs(p, bracket(in.x, in.phi * in.w), tilde_apply(in.x, in.phi) * in.w + in.phi * bracket(in.x, in.w));
  } else if (name == "prop17-bracket") {
    add_field_pairs(p, bracket(prolong(A, in.theta1), prolong(A, in.theta2)),
                    prolong(A, lie_bracket_m(in.theta1, in.theta2)));
  } else if (name == "prop17-sum") {
    add_field_pairs(p, prolong(A, in.theta1 + in.theta2), prolong(A, in.theta1) + prolong(A, in.theta2));
  } else if (name == "prop17-scale") {
    add_field_pairs(p, prolong(A, in.f * in.theta1), gamma(A, n, in.f) * prolong(A, in.theta1));
  } else if (name == "prop17-tilde-scale") {
    p.emplace_back(tilde_apply(prolong(A, in.f * in.theta1), in.psi),
                   gamma(A, n, in.f) * tilde_apply(prolong(A, in.theta1), in.psi));
  } else if (name == "prop19-dstar-bracket") {
    for (const auto& d1 : in.derivations)
      for (const auto& d2 : in.derivations)
        add_field_pairs(p, bracket(from_derivation(A, n, d1), from_derivation(A, n, d2)),
                        from_derivation(A, n, DerivationOfA::commutator(*A, d1, d2)));
  } else if (name == "prop19-dstar-scale") {
    for (const auto& d : in.derivations)
      add_field_pairs(p, from_derivation(A, n, DerivationOfA::scaled(*A, in.a, d)), in.a * from_derivation(A, n, d));
  } else if (name == "prop19-dstar-theta") {
    const VectorFieldMA t1 = prolong(A, in.theta1);
    const VectorFieldMA t2 = prolong(A, in.theta2);
    for (const auto& d : in.derivations) {
      const VectorFieldMA ds = from_derivation(A, n, d);
      add_field_pairs(p, bracket(ds, t1), zero);
      add_field_pairs(p, bracket(ds, t2), zero);
    }
  } else {
    throw UnknownIdentity("'" + std::string(name) + "'");
  }
  return p;
}

double coefficient(std::mt19937_64& rng) {
  static constexpr double choices[] = {-2.0, -1.5, -1.0, -0.5, 0.5, 1.0, 1.5, 2.0};
  return choices[std::uniform_int_distribution<int>(0, 7)(rng)];
}

}  // namespace

const std::vector<std::string>& identity_names() {
  static const std::vector<std::string> names = {
      "jacobi",         "antisymmetry",         "a-bilinearity",      "prop11-tilde-bracket",
      "prop11-tilde-scale", "prop12",           "prop17-bracket",     "prop17-sum",
      "prop17-scale",   "prop17-tilde-scale",   "prop19-dstar-bracket", "prop19-dstar-scale",
      "prop19-dstar-theta",
  };
  return names;
}

double max_pair_residual(const std::vector<std::pair<FnMA, FnMA>>& pairs, const AlgebraPtr& algebra,
                         const ChartModel& chart, std::size_t samples, std::mt19937_64& rng) {
  double worst = 0.0;
  for (std::size_t s = 0; s < samples; ++s) {
    const NearPoint xi = random_near_point(algebra, chart, rng);
    Lifter lifter(xi);
    for (const auto& [lhs, rhs] : pairs) {
      const double r = max_abs_diff(eval_fnma(lhs, lifter), eval_fnma(rhs, lifter));
      if (std::isnan(r)) return r;
      worst = std::max(worst, r);
    }
  }
  return worst;
}

IdentityReport check_identity(std::string_view name, const IdentityInputs& inputs, std::size_t samples,
                              std::uint64_t seed, double tol) {
  const Pairs pairs = build_pairs(name, inputs);
  std::mt19937_64 rng(seed);
  IdentityReport r;
  r.name = std::string(name);
  r.samples = samples;
  r.max_residual = max_pair_residual(pairs, inputs.algebra, inputs.chart, samples, rng);
  r.pass = r.max_residual <= tol;
  return r;
}

std::vector<IdentityReport> run_lie_suite(const AlgebraPtr& algebra, const ChartModel& chart, std::size_t samples,
                                          std::uint64_t seed, double tol) {
  std::mt19937_64 rng(seed);
  const IdentityInputs inputs = random_inputs(algebra, chart, rng);
  std::vector<IdentityReport> out;
  const auto& names = identity_names();
  for (std::size_t k = 0; k < names.size(); ++k) out.push_back(check_identity(names[k], inputs, samples, seed + k + 1, tol));
  return out;
}

Expr random_poly(std::size_t n, std::mt19937_64& rng, int max_degree) {
  const int terms = std::uniform_int_distribution<int>(1, 3)(rng);
  std::uniform_int_distribution<std::size_t> var(0, n - 1);
  std::uniform_int_distribution<int> deg(0, max_degree);
  Expr out;
  for (int t = 0; t < terms; ++t) {
    Expr mono = Expr::constant(coefficient(rng));
    const int d = deg(rng);
    for (int k = 0; k < d; ++k) mono = mono * Expr::var(var(rng));
    out = out + mono;
  }
  return out;
}

Expr random_smooth(std::size_t n, std::mt19937_64& rng) {
  const Expr x = Expr::var(std::uniform_int_distribution<std::size_t>(0, n - 1)(rng));
  Expr t;
  switch (std::uniform_int_distribution<int>(0, 2)(rng)) {
    case 0: t = sin(x); break;
    case 1: t = cos(x); break;
    default: t = exp(Expr::constant(0.5) * x); break;
  }
  return random_poly(n, rng) + Expr::constant(coefficient(rng)) * t;
}

AElement random_element(const WeilAlgebra& algebra, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  AElement a = algebra.zero();
  for (std::size_t i = 0; i < algebra.dim(); ++i) a[i] = u(rng);
  return a;
}

VectorFieldM random_field_m(std::size_t n, std::mt19937_64& rng) {
  VectorFieldM theta;
  for (std::size_t i = 0; i < n; ++i) theta.components.push_back(random_poly(n, rng));
  return theta;
}

FnMA random_lift_fn(const AlgebraPtr& algebra, std::size_t n, std::mt19937_64& rng) {
  const AElement a1 = random_element(*algebra, rng);
  const AElement a2 = random_element(*algebra, rng);
  const Expr p1 = random_smooth(n, rng);
  const Expr p2 = random_poly(n, rng);
  const Expr p3 = random_poly(n, rng);
  return a1 * gamma(algebra, n, p1) + a2 * (gamma(algebra, n, p2) * gamma(algebra, n, p3));
}

VectorFieldMA random_lift_field(const AlgebraPtr& algebra, std::size_t n, std::mt19937_64& rng) {
  std::vector<FnMA> c;
  for (std::size_t i = 0; i < n; ++i) c.push_back(random_lift_fn(algebra, n, rng));
  return VectorFieldMA(algebra, std::move(c));
}

FnMA random_general_fn(const AlgebraPtr& algebra, std::size_t n, std::mt19937_64& rng) {
  const std::size_t alpha = std::uniform_int_distribution<std::size_t>(0, algebra->dim() - 1)(rng);
  const AElement b = random_element(*algebra, rng);
  return random_lift_fn(algebra, n, rng) + b * FnMA::generator(algebra, n, alpha, random_poly(n, rng));
}

VectorFieldMA random_general_field(const AlgebraPtr& algebra, std::size_t n, std::mt19937_64& rng) {
  VectorFieldMA out = random_lift_field(algebra, n, rng);
  const auto basis = derivation_basis(*algebra);
  if (!basis.empty()) {
    LinearEndo mu(algebra->dim());
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (const auto& d : basis) {
      const double c = u(rng);
      for (std::size_t r = 0; r < mu.dim(); ++r)
        for (std::size_t col = 0; col < mu.dim(); ++col) mu(r, col) += c * d.endo()(r, col);
    }
    out = out + from_derivation(algebra, n, mu);
  }
  std::vector<FnMA> raw;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t alpha = std::uniform_int_distribution<std::size_t>(0, algebra->dim() - 1)(rng);
    raw.push_back(random_element(*algebra, rng) * FnMA::generator(algebra, n, alpha, random_poly(n, rng)));
  }
  return out + VectorFieldMA(algebra, std::move(raw));
}

namespace {

std::vector<FormIndices> index_tuples(std::size_t n, std::size_t p) {
  std::vector<FormIndices> out;
  FormIndices cur;
  auto rec = [&](auto&& self, std::size_t start) -> void {
    if (cur.size() == p) {
      out.push_back(cur);
      return;
    }
    for (std::size_t i = start; i < n; ++i) {
      cur.push_back(i);
      self(self, i + 1);
      cur.pop_back();
    }
  };
  rec(rec, 0);
  return out;
}

std::vector<FormIndices> random_tuples(std::size_t n, std::size_t p, std::mt19937_64& rng) {
  const auto all = index_tuples(n, p);
  std::vector<FormIndices> chosen;
  std::bernoulli_distribution keep(0.7);
  for (const auto& t : all)
    if (keep(rng)) chosen.push_back(t);
  if (chosen.empty()) chosen.push_back(all[std::uniform_int_distribution<std::size_t>(0, all.size() - 1)(rng)]);
  return chosen;
}

}  // namespace

FormM random_poly_form(std::size_t n, std::size_t p, std::mt19937_64& rng, int max_degree) {
  FormM w(n, p);
  for (const auto& t : random_tuples(n, p, rng)) w.add_term(random_poly(n, rng, max_degree), t);
  return w;
}

AFormMA random_aform(const AlgebraPtr& algebra, std::size_t n, std::size_t p, std::mt19937_64& rng, bool general) {
  AFormMA w(algebra, n, p);
  for (const auto& t : random_tuples(n, p, rng))
    w.add_term(general ? random_general_fn(algebra, n, rng) : random_lift_fn(algebra, n, rng), t);
  return w;
}

IdentityInputs random_inputs(const AlgebraPtr& algebra, const ChartModel& chart, std::mt19937_64& rng) {
  const std::size_t n = chart.dim();
  VectorFieldMA x = random_lift_field(algebra, n, rng);
  VectorFieldMA y = random_lift_field(algebra, n, rng);
  VectorFieldMA z = random_lift_field(algebra, n, rng);
  VectorFieldMA w = random_general_field(algebra, n, rng);
  FnMA phi = random_general_fn(algebra, n, rng);
  FnMA psi = random_lift_fn(algebra, n, rng);
  Expr f = random_smooth(n, rng);
  VectorFieldM t1 = random_field_m(n, rng);
  VectorFieldM t2 = random_field_m(n, rng);
  AElement a = random_element(*algebra, rng);
  return IdentityInputs{algebra, chart, std::move(x), std::move(y), std::move(z), std::move(w), std::move(phi),
                        std::move(psi), std::move(f), std::move(t1), std::move(t2), std::move(a),
                        derivation_basis(*algebra)};
}

}  // namespace npk
