#include "suites.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <set>

#include "npk/cohomology.hpp"
#include "npk/error.hpp"

namespace npk::cli {

namespace {

IdentityReport make_record(std::string name, std::size_t samples, double residual, double tol) {
  return IdentityReport{std::move(name), samples, residual, !std::isnan(residual) && residual <= tol};
}

/// Runs `instance` `samples` times with fresh randomness and keeps the
/// worst residual.
IdentityReport sampled(std::string name, const SuiteConfig& cfg, std::uint64_t salt,
                       const std::function<double(std::mt19937_64&)>& instance) {
  std::mt19937_64 rng(cfg.seed * 1000003u + salt);
  double worst = 0.0;
  for (std::size_t s = 0; s < cfg.samples; ++s) {
    const double r = instance(rng);
    if (std::isnan(r)) {
      worst = r;
      break;
    }
    worst = std::max(worst, r);
  }
  return make_record(std::move(name), cfg.samples, worst, cfg.tol);
}

double form_residual(const AFormMA& a, const AFormMA& b, Lifter& lifter) {
  std::set<FormIndices> keys;
  for (const auto& t : a.terms()) keys.insert(t.indices);
  for (const auto& t : b.terms()) keys.insert(t.indices);
  double worst = 0.0;
  for (const auto& k : keys)
    worst = std::max(worst, max_abs_diff(eval_fnma(a.coefficient(k), lifter), eval_fnma(b.coefficient(k), lifter)));
  return worst;
}

TangentVectorA random_tangent(const NearPoint& xi, std::mt19937_64& rng) {
  std::vector<AElement> u;
  for (std::size_t i = 0; i < xi.dim(); ++i) u.push_back(random_element(*xi.algebra(), rng));
  return TangentVectorA{xi, std::move(u)};
}

}  // namespace

std::vector<IdentityReport> lie_suite(const SuiteConfig& cfg, const Overrides& ov) {
  std::mt19937_64 rng(cfg.seed);
  IdentityInputs in = random_inputs(cfg.algebra, cfg.chart, rng);
  if (ov.fields.size() > 0) in.x = ov.fields[0];
  if (ov.fields.size() > 1) in.y = ov.fields[1];
  if (ov.fields.size() > 2) in.w = ov.fields[2];
  std::vector<IdentityReport> out;
  const auto& names = identity_names();
  for (std::size_t k = 0; k < names.size(); ++k)
    out.push_back(check_identity(names[k], in, cfg.samples, cfg.seed + k + 1, cfg.tol));
  return out;
}

std::vector<IdentityReport> lift_suite(const SuiteConfig& cfg) {
  const AlgebraPtr& A = cfg.algebra;
  const WeilAlgebra& alg = *A;
  const std::size_t n = cfg.chart.dim();
  std::vector<IdentityReport> out;

  out.push_back(sampled("lift-product", cfg, 1, [&](std::mt19937_64& rng) {
    const Expr f = random_smooth(n, rng), g = random_smooth(n, rng);
    Lifter l(random_near_point(A, cfg.chart, rng));
    return max_abs_diff(l.lift(f * g), alg.mul(l.lift(f), l.lift(g)));
  }));
  out.push_back(sampled("lift-sum", cfg, 2, [&](std::mt19937_64& rng) {
    const Expr f = random_smooth(n, rng), g = random_smooth(n, rng);
    Lifter l(random_near_point(A, cfg.chart, rng));
    return max_abs_diff(l.lift(f + g), l.lift(f) + l.lift(g));
  }));
  out.push_back(sampled("lift-scale", cfg, 3, [&](std::mt19937_64& rng) {
    const Expr f = random_smooth(n, rng);
    const double lambda = std::uniform_real_distribution<double>(-3.0, 3.0)(rng);
    Lifter l(random_near_point(A, cfg.chart, rng));
    return max_abs_diff(l.lift(Expr::constant(lambda) * f), lambda * l.lift(f));
  }));
  out.push_back(sampled("lift-base-point", cfg, 4, [&](std::mt19937_64& rng) {
    const Expr f = random_smooth(n, rng);
    const NearPoint xi = random_near_point(A, cfg.chart, rng);
    return std::abs(alg.augmentation(lift_f(f, xi)) - eval(f, xi.base()));
  }));
  out.push_back(sampled("tv-leibniz", cfg, 5, [&](std::mt19937_64& rng) {
    const Expr f = random_smooth(n, rng), g = random_smooth(n, rng);
    const NearPoint xi = random_near_point(A, cfg.chart, rng);
    const TangentVectorA v = random_tangent(xi, rng);
    Lifter l(xi);
    const AElement rhs = alg.mul(tv_eval(v, f), l.lift(g)) + alg.mul(l.lift(f), tv_eval(v, g));
    return max_abs_diff(tv_eval(v, f * g), rhs);
  }));
  out.push_back(sampled("tv-tilde-lifts", cfg, 6, [&](std::mt19937_64& rng) {
    const Expr f = random_smooth(n, rng);
    const TangentVectorA v = random_tangent(random_near_point(A, cfg.chart, rng), rng);
    return max_abs_diff(tv_tilde(v, gamma(A, n, f)), tv_eval(v, f));
  }));
  out.push_back(sampled("tv-tilde-a-linearity", cfg, 7, [&](std::mt19937_64& rng) {
    const FnMA phi = random_general_fn(A, n, rng), psi = random_general_fn(A, n, rng);
    const AElement a = random_element(alg, rng), b = random_element(alg, rng);
    const TangentVectorA v = random_tangent(random_near_point(A, cfg.chart, rng), rng);
    return max_abs_diff(tv_tilde(v, a * phi + b * psi),
                        alg.mul(a, tv_tilde(v, phi)) + alg.mul(b, tv_tilde(v, psi)));
  }));
  out.push_back(sampled("tv-tilde-constants", cfg, 8, [&](std::mt19937_64& rng) {
    const AElement a = random_element(alg, rng);
    const TangentVectorA v = random_tangent(random_near_point(A, cfg.chart, rng), rng);
    return tv_tilde(v, FnMA::constant(A, n, a)).max_abs();
  }));
  out.push_back(sampled("tv-tilde-leibniz", cfg, 9, [&](std::mt19937_64& rng) {
    const FnMA phi = random_general_fn(A, n, rng), psi = random_general_fn(A, n, rng);
    const NearPoint xi = random_near_point(A, cfg.chart, rng);
    const TangentVectorA v = random_tangent(xi, rng);
    Lifter l(xi);
    const AElement rhs = alg.mul(tv_tilde(v, phi), eval_fnma(psi, l)) + alg.mul(eval_fnma(phi, l), tv_tilde(v, psi));
    return max_abs_diff(tv_tilde(v, phi * psi), rhs);
  }));
  return out;
}

std::vector<IdentityReport> forms_suite(const SuiteConfig& cfg, const Overrides& ov) {
  const AlgebraPtr& A = cfg.algebra;
  const WeilAlgebra& alg = *A;
  const std::size_t n = cfg.chart.dim();
  std::vector<IdentityReport> out;

  auto eval_law = [&](std::size_t p) {
    return [&, p](std::mt19937_64& rng) {
      const FormM eta = random_poly_form(n, p, rng);
      std::vector<VectorFieldM> thetas;
      std::vector<VectorFieldMA> args;
      Expr prod_f = Expr::constant(1.0);
      for (std::size_t k = 0; k < p; ++k) {
        thetas.push_back(random_field_m(n, rng));
        const Expr fk = random_smooth(n, rng);
        prod_f = prod_f * fk;
        args.push_back(gamma(A, n, fk) * prolong(A, thetas.back()));
      }
      Lifter l(random_near_point(A, cfg.chart, rng));
      const AElement lhs = eval_form(prolong_form(A, eta), args, l);
      const AElement rhs = l.lift(prod_f * contract_m(eta, thetas));
      return max_abs_diff(lhs, rhs);
    };
  };
  out.push_back(sampled("prolong-eval-p1", cfg, 11, eval_law(1)));
  if (n >= 2) out.push_back(sampled("prolong-eval-p2", cfg, 12, eval_law(2)));

  auto degree_below = [](std::mt19937_64& rng, std::size_t top) {
    return std::uniform_int_distribution<std::size_t>(0, top)(rng);
  };

  out.push_back(sampled("dA-naturality", cfg, 13, [&](std::mt19937_64& rng) {
    const FormM w = random_poly_form(n, degree_below(rng, n - 1), rng);
    Lifter l(random_near_point(A, cfg.chart, rng));
    return form_residual(dA(prolong_form(A, w)), prolong_form(A, exterior_derivative_m(w)), l);
  }));
  out.push_back(sampled("dA-a-linearity", cfg, 14, [&](std::mt19937_64& rng) {
    const std::size_t p = ov.form && ov.form->degree() < n ? ov.form->degree() : degree_below(rng, n - 1);
    const AFormMA e1 = ov.form && ov.form->degree() == p ? *ov.form : random_aform(A, n, p, rng, true);
    const AFormMA e2 = random_aform(A, n, p, rng, true);
    const AElement a = random_element(alg, rng), b = random_element(alg, rng);
    Lifter l(random_near_point(A, cfg.chart, rng));
    return form_residual(dA(a * e1 + b * e2), a * dA(e1) + b * dA(e2), l);
  }));
  if (n >= 2)
    out.push_back(sampled("dA-squared", cfg, 15, [&](std::mt19937_64& rng) {
      const bool use = ov.form && ov.form->degree() + 2 <= n;
      const AFormMA e = use ? *ov.form : random_aform(A, n, degree_below(rng, n - 2), rng, true);
      Lifter l(random_near_point(A, cfg.chart, rng));
      return form_residual(dA(dA(e)), AFormMA(A, n, e.degree() + 2), l);
    }));
  out.push_back(sampled("palais-vs-dA", cfg, 16, [&](std::mt19937_64& rng) {
    const bool use = ov.form && ov.form->degree() < n;
    const AFormMA e = use ? *ov.form : random_aform(A, n, degree_below(rng, n - 1), rng);
    std::vector<VectorFieldM> thetas;
    std::vector<VectorFieldMA> lifted;
    for (std::size_t k = 0; k <= e.degree(); ++k) {
      thetas.push_back(random_field_m(n, rng));
      lifted.push_back(prolong(A, thetas.back()));
    }
    const NearPoint xi = random_near_point(A, cfg.chart, rng);
    return max_abs_diff(palais_eval(e, thetas, xi), eval_form(dA(e), lifted, xi));
  }));
  out.push_back(sampled("wedge-graded-commutativity", cfg, 17, [&](std::mt19937_64& rng) {
    const std::size_t p = degree_below(rng, n);
    const std::size_t q = degree_below(rng, n - p);
    const AFormMA e1 = random_aform(A, n, p, rng, true), e2 = random_aform(A, n, q, rng, true);
    Lifter l(random_near_point(A, cfg.chart, rng));
    const AFormMA rhs = (p * q) % 2 == 0 ? wedge(e2, e1) : AFormMA(A, n, p + q) - wedge(e2, e1);
    return form_residual(wedge(e1, e2), rhs, l);
  }));
  out.push_back(sampled("dA-wedge-leibniz", cfg, 18, [&](std::mt19937_64& rng) {
    const std::size_t p = degree_below(rng, n - 1);
    const std::size_t q = degree_below(rng, n - 1 - p);
    const AFormMA e1 = random_aform(A, n, p, rng, true), e2 = random_aform(A, n, q, rng, true);
    Lifter l(random_near_point(A, cfg.chart, rng));
    const AFormMA second = wedge(e1, dA(e2));
    const AFormMA rhs = wedge(dA(e1), e2) + (p % 2 == 0 ? second : AFormMA(A, n, p + q + 1) - second);
    return form_residual(dA(wedge(e1, e2)), rhs, l);
  }));
  return out;
}

CohomologyResult poincare_model(const SuiteConfig& cfg) {
  const AlgebraPtr& A = cfg.algebra;
  const std::size_t n = cfg.chart.dim();
  if (cfg.chart.kind() != ChartModel::Kind::Box) throw ChartMismatch("the poincare model needs a box chart");
  if (!cfg.chart.contains(std::vector<double>(n, 0.0)))
    throw NotStarShaped("box " + cfg.chart.name() + " does not contain the origin");
  CohomologyResult res;

  res.records.push_back(sampled("homotopy-identity", cfg, 21, [&](std::mt19937_64& rng) {
    const std::size_t p = std::uniform_int_distribution<std::size_t>(1, n)(rng);
    const PolyForm w = PolyForm::from_form(random_poly_form(n, p, rng, 4));
    const PolyForm lhs = exterior_derivative(homotopy(w)) +
                         (p < n ? homotopy(exterior_derivative(w)) : PolyForm(n, p));
    const PolyForm diff = lhs - w;
    double worst = 0.0;
    for (const auto& [idx, g] : diff.terms()) worst = std::max(worst, g.max_abs_coefficient());
    return worst;
  }));

  for (std::size_t p = 1; p <= n; ++p) {
    res.records.push_back(sampled("primitive-degree-" + std::to_string(p), cfg, 30 + p, [&, p](std::mt19937_64& rng) {
      ACombinationForm eta{A, n, p, {}};
      const int parts = std::uniform_int_distribution<int>(1, 2)(rng);
      for (int j = 0; j < parts; ++j) {
        const AElement a = random_element(*A, rng);
        const PolyForm beta = PolyForm::from_form(random_poly_form(n, p - 1, rng, 3));
        if (std::bernoulli_distribution(0.5)(rng)) {
          eta.add(a, exterior_derivative(beta));
        } else {
          // Split a closed form into two non-closed pieces with one coefficient.
          const PolyForm noise = PolyForm::from_form(random_poly_form(n, p, rng, 3));
          eta.add(a, exterior_derivative(beta) - noise);
          eta.add(a, noise);
        }
      }
      const ACombinationForm prim = a_primitive(eta, cfg.chart);
      return certify_primitive(eta, prim, cfg.chart, 1, rng);
    }));
  }

  if (n >= 2) {
    FormM w(n, 1);
    w.add_term(Expr::var(0), {1});
    ACombinationForm eta{A, n, 1, {}};
    eta.add(A->one(), PolyForm::from_form(w));
    bool rejected = false;
    try {
      a_primitive(eta, cfg.chart);
    } catch (const NotClosed&) {
      rejected = true;
    }
    res.records.push_back(make_record("rejects-non-closed", 1, rejected ? 0.0 : 1.0, cfg.tol));
  }
  return res;
}

namespace {

TrigPoly random_trig(std::mt19937_64& rng, bool with_mean) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const int top = std::uniform_int_distribution<int>(1, TrigPoly::kDefaultMaxFrequency)(rng);
  std::vector<double> a(static_cast<std::size_t>(top)), b(static_cast<std::size_t>(top));
  for (auto& v : a) v = u(rng);
  for (auto& v : b) v = u(rng);
  return TrigPoly::from_real(with_mean ? u(rng) : 0.0, a, b);
}

double mean_by_sampling(const Expr& g) {
  constexpr int m = 64;
  double s = 0.0;
  for (int k = 0; k < m; ++k) {
    const double x = 2.0 * std::numbers::pi * k / m;
    s += eval(g, std::span<const double>(&x, 1));
  }
  return s / m;
}

}  // namespace

CohomologyResult circle_model(const SuiteConfig& cfg, const Overrides& ov) {
  const AlgebraPtr& A = cfg.algebra;
  if (cfg.chart.kind() != ChartModel::Kind::Circle) throw ChartMismatch("the circle model needs --chart circle");
  CohomologyResult res;

  if (ov.form_text) {
    const FormM w = parse_form_m(*ov.form_text, 1);
    if (w.degree() != 1) throw ArityMismatch("the circle model takes a 1-form g dx(1)");
    CircleForm eta{A, {}};
    const AElement a = ov.coeff ? *ov.coeff : A->one();
    for (const auto& t : w.terms()) eta.terms.emplace_back(a, TrigPoly::from_expr(t.coeff));
    res.h1_class = circle_h1_class(eta);
  }

  res.records.push_back(sampled("class-mean-oracle", cfg, 41, [&](std::mt19937_64& rng) {
    const Expr g = random_trig(rng, true).to_expr();
    const AElement a = random_element(*A, rng);
    const CircleForm eta{A, {{a, TrigPoly::from_expr(g)}}};
    return max_abs_diff(circle_h1_class(eta), mean_by_sampling(g) * a);
  }));
  res.records.push_back(sampled("class-a-linearity", cfg, 42, [&](std::mt19937_64& rng) {
    const TrigPoly g1 = random_trig(rng, true), g2 = random_trig(rng, true);
    const AElement a = random_element(*A, rng), b = random_element(*A, rng);
    const AElement c1 = circle_h1_class(CircleForm{A, {{A->one(), g1}}});
    const AElement c2 = circle_h1_class(CircleForm{A, {{A->one(), g2}}});
    const AElement both = circle_h1_class(CircleForm{A, {{a, g1}, {b, g2}}});
    return max_abs_diff(both, A->mul(a, c1) + A->mul(b, c2));
  }));
  res.records.push_back(sampled("exact-forms-in-kernel", cfg, 43, [&](std::mt19937_64& rng) {
    const TrigPoly h = random_trig(rng, true);
    const AElement a = random_element(*A, rng);
    return circle_h1_class(CircleForm{A, {{a, h.derivative()}}}).max_abs();
  }));
  res.records.push_back(sampled("dx-generates", cfg, 44, [&](std::mt19937_64& rng) {
    const AElement a = random_element(*A, rng);
    return max_abs_diff(circle_h1_class(CircleForm{A, {{a, TrigPoly::from_real(1.0, {}, {})}}}), a);
  }));
  res.records.push_back(sampled("primitive-certified", cfg, 45, [&](std::mt19937_64& rng) {
    CircleForm eta{A, {}};
    for (int j = 0; j < 2; ++j) eta.terms.emplace_back(random_element(*A, rng), random_trig(rng, true));
    const AElement cls = circle_h1_class(eta);
    AFormMA prim(A, 1, 0), target(A, 1, 1);
    for (const auto& [a, p] : circle_primitive(eta)) prim = prim + a * AFormMA::zero_form(gamma(A, 1, p.to_expr()));
    for (const auto& [a, g] : eta.terms) {
      FormM w(1, 1);
      w.add_term(g.to_expr(), {0});
      target = target + inject(A, a, w);
    }
    FormM dx(1, 1);
    dx.add_term(Expr::constant(1.0), {0});
    target = target - inject(A, cls, dx);
    Lifter l(random_near_point(A, cfg.chart, rng));
    return form_residual(dA(prim), target, l);
  }));
  return res;
}

CohomologyResult h0_model(const SuiteConfig& cfg) {
  const AlgebraPtr& A = cfg.algebra;
  const std::size_t n = cfg.chart.dim();
  CohomologyResult res;
  constexpr std::size_t instances = 10;
  std::mt19937_64 rng(cfg.seed * 1000003u + 51);
  double worst = 0.0;
  for (std::size_t k = 0; k < instances; ++k) {
    const AElement a = random_element(*A, rng);
    const AElement b = random_element(*A, rng);
    const Expr f = random_smooth(n, rng), g = random_smooth(n, rng);
    const FnMA phi = FnMA::constant(A, n, a) + b * (gamma(A, n, f + g) - gamma(A, n, f) - gamma(A, n, g));
    const H0Result r = h0_check(phi, cfg.chart, cfg.samples, rng());
    worst = std::max(worst, max_abs_diff(r.value, a));
    if (k == 0) res.h0_value = r.value;
  }
  res.records.push_back(make_record("h0-constant", instances * cfg.samples, worst, cfg.tol));

  bool rejected = false;
  try {
    h0_check(gamma(A, n, Expr::var(0)), cfg.chart, cfg.samples, cfg.seed);
  } catch (const NotClosed&) {
    rejected = true;
  }
  res.records.push_back(make_record("h0-rejects-nonclosed", cfg.samples, rejected ? 0.0 : 1.0, cfg.tol));
  return res;
}

}  // namespace npk::cli
