#include "npk/cohomology.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "npk/error.hpp"

namespace npk {

Polynomial Polynomial::constant(std::size_t n, const Rational& c) { return monomial(n, Exponents(n, 0), c); }

Polynomial Polynomial::monomial(std::size_t n, const Exponents& e, const Rational& c) {
  Polynomial p(n);
  p.add(e, c);
  return p;
}

void Polynomial::add(const Exponents& e, const Rational& c) {
  if (c == 0) return;
  auto [it, fresh] = terms_.emplace(e, c);
  if (!fresh) {
    it->second += c;
    if (it->second == 0) terms_.erase(it);
  }
}

Polynomial Polynomial::from_expr(const Expr& e, std::size_t n) {
  const Node& node = e.node();
  switch (node.op()) {
    case Op::Const:
      if (!std::isfinite(node.value())) throw NonPolynomialCoefficient("non-finite constant");
      return constant(n, Rational(node.value()));
    case Op::Var: {
      if (static_cast<std::size_t>(node.index()) >= n)
        throw UnknownVariable("x" + std::to_string(node.index() + 1) + " on a chart of dimension " +
                              std::to_string(n));
      Exponents ex(n, 0);
      ex[static_cast<std::size_t>(node.index())] = 1;
      return monomial(n, ex, 1);
    }
    case Op::Add: return from_expr(node.lhs(), n) + from_expr(node.rhs(), n);
    case Op::Sub: return from_expr(node.lhs(), n) - from_expr(node.rhs(), n);
    case Op::Mul: return from_expr(node.lhs(), n) * from_expr(node.rhs(), n);
    case Op::Neg: return Rational(-1) * from_expr(node.lhs(), n);
    case Op::Div: {
      const Polynomial den = from_expr(node.rhs(), n);
      if (den.degree() != 0 || den.is_zero())
        throw NonPolynomialCoefficient("division by a non-constant in '" + unparse(e) + "'");
      return (Rational(1) / den.terms_.begin()->second) * from_expr(node.lhs(), n);
    }
    case Op::PowInt:
    case Op::PowReal: {
      double k = node.op() == Op::PowInt ? node.index() : node.value();
      if (k < 0 || k != std::floor(k) || k > 64)
        throw NonPolynomialCoefficient("non-polynomial power in '" + unparse(e) + "'");
      const Polynomial base = from_expr(node.lhs(), n);
      Polynomial out = constant(n, 1);
      for (int i = 0; i < static_cast<int>(k); ++i) out = out * base;
      return out;
    }
    default:
      throw NonPolynomialCoefficient("'" + unparse(e) + "' is not a polynomial");
  }
}

int Polynomial::degree() const {
  int d = -1;
  for (const auto& [e, c] : terms_) {
    int s = 0;
    for (int k : e) s += k;
    d = std::max(d, s);
  }
  return d;
}

Polynomial Polynomial::derivative(std::size_t i) const {
  Polynomial out(n_);
  for (const auto& [e, c] : terms_) {
    if (e[i] == 0) continue;
    Exponents f = e;
    f[i] -= 1;
    out.add(f, c * e[i]);
  }
  return out;
}

Expr Polynomial::to_expr() const {
  Expr out;
  for (const auto& [e, c] : terms_) {
    Expr m = Expr::constant(c.convert_to<double>());
    for (std::size_t i = 0; i < n_; ++i)
      if (e[i] > 0) m = m * pow(Expr::var(i), e[i]);
    out = out + m;
  }
  return out;
}

double Polynomial::max_abs_coefficient() const {
  double m = 0.0;
  for (const auto& [e, c] : terms_) m = std::max(m, std::abs(c.convert_to<double>()));
  return m;
}

Polynomial& Polynomial::operator+=(const Polynomial& o) {
  for (const auto& [e, c] : o.terms_) add(e, c);
  return *this;
}

Polynomial& Polynomial::operator-=(const Polynomial& o) {
  for (const auto& [e, c] : o.terms_) add(e, -c);
  return *this;
}

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
  Polynomial out(a.n_);
  for (const auto& [ea, ca] : a.terms_)
    for (const auto& [eb, cb] : b.terms_) {
      Exponents e(a.n_);
      for (std::size_t i = 0; i < a.n_; ++i) e[i] = ea[i] + eb[i];
      out.add(e, ca * cb);
    }
  return out;
}

Polynomial operator*(const Rational& c, const Polynomial& p) {
  Polynomial out(p.n_);
  if (c == 0) return out;
  for (const auto& [e, v] : p.terms_) out.terms_.emplace(e, c * v);
  return out;
}

PolyForm PolyForm::from_form(const FormM& w) {
  PolyForm out(w.dim(), w.degree());
  for (const auto& t : w.terms()) out.add_term(Polynomial::from_expr(t.coeff, w.dim()), t.indices);
  return out;
}

FormM PolyForm::to_form() const {
  FormM out(n_, degree_);
  for (const auto& [idx, g] : terms_) out.add_term(g.to_expr(), idx);
  return out;
}

void PolyForm::add_term(const Polynomial& g, FormIndices indices) {
  if (indices.size() != degree_) throw ArityMismatch("term of the wrong degree");
  const int sign = sort_with_sign(indices);
  if (sign == 0 || g.is_zero()) return;
  auto it = terms_.find(indices);
  if (it == terms_.end()) it = terms_.emplace(indices, Polynomial(n_)).first;
  if (sign > 0)
    it->second += g;
  else
    it->second -= g;
  if (it->second.is_zero()) terms_.erase(it);
}

PolyForm& PolyForm::operator+=(const PolyForm& o) {
  if (o.degree_ != degree_ || o.n_ != n_) throw ArityMismatch("adding forms of different shape");
  for (const auto& [idx, g] : o.terms_) add_term(g, idx);
  return *this;
}

PolyForm operator-(const PolyForm& a, const PolyForm& b) { return a + Rational(-1) * b; }

PolyForm operator*(const Rational& c, const PolyForm& w) {
  PolyForm out(w.n_, w.degree_);
  for (const auto& [idx, g] : w.terms_) out.add_term(c * g, idx);
  return out;
}

PolyForm exterior_derivative(const PolyForm& w) {
  PolyForm out(w.dim(), w.degree() + 1);
  for (const auto& [idx, g] : w.terms())
    for (std::size_t i = 0; i < w.dim(); ++i) {
      FormIndices j{i};
      j.insert(j.end(), idx.begin(), idx.end());
      out.add_term(g.derivative(i), std::move(j));
    }
  return out;
}

PolyForm homotopy(const PolyForm& w) {
  const std::size_t p = w.degree();
  if (p == 0) throw ArityMismatch("the homotopy operator acts on forms of degree ≥ 1");
  const std::size_t n = w.dim();
  PolyForm out(n, p - 1);
  for (const auto& [idx, g] : w.terms()) {
    for (const auto& [e, c] : g.terms()) {
      int m = 0;
      for (int k : e) m += k;
      const Rational scaled = c / Rational(m + static_cast<int>(p));
      for (std::size_t k = 0; k < p; ++k) {
        Exponents f = e;
        f[idx[k]] += 1;
        FormIndices rest;
        for (std::size_t j = 0; j < p; ++j)
          if (j != k) rest.push_back(idx[j]);
        out.add_term(Polynomial::monomial(n, f, k % 2 == 0 ? scaled : Rational(-scaled)), std::move(rest));
      }
    }
  }
  return out;
}

namespace {

void require_star_shaped(const ChartModel& chart) {
  if (chart.kind() != ChartModel::Kind::Box) throw NotStarShaped("chart " + chart.name() + " is not a box");
  const std::vector<double> origin(chart.dim(), 0.0);
  if (!chart.contains(origin)) throw NotStarShaped("box " + chart.name() + " does not contain the origin");
}

}  // namespace

FormM poincare_homotopy(const FormM& w, const ChartModel& chart) {
  require_star_shaped(chart);
  if (w.dim() != chart.dim()) throw ChartMismatch("form dimension differs from chart dimension");
  return homotopy(PolyForm::from_form(w)).to_form();
}

void ACombinationForm::add(const AElement& a, PolyForm w) {
  if (w.dim() != n || w.degree() != degree) throw ArityMismatch("A-combination terms must share dimension and degree");
  algebra->check_element(a);
  terms.emplace_back(a, std::move(w));
}

AFormMA inject(const AlgebraPtr& algebra, const AElement& a, const FormM& w) {
  return a * prolong_form(algebra, w);
}

AFormMA inject(const ACombinationForm& eta) {
  AFormMA out(eta.algebra, eta.n, eta.degree);
  for (const auto& [a, w] : eta.terms) out = out + inject(eta.algebra, a, w.to_form());
  return out;
}

double closure_residual(const ACombinationForm& eta) {
  std::vector<PolyForm> d;
  for (const auto& [a, w] : eta.terms) d.push_back(exterior_derivative(w));
  double worst = 0.0;
  for (std::size_t alpha = 0; alpha < eta.algebra->dim(); ++alpha) {
    PolyForm sum(eta.n, eta.degree + 1);
    for (std::size_t j = 0; j < d.size(); ++j) {
      const double c = eta.terms[j].first[alpha];
      if (c != 0.0) sum += Rational(c) * d[j];
    }
    for (const auto& [idx, g] : sum.terms()) worst = std::max(worst, g.max_abs_coefficient());
  }
  return worst;
}

ACombinationForm a_primitive(const ACombinationForm& eta, const ChartModel& chart) {
  require_star_shaped(chart);
  if (chart.dim() != eta.n) throw ChartMismatch("form dimension differs from chart dimension");
  if (eta.degree == 0) throw ArityMismatch("primitives exist for degree ≥ 1");
  const double r = closure_residual(eta);
  if (r > 1e-10) throw NotClosed("closure residual " + std::to_string(r));
  ACombinationForm out{eta.algebra, eta.n, eta.degree - 1, {}};
  for (const auto& [a, w] : eta.terms) out.add(a, homotopy(w));
  return out;
}

double certify_primitive(const ACombinationForm& eta, const ACombinationForm& primitive, const ChartModel& chart,
                         std::size_t samples, std::mt19937_64& rng) {
  const AFormMA lhs = dA(inject(primitive));
  const AFormMA rhs = inject(eta);
  std::set<FormIndices> keys;
  for (const auto& t : lhs.terms()) keys.insert(t.indices);
  for (const auto& t : rhs.terms()) keys.insert(t.indices);
  double worst = 0.0;
  for (std::size_t s = 0; s < samples; ++s) {
    Lifter lifter(random_near_point(eta.algebra, chart, rng));
    for (const auto& k : keys)
      worst = std::max(worst, max_abs_diff(eval_fnma(lhs.coefficient(k), lifter), eval_fnma(rhs.coefficient(k), lifter)));
  }
  return worst;
}

TrigPoly::TrigPoly(int max_frequency) : n_(max_frequency), c_(static_cast<std::size_t>(2 * max_frequency + 1)) {
  if (max_frequency < 0) throw DomainError("negative frequency cutoff");
}

TrigPoly TrigPoly::from_real(double a0, const std::vector<double>& a, const std::vector<double>& b, int max_frequency) {
  TrigPoly t(max_frequency);
  const auto top = static_cast<int>(std::max(a.size(), b.size()));
  if (top > max_frequency) throw NonTrigPolynomial("frequency " + std::to_string(top) + " above the cutoff");
  t.c_[static_cast<std::size_t>(max_frequency)] = a0;
  for (int k = 1; k <= top; ++k) {
    const double ak = k <= static_cast<int>(a.size()) ? a[static_cast<std::size_t>(k - 1)] : 0.0;
    const double bk = k <= static_cast<int>(b.size()) ? b[static_cast<std::size_t>(k - 1)] : 0.0;
    const std::complex<double> ck(ak / 2, -bk / 2);
    t.c_[static_cast<std::size_t>(max_frequency + k)] = ck;
    t.c_[static_cast<std::size_t>(max_frequency - k)] = std::conj(ck);
  }
  return t;
}

TrigPoly TrigPoly::from_expr(const Expr& e, int max_frequency) {
  const Node& node = e.node();
  TrigPoly out(max_frequency);
  auto& c0 = out.c_[static_cast<std::size_t>(max_frequency)];
  if (arity(e) == 0) {
    c0 = npk::eval(e, std::span<const double>{});
    return out;
  }
  switch (node.op()) {
    case Op::Add: return from_expr(node.lhs(), max_frequency) + from_expr(node.rhs(), max_frequency);
    case Op::Sub: return from_expr(node.lhs(), max_frequency) + (-1.0) * from_expr(node.rhs(), max_frequency);
    case Op::Mul: return from_expr(node.lhs(), max_frequency) * from_expr(node.rhs(), max_frequency);
    case Op::Neg: return (-1.0) * from_expr(node.lhs(), max_frequency);
    case Op::Div:
      if (arity(node.rhs()) != 0) throw NonTrigPolynomial("division by a non-constant in '" + unparse(e) + "'");
      return (1.0 / npk::eval(node.rhs(), std::span<const double>{})) * from_expr(node.lhs(), max_frequency);
    case Op::PowInt:
    case Op::PowReal: {
      const double k = node.op() == Op::PowInt ? node.index() : node.value();
      if (k < 0 || k != std::floor(k) || k > 64) throw NonTrigPolynomial("non-integer power in '" + unparse(e) + "'");
      const TrigPoly base = from_expr(node.lhs(), max_frequency);
      TrigPoly acc(max_frequency);
      acc.c_[static_cast<std::size_t>(max_frequency)] = 1.0;
      for (int i = 0; i < static_cast<int>(k); ++i) acc = acc * base;
      return acc;
    }
    case Op::Sin:
    case Op::Cos: {
      Polynomial arg;
      try {
        arg = Polynomial::from_expr(node.lhs(), 1);
      } catch (const Error&) {
        throw NonTrigPolynomial("argument of '" + unparse(e) + "' is not affine in x1");
      }
      if (arg.degree() > 1) throw NonTrigPolynomial("argument of '" + unparse(e) + "' is not affine in x1");
      Rational slope = 0;
      double phase = 0.0;
      for (const auto& [ex, c] : arg.terms()) {
        if (ex[0] == 1)
          slope = c;
        else
          phase = c.convert_to<double>();
      }
      if (denominator(slope) != 1) throw NonTrigPolynomial("non-integer frequency in '" + unparse(e) + "'");
      const long long k = numerator(slope).convert_to<long long>();
      if (std::llabs(k) > max_frequency)
        throw NonTrigPolynomial("frequency " + std::to_string(k) + " above the cutoff " +
                                std::to_string(max_frequency));
      const std::complex<double> up = std::polar(1.0, phase) / 2.0;
      const std::complex<double> down = std::conj(up);
      const auto ip = static_cast<std::size_t>(max_frequency + k);
      const auto im = static_cast<std::size_t>(max_frequency - k);
      if (node.op() == Op::Cos) {
        out.c_[ip] += up;
        out.c_[im] += down;
      } else {
        const std::complex<double> i(0.0, 1.0);
        out.c_[ip] += up / i;
        out.c_[im] -= down / i;
      }
      return out;
    }
    case Op::Var:
      throw NonTrigPolynomial("the coordinate x1 is not periodic");
    default:
      throw NonTrigPolynomial("'" + unparse(e) + "' is not a trigonometric polynomial");
  }
}

double TrigPoly::eval(double x) const {
  std::complex<double> s = 0.0;
  for (int k = -n_; k <= n_; ++k) s += coefficient(k) * std::polar(1.0, k * x);
  return s.real();
}

TrigPoly TrigPoly::derivative() const {
  TrigPoly out(n_);
  for (int k = -n_; k <= n_; ++k)
    out.c_[static_cast<std::size_t>(k + n_)] = coefficient(k) * std::complex<double>(0.0, k);
  return out;
}

TrigPoly TrigPoly::integral() const {
  TrigPoly out(n_);
  for (int k = -n_; k <= n_; ++k)
    if (k != 0) out.c_[static_cast<std::size_t>(k + n_)] = coefficient(k) / std::complex<double>(0.0, k);
  return out;
}

Expr TrigPoly::to_expr() const {
  Expr out = Expr::constant(mean());
  const Expr x = Expr::var(0);
  for (int k = 1; k <= n_; ++k) {
    const std::complex<double> ck = coefficient(k);
    const Expr arg = k == 1 ? x : Expr::constant(k) * x;
    if (ck.real() != 0.0) out = out + Expr::constant(2 * ck.real()) * cos(arg);
    if (ck.imag() != 0.0) out = out + Expr::constant(-2 * ck.imag()) * sin(arg);
  }
  return out;
}

TrigPoly operator+(const TrigPoly& a, const TrigPoly& b) {
  if (a.n_ != b.n_) throw NonTrigPolynomial("frequency cutoffs differ");
  TrigPoly out = a;
  for (std::size_t i = 0; i < out.c_.size(); ++i) out.c_[i] += b.c_[i];
  return out;
}

TrigPoly operator*(double s, const TrigPoly& a) {
  TrigPoly out = a;
  for (auto& c : out.c_) c *= s;
  return out;
}

TrigPoly operator*(const TrigPoly& a, const TrigPoly& b) {
  if (a.n_ != b.n_) throw NonTrigPolynomial("frequency cutoffs differ");
  const int n = a.n_;
  TrigPoly out(n);
  for (int i = -n; i <= n; ++i) {
    const std::complex<double> ai = a.coefficient(i);
    if (ai == 0.0) continue;
    for (int j = -n; j <= n; ++j) {
      const std::complex<double> bj = b.coefficient(j);
      if (bj == 0.0) continue;
      const std::complex<double> prod = ai * bj;
      if (std::abs(i + j) > n) {
        if (std::abs(prod) > 1e-14)
          throw NonTrigPolynomial("product has frequency " + std::to_string(std::abs(i + j)) + " above the cutoff " +
                                  std::to_string(n));
        continue;
      }
      out.c_[static_cast<std::size_t>(i + j + n)] += prod;
    }
  }
  return out;
}

AElement circle_h1_class(const CircleForm& eta) {
  AElement out = eta.algebra->zero();
  for (const auto& [a, g] : eta.terms) out += g.mean() * a;
  return out;
}

std::vector<std::pair<AElement, TrigPoly>> circle_primitive(const CircleForm& eta) {
  std::vector<std::pair<AElement, TrigPoly>> out;
  for (const auto& [a, g] : eta.terms) out.emplace_back(a, g.integral());
  return out;
}

H0Result h0_check(const FnMA& phi, const ChartModel& chart, std::size_t samples, std::uint64_t seed) {
  if (phi.chart_dim() != chart.dim()) throw ChartMismatch("function and chart dimensions differ");
  if (samples == 0) throw DomainError("h0_check needs at least one sample");
  const AFormMA d = dA(AFormMA::zero_form(phi));
  std::mt19937_64 rng(seed);
  H0Result r;
  for (std::size_t s = 0; s < samples; ++s) {
    Lifter lifter(random_near_point(phi.algebra(), chart, rng));
    for (const auto& t : d.terms()) r.closure_residual = std::max(r.closure_residual, eval_fnma(t.coeff, lifter).max_abs());
    AElement v = eval_fnma(phi, lifter);
    if (s == 0)
      r.value = std::move(v);
    else
      r.constancy_residual = std::max(r.constancy_residual, max_abs_diff(v, r.value));
  }
  if (r.closure_residual > 1e-9) throw NotClosed("d^A residual " + std::to_string(r.closure_residual));
  if (r.constancy_residual > 1e-8) throw NotConstant("spread " + std::to_string(r.constancy_residual));
  return r;
}

}  // namespace npk
