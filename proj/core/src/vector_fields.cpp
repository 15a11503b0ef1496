#include "npk/vector_fields.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <map>
#include <string>
#include <utility>

#include "npk/error.hpp"

namespace npk {

namespace {

using MonomialKey = std::vector<std::pair<std::size_t, std::uint64_t>>;

bool same_algebra(const AlgebraPtr& a, const AlgebraPtr& b) {
  return a == b || (a && b && a->name() == b->name());
}

MonomialKey key_of(std::vector<ScalarGenerator>& monomial) {
  std::sort(monomial.begin(), monomial.end(), [](const ScalarGenerator& l, const ScalarGenerator& r) {
    if (l.alpha != r.alpha) return l.alpha < r.alpha;
    return l.g.node().serial() < r.g.node().serial();
  });
  MonomialKey key;
  key.reserve(monomial.size());
  for (const auto& s : monomial) key.emplace_back(s.alpha, s.g.node().serial());
  return key;
}

}  // namespace

FnMA::FnMA(AlgebraPtr algebra, std::size_t n, std::vector<FnTerm> terms) : algebra_(std::move(algebra)), n_(n) {
  std::map<MonomialKey, std::size_t> slot;
  for (auto& t : terms) {
    algebra_->check_element(t.coeff);
    for (const auto& s : t.monomial) {
      if (s.alpha >= algebra_->dim())
        throw IndexOutOfRange("generator index " + std::to_string(s.alpha) + " for algebra of dim " +
                              std::to_string(algebra_->dim()));
    }
    if (t.coeff.is_zero()) continue;
    MonomialKey key = key_of(t.monomial);
    auto [it, fresh] = slot.emplace(std::move(key), terms_.size());
    if (fresh)
      terms_.push_back(std::move(t));
    else
      terms_[it->second].coeff += t.coeff;
  }
  std::erase_if(terms_, [](const FnTerm& t) { return t.coeff.is_zero(); });
}

FnMA FnMA::constant(AlgebraPtr algebra, std::size_t n, const AElement& a) {
  std::vector<FnTerm> terms{{a, {}}};
  return FnMA(std::move(algebra), n, std::move(terms));
}

namespace {

void check_arity(const Expr& g, std::size_t n) {
  if (arity(g) > n) throw UnknownVariable("'" + unparse(g) + "' uses more than " + std::to_string(n) + " variables");
}

}  // namespace

FnMA FnMA::generator(AlgebraPtr algebra, std::size_t n, std::size_t alpha, const Expr& g) {
  check_arity(g, n);
  AElement one = algebra->one();
  std::vector<FnTerm> terms{{std::move(one), {ScalarGenerator{alpha, g}}}};
  return FnMA(std::move(algebra), n, std::move(terms));
}

void FnMA::check_compatible(const FnMA& other) const {
  if (!same_algebra(algebra_, other.algebra_))
    throw AlgebraMismatch(algebra_->name() + " vs " + other.algebra_->name());
  if (n_ != other.n_)
    throw AlgebraMismatch("chart dimensions " + std::to_string(n_) + " and " + std::to_string(other.n_));
}

FnMA operator+(const FnMA& a, const FnMA& b) {
  a.check_compatible(b);
  std::vector<FnTerm> terms = a.terms_;
  terms.insert(terms.end(), b.terms_.begin(), b.terms_.end());
  return FnMA(a.algebra_, a.n_, std::move(terms));
}

FnMA operator-(const FnMA& a) { return -1.0 * a; }

FnMA operator-(const FnMA& a, const FnMA& b) { return a + (-b); }

FnMA operator*(const FnMA& a, const FnMA& b) {
  a.check_compatible(b);
  const WeilAlgebra& A = *a.algebra_;
  std::vector<FnTerm> terms;
  terms.reserve(a.terms_.size() * b.terms_.size());
  for (const auto& s : a.terms_) {
    for (const auto& t : b.terms_) {
      AElement c = A.mul(s.coeff, t.coeff);
      if (c.is_zero()) continue;
      std::vector<ScalarGenerator> m = s.monomial;
      m.insert(m.end(), t.monomial.begin(), t.monomial.end());
      terms.push_back({std::move(c), std::move(m)});
    }
  }
  return FnMA(a.algebra_, a.n_, std::move(terms));
}

FnMA operator*(const AElement& a, const FnMA& f) {
  f.algebra_->check_element(a);
  std::vector<FnTerm> terms;
  terms.reserve(f.terms_.size());
  for (const auto& t : f.terms_) terms.push_back({f.algebra_->mul(a, t.coeff), t.monomial});
  return FnMA(f.algebra_, f.n_, std::move(terms));
}

FnMA operator*(double s, const FnMA& f) {
  std::vector<FnTerm> terms = f.terms_;
  for (auto& t : terms) t.coeff *= s;
  return FnMA(f.algebra_, f.n_, std::move(terms));
}

FnMA fnma_add(const FnMA& a, const FnMA& b) { return a + b; }
FnMA fnma_mul(const FnMA& a, const FnMA& b) { return a * b; }
FnMA fnma_scale(const AElement& a, const FnMA& f) { return a * f; }

FnMA gamma(const AlgebraPtr& algebra, std::size_t n, const Expr& f) {
  if (f.is_constant()) return FnMA::constant(algebra, n, algebra->constant(f.node().value()));
  check_arity(f, n);
  std::vector<FnTerm> terms;
  for (std::size_t a = 0; a < algebra->dim(); ++a) terms.push_back({algebra->unit(a), {ScalarGenerator{a, f}}});
  return FnMA(algebra, n, std::move(terms));
}

AElement eval_fnma(const FnMA& phi, Lifter& lifter) {
  const WeilAlgebra& A = *phi.algebra();
  if (!same_algebra(phi.algebra(), lifter.point().algebra()))
    throw AlgebraMismatch(A.name() + " vs " + lifter.point().algebra()->name());
  if (phi.chart_dim() != lifter.point().dim())
    throw DimensionMismatch("function on a chart of dimension " + std::to_string(phi.chart_dim()) +
                            " evaluated at a point of dimension " + std::to_string(lifter.point().dim()));
  AElement out = A.zero();
  for (const auto& t : phi.terms()) {
    double scalar = 1.0;
    for (const auto& s : t.monomial) {
      scalar *= lifter.lift(s.g)[s.alpha];
      if (scalar == 0.0) break;
    }
    if (scalar != 0.0) out += scalar * t.coeff;
  }
  return out;
}

AElement eval_fnma(const FnMA& phi, const NearPoint& xi) {
  Lifter lifter(xi);
  return eval_fnma(phi, lifter);
}

VectorFieldMA::VectorFieldMA(AlgebraPtr algebra, std::vector<FnMA> components)
    : algebra_(std::move(algebra)), components_(std::move(components)) {
  for (const auto& c : components_) {
    if (!same_algebra(algebra_, c.algebra()))
      throw AlgebraMismatch(algebra_->name() + " vs " + c.algebra()->name());
    if (c.chart_dim() != components_.size())
      throw DimensionMismatch("field with " + std::to_string(components_.size()) +
                              " components has a component on a chart of dimension " +
                              std::to_string(c.chart_dim()));
  }
}

void VectorFieldMA::check_compatible(const VectorFieldMA& other) const {
  if (!same_algebra(algebra_, other.algebra_))
    throw AlgebraMismatch(algebra_->name() + " vs " + other.algebra_->name());
  if (chart_dim() != other.chart_dim())
    throw AlgebraMismatch("chart dimensions " + std::to_string(chart_dim()) + " and " +
                          std::to_string(other.chart_dim()));
}

VectorFieldMA VectorFieldMA::coordinate(const AlgebraPtr& algebra, std::size_t n, std::size_t i) {
  if (i >= n) throw IndexOutOfRange("coordinate field " + std::to_string(i + 1) + " on a chart of dimension " +
                                    std::to_string(n));
  std::vector<FnMA> c;
  for (std::size_t j = 0; j < n; ++j)
    c.push_back(j == i ? FnMA::constant(algebra, n, algebra->one()) : FnMA(algebra, n));
  return VectorFieldMA(algebra, std::move(c));
}

VectorFieldMA operator+(const VectorFieldMA& a, const VectorFieldMA& b) {
  a.check_compatible(b);
  std::vector<FnMA> c;
  for (std::size_t i = 0; i < a.chart_dim(); ++i) c.push_back(a.components_[i] + b.components_[i]);
  return VectorFieldMA(a.algebra_, std::move(c));
}

VectorFieldMA operator-(const VectorFieldMA& a, const VectorFieldMA& b) {
  a.check_compatible(b);
  std::vector<FnMA> c;
  for (std::size_t i = 0; i < a.chart_dim(); ++i) c.push_back(a.components_[i] - b.components_[i]);
  return VectorFieldMA(a.algebra_, std::move(c));
}

VectorFieldMA operator*(const FnMA& phi, const VectorFieldMA& x) {
  std::vector<FnMA> c;
  for (const auto& xi : x.components_) c.push_back(phi * xi);
  return VectorFieldMA(x.algebra_, std::move(c));
}

VectorFieldMA operator*(const AElement& a, const VectorFieldMA& x) {
  std::vector<FnMA> c;
  for (const auto& xi : x.components_) c.push_back(a * xi);
  return VectorFieldMA(x.algebra_, std::move(c));
}

FnMA apply(const VectorFieldMA& x, const Expr& f) {
  const std::size_t n = x.chart_dim();
  check_arity(f, n);
  FnMA out(x.algebra(), n);
  for (std::size_t i = 0; i < n; ++i) {
    if (x.component(i).empty()) continue;
    const Expr d = diff(f, i);
    if (d.is_constant(0.0)) continue;
    out = out + gamma(x.algebra(), n, d) * x.component(i);
  }
  return out;
}

namespace {

/// Real-valued FnMA a*_α ∘ ψ: each coefficient c becomes a*_α(c)·1_A.
FnMA project(const FnMA& psi, std::size_t alpha) {
  const WeilAlgebra& A = *psi.algebra();
  std::vector<FnTerm> terms;
  for (const auto& t : psi.terms()) {
    const double c = t.coeff[alpha];
    if (c == 0.0) continue;
    terms.push_back({A.constant(c), t.monomial});
  }
  return FnMA(psi.algebra(), psi.chart_dim(), std::move(terms));
}

}  // namespace

FnMA tilde_apply(const VectorFieldMA& x, const FnMA& phi) {
  if (!same_algebra(x.algebra(), phi.algebra()) || x.chart_dim() != phi.chart_dim())
    throw AlgebraMismatch("field over " + x.algebra()->name() + " applied to a function over " +
                          phi.algebra()->name());
  const AlgebraPtr& algebra = x.algebra();
  const std::size_t n = x.chart_dim();

  // X(g) once per generator expression.
  std::map<std::uint64_t, FnMA> applied;
  auto derivative_of = [&](const ScalarGenerator& s) {
    auto it = applied.find(s.g.node().serial());
    if (it == applied.end()) it = applied.emplace(s.g.node().serial(), apply(x, s.g)).first;
    return project(it->second, s.alpha);
  };

  std::vector<FnTerm> terms;
  for (const auto& t : phi.terms()) {
    for (std::size_t k = 0; k < t.monomial.size(); ++k) {
      std::vector<ScalarGenerator> rest;
      for (std::size_t j = 0; j < t.monomial.size(); ++j)
        if (j != k) rest.push_back(t.monomial[j]);
      const FnMA dk = derivative_of(t.monomial[k]);
      for (const auto& u : dk.terms()) {
        std::vector<ScalarGenerator> m = rest;
        m.insert(m.end(), u.monomial.begin(), u.monomial.end());
        terms.push_back({u.coeff[0] * t.coeff, std::move(m)});
      }
    }
  }
  return FnMA(algebra, n, std::move(terms));
}

VectorFieldMA bracket(const VectorFieldMA& x, const VectorFieldMA& y) {
  x.check_compatible(y);
  std::vector<FnMA> c;
  for (std::size_t i = 0; i < x.chart_dim(); ++i)
    c.push_back(tilde_apply(x, y.component(i)) - tilde_apply(y, x.component(i)));
  return VectorFieldMA(x.algebra(), std::move(c));
}

VectorFieldMA prolong(const AlgebraPtr& algebra, const VectorFieldM& theta) {
  std::vector<FnMA> c;
  for (const auto& t : theta.components) c.push_back(gamma(algebra, theta.dim(), t));
  return VectorFieldMA(algebra, std::move(c));
}

VectorFieldMA from_derivation(const AlgebraPtr& algebra, std::size_t n, const DerivationOfA& d) {
  if (d.endo().dim() != algebra->dim())
    throw DimensionMismatch("derivation of dimension " + std::to_string(d.endo().dim()) + " for algebra of dim " +
                            std::to_string(algebra->dim()));
  std::vector<FnMA> c;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<FnTerm> terms;
    for (std::size_t a = 0; a < algebra->dim(); ++a)
      terms.push_back({-d(algebra->unit(a)), {ScalarGenerator{a, Expr::var(i)}}});
    c.emplace_back(algebra, n, std::move(terms));
  }
  return VectorFieldMA(algebra, std::move(c));
}

VectorFieldMA from_derivation(const AlgebraPtr& algebra, std::size_t n, const LinearEndo& mu) {
  return from_derivation(algebra, n, DerivationOfA(*algebra, mu));
}

std::vector<AElement> eval_field(const VectorFieldMA& x, Lifter& lifter) {
  std::vector<AElement> out;
  out.reserve(x.chart_dim());
  for (const auto& c : x.components()) out.push_back(eval_fnma(c, lifter));
  return out;
}

AElement tv_tilde(const TangentVectorA& v, const FnMA& phi) {
  const WeilAlgebra& A = *v.at.algebra();
  if (!same_algebra(v.at.algebra(), phi.algebra()))
    throw AlgebraMismatch(A.name() + " vs " + phi.algebra()->name());
  if (v.components.size() != v.at.dim() || phi.chart_dim() != v.at.dim())
    throw DimensionMismatch("tangent vector, point and function disagree on the chart dimension");
  Lifter lifter(v.at);
  auto v_of = [&](const Expr& g) {
    AElement out = A.zero();
    for (std::size_t i = 0; i < v.components.size(); ++i) {
      const Expr d = diff(g, i);
      if (d.is_constant(0.0)) continue;
      out += A.mul(lifter.lift(d), v.components[i]);
    }
    return out;
  };
  AElement out = A.zero();
  for (const auto& t : phi.terms()) {
    double sum = 0.0;
    for (std::size_t k = 0; k < t.monomial.size(); ++k) {
      double prod = v_of(t.monomial[k].g)[t.monomial[k].alpha];
      for (std::size_t j = 0; j < t.monomial.size() && prod != 0.0; ++j)
        if (j != k) prod *= lifter.lift(t.monomial[j].g)[t.monomial[j].alpha];
      sum += prod;
    }
    if (sum != 0.0) out += sum * t.coeff;
  }
  return out;
}

namespace {

class LiteralParser {
 public:
  LiteralParser(std::string_view text, AlgebraPtr algebra, std::size_t n, std::size_t base_offset = 0)
      : text_(text), algebra_(std::move(algebra)), n_(n), base_(base_offset) {}

  FnMA parse_all() {
    FnMA out = sum();
    skip_ws();
    if (pos_ != text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
    return out;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const { throw SyntaxError(what, base_ + pos_); }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }

  bool accept_word(std::string_view w) {
    skip_ws();
    if (text_.substr(pos_, w.size()) != w) return false;
    const std::size_t end = pos_ + w.size();
    if (end < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[end])) || text_[end] == '_'))
      return false;
    pos_ = end;
    return true;
  }

  double number() {
    skip_ws();
    const char* begin = text_.data() + pos_;
    const char* end = text_.data() + text_.size();
    if (begin != end && *begin == '+') ++begin;
    double v = 0.0;
    auto res = std::from_chars(begin, end, v);
    if (res.ec != std::errc()) fail("expected a number");
    pos_ = static_cast<std::size_t>(res.ptr - text_.data());
    return v;
  }

  std::size_t index() {
    skip_ws();
    std::size_t v = 0;
    auto res = std::from_chars(text_.data() + pos_, text_.data() + text_.size(), v);
    if (res.ec != std::errc()) fail("expected a basis index");
    pos_ = static_cast<std::size_t>(res.ptr - text_.data());
    return v;
  }

  Expr quoted_expr() {
    skip_ws();
    if (pos_ >= text_.size() || text_[pos_] != '"') fail("expected a quoted expression");
    const std::size_t start = ++pos_;
    while (pos_ < text_.size() && text_[pos_] != '"') ++pos_;
    if (pos_ >= text_.size()) fail("unterminated string");
    const std::string_view body = text_.substr(start, pos_ - start);
    ++pos_;
    try {
      return parse_expr(body, n_);
    } catch (const SyntaxError& e) {
      throw SyntaxError(std::string("in expression \"") + std::string(body) + "\"", base_ + start + e.offset());
    }
  }

  FnMA sum() {
    FnMA out = product();
    for (;;) {
      if (accept('+'))
        out = out + product();
      else if (accept('-'))
        out = out - product();
      else
        return out;
    }
  }

  FnMA product() {
    FnMA out = factor();
    while (accept('*')) out = out * factor();
    return out;
  }

  FnMA factor() {
    skip_ws();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    if (accept('-')) return -factor();
    if (accept('(')) {
      FnMA inner = sum();
      expect(')');
      return inner;
    }
    if (accept('[')) {
      std::vector<double> c;
      if (!accept(']')) {
        do c.push_back(number());
        while (accept(','));
        expect(']');
      }
      if (c.size() != algebra_->dim())
        throw DimensionMismatch("coefficient list of length " + std::to_string(c.size()) + " for algebra of dim " +
                                std::to_string(algebra_->dim()));
      return FnMA::constant(algebra_, n_, AElement(std::move(c)));
    }
    if (accept_word("gen")) {
      expect('(');
      const std::size_t alpha = index();
      if (alpha >= algebra_->dim())
        throw IndexOutOfRange("generator index " + std::to_string(alpha) + " for algebra of dim " +
                              std::to_string(algebra_->dim()));
      expect(',');
      Expr g = quoted_expr();
      expect(')');
      return FnMA::generator(algebra_, n_, alpha, g);
    }
    if (accept_word("gamma")) {
      expect('(');
      Expr g = quoted_expr();
      expect(')');
      return gamma(algebra_, n_, g);
    }
    const char c = text_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.' || c == '+')
      return FnMA::constant(algebra_, n_, algebra_->constant(number()));
    fail("unexpected '" + std::string(1, c) + "'");
  }

  std::string_view text_;
  AlgebraPtr algebra_;
  std::size_t n_;
  std::size_t base_;
  std::size_t pos_ = 0;
};

// Splits on top-level ';', ignoring separators inside quotes and brackets.
std::vector<std::pair<std::string_view, std::size_t>> split_components(std::string_view text) {
  std::vector<std::pair<std::string_view, std::size_t>> parts;
  bool quoted = false;
  int depth = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (c == '"') quoted = !quoted;
    if (quoted) continue;
    if (c == '(' || c == '[') ++depth;
    if (c == ')' || c == ']') --depth;
    if (c == ';' && depth == 0) {
      parts.emplace_back(text.substr(start, i - start), start);
      start = i + 1;
    }
  }
  parts.emplace_back(text.substr(start), start);
  return parts;
}

std::string_view trim(std::string_view s, std::size_t& offset) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
    s.remove_prefix(1);
    ++offset;
  }
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace

FnMA parse_fnma(std::string_view text, const AlgebraPtr& algebra, std::size_t n) {
  return LiteralParser(text, algebra, n).parse_all();
}

VectorFieldMA parse_vector_field(std::string_view text, const AlgebraPtr& algebra, std::size_t n) {
  std::size_t offset = 0;
  const std::string_view body = trim(text, offset);

  if (body.starts_with("prolong")) {
    std::string_view rest = body.substr(7);
    std::size_t off = offset + 7;
    rest = trim(rest, off);
    if (rest.size() < 4 || rest.front() != '(' || rest.back() != ')') throw SyntaxError("expected prolong(\"...\")", off);
    std::string_view inner = rest.substr(1, rest.size() - 2);
    ++off;
    inner = trim(inner, off);
    if (inner.size() < 2 || inner.front() != '"' || inner.back() != '"')
      throw SyntaxError("expected a quoted field", off);
    VectorFieldM theta = parse_vector_field_m(inner.substr(1, inner.size() - 2), n);
    if (theta.dim() != n)
      throw DimensionMismatch("field with " + std::to_string(theta.dim()) + " components on a chart of dimension " +
                              std::to_string(n));
    return prolong(algebra, theta);
  }

  if (body.starts_with("dstar")) {
    std::string_view rest = body.substr(5);
    std::size_t off = offset + 5;
    rest = trim(rest, off);
    if (rest.size() < 3 || rest.front() != '(' || rest.back() != ')') throw SyntaxError("expected dstar(k)", off);
    std::string_view inner = rest.substr(1, rest.size() - 2);
    ++off;
    inner = trim(inner, off);
    std::size_t k = 0;
    auto res = std::from_chars(inner.data(), inner.data() + inner.size(), k);
    if (res.ec != std::errc() || res.ptr != inner.data() + inner.size())
      throw SyntaxError("expected a derivation index", off);
    const auto basis = derivation_basis(*algebra);
    if (k >= basis.size())
      throw IndexOutOfRange("derivation index " + std::to_string(k) + ", Der(A) has dimension " +
                            std::to_string(basis.size()));
    return from_derivation(algebra, n, basis[k]);
  }

  std::vector<FnMA> components;
  for (auto [part, start] : split_components(body)) {
    std::size_t off = offset + start;
    components.push_back(LiteralParser(trim(part, off), algebra, n, off).parse_all());
  }
  if (components.size() != n)
    throw DimensionMismatch("field with " + std::to_string(components.size()) +
                            " components on a chart of dimension " + std::to_string(n));
  return VectorFieldMA(algebra, std::move(components));
}

}  // namespace npk
