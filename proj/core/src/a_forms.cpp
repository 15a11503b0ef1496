#include "npk/a_forms.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <numeric>
#include <string>

#include "npk/error.hpp"

namespace npk {

namespace {

int permutation_sign(const std::vector<std::size_t>& perm) {
  int sign = 1;
  for (std::size_t i = 0; i < perm.size(); ++i)
    for (std::size_t j = i + 1; j < perm.size(); ++j)
      if (perm[i] > perm[j]) sign = -sign;
  return sign;
}

void check_field_arity(const AFormMA& eta, std::size_t count) {
  if (count != eta.degree())
    throw ArityMismatch("form of degree " + std::to_string(eta.degree()) + " applied to " + std::to_string(count) +
                        " fields");
}

}  // namespace

AFormMA::AFormMA(AlgebraPtr algebra, std::size_t n, std::size_t degree)
    : algebra_(std::move(algebra)), n_(n), degree_(degree) {
  if (degree_ > n_)
    throw DegreeOverflow("degree " + std::to_string(degree_) + " on a chart of dimension " + std::to_string(n_));
}

void AFormMA::add_term(const FnMA& phi, FormIndices indices) {
  if (indices.size() != degree_)
    throw ArityMismatch("term of degree " + std::to_string(indices.size()) + " in a form of degree " +
                        std::to_string(degree_));
  for (auto i : indices)
    if (i >= n_) throw IndexOutOfRange("dx(" + std::to_string(i + 1) + ") on a chart of dimension " + std::to_string(n_));
  if (phi.chart_dim() != n_ || (phi.algebra() != algebra_ && phi.algebra()->name() != algebra_->name()))
    throw AlgebraMismatch("coefficient does not live over " + algebra_->name() + " on dimension " +
                          std::to_string(n_));
  const int sign = sort_with_sign(indices);
  if (sign == 0 || phi.empty()) return;
  const FnMA c = sign > 0 ? phi : -phi;
  auto it = std::lower_bound(terms_.begin(), terms_.end(), indices,
                             [](const AFormTerm& t, const FormIndices& k) { return t.indices < k; });
  if (it != terms_.end() && it->indices == indices) {
    it->coeff = it->coeff + c;
    if (it->coeff.empty()) terms_.erase(it);
  } else {
    terms_.insert(it, AFormTerm{c, std::move(indices)});
  }
}

FnMA AFormMA::coefficient(const FormIndices& sorted) const {
  for (const auto& t : terms_)
    if (t.indices == sorted) return t.coeff;
  return FnMA(algebra_, n_);
}

AFormMA AFormMA::zero_form(const FnMA& phi) {
  AFormMA w(phi.algebra(), phi.chart_dim(), 0);
  w.add_term(phi, {});
  return w;
}

void AFormMA::check_compatible(const AFormMA& other) const {
  if (algebra_ != other.algebra_ && algebra_->name() != other.algebra_->name())
    throw AlgebraMismatch(algebra_->name() + " vs " + other.algebra_->name());
  if (n_ != other.n_) throw AlgebraMismatch("forms on charts of different dimension");
  if (degree_ != other.degree_) throw ArityMismatch("adding forms of different degree");
}

AFormMA operator+(const AFormMA& a, const AFormMA& b) {
  a.check_compatible(b);
  AFormMA out = a;
  for (const auto& t : b.terms_) out.add_term(t.coeff, t.indices);
  return out;
}

AFormMA operator-(const AFormMA& a, const AFormMA& b) {
  a.check_compatible(b);
  AFormMA out = a;
  for (const auto& t : b.terms_) out.add_term(-t.coeff, t.indices);
  return out;
}

AFormMA operator*(const FnMA& phi, const AFormMA& w) {
  AFormMA out(w.algebra_, w.n_, w.degree_);
  for (const auto& t : w.terms_) out.add_term(phi * t.coeff, t.indices);
  return out;
}

AFormMA operator*(const AElement& a, const AFormMA& w) {
  AFormMA out(w.algebra_, w.n_, w.degree_);
  for (const auto& t : w.terms_) out.add_term(a * t.coeff, t.indices);
  return out;
}

AFormMA prolong_form(const AlgebraPtr& algebra, const FormM& w) {
  AFormMA out(algebra, w.dim(), w.degree());
  for (const auto& t : w.terms()) out.add_term(gamma(algebra, w.dim(), t.coeff), t.indices);
  return out;
}

AElement eval_form(const AFormMA& eta, std::span<const VectorFieldMA> fields, Lifter& lifter) {
  check_field_arity(eta, fields.size());
  const WeilAlgebra& A = *eta.algebra();
  for (const auto& x : fields)
    if (x.chart_dim() != eta.dim() || (x.algebra() != eta.algebra() && x.algebra()->name() != A.name()))
      throw AlgebraMismatch("field and form live over different algebras or charts");

  std::vector<std::vector<AElement>> values;  // values[j][i] = X_j(x_i)(ξ)
  for (const auto& x : fields) values.push_back(eval_field(x, lifter));

  const std::size_t p = eta.degree();
  AElement out = A.zero();
  for (const auto& t : eta.terms()) {
    AElement det = A.zero();
    std::vector<std::size_t> perm(p);
    std::iota(perm.begin(), perm.end(), 0);
    do {
      AElement prod = A.one();
      for (std::size_t k = 0; k < p && !prod.is_zero(); ++k) prod = A.mul(prod, values[perm[k]][t.indices[k]]);
      if (permutation_sign(perm) > 0)
        det += prod;
      else
        det -= prod;
    } while (std::next_permutation(perm.begin(), perm.end()));
    out += A.mul(eval_fnma(t.coeff, lifter), det);
  }
  return out;
}

AElement eval_form(const AFormMA& eta, std::span<const VectorFieldMA> fields, const NearPoint& xi) {
  Lifter lifter(xi);
  return eval_form(eta, fields, lifter);
}

FnMA contract(const AFormMA& eta, std::span<const VectorFieldMA> fields) {
  check_field_arity(eta, fields.size());
  const std::size_t p = eta.degree();
  FnMA out(eta.algebra(), eta.dim());
  for (const auto& t : eta.terms()) {
    std::vector<std::size_t> perm(p);
    std::iota(perm.begin(), perm.end(), 0);
    FnMA det(eta.algebra(), eta.dim());
    do {
      FnMA prod = FnMA::constant(eta.algebra(), eta.dim(), eta.algebra()->one());
      for (std::size_t k = 0; k < p && !prod.empty(); ++k) prod = prod * fields[perm[k]].component(t.indices[k]);
      det = permutation_sign(perm) > 0 ? det + prod : det - prod;
    } while (std::next_permutation(perm.begin(), perm.end()));
    out = out + t.coeff * det;
  }
  return out;
}

AFormMA wedge(const AFormMA& a, const AFormMA& b) {
  if (a.dim() != b.dim()) throw AlgebraMismatch("forms on charts of different dimension");
  if (a.degree() + b.degree() > a.dim())
    throw DegreeOverflow("degrees " + std::to_string(a.degree()) + " + " + std::to_string(b.degree()) +
                         " exceed dimension " + std::to_string(a.dim()));
  AFormMA out(a.algebra(), a.dim(), a.degree() + b.degree());
  for (const auto& s : a.terms())
    for (const auto& t : b.terms()) {
      FormIndices idx = s.indices;
      idx.insert(idx.end(), t.indices.begin(), t.indices.end());
      out.add_term(s.coeff * t.coeff, std::move(idx));
    }
  return out;
}

AFormMA dA(const AFormMA& eta) {
  const std::size_t n = eta.dim();
  if (eta.degree() >= n)
    throw DegreeOverflow("d^A of a form of degree " + std::to_string(eta.degree()) + " on dimension " +
                         std::to_string(n));
  AFormMA out(eta.algebra(), n, eta.degree() + 1);
  for (std::size_t i = 0; i < n; ++i) {
    const VectorFieldMA di = VectorFieldMA::coordinate(eta.algebra(), n, i);
    for (const auto& t : eta.terms()) {
      FormIndices idx{i};
      idx.insert(idx.end(), t.indices.begin(), t.indices.end());
      out.add_term(tilde_apply(di, t.coeff), std::move(idx));
    }
  }
  return out;
}

AElement palais_eval(const AFormMA& eta, std::span<const VectorFieldM> thetas, const NearPoint& xi) {
  const std::size_t q = thetas.size();
  if (q != eta.degree() + 1)
    throw ArityMismatch("d^A of a form of degree " + std::to_string(eta.degree()) + " takes " +
                        std::to_string(eta.degree() + 1) + " fields, got " + std::to_string(q));
  const AlgebraPtr& algebra = eta.algebra();
  std::vector<VectorFieldMA> lifted;
  for (const auto& t : thetas) {
    if (t.dim() != eta.dim()) throw DimensionMismatch("field and form on charts of different dimension");
    lifted.push_back(prolong(algebra, t));
  }
  Lifter lifter(xi);
  AElement out = algebra->zero();
  for (std::size_t i = 0; i < q; ++i) {
    std::vector<VectorFieldMA> rest;
    for (std::size_t k = 0; k < q; ++k)
      if (k != i) rest.push_back(lifted[k]);
    const AElement term = eval_fnma(tilde_apply(lifted[i], contract(eta, rest)), lifter);
    if (i % 2 == 0)
      out += term;
    else
      out -= term;
  }
  for (std::size_t i = 0; i < q; ++i)
    for (std::size_t j = i + 1; j < q; ++j) {
      std::vector<VectorFieldMA> args{bracket(lifted[i], lifted[j])};
      for (std::size_t k = 0; k < q; ++k)
        if (k != i && k != j) args.push_back(lifted[k]);
      const AElement term = eval_form(eta, args, lifter);
      if ((i + j) % 2 == 0)
        out += term;
      else
        out -= term;
    }
  return out;
}

namespace {

class AFormParser {
 public:
  AFormParser(std::string_view text, AlgebraPtr algebra, std::size_t n)
      : text_(text), algebra_(std::move(algebra)), n_(n) {}

  AFormMA parse() {
    std::vector<std::pair<FnMA, FormIndices>> terms;
    do {
      FnMA phi = coefficient();
      terms.emplace_back(std::move(phi), differentials());
      skip_ws();
    } while (accept('+'));
    if (pos_ != text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
    const std::size_t degree = terms.front().second.size();
    AFormMA out(algebra_, n_, degree);
    for (auto& [phi, idx] : terms) {
      if (idx.size() != degree) throw ArityMismatch("form literal mixes degrees");
      out.add_term(phi, std::move(idx));
    }
    return out;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const { throw SyntaxError(what, pos_); }

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

  FnMA coefficient() {
    if (!accept('(')) fail("expected '(' before a coefficient");
    const std::size_t start = pos_;
    int depth = 1;
    bool quoted = false;
    for (; pos_ < text_.size(); ++pos_) {
      const char c = text_[pos_];
      if (c == '"') quoted = !quoted;
      if (quoted) continue;
      if (c == '(') ++depth;
      if (c == ')' && --depth == 0) break;
    }
    if (pos_ >= text_.size()) fail("unbalanced parentheses");
    const std::string_view body = text_.substr(start, pos_ - start);
    ++pos_;
    try {
      return parse_fnma(body, algebra_, n_);
    } catch (const SyntaxError& e) {
      throw SyntaxError("in coefficient", start + e.offset());
    }
  }

  FormIndices differentials() {
    FormIndices idx;
    skip_ws();
    const std::size_t save = pos_;
    accept('*');
    skip_ws();
    if (text_.substr(pos_, 3) != "dx(") {
      pos_ = save;
      return idx;
    }
    do {
      skip_ws();
      if (text_.substr(pos_, 3) != "dx(") fail("expected dx(i)");
      pos_ += 3;
      skip_ws();
      std::size_t k = 0;
      auto res = std::from_chars(text_.data() + pos_, text_.data() + text_.size(), k);
      if (res.ec != std::errc() || k == 0) fail("expected a 1-based index");
      pos_ = static_cast<std::size_t>(res.ptr - text_.data());
      if (k > n_) throw IndexOutOfRange("dx(" + std::to_string(k) + ") on a chart of dimension " + std::to_string(n_));
      if (!accept(')')) fail("expected ')'");
      idx.push_back(k - 1);
    } while (accept('^'));
    return idx;
  }

  std::string_view text_;
  AlgebraPtr algebra_;
  std::size_t n_;
  std::size_t pos_ = 0;
};

bool is_a_literal(std::string_view text) {
  return text.find("gen(") != std::string_view::npos || text.find("gamma(") != std::string_view::npos ||
         text.find('[') != std::string_view::npos;
}

}  // namespace

AFormMA parse_aform(std::string_view text, const AlgebraPtr& algebra, std::size_t n) {
  if (is_a_literal(text)) return AFormParser(text, algebra, n).parse();
  return prolong_form(algebra, parse_form_m(text, n));
}

}  // namespace npk
