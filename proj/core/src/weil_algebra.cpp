#include "npk/weil_algebra.hpp"

#include <algorithm>
#include <boost/multiprecision/cpp_int.hpp>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <set>

#include "npk/error.hpp"

namespace npk {

namespace {

// Character of the whitespace-stripped input together with its offset in
// the original text, so syntax errors point at the right byte.
struct Cursor {
  std::vector<std::pair<char, std::size_t>> chars;
  std::size_t pos = 0;
  std::size_t end_offset = 0;

  explicit Cursor(std::string_view text) : end_offset(text.size()) {
    for (std::size_t i = 0; i < text.size(); ++i) {
      if (!std::isspace(static_cast<unsigned char>(text[i]))) chars.emplace_back(text[i], i);
    }
  }

  bool done() const { return pos >= chars.size(); }
  char peek() const { return done() ? '\0' : chars[pos].first; }
  std::size_t offset() const { return done() ? end_offset : chars[pos].second; }

  void expect(char c) {
    if (peek() != c) throw SyntaxError(std::string("expected '") + c + "'", offset());
    ++pos;
  }
  bool accept(char c) {
    if (peek() != c) return false;
    ++pos;
    return true;
  }
  std::string ident() {
    std::string out;
    if (!std::isalpha(static_cast<unsigned char>(peek())) && peek() != '_')
      throw SyntaxError("expected identifier", offset());
    while (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_') out += chars[pos++].first;
    return out;
  }
  int integer() {
    if (!std::isdigit(static_cast<unsigned char>(peek()))) throw SyntaxError("expected integer", offset());
    int v = 0;
    while (std::isdigit(static_cast<unsigned char>(peek()))) {
      v = v * 10 + (chars[pos++].first - '0');
      if (v > 1000) throw SyntaxError("exponent too large", offset());
    }
    return v;
  }
};

bool divides(const Exponents& a, const Exponents& b) {
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] > b[i]) return false;
  return true;
}

bool is_pure_power(const Exponents& e, std::size_t var) {
  for (std::size_t i = 0; i < e.size(); ++i)
    if ((i == var) != (e[i] > 0)) return false;
  return true;
}

int total_degree(const Exponents& e) { return std::accumulate(e.begin(), e.end(), 0); }

// Graded order: total degree ascending, then exponent vectors descending
// lexicographically (x before y, x^2 before x*y before y^2).
bool graded_less(const Exponents& a, const Exponents& b) {
  const int da = total_degree(a);
  const int db = total_degree(b);
  if (da != db) return da < db;
  return std::lexicographical_compare(b.begin(), b.end(), a.begin(), a.end());
}

std::string format_double(double v) {
  if (v == 0.0) v = 0.0;  // drop the sign of -0
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

MonomialIdealPresentation parse_presentation(std::string_view text) {
  Cursor cur(text);
  MonomialIdealPresentation pres;
  cur.expect('R');
  if (cur.done()) return pres;
  cur.expect('[');
  if (!cur.accept(']')) {
    do {
      std::string name = cur.ident();
      if (std::find(pres.var_names.begin(), pres.var_names.end(), name) != pres.var_names.end())
        throw SyntaxError("duplicate variable '" + name + "'", cur.offset());
      pres.var_names.push_back(std::move(name));
    } while (cur.accept(','));
    cur.expect(']');
  }
  pres.num_vars = pres.var_names.size();
  cur.expect('/');
  cur.expect('(');
  if (!cur.accept(')')) {
    do {
      Exponents e(pres.num_vars, 0);
      do {
        const std::size_t at = cur.offset();
        const std::string name = cur.ident();
        auto it = std::find(pres.var_names.begin(), pres.var_names.end(), name);
        if (it == pres.var_names.end()) throw SyntaxError("unknown variable '" + name + "'", at);
        int power = 1;
        if (cur.accept('^')) power = cur.integer();
        e[static_cast<std::size_t>(it - pres.var_names.begin())] += power;
      } while (cur.accept('*'));
      pres.generators.push_back(std::move(e));
    } while (cur.accept(','));
    cur.expect(')');
  }
  if (!cur.done()) throw SyntaxError("trailing input", cur.offset());
  return pres;
}

AElement AElement::unit(std::size_t dim, std::size_t alpha) {
  AElement e = zero(dim);
  e.coeffs_.at(alpha) = 1.0;
  return e;
}

bool AElement::is_zero() const {
  return std::all_of(coeffs_.begin(), coeffs_.end(), [](double c) { return c == 0.0; });
}

double AElement::max_abs() const {
  double m = 0.0;
  for (double c : coeffs_) m = std::max(m, std::abs(c));
  return m;
}

AElement& AElement::operator+=(const AElement& other) {
  if (other.dim() != dim()) throw DimensionMismatch("adding elements of different dimension");
  for (std::size_t i = 0; i < dim(); ++i) coeffs_[i] += other.coeffs_[i];
  return *this;
}

AElement& AElement::operator-=(const AElement& other) {
  if (other.dim() != dim()) throw DimensionMismatch("subtracting elements of different dimension");
  for (std::size_t i = 0; i < dim(); ++i) coeffs_[i] -= other.coeffs_[i];
  return *this;
}

AElement& AElement::operator*=(double s) {
  for (double& c : coeffs_) c *= s;
  return *this;
}

double max_abs_diff(const AElement& a, const AElement& b) {
  if (a.dim() != b.dim()) throw DimensionMismatch("comparing elements of different dimension");
  double m = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

std::string to_string(const AElement& a) {
  std::string out = "[";
  for (std::size_t i = 0; i < a.dim(); ++i) {
    if (i) out += ", ";
    out += format_double(a[i]);
  }
  return out + "]";
}

LinearEndo LinearEndo::identity(std::size_t dim) {
  LinearEndo id(dim);
  for (std::size_t i = 0; i < dim; ++i) id(i, i) = 1.0;
  return id;
}

AElement LinearEndo::apply(const AElement& a) const {
  if (a.dim() != dim_) throw DimensionMismatch("endomorphism applied to element of wrong dimension");
  AElement out = AElement::zero(dim_);
  for (std::size_t r = 0; r < dim_; ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < dim_; ++c) s += (*this)(r, c) * a[c];
    out[r] = s;
  }
  return out;
}

LinearEndo LinearEndo::compose(const LinearEndo& inner) const {
  if (inner.dim_ != dim_) throw DimensionMismatch("composing endomorphisms of different dimension");
  LinearEndo out(dim_);
  for (std::size_t r = 0; r < dim_; ++r)
    for (std::size_t k = 0; k < dim_; ++k) {
      const double v = (*this)(r, k);
      if (v == 0.0) continue;
      for (std::size_t c = 0; c < dim_; ++c) out(r, c) += v * inner(k, c);
    }
  return out;
}

LinearEndo& LinearEndo::operator+=(const LinearEndo& other) {
  if (other.dim_ != dim_) throw DimensionMismatch("adding endomorphisms of different dimension");
  for (std::size_t i = 0; i < m_.size(); ++i) m_[i] += other.m_[i];
  return *this;
}

LinearEndo& LinearEndo::operator-=(const LinearEndo& other) {
  if (other.dim_ != dim_) throw DimensionMismatch("subtracting endomorphisms of different dimension");
  for (std::size_t i = 0; i < m_.size(); ++i) m_[i] -= other.m_[i];
  return *this;
}

DerivationOfA::DerivationOfA(const WeilAlgebra& algebra, LinearEndo endo) : endo_(std::move(endo)) {
  if (endo_.dim() != algebra.dim()) throw DimensionMismatch("derivation matrix has wrong dimension");
  if (!is_derivation(algebra, endo_))
    throw NotADerivation("Leibniz residual " + format_double(leibniz_residual(algebra, endo_)));
}

DerivationOfA DerivationOfA::commutator(const WeilAlgebra& algebra, const DerivationOfA& d1,
                                        const DerivationOfA& d2) {
  return DerivationOfA(algebra, d1.endo_.compose(d2.endo_) - d2.endo_.compose(d1.endo_));
}

DerivationOfA DerivationOfA::scaled(const WeilAlgebra& algebra, const AElement& a,
                                    const DerivationOfA& d) {
  const std::size_t n = algebra.dim();
  LinearEndo m(n);
  for (std::size_t c = 0; c < n; ++c) {
    const AElement col = algebra.mul(a, d(algebra.unit(c)));
    for (std::size_t r = 0; r < n; ++r) m(r, c) = col[r];
  }
  return DerivationOfA(algebra, std::move(m));
}

std::shared_ptr<const WeilAlgebra> WeilAlgebra::build(MonomialIdealPresentation pres) {
  const std::size_t k = pres.num_vars;
  if (pres.var_names.empty() && k > 0)
    for (std::size_t i = 0; i < k; ++i) pres.var_names.push_back("x" + std::to_string(i + 1));
  if (pres.var_names.size() != k) throw InvalidPresentation("variable name count differs from num_vars");
  if (k == 0 && !pres.generators.empty())
    throw EmptyPresentation("generators given for a presentation without variables");
  for (const auto& g : pres.generators) {
    if (g.size() != k) throw InvalidPresentation("generator exponent vector has wrong length");
    if (std::any_of(g.begin(), g.end(), [](int e) { return e < 0; }))
      throw InvalidPresentation("negative exponent");
    if (total_degree(g) < 2) throw InvalidPresentation("generators must have total degree >= 2");
  }

  // Minimal generating set: drop duplicates and multiples of other generators.
  std::vector<Exponents> gens;
  {
    std::set<Exponents> unique(pres.generators.begin(), pres.generators.end());
    for (const auto& g : unique) {
      bool redundant = false;
      for (const auto& h : unique)
        if (h != g && divides(h, g)) redundant = true;
      if (!redundant) gens.push_back(g);
    }
    std::sort(gens.begin(), gens.end(), graded_less);
  }

  std::vector<int> bound(k, 0);
  for (std::size_t i = 0; i < k; ++i) {
    for (const auto& g : gens) {
      if (is_pure_power(g, i)) bound[i] = g[i];
    }
    if (bound[i] == 0)
      throw InfiniteDimensional("variable '" + pres.var_names[i] + "' has no pure-power generator");
  }
  pres.generators = gens;

  std::shared_ptr<WeilAlgebra> A(new WeilAlgebra());
  A->pres_ = std::move(pres);

  // Enumerate the box of exponents below the pure-power bounds.
  Exponents e(k, 0);
  while (true) {
    const bool standard =
        std::none_of(gens.begin(), gens.end(), [&](const Exponents& g) { return divides(g, e); });
    if (standard) A->basis_.push_back(e);
    std::size_t i = 0;
    while (i < k && ++e[i] >= bound[i]) e[i++] = 0;
    if (i == k) break;
  }
  std::sort(A->basis_.begin(), A->basis_.end(), graded_less);

  const std::size_t dim = A->basis_.size();
  for (const auto& b : A->basis_) {
    A->degrees_.push_back(total_degree(b));
    A->height_ = std::max(A->height_, A->degrees_.back());
  }
  A->product_.assign(dim * dim, -1);
  for (std::size_t a = 0; a < dim; ++a)
    for (std::size_t b = 0; b < dim; ++b) {
      Exponents s(k);
      for (std::size_t i = 0; i < k; ++i) s[i] = A->basis_[a][i] + A->basis_[b][i];
      A->product_[a * dim + b] = A->index_of(s);
    }
  return A;
}

std::shared_ptr<const WeilAlgebra> WeilAlgebra::parse(std::string_view text) {
  return build(parse_presentation(text));
}

long WeilAlgebra::index_of(const Exponents& e) const {
  auto it = std::lower_bound(basis_.begin(), basis_.end(), e, graded_less);
  if (it == basis_.end() || *it != e) return -1;
  return static_cast<long>(it - basis_.begin());
}

std::string WeilAlgebra::name() const {
  if (pres_.num_vars == 0) return "R";
  std::string out = "R[";
  for (std::size_t i = 0; i < pres_.num_vars; ++i) out += (i ? "," : "") + pres_.var_names[i];
  out += "]/(";
  for (std::size_t g = 0; g < pres_.generators.size(); ++g) {
    if (g) out += ",";
    bool first = true;
    for (std::size_t i = 0; i < pres_.num_vars; ++i) {
      const int p = pres_.generators[g][i];
      if (p == 0) continue;
      if (!first) out += "*";
      first = false;
      out += pres_.var_names[i];
      if (p > 1) out += "^" + std::to_string(p);
    }
  }
  return out + ")";
}

std::string WeilAlgebra::basis_name(std::size_t alpha) const {
  const Exponents& e = basis_.at(alpha);
  std::string out;
  for (std::size_t i = 0; i < e.size(); ++i) {
    if (e[i] == 0) continue;
    if (!out.empty()) out += "*";
    out += pres_.var_names[i];
    if (e[i] > 1) out += "^" + std::to_string(e[i]);
  }
  return out.empty() ? "1" : out;
}

double WeilAlgebra::structure_constant(std::size_t a, std::size_t b, std::size_t c) const {
  return product_index(a, b) == static_cast<long>(c) ? 1.0 : 0.0;
}

AElement WeilAlgebra::unit(std::size_t alpha) const {
  if (alpha >= dim()) throw IndexOutOfRange("basis index " + std::to_string(alpha));
  return AElement::unit(dim(), alpha);
}

AElement WeilAlgebra::constant(double c) const {
  AElement out = zero();
  out[0] = c;
  return out;
}

void WeilAlgebra::check_element(const AElement& a) const {
  if (a.dim() != dim())
    throw DimensionMismatch("element of length " + std::to_string(a.dim()) + " for algebra of dim " +
                            std::to_string(dim()));
}

AElement WeilAlgebra::mul(const AElement& a, const AElement& b) const {
  check_element(a);
  check_element(b);
  const std::size_t n = dim();
  AElement out = zero();
  for (std::size_t i = 0; i < n; ++i) {
    if (a[i] == 0.0) continue;
    for (std::size_t j = 0; j < n; ++j) {
      const long k = product_[i * n + j];
      if (k >= 0) out[static_cast<std::size_t>(k)] += a[i] * b[j];
    }
  }
  return out;
}

AElement WeilAlgebra::pow(const AElement& a, int k) const {
  AElement out = one();
  for (int i = 0; i < k; ++i) out = mul(out, a);
  return out;
}

AElement WeilAlgebra::invert(const AElement& a) const {
  check_element(a);
  const double a0 = a[0];
  if (std::abs(a0) <= 1e-12) throw NotInvertible("augmentation is zero");
  // a = a0(1 + u) with u nilpotent, so a^{-1} = a0^{-1} Σ_{k≤h} (−u)^k.
  const AElement minus_u = (-1.0 / a0) * nilpotent_part(a);
  AElement term = one();
  AElement sum = one();
  for (int k = 1; k <= height_; ++k) {
    term = mul(term, minus_u);
    sum += term;
  }
  return (1.0 / a0) * sum;
}

double WeilAlgebra::augmentation(const AElement& a) const {
  check_element(a);
  return a[0];
}

double WeilAlgebra::dual_coefficient(std::size_t alpha, const AElement& a) const {
  check_element(a);
  if (alpha >= dim()) throw IndexOutOfRange("basis index " + std::to_string(alpha));
  return a[alpha];
}

AElement WeilAlgebra::nilpotent_part(const AElement& a) const {
  check_element(a);
  AElement out = a;
  out[0] = 0.0;
  return out;
}

double leibniz_residual(const WeilAlgebra& algebra, const LinearEndo& mu) {
  const std::size_t n = algebra.dim();
  if (mu.dim() != n) throw DimensionMismatch("endomorphism dimension differs from algebra");
  std::vector<AElement> images;
  images.reserve(n);
  for (std::size_t a = 0; a < n; ++a) images.push_back(mu.apply(algebra.unit(a)));
  double worst = 0.0;
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a; b < n; ++b) {
      const long p = algebra.product_index(a, b);
      AElement lhs = p >= 0 ? images[static_cast<std::size_t>(p)] : algebra.zero();
      const AElement rhs = algebra.mul(images[a], algebra.unit(b)) + algebra.mul(algebra.unit(a), images[b]);
      worst = std::max(worst, max_abs_diff(lhs, rhs));
    }
  return worst;
}

bool is_derivation(const WeilAlgebra& algebra, const LinearEndo& mu, double tol) {
  return leibniz_residual(algebra, mu) <= tol;
}

std::vector<DerivationOfA> derivation_basis(const WeilAlgebra& algebra) {
  using Q = boost::multiprecision::cpp_rational;
  const std::size_t n = algebra.dim();
  // Unknown D(row=g, col=b) lives at index b*n + g.
  const std::size_t unknowns = n * n;
  auto var = [n](std::size_t row, std::size_t col) { return col * n + row; };

  std::vector<std::vector<Q>> rows;
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a; b < n; ++b)
      for (std::size_t r = 0; r < n; ++r) {
        std::vector<Q> eq(unknowns, Q(0));
        const long p = algebra.product_index(a, b);
        if (p >= 0) eq[var(r, static_cast<std::size_t>(p))] += 1;
        for (std::size_t g = 0; g < n; ++g) {
          if (algebra.product_index(g, b) == static_cast<long>(r)) eq[var(g, a)] -= 1;
          if (algebra.product_index(a, g) == static_cast<long>(r)) eq[var(g, b)] -= 1;
        }
        if (std::any_of(eq.begin(), eq.end(), [](const Q& q) { return q != 0; })) rows.push_back(std::move(eq));
      }

  // Reduced row echelon form.
  std::vector<std::size_t> pivot_col;
  std::size_t rank = 0;
  for (std::size_t c = 0; c < unknowns && rank < rows.size(); ++c) {
    std::size_t piv = rank;
    while (piv < rows.size() && rows[piv][c] == 0) ++piv;
    if (piv == rows.size()) continue;
    std::swap(rows[piv], rows[rank]);
    const Q inv = Q(1) / rows[rank][c];
    for (auto& v : rows[rank]) v *= inv;
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (r == rank || rows[r][c] == 0) continue;
      const Q f = rows[r][c];
      for (std::size_t j = 0; j < unknowns; ++j) rows[r][j] -= f * rows[rank][j];
    }
    pivot_col.push_back(c);
    ++rank;
  }

  std::vector<bool> is_pivot(unknowns, false);
  for (auto c : pivot_col) is_pivot[c] = true;

  std::vector<DerivationOfA> out;
  for (std::size_t free = 0; free < unknowns; ++free) {
    if (is_pivot[free]) continue;
    std::vector<Q> sol(unknowns, Q(0));
    sol[free] = 1;
    for (std::size_t r = 0; r < rank; ++r) sol[pivot_col[r]] = -rows[r][free];
    LinearEndo m(n);
    for (std::size_t col = 0; col < n; ++col)
      for (std::size_t row = 0; row < n; ++row) m(row, col) = sol[var(row, col)].convert_to<double>();
    out.emplace_back(algebra, std::move(m));
  }
  return out;
}

const std::vector<std::string>& catalog_presentations() {
  static const std::vector<std::string> catalog = {
      "R",
      "R[x]/(x^2)",
      "R[x]/(x^3)",
      "R[x]/(x^4)",
      "R[x,y]/(x^2,x*y,y^2)",
      "R[x,y]/(x^3,x^2*y,x*y^2,y^3)",
  };
  return catalog;
}

}  // namespace npk
