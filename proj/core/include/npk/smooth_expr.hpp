#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace npk {

enum class Op : std::uint8_t {
  Const,
  Var,
  Add,
  Sub,
  Mul,
  Div,
  Neg,
  PowInt,
  PowReal,
  Sin,
  Cos,
  Exp,
  Log,
  Sqrt,
};

class Node;

/// Handle to a shared immutable expression tree over variables x1..xn
/// (0-based indices internally).
///
/// The arithmetic operators and the named builders below fold constants and
/// absorb 0/1; `raw` builds a node verbatim (the parser uses it so that
/// printing and re-parsing reproduces the same tree).
class Expr {
 public:
  Expr();  // constant 0

  static Expr constant(double c);
  static Expr var(std::size_t index);
  static Expr raw(Op op, double value, int index, const Expr& a, const Expr& b);

  const Node& node() const noexcept { return *node_; }
  const Node* get() const noexcept { return node_.get(); }
  inline Op op() const noexcept;

  bool is_constant() const noexcept { return op() == Op::Const; }
  inline bool is_constant(double c) const noexcept;

  friend Expr operator+(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a, const Expr& b);
  friend Expr operator*(const Expr& a, const Expr& b);
  friend Expr operator/(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a);

 private:
  explicit Expr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const Node> node_;
};

/// Immutable AST node. Every node carries a process-wide serial number that
/// orders nodes deterministically (creation order) wherever pointer order
/// would leak into results.
class Node {
 public:
  Op op() const noexcept { return op_; }
  double value() const noexcept { return value_; }  // Const, PowReal exponent
  int index() const noexcept { return index_; }     // Var index, PowInt exponent
  const Expr& lhs() const noexcept { return a_; }
  const Expr& rhs() const noexcept { return b_; }
  std::uint64_t serial() const noexcept { return serial_; }

  Node(Op op, double value, int index, Expr a, Expr b);

 private:
  Op op_;
  double value_ = 0.0;
  int index_ = 0;
  Expr a_;
  Expr b_;
  std::uint64_t serial_;
};

Op Expr::op() const noexcept { return node_->op(); }
bool Expr::is_constant(double c) const noexcept { return is_constant() && node_->value() == c; }

Expr pow(const Expr& base, int k);
Expr pow(const Expr& base, double r);
Expr sin(const Expr& a);
Expr cos(const Expr& a);
Expr exp(const Expr& a);
Expr log(const Expr& a);
Expr sqrt(const Expr& a);

/// Parses the expression grammar over x1..xn (aliases x, y, z for the first
/// three; `pi` is a constant). Throws SyntaxError or UnknownVariable.
Expr parse_expr(std::string_view text, std::size_t n);

/// Prints with minimal parentheses; parse_expr(unparse(e)) rebuilds e.
std::string unparse(const Expr& e);

bool structurally_equal(const Expr& a, const Expr& b);

/// One more than the largest variable index used, 0 for constants.
std::size_t arity(const Expr& e);

/// Exact symbolic partial derivative with respect to x_{i+1}. Results are
/// memoized per (node, i), so repeated calls return the same tree.
Expr diff(const Expr& f, std::size_t i);

/// Drops every memoized derivative.
void clear_derivative_cache();

/// Evaluates at `point`; throws DomainError for log/sqrt of non-positive
/// arguments, division by zero and non-positive bases of real powers.
double eval(const Expr& f, std::span<const double> point);

/// Evaluator that shares sub-tree values across many expressions at one
/// point. Useful when evaluating all partials of an expression.
class PointEvaluator {
 public:
  explicit PointEvaluator(std::span<const double> point) : point_(point.begin(), point.end()) {}
  double operator()(const Expr& f);

 private:
  double eval_node(const Node* n);
  std::vector<double> point_;
  std::unordered_map<const Node*, double> cache_;
};

/// Randomized equality: max relative residual |f−g|/(1+|f|) over `samples`
/// points of (−1,1)^n drawn from a generator seeded with `seed`.
double sampled_residual(const Expr& f, const Expr& g, std::size_t n, std::size_t samples = 32,
                        std::uint64_t seed = 0);
bool sampled_equal(const Expr& f, const Expr& g, std::size_t n, std::size_t samples = 32,
                   std::uint64_t seed = 0, double rtol = 1e-8);

/// θ = Σ θ_i ∂/∂x_i on the chart.
struct VectorFieldM {
  std::vector<Expr> components;

  std::size_t dim() const noexcept { return components.size(); }
  static VectorFieldM coordinate(std::size_t n, std::size_t i);
};

/// Parses `"x1; x1*x2"`: one expression per coordinate.
VectorFieldM parse_vector_field_m(std::string_view text, std::size_t n);

/// θ(f) = Σ θ_i ∂_i f.
Expr apply(const VectorFieldM& theta, const Expr& f);
VectorFieldM operator+(const VectorFieldM& a, const VectorFieldM& b);
VectorFieldM operator*(const Expr& f, const VectorFieldM& theta);
VectorFieldM lie_bracket_m(const VectorFieldM& a, const VectorFieldM& b);

/// Multi-index of a coordinate form dx_{i1}∧..∧dx_{ip}, strictly increasing
/// and 0-based.
using FormIndices = std::vector<std::size_t>;

struct FormTermM {
  Expr coeff;
  FormIndices indices;
};

/// Differential form Σ_I g_I dx_I on an n-dimensional chart. Terms are kept
/// sorted by index tuple with distinct tuples.
class FormM {
 public:
  FormM(std::size_t n, std::size_t degree) : n_(n), degree_(degree) {}

  std::size_t dim() const noexcept { return n_; }
  std::size_t degree() const noexcept { return degree_; }
  const std::vector<FormTermM>& terms() const noexcept { return terms_; }

  /// Adds g·dx_I for any (unsorted) index list; repeated indices vanish.
  void add_term(const Expr& g, FormIndices indices);

  Expr coefficient(const FormIndices& sorted) const;

  static FormM zero_form(std::size_t n, const Expr& g);
  friend FormM operator+(const FormM& a, const FormM& b);
  friend FormM operator*(const Expr& g, const FormM& w);

 private:
  std::size_t n_;
  std::size_t degree_;
  std::vector<FormTermM> terms_;
};

/// Sign of the permutation sorting `indices` (0 when an index repeats);
/// `indices` is sorted in place.
int sort_with_sign(FormIndices& indices);

/// Parses `x2 dx(1) + x1 dx(2)`, `dx(1)^dx(2)`, `(3 + cos(x1))*dx(1)`.
/// Indices in the literal are 1-based.
FormM parse_form_m(std::string_view text, std::size_t n);
std::string unparse(const FormM& w);

FormM exterior_derivative_m(const FormM& w);
FormM wedge_m(const FormM& a, const FormM& b);

/// ω(θ_1..θ_p) as a function on the chart.
Expr contract_m(const FormM& w, std::span<const VectorFieldM> fields);

}  // namespace npk
