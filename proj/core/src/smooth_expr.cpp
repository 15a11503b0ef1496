#include "npk/smooth_expr.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <charconv>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <random>

#include "npk/error.hpp"

namespace npk {

namespace {

std::atomic<std::uint64_t> next_serial{0};

std::shared_ptr<const Node> make_node(Op op, double value, int index, const Expr& a, const Expr& b) {
  return std::make_shared<const Node>(op, value, index, a, b);
}

std::string format_number(double v) {
  if (v == 0.0) v = 0.0;
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

bool is_integral(double r) { return std::isfinite(r) && r == std::floor(r) && std::abs(r) < 1e9; }

}  // namespace

Node::Node(Op op, double value, int index, Expr a, Expr b)
    : op_(op), value_(value), index_(index), a_(std::move(a)), b_(std::move(b)), serial_(next_serial++) {}

Expr::Expr() {
  static const std::shared_ptr<const Node> zero =
      std::make_shared<const Node>(Op::Const, 0.0, 0, Expr(nullptr), Expr(nullptr));
  node_ = zero;
}

Expr Expr::constant(double c) {
  if (c == 0.0) return Expr();
  return Expr(make_node(Op::Const, c, 0, Expr(nullptr), Expr(nullptr)));
}

Expr Expr::var(std::size_t index) {
  return Expr(make_node(Op::Var, 0.0, static_cast<int>(index), Expr(nullptr), Expr(nullptr)));
}

Expr Expr::raw(Op op, double value, int index, const Expr& a, const Expr& b) {
  return Expr(make_node(op, value, index, a, b));
}

Expr operator+(const Expr& a, const Expr& b) {
  if (a.is_constant() && b.is_constant()) return Expr::constant(a.node().value() + b.node().value());
  if (a.is_constant(0.0)) return b;
  if (b.is_constant(0.0)) return a;
  return Expr::raw(Op::Add, 0.0, 0, a, b);
}

Expr operator-(const Expr& a, const Expr& b) {
  if (a.is_constant() && b.is_constant()) return Expr::constant(a.node().value() - b.node().value());
  if (b.is_constant(0.0)) return a;
  if (a.is_constant(0.0)) return -b;
  return Expr::raw(Op::Sub, 0.0, 0, a, b);
}

Expr operator*(const Expr& a, const Expr& b) {
  if (a.is_constant() && b.is_constant()) return Expr::constant(a.node().value() * b.node().value());
  if (a.is_constant(0.0) || b.is_constant(0.0)) return Expr();
  if (a.is_constant(1.0)) return b;
  if (b.is_constant(1.0)) return a;
  if (a.is_constant(-1.0)) return -b;
  if (b.is_constant(-1.0)) return -a;
  return Expr::raw(Op::Mul, 0.0, 0, a, b);
}

Expr operator/(const Expr& a, const Expr& b) {
  if (a.is_constant() && b.is_constant() && b.node().value() != 0.0)
    return Expr::constant(a.node().value() / b.node().value());
  if (a.is_constant(0.0) && !b.is_constant(0.0)) return Expr();
  if (b.is_constant(1.0)) return a;
  return Expr::raw(Op::Div, 0.0, 0, a, b);
}

Expr operator-(const Expr& a) {
  if (a.is_constant()) return Expr::constant(-a.node().value());
  if (a.op() == Op::Neg) return a.node().lhs();
  return Expr::raw(Op::Neg, 0.0, 0, a, Expr());
}

Expr pow(const Expr& base, int k) {
  if (k == 0) return Expr::constant(1.0);
  if (k == 1) return base;
  if (base.is_constant() && !(base.node().value() == 0.0 && k < 0))
    return Expr::constant(std::pow(base.node().value(), k));
  return Expr::raw(Op::PowInt, 0.0, k, base, Expr());
}

Expr pow(const Expr& base, double r) {
  if (is_integral(r)) return pow(base, static_cast<int>(r));
  if (base.is_constant() && base.node().value() > 0.0) return Expr::constant(std::pow(base.node().value(), r));
  return Expr::raw(Op::PowReal, r, 0, base, Expr());
}

namespace {

Expr unary(Op op, const Expr& a, double (*fn)(double), bool (*defined)(double)) {
  if (a.is_constant() && defined(a.node().value())) return Expr::constant(fn(a.node().value()));
  return Expr::raw(op, 0.0, 0, a, Expr());
}

bool always(double) { return true; }
bool positive(double v) { return v > 0.0; }

}  // namespace

Expr sin(const Expr& a) { return unary(Op::Sin, a, [](double v) { return std::sin(v); }, always); }
Expr cos(const Expr& a) { return unary(Op::Cos, a, [](double v) { return std::cos(v); }, always); }
Expr exp(const Expr& a) { return unary(Op::Exp, a, [](double v) { return std::exp(v); }, always); }
Expr log(const Expr& a) { return unary(Op::Log, a, [](double v) { return std::log(v); }, positive); }
Expr sqrt(const Expr& a) { return unary(Op::Sqrt, a, [](double v) { return std::sqrt(v); }, positive); }

// ---------------------------------------------------------------------------
// Parsing

namespace {

enum class Tok { Number, Ident, Op, End };

struct Token {
  Tok kind;
  std::string text;
  double number = 0.0;
  std::size_t offset = 0;
};

std::vector<Token> tokenize(std::string_view s) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < s.size()) {
    const char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      std::size_t j = i;
      while (j < s.size() && (std::isdigit(static_cast<unsigned char>(s[j])) || s[j] == '.')) ++j;
      if (j < s.size() && (s[j] == 'e' || s[j] == 'E')) {
        std::size_t k = j + 1;
        if (k < s.size() && (s[k] == '+' || s[k] == '-')) ++k;
        if (k < s.size() && std::isdigit(static_cast<unsigned char>(s[k]))) {
          j = k;
          while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
        }
      }
      Token t{Tok::Number, std::string(s.substr(i, j - i)), 0.0, i};
      auto res = std::from_chars(t.text.data(), t.text.data() + t.text.size(), t.number);
      if (res.ec != std::errc() || res.ptr != t.text.data() + t.text.size())
        throw SyntaxError("malformed number '" + t.text + "'", i);
      out.push_back(std::move(t));
      i = j;
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < s.size() && (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '_')) ++j;
      out.push_back({Tok::Ident, std::string(s.substr(i, j - i)), 0.0, i});
      i = j;
      continue;
    }
    if (std::string_view("+-*/^(),;").find(c) != std::string_view::npos) {
      out.push_back({Tok::Op, std::string(1, c), 0.0, i});
      ++i;
      continue;
    }
    throw SyntaxError(std::string("unexpected character '") + c + "'", i);
  }
  out.push_back({Tok::End, "", 0.0, s.size()});
  return out;
}

class Parser {
 public:
  Parser(std::string_view text, std::size_t n) : toks_(tokenize(text)), n_(n) {}

  Expr parse_all() {
    Expr e = parse_sum();
    expect_end();
    return e;
  }

  const Token& peek(std::size_t ahead = 0) const { return toks_[std::min(pos_ + ahead, toks_.size() - 1)]; }
  bool at_op(const char* op, std::size_t ahead = 0) const {
    return peek(ahead).kind == Tok::Op && peek(ahead).text == op;
  }
  bool accept_op(const char* op) {
    if (!at_op(op)) return false;
    ++pos_;
    return true;
  }
  void expect_op(const char* op) {
    if (!accept_op(op)) throw SyntaxError(std::string("expected '") + op + "'", peek().offset);
  }
  void expect_end() const {
    if (peek().kind != Tok::End) throw SyntaxError("unexpected '" + peek().text + "'", peek().offset);
  }
  bool at_end() const { return peek().kind == Tok::End; }
  std::size_t offset() const { return peek().offset; }

  // A `dx` token followed by '(' starts a coordinate differential; term
  // parsing stops there when reading form literals.
  bool at_differential(std::size_t ahead = 0) const {
    return peek(ahead).kind == Tok::Ident && peek(ahead).text == "dx" && at_op("(", ahead + 1);
  }

  Expr parse_sum() {
    Expr e = parse_term();
    while (true) {
      if (stop_at_differential_ && at_differential()) return e;
      if (accept_op("+")) {
        e = Expr::raw(Op::Add, 0.0, 0, e, parse_term());
      } else if (accept_op("-")) {
        e = Expr::raw(Op::Sub, 0.0, 0, e, parse_term());
      } else {
        return e;
      }
    }
  }

  Expr parse_term() {
    Expr e = parse_unary();
    while (true) {
      if (stop_at_differential_ && (at_differential() || (at_op("*") && at_differential(1)))) return e;
      if (accept_op("*")) {
        e = Expr::raw(Op::Mul, 0.0, 0, e, parse_unary());
      } else if (accept_op("/")) {
        e = Expr::raw(Op::Div, 0.0, 0, e, parse_unary());
      } else {
        return e;
      }
    }
  }

  Expr parse_unary() {
    if (accept_op("-")) {
      bool bare = false;
      Expr inner = parse_power(&bare);
      if (bare) return Expr::raw(Op::Const, -inner.node().value(), 0, Expr(), Expr());
      return Expr::raw(Op::Neg, 0.0, 0, inner, Expr());
    }
    if (accept_op("+")) return parse_unary();
    return parse_power(nullptr);
  }

  // `bare` reports whether the result is a lone numeric literal, so that
  // `-3` folds to a negative constant while `-3^2` stays a negation.
  Expr parse_power(bool* bare) {
    bool literal = peek().kind == Tok::Number;
    Expr base = parse_primary();
    if (!accept_op("^")) {
      if (bare) *bare = literal;
      return base;
    }
    if (bare) *bare = false;
    Expr exponent = parse_unary();
    if (exponent.is_constant()) {
      const double r = exponent.node().value();
      if (is_integral(r)) return Expr::raw(Op::PowInt, 0.0, static_cast<int>(r), base, Expr());
      return Expr::raw(Op::PowReal, r, 0, base, Expr());
    }
    // b^g with non-constant g means exp(g·log b).
    return Expr::raw(Op::Exp, 0.0, 0, Expr::raw(Op::Mul, 0.0, 0, exponent, Expr::raw(Op::Log, 0.0, 0, base, Expr())),
                     Expr());
  }

  Expr parse_primary() {
    const Token& t = peek();
    if (t.kind == Tok::Number) {
      ++pos_;
      return Expr::raw(Op::Const, t.number, 0, Expr(), Expr());
    }
    if (accept_op("(")) {
      Expr e = parse_sum_unstopped();
      expect_op(")");
      return e;
    }
    if (t.kind == Tok::Ident) {
      const std::string name = t.text;
      const std::size_t at = t.offset;
      ++pos_;
      static const std::map<std::string, Op> functions = {
          {"sin", Op::Sin}, {"cos", Op::Cos}, {"exp", Op::Exp}, {"log", Op::Log}, {"sqrt", Op::Sqrt}};
      if (auto it = functions.find(name); it != functions.end()) {
        expect_op("(");
        Expr arg = parse_sum_unstopped();
        expect_op(")");
        return Expr::raw(it->second, 0.0, 0, arg, Expr());
      }
      if (name == "pi") return Expr::raw(Op::Const, std::numbers::pi, 0, Expr(), Expr());
      return Expr::raw(Op::Var, 0.0, static_cast<int>(variable_index(name, at)), Expr(), Expr());
    }
    if (t.kind == Tok::End) throw SyntaxError("unexpected end of input", t.offset);
    throw SyntaxError("unexpected '" + t.text + "'", t.offset);
  }

  std::size_t variable_index(const std::string& name, std::size_t at) const {
    std::size_t idx = 0;
    if (name == "x") {
      idx = 0;
    } else if (name == "y") {
      idx = 1;
    } else if (name == "z") {
      idx = 2;
    } else if (name.size() > 1 && name[0] == 'x' &&
               std::all_of(name.begin() + 1, name.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
      idx = std::stoul(name.substr(1));
      if (idx == 0) throw UnknownVariable("'" + name + "' (variables start at x1) at offset " + std::to_string(at));
      --idx;
    } else {
      throw UnknownVariable("'" + name + "' at offset " + std::to_string(at));
    }
    if (idx >= n_)
      throw UnknownVariable("'" + name + "' in dimension " + std::to_string(n_) + " at offset " + std::to_string(at));
    return idx;
  }

  void set_stop_at_differential(bool on) { stop_at_differential_ = on; }
  void advance() { ++pos_; }
  std::size_t n() const { return n_; }

 private:
  Expr parse_sum_unstopped() {
    const bool saved = stop_at_differential_;
    stop_at_differential_ = false;
    Expr e = parse_sum();
    stop_at_differential_ = saved;
    return e;
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  std::size_t n_;
  bool stop_at_differential_ = false;
};

int precedence(const Expr& e) {
  switch (e.op()) {
    case Op::Add:
    case Op::Sub:
      return 1;
    case Op::Mul:
    case Op::Div:
      return 2;
    case Op::Neg:
      return 3;
    case Op::Const:
      return e.node().value() < 0.0 || std::signbit(e.node().value()) ? 3 : 5;
    case Op::PowInt:
    case Op::PowReal:
      return 4;
    default:
      return 5;
  }
}

void unparse_into(const Expr& e, int min_prec, std::string& out);

void child(const Expr& e, int min_prec, std::string& out) { unparse_into(e, min_prec, out); }

void unparse_into(const Expr& e, int min_prec, std::string& out) {
  const bool parens = precedence(e) < min_prec;
  if (parens) out += "(";
  const Node& n = e.node();
  switch (n.op()) {
    case Op::Const:
      out += format_number(n.value());
      break;
    case Op::Var:
      out += "x" + std::to_string(n.index() + 1);
      break;
    case Op::Add:
    case Op::Sub:
      child(n.lhs(), 1, out);
      out += n.op() == Op::Add ? " + " : " - ";
      child(n.rhs(), 2, out);
      break;
    case Op::Mul:
    case Op::Div:
      child(n.lhs(), 2, out);
      out += n.op() == Op::Mul ? "*" : "/";
      child(n.rhs(), 3, out);
      break;
    case Op::Neg:
      out += "-";
      // A negated literal would re-parse as a negative constant.
      child(n.lhs(), n.lhs().is_constant() ? 6 : 3, out);
      break;
    case Op::PowInt:
      child(n.lhs(), 5, out);
      out += n.index() < 0 ? "^(" + std::to_string(n.index()) + ")" : "^" + std::to_string(n.index());
      break;
    case Op::PowReal:
      child(n.lhs(), 5, out);
      out += n.value() < 0 ? "^(" + format_number(n.value()) + ")" : "^" + format_number(n.value());
      break;
    case Op::Sin:
    case Op::Cos:
    case Op::Exp:
    case Op::Log:
    case Op::Sqrt: {
      static const char* names[] = {"sin", "cos", "exp", "log", "sqrt"};
      out += names[static_cast<int>(n.op()) - static_cast<int>(Op::Sin)];
      out += "(";
      child(n.lhs(), 0, out);
      out += ")";
      break;
    }
  }
  if (parens) out += ")";
}

}  // namespace

Expr parse_expr(std::string_view text, std::size_t n) { return Parser(text, n).parse_all(); }

std::string unparse(const Expr& e) {
  std::string out;
  unparse_into(e, 0, out);
  return out;
}

bool structurally_equal(const Expr& a, const Expr& b) {
  if (a.get() == b.get()) return true;
  const Node& x = a.node();
  const Node& y = b.node();
  if (x.op() != y.op() || x.index() != y.index()) return false;
  if (x.value() != y.value()) return false;
  switch (x.op()) {
    case Op::Const:
    case Op::Var:
      return true;
    case Op::Add:
    case Op::Sub:
    case Op::Mul:
    case Op::Div:
      return structurally_equal(x.lhs(), y.lhs()) && structurally_equal(x.rhs(), y.rhs());
    default:
      return structurally_equal(x.lhs(), y.lhs());
  }
}

std::size_t arity(const Expr& e) {
  const Node& n = e.node();
  switch (n.op()) {
    case Op::Const:
      return 0;
    case Op::Var:
      return static_cast<std::size_t>(n.index()) + 1;
    case Op::Add:
    case Op::Sub:
    case Op::Mul:
    case Op::Div:
      return std::max(arity(n.lhs()), arity(n.rhs()));
    default:
      return arity(n.lhs());
  }
}

// ---------------------------------------------------------------------------
// Differentiation

namespace {

struct DiffCache {
  std::mutex mu;
  // Key node is kept alive by the stored handle so addresses stay unique.
  std::map<std::pair<const Node*, std::size_t>, std::pair<Expr, Expr>> table;
};

DiffCache& diff_cache() {
  static DiffCache cache;
  return cache;
}

Expr diff_uncached(const Expr& f, std::size_t i) {
  const Node& n = f.node();
  const Expr& a = n.lhs();
  const Expr& b = n.rhs();
  switch (n.op()) {
    case Op::Const:
      return Expr();
    case Op::Var:
      return Expr::constant(static_cast<std::size_t>(n.index()) == i ? 1.0 : 0.0);
    case Op::Add:
      return diff(a, i) + diff(b, i);
    case Op::Sub:
      return diff(a, i) - diff(b, i);
    case Op::Mul:
      return diff(a, i) * b + a * diff(b, i);
    case Op::Div:
      return diff(a, i) / b - a * diff(b, i) / pow(b, 2);
    case Op::Neg:
      return -diff(a, i);
    case Op::PowInt:
      return Expr::constant(n.index()) * pow(a, n.index() - 1) * diff(a, i);
    case Op::PowReal:
      return Expr::constant(n.value()) * pow(a, n.value() - 1.0) * diff(a, i);
    case Op::Sin:
      return cos(a) * diff(a, i);
    case Op::Cos:
      return -(sin(a) * diff(a, i));
    case Op::Exp:
      return f * diff(a, i);
    case Op::Log:
      return diff(a, i) / a;
    case Op::Sqrt:
      return diff(a, i) / (Expr::constant(2.0) * f);
  }
  return Expr();
}

}  // namespace

Expr diff(const Expr& f, std::size_t i) {
  if (f.is_constant()) return Expr();
  DiffCache& cache = diff_cache();
  const auto key = std::make_pair(f.get(), i);
  {
    std::lock_guard<std::mutex> lock(cache.mu);
    if (auto it = cache.table.find(key); it != cache.table.end()) return it->second.second;
  }
  Expr d = diff_uncached(f, i);
  std::lock_guard<std::mutex> lock(cache.mu);
  // A concurrent caller may have inserted first; keep its tree so every
  // caller sees the same handle.
  auto [it, inserted] = cache.table.try_emplace(key, f, d);
  return it->second.second;
}

void clear_derivative_cache() {
  DiffCache& cache = diff_cache();
  std::lock_guard<std::mutex> lock(cache.mu);
  cache.table.clear();
}

// ---------------------------------------------------------------------------
// Evaluation

double PointEvaluator::operator()(const Expr& f) { return eval_node(f.get()); }

double PointEvaluator::eval_node(const Node* n) {
  if (n->op() == Op::Const) return n->value();
  if (n->op() == Op::Var) {
    const auto idx = static_cast<std::size_t>(n->index());
    if (idx >= point_.size())
      throw DimensionMismatch("variable x" + std::to_string(idx + 1) + " at a point of dimension " +
                              std::to_string(point_.size()));
    return point_[idx];
  }
  if (auto it = cache_.find(n); it != cache_.end()) return it->second;
  const double a = eval_node(n->lhs().get());
  double v = 0.0;
  switch (n->op()) {
    case Op::Add:
      v = a + eval_node(n->rhs().get());
      break;
    case Op::Sub:
      v = a - eval_node(n->rhs().get());
      break;
    case Op::Mul:
      v = a * eval_node(n->rhs().get());
      break;
    case Op::Div: {
      const double b = eval_node(n->rhs().get());
      if (b == 0.0) throw DomainError("division by zero");
      v = a / b;
      break;
    }
    case Op::Neg:
      v = -a;
      break;
    case Op::PowInt:
      if (a == 0.0 && n->index() < 0) throw DomainError("zero raised to a negative power");
      v = std::pow(a, n->index());
      break;
    case Op::PowReal:
      if (a <= 0.0) throw DomainError("non-positive base of a real power");
      v = std::pow(a, n->value());
      break;
    case Op::Sin:
      v = std::sin(a);
      break;
    case Op::Cos:
      v = std::cos(a);
      break;
    case Op::Exp:
      v = std::exp(a);
      break;
    case Op::Log:
      if (a <= 0.0) throw DomainError("log of non-positive value");
      v = std::log(a);
      break;
    case Op::Sqrt:
      if (a <= 0.0) throw DomainError("sqrt of non-positive value");
      v = std::sqrt(a);
      break;
    case Op::Const:
    case Op::Var:
      break;
  }
  cache_.emplace(n, v);
  return v;
}

double eval(const Expr& f, std::span<const double> point) { return PointEvaluator(point)(f); }

double sampled_residual(const Expr& f, const Expr& g, std::size_t n, std::size_t samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  double worst = 0.0;
  std::vector<double> x(n);
  for (std::size_t s = 0; s < samples; ++s) {
    for (auto& v : x) v = unit(rng);
    const double fv = eval(f, x);
    const double gv = eval(g, x);
    worst = std::max(worst, std::abs(fv - gv) / (1.0 + std::abs(fv)));
  }
  return worst;
}

bool sampled_equal(const Expr& f, const Expr& g, std::size_t n, std::size_t samples, std::uint64_t seed,
                   double rtol) {
  return sampled_residual(f, g, n, samples, seed) <= rtol;
}

// ---------------------------------------------------------------------------
// Vector fields and forms on the chart

VectorFieldM VectorFieldM::coordinate(std::size_t n, std::size_t i) {
  VectorFieldM v;
  v.components.assign(n, Expr());
  v.components.at(i) = Expr::constant(1.0);
  return v;
}

VectorFieldM parse_vector_field_m(std::string_view text, std::size_t n) {
  VectorFieldM v;
  std::size_t start = 0;
  while (true) {
    const std::size_t semi = text.find(';', start);
    const std::string_view piece = text.substr(start, semi == std::string_view::npos ? text.npos : semi - start);
    try {
      v.components.push_back(parse_expr(piece, n));
    } catch (const SyntaxError& e) {
      throw SyntaxError(e.what(), start + e.offset());
    }
    if (semi == std::string_view::npos) break;
    start = semi + 1;
  }
  if (v.components.size() != n)
    throw DimensionMismatch("vector field has " + std::to_string(v.components.size()) + " components, chart has " +
                            std::to_string(n));
  return v;
}

Expr apply(const VectorFieldM& theta, const Expr& f) {
  Expr out;
  for (std::size_t i = 0; i < theta.dim(); ++i) out = out + theta.components[i] * diff(f, i);
  return out;
}

VectorFieldM operator+(const VectorFieldM& a, const VectorFieldM& b) {
  if (a.dim() != b.dim()) throw DimensionMismatch("adding vector fields of different dimension");
  VectorFieldM out;
  for (std::size_t i = 0; i < a.dim(); ++i) out.components.push_back(a.components[i] + b.components[i]);
  return out;
}

VectorFieldM operator*(const Expr& f, const VectorFieldM& theta) {
  VectorFieldM out;
  for (const auto& c : theta.components) out.components.push_back(f * c);
  return out;
}

VectorFieldM lie_bracket_m(const VectorFieldM& a, const VectorFieldM& b) {
  if (a.dim() != b.dim()) throw DimensionMismatch("bracket of vector fields of different dimension");
  VectorFieldM out;
  for (std::size_t i = 0; i < a.dim(); ++i) out.components.push_back(apply(a, b.components[i]) - apply(b, a.components[i]));
  return out;
}

int sort_with_sign(FormIndices& indices) {
  int sign = 1;
  for (std::size_t i = 1; i < indices.size(); ++i)
    for (std::size_t j = i; j > 0 && indices[j - 1] > indices[j]; --j) {
      std::swap(indices[j - 1], indices[j]);
      sign = -sign;
    }
  for (std::size_t i = 1; i < indices.size(); ++i)
    if (indices[i - 1] == indices[i]) return 0;
  return sign;
}

void FormM::add_term(const Expr& g, FormIndices indices) {
  if (indices.size() != degree_)
    throw DimensionMismatch("term of degree " + std::to_string(indices.size()) + " in a form of degree " +
                            std::to_string(degree_));
  for (auto i : indices)
    if (i >= n_) throw IndexOutOfRange("dx(" + std::to_string(i + 1) + ") in dimension " + std::to_string(n_));
  const int sign = sort_with_sign(indices);
  if (sign == 0 || g.is_constant(0.0)) return;
  const Expr signed_g = sign > 0 ? g : -g;
  auto it = std::lower_bound(terms_.begin(), terms_.end(), indices,
                             [](const FormTermM& t, const FormIndices& idx) { return t.indices < idx; });
  if (it != terms_.end() && it->indices == indices) {
    it->coeff = it->coeff + signed_g;
    if (it->coeff.is_constant(0.0)) terms_.erase(it);
  } else {
    terms_.insert(it, FormTermM{signed_g, std::move(indices)});
  }
}

Expr FormM::coefficient(const FormIndices& sorted) const {
  for (const auto& t : terms_)
    if (t.indices == sorted) return t.coeff;
  return Expr();
}

FormM FormM::zero_form(std::size_t n, const Expr& g) {
  FormM w(n, 0);
  w.add_term(g, {});
  return w;
}

FormM operator+(const FormM& a, const FormM& b) {
  if (a.dim() != b.dim() || a.degree() != b.degree()) throw DimensionMismatch("adding forms of different type");
  FormM out = a;
  for (const auto& t : b.terms()) out.add_term(t.coeff, t.indices);
  return out;
}

FormM operator*(const Expr& g, const FormM& w) {
  FormM out(w.dim(), w.degree());
  for (const auto& t : w.terms()) out.add_term(g * t.coeff, t.indices);
  return out;
}

FormM parse_form_m(std::string_view text, std::size_t n) {
  Parser p(text, n);
  p.set_stop_at_differential(true);
  struct Pending {
    Expr coeff;
    FormIndices indices;
  };
  std::vector<Pending> pending;
  bool first = true;
  while (!p.at_end() || first) {
    double sign = 1.0;
    if (!first) {
      if (p.accept_op("+")) {
      } else if (p.accept_op("-")) {
        sign = -1.0;
      } else {
        throw SyntaxError("expected '+' or '-' between form terms", p.offset());
      }
    }
    first = false;
    Expr coeff = Expr::constant(1.0);
    if (!p.at_differential()) {
      coeff = p.parse_term();
      p.accept_op("*");
    }
    FormIndices idx;
    while (p.at_differential()) {
      p.advance();
      p.expect_op("(");
      if (p.peek().kind != Tok::Number) throw SyntaxError("expected coordinate index", p.offset());
      const double v = p.peek().number;
      if (!is_integral(v) || v < 1 || v > static_cast<double>(n))
        throw IndexOutOfRange("dx(" + p.peek().text + ") in dimension " + std::to_string(n));
      idx.push_back(static_cast<std::size_t>(v) - 1);
      p.advance();
      p.expect_op(")");
      if (!p.accept_op("^")) break;
      if (!p.at_differential()) throw SyntaxError("expected dx(..) after '^'", p.offset());
    }
    pending.push_back({sign < 0 ? -coeff : coeff, std::move(idx)});
  }
  const std::size_t degree = pending.front().indices.size();
  FormM w(n, degree);
  for (auto& t : pending) {
    if (t.indices.size() != degree) throw SyntaxError("terms of mixed degree in form literal", 0);
    w.add_term(t.coeff, std::move(t.indices));
  }
  return w;
}

std::string unparse(const FormM& w) {
  if (w.terms().empty()) return "0";
  std::string out;
  for (std::size_t k = 0; k < w.terms().size(); ++k) {
    const auto& t = w.terms()[k];
    if (k) out += " + ";
    std::string c = unparse(t.coeff);
    if (t.indices.empty()) {
      out += c;
      continue;
    }
    if (!t.coeff.is_constant(1.0)) out += "(" + c + ")*";
    for (std::size_t j = 0; j < t.indices.size(); ++j) {
      if (j) out += "^";
      out += "dx(" + std::to_string(t.indices[j] + 1) + ")";
    }
  }
  return out;
}

FormM exterior_derivative_m(const FormM& w) {
  if (w.degree() >= w.dim()) return FormM(w.dim(), w.degree() + 1);
  FormM out(w.dim(), w.degree() + 1);
  for (const auto& t : w.terms())
    for (std::size_t i = 0; i < w.dim(); ++i) {
      FormIndices idx{i};
      idx.insert(idx.end(), t.indices.begin(), t.indices.end());
      out.add_term(diff(t.coeff, i), std::move(idx));
    }
  return out;
}

FormM wedge_m(const FormM& a, const FormM& b) {
  if (a.dim() != b.dim()) throw DimensionMismatch("wedge of forms on different charts");
  FormM out(a.dim(), a.degree() + b.degree());
  if (out.degree() > out.dim()) return out;
  for (const auto& s : a.terms())
    for (const auto& t : b.terms()) {
      FormIndices idx = s.indices;
      idx.insert(idx.end(), t.indices.begin(), t.indices.end());
      out.add_term(s.coeff * t.coeff, std::move(idx));
    }
  return out;
}

Expr contract_m(const FormM& w, std::span<const VectorFieldM> fields) {
  if (fields.size() != w.degree()) throw DimensionMismatch("form of degree " + std::to_string(w.degree()) +
                                                           " contracted with " + std::to_string(fields.size()) +
                                                           " fields");
  Expr out;
  const std::size_t p = w.degree();
  for (const auto& t : w.terms()) {
    // det[θ_j(x_{I_k})] by permutation expansion.
    std::vector<std::size_t> perm(p);
    for (std::size_t i = 0; i < p; ++i) perm[i] = i;
    Expr det;
    do {
      FormIndices tmp(perm.begin(), perm.end());
      const int sign = sort_with_sign(tmp);
      Expr prod = Expr::constant(sign);
      for (std::size_t j = 0; j < p; ++j) prod = prod * fields[j].components.at(t.indices[perm[j]]);
      det = det + prod;
    } while (std::next_permutation(perm.begin(), perm.end()));
    out = out + t.coeff * det;
  }
  return out;
}

}  // namespace npk
