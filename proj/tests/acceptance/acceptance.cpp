// Acceptance run: one PASS/FAIL line per criterion; exits 1 if any fails.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <memory>
#include <random>
#include <sstream>
#include <string>

#include "cli.hpp"
#include "npk/cohomology.hpp"
#include "npk/identities.hpp"
#include "oracles.hpp"
#include "suites.hpp"

using namespace npk;

namespace {

constexpr double kAlgebraTol = 1e-12;
constexpr double kLiftTol = 1e-9;
constexpr double kDualTol = 1e-10;
constexpr double kTangentTol = 1e-9;
constexpr double kLieTol = 1e-8;
constexpr double kEvalLawTol = 1e-9;
constexpr double kDATol = 1e-9;
constexpr double kPrimitiveTol = 1e-9;

constexpr double kAlgebraSeconds = 1.0;
constexpr double kLiftSeconds = 5.0;
constexpr double kLieSeconds = 60.0;
constexpr double kCohomologySeconds = 30.0;

constexpr std::uint64_t kSeed = 20240601;

struct Outcome {
  bool pass = true;
  double residual = 0.0;
  std::string note;

  void record(double r, double tol) {
    if (std::isnan(r) || r > tol) pass = false;
    if (std::isnan(r) || r > residual) residual = r;
  }
  void require(bool ok, const std::string& why) {
    if (!ok) {
      pass = false;
      note += (note.empty() ? "" : "; ") + why;
    }
  }
};

std::vector<AlgebraPtr> catalog() {
  std::vector<AlgebraPtr> out;
  for (const auto& p : catalog_presentations()) out.push_back(WeilAlgebra::parse(p));
  return out;
}

void records_into(Outcome& o, const std::vector<IdentityReport>& reps, double tol, const std::string& where,
                  const std::function<bool(const std::string&)>& keep = nullptr) {
  for (const auto& r : reps) {
    if (keep && !keep(r.name)) continue;
    o.record(r.max_residual, tol);
    if (std::isnan(r.max_residual) || r.max_residual > tol) o.note += (o.note.empty() ? "" : "; ") + where + " " + r.name;
  }
}

cli::SuiteConfig config(const AlgebraPtr& A, const ChartModel& chart, std::size_t samples, double tol) {
  cli::SuiteConfig cfg;
  cfg.algebra = A;
  cfg.chart = chart;
  cfg.seed = kSeed;
  cfg.samples = samples;
  cfg.tol = tol;
  return cfg;
}

// 1. Ring axioms: exact on structure constants, sampled on random elements.
Outcome algebra_axioms() {
  Outcome o;
  std::mt19937_64 rng(kSeed);
  for (const auto& A : catalog()) {
    const std::size_t d = A->dim();
    for (std::size_t a = 0; a < d; ++a) {
      o.require(A->product_index(0, a) == static_cast<long>(a), A->name() + " identity");
      for (std::size_t b = 0; b < d; ++b) {
        o.require(A->product_index(a, b) == A->product_index(b, a), A->name() + " commutativity");
        for (std::size_t c = 0; c < d; ++c) {
          const long ab = A->product_index(a, b), bc = A->product_index(b, c);
          const long left = ab < 0 ? -1 : A->product_index(static_cast<std::size_t>(ab), c);
          const long right = bc < 0 ? -1 : A->product_index(a, static_cast<std::size_t>(bc));
          o.require(left == right, A->name() + " associativity");
        }
      }
    }
    // Every product of h+1 basis elements of positive degree vanishes.
    std::vector<std::size_t> layer;
    for (std::size_t a = 1; a < d; ++a) layer.push_back(a);
    std::vector<std::size_t> current = layer;
    for (int k = 1; k <= A->height(); ++k) {
      std::vector<std::size_t> next;
      for (std::size_t x : current)
        for (std::size_t y : layer)
          if (const long p = A->product_index(x, y); p >= 0) next.push_back(static_cast<std::size_t>(p));
      current = std::move(next);
    }
    o.require(A->height() == 0 ? d == 1 : current.empty(), A->name() + " nilpotency");
    for (int k = 0; k < 100; ++k) {
      const AElement a = random_element(*A, rng), b = random_element(*A, rng), c = random_element(*A, rng);
      o.record(max_abs_diff(A->mul(a, b), A->mul(b, a)), kAlgebraTol);
      o.record(max_abs_diff(A->mul(A->mul(a, b), c), A->mul(a, A->mul(b, c))), kAlgebraTol);
      o.record(max_abs_diff(A->mul(A->one(), a), a), kAlgebraTol);
      o.record(std::abs(A->augmentation(A->mul(a, b)) - A->augmentation(a) * A->augmentation(b)), kAlgebraTol);
      o.record(A->pow(A->nilpotent_part(a), A->height() + 1).max_abs(), kAlgebraTol);
      o.record(max_abs_diff(A->mul(a, b), oracle::brute_mul(*A, a, b)), kAlgebraTol);
    }
  }
  return o;
}

// 2. Lift homomorphism laws, the jet oracle, and dual numbers as forward
// derivatives.
Outcome lift_laws() {
  Outcome o;
  std::mt19937_64 rng(kSeed + 2);
  for (const auto& A : catalog()) {
    const ChartModel chart = ChartModel::unit_box(2);
    for (int k = 0; k < 100; ++k) {
      const Expr f = random_smooth(2, rng), g = random_smooth(2, rng);
      const double lambda = std::uniform_real_distribution<double>(-2, 2)(rng);
      const NearPoint xi = random_near_point(A, chart, rng);
      Lifter l(xi);
      const AElement lf = l.lift(f), lg = l.lift(g);
      o.record(max_abs_diff(l.lift(f * g), A->mul(lf, lg)), kLiftTol);
      o.record(max_abs_diff(l.lift(f + g), lf + lg), kLiftTol);
      o.record(max_abs_diff(l.lift(Expr::constant(lambda) * f), lambda * lf), kLiftTol);
      o.record(max_abs_diff(lf, oracle::jet_eval(f, xi)), kLiftTol);
    }
  }
  const auto D = WeilAlgebra::parse("R[x]/(x^2)");
  std::uniform_real_distribution<double> u(-1, 1);
  for (int k = 0; k < 100; ++k) {
    const Expr f = random_smooth(1, rng);
    const double a = u(rng), b = u(rng);
    const AElement v = lift_f(f, NearPoint(D, {AElement({a, b})}));
    const std::vector<double> x{a};
    o.record(std::abs(v[0] - eval(f, x)), kDualTol);
    o.record(std::abs(v[1] - eval(diff(f, 0), x) * b), kDualTol);
  }
  return o;
}

// 3. Tangent vectors: Leibniz law and the lifted point-derivation.
Outcome tangent_vectors() {
  Outcome o;
  for (const auto& A : catalog()) {
    const auto reps = cli::lift_suite(config(A, ChartModel::unit_box(2), 50, kTangentTol));
    records_into(o, reps, kTangentTol, A->name(), [](const std::string& n) { return n.rfind("tv-", 0) == 0; });
  }
  return o;
}

// 4. A-Lie algebra identities, plus the bracket against a finite-difference
// real bracket.
Outcome lie_suite() {
  Outcome o;
  std::mt19937_64 rng(kSeed + 4);
  for (const auto& A : catalog()) {
    const ChartModel chart = ChartModel::unit_box(2);
    records_into(o, run_lie_suite(A, chart, 50, kSeed, kLieTol), kLieTol, A->name());
    for (int k = 0; k < 3; ++k) {
      const VectorFieldMA x = random_general_field(A, 2, rng), y = random_general_field(A, 2, rng);
      const NearPoint xi = random_near_point(A, chart, rng);
      const double r = oracle::max_diff(oracle::velocity(bracket(x, y), xi), oracle::bracket_velocity(x, y, xi));
      o.require(r <= 1e-6, A->name() + " bracket vs finite differences");
    }
  }
  return o;
}

// 5. Evaluation law of prolonged forms on decomposable arguments.
Outcome evaluation_law() {
  Outcome o;
  for (const auto& A : catalog()) {
    const auto reps = cli::forms_suite(config(A, ChartModel::unit_box(2), 50, kEvalLawTol), {});
    records_into(o, reps, kEvalLawTol, A->name(), [](const std::string& n) { return n.rfind("prolong-eval-", 0) == 0; });
  }
  return o;
}

// 6. d^A: naturality, A-linearity, d^A∘d^A = 0, invariant formula.
Outcome d_a() {
  Outcome o;
  const std::array<std::string, 4> names{"dA-naturality", "dA-a-linearity", "dA-squared", "palais-vs-dA"};
  for (const auto& A : catalog()) {
    const auto reps = cli::forms_suite(config(A, ChartModel::unit_box(3), 50, kDATol), {});
    std::size_t seen = 0;
    for (const auto& r : reps)
      if (std::find(names.begin(), names.end(), r.name) != names.end()) ++seen;
    o.require(seen == names.size(), A->name() + " missing records");
    records_into(o, reps, kDATol, A->name(),
                 [&](const std::string& n) { return std::find(names.begin(), names.end(), n) != names.end(); });
  }
  return o;
}

// 7. Cohomology: exact homotopy identity, certified primitives, circle
// classes, H⁰.
Outcome cohomology() {
  Outcome o;
  std::mt19937_64 rng(kSeed + 7);
  for (std::size_t n = 1; n <= 3; ++n)
    for (std::size_t p = 1; p <= n; ++p)
      for (int k = 0; k < 20; ++k) {
        const PolyForm w = PolyForm::from_form(random_poly_form(n, p, rng, 4));
        const PolyForm lhs = exterior_derivative(homotopy(w)) + (p < n ? homotopy(exterior_derivative(w)) : PolyForm(n, p));
        o.require(lhs == w, "dK + Kd != id");
      }
  for (const auto& A : catalog()) {
    for (std::size_t n = 2; n <= 3; ++n) {
      const auto res = cli::poincare_model(config(A, ChartModel::unit_box(n), 20, kPrimitiveTol));
      records_into(o, res.records, kPrimitiveTol, A->name() + " poincare n=" + std::to_string(n));
    }
    const auto circle = cli::circle_model(config(A, ChartModel::circle(), 50, 1e-12), {});
    records_into(o, circle.records, 1e-12, A->name() + " circle");
    const auto h0 = cli::h0_model(config(A, ChartModel::unit_box(2), 20, 1e-8));
    records_into(o, h0.records, 1e-8, A->name() + " h0");
  }
  return o;
}

std::string capture(const std::string& command) {
  std::string out;
  std::unique_ptr<FILE, int (*)(FILE*)> pipe(popen(command.c_str(), "r"), pclose);
  if (!pipe) return out;
  std::array<char, 4096> buf{};
  std::size_t got = 0;
  while ((got = fread(buf.data(), 1, buf.size(), pipe.get())) > 0) out.append(buf.data(), got);
  return out;
}

std::string in_process(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  cli::run(args, out, err);
  return out.str();
}

// 8. Byte-identical reports for fixed (seed, samples).
Outcome determinism(const std::string& cli_path) {
  Outcome o;
  const std::vector<std::vector<std::string>> runs{
      {"check", "--suite", "all", "--algebra", "R[x,y]/(x^2,x*y,y^2)", "--seed", "7", "--samples", "10", "--json"},
      {"check", "--suite", "lie", "--algebra", "R[x]/(x^3)", "--seed", "7", "--samples", "10"},
      {"cohomology", "--model", "poincare", "--seed", "7", "--samples", "10", "--json"},
      {"cohomology", "--model", "circle", "--seed", "7", "--samples", "10", "--json"},
      {"cohomology", "--model", "h0", "--seed", "7", "--samples", "10", "--json"},
  };
  for (const auto& args : runs) {
    std::string first, second;
    if (!cli_path.empty()) {
      std::string cmd = "'" + cli_path + "'";
      for (const auto& a : args) cmd += " '" + a + "'";
      first = capture(cmd);
      second = capture(cmd);
    } else {
      first = in_process(args);
      second = in_process(args);
    }
    o.require(!first.empty() && first == second, "differs: " + args[0] + " " + args[2]);
    if (!cli_path.empty()) o.require(first == in_process(args), "binary and in-process reports differ");
  }
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  std::string cli_path;
  for (int k = 1; k + 1 < argc; ++k)
    if (std::string(argv[k]) == "--cli") cli_path = argv[k + 1];

  struct Criterion {
    int id;
    const char* title;
    std::function<Outcome()> run;
    double budget_seconds;
  };
  const std::vector<Criterion> criteria{
      {1, "algebra axioms on the catalog", algebra_axioms, kAlgebraSeconds},
      {2, "lift homomorphism laws and dual-number derivatives", lift_laws, kLiftSeconds},
      {3, "tangent-vector Leibniz law and lifted point-derivations", tangent_vectors, 0},
      {4, "A-Lie algebra identities", lie_suite, kLieSeconds},
      {5, "evaluation law of prolonged forms, p = 1, 2", evaluation_law, 0},
      {6, "d^A naturality, A-linearity, nilpotency, invariant formula", d_a, 0},
      {7, "homotopy identity, primitives, circle classes, H0", cohomology, kCohomologySeconds},
      {8, "byte-identical CLI reports", [&] { return determinism(cli_path); }, 0},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.note = std::string("exception: ") + e.what();
    }
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.budget_seconds > 0 && dt > c.budget_seconds) {
      o.pass = false;
      char buf[64];
      std::snprintf(buf, sizeof buf, "over the %.0f s budget", c.budget_seconds);
      o.note += (o.note.empty() ? "" : "; ") + std::string(buf);
    }
    char line[256];
    std::snprintf(line, sizeof line, "criterion %d: %s  %-60s max residual %.2e  %.2f s", c.id, o.pass ? "PASS" : "FAIL",
                  c.title, o.residual, dt);
    std::cout << line;
    if (!o.note.empty()) std::cout << "  [" << o.note << "]";
    std::cout << std::endl;
    if (!o.pass) ++failures;
  }
  std::cout << (failures == 0 ? "all criteria pass" : std::to_string(failures) + " criteria failing") << std::endl;
  return failures == 0 ? 0 : 1;
}
