#include "cli.hpp"

#include <algorithm>
#include <cstdio>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "npk/cohomology.hpp"
#include "npk/error.hpp"
#include "suites.hpp"

namespace npk::cli {

namespace {

using Json = nlohmann::ordered_json;

struct Options {
  std::string algebra = "R[x]/(x^2)";
  std::string chart;
  std::uint64_t seed = 0;
  std::size_t samples = 50;
  double tol = 1e-8;
  bool json = false;

  std::string suite = "all";
  std::string model = "poincare";
  std::vector<std::string> fields;
  std::string form;
  std::string coeff;

  std::string fn;
  std::string xi;
};

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

Json record_json(const IdentityReport& r) {
  return Json{{"name", r.name}, {"samples", r.samples}, {"max_residual", r.max_residual}, {"pass", r.pass}};
}

Json element_json(const AElement& a) { return Json(std::vector<double>(a.coeffs().begin(), a.coeffs().end())); }

bool all_pass(const std::vector<IdentityReport>& records) {
  return std::all_of(records.begin(), records.end(), [](const IdentityReport& r) { return r.pass; });
}

double worst_residual(const std::vector<IdentityReport>& records) {
  double w = 0.0;
  for (const auto& r : records) w = std::max(w, r.max_residual);
  return w;
}

void print_records(std::ostream& out, const std::vector<IdentityReport>& records) {
  std::size_t width = 0;
  for (const auto& r : records) width = std::max(width, r.name.size());
  for (const auto& r : records)
    out << "  " << std::left << std::setw(static_cast<int>(width)) << r.name << "  " << std::right << std::setw(5)
        << r.samples << "  " << format_double(r.max_residual) << "  " << (r.pass ? "pass" : "FAIL") << "\n";
}

SuiteConfig make_config(const Options& o, const std::string& default_chart) {
  SuiteConfig cfg;
  cfg.algebra = WeilAlgebra::parse(o.algebra);
  cfg.chart = ChartModel::parse(o.chart.empty() ? default_chart : o.chart);
  cfg.seed = o.seed;
  cfg.samples = o.samples;
  cfg.tol = o.tol;
  return cfg;
}

AElement parse_element(const std::string& text, const WeilAlgebra& algebra) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw SyntaxError(std::string("A-element: ") + e.what(), e.byte > 0 ? e.byte - 1 : 0);
  }
  if (!j.is_array()) throw SyntaxError("A-element must be a JSON array", 0);
  std::vector<double> c;
  for (const auto& v : j) {
    if (!v.is_number()) throw SyntaxError("A-element entries must be numbers", 0);
    c.push_back(v.get<double>());
  }
  AElement a(std::move(c));
  algebra.check_element(a);
  return a;
}

int cmd_algebra(const Options& o, std::ostream& out) {
  const AlgebraPtr A = WeilAlgebra::parse(o.algebra);
  const auto der = derivation_basis(*A);
  std::vector<std::string> basis;
  for (std::size_t a = 0; a < A->dim(); ++a) basis.push_back(A->basis_name(a));
  if (o.json) {
    Json ders = Json::array();
    for (const auto& d : der) {
      Json m = Json::array();
      for (std::size_t r = 0; r < A->dim(); ++r) {
        Json row = Json::array();
        for (std::size_t c = 0; c < A->dim(); ++c) row.push_back(d.endo()(r, c));
        m.push_back(row);
      }
      ders.push_back(m);
    }
    Json j{{"schema", 1}, {"command", "algebra"}, {"algebra", A->name()}, {"dim", A->dim()},
           {"height", A->height()}, {"basis", basis}, {"der_dim", der.size()}, {"derivations", ders}};
    out << j.dump(2) << "\n";
    return 0;
  }
  out << "algebra: " << A->name() << "\n";
  out << "dim: " << A->dim() << "\n";
  out << "height: " << A->height() << "\n";
  out << "basis:";
  for (const auto& b : basis) out << " " << b;
  out << "\n";
  out << "der_dim: " << der.size() << "\n";
  for (std::size_t k = 0; k < der.size(); ++k) {
    out << "  d" << k << ":";
    for (std::size_t c = 0; c < A->dim(); ++c) {
      AElement img = A->zero();
      for (std::size_t r = 0; r < A->dim(); ++r) img[r] = der[k].endo()(r, c);
      if (!img.is_zero()) out << "  " << A->basis_name(c) << " -> " << to_string(img);
    }
    out << "\n";
  }
  return 0;
}

int cmd_lift(const Options& o, std::ostream& out) {
  const AlgebraPtr A = WeilAlgebra::parse(o.algebra);
  const Json probe = Json::parse(o.xi, nullptr, false);
  if (probe.is_discarded() || !probe.is_array()) throw SyntaxError("--xi must be a JSON array of arrays", 0);
  const std::size_t n = probe.size();
  const ChartModel chart =
      ChartModel::parse(o.chart.empty() ? "box:[-inf,inf]^" + std::to_string(std::max<std::size_t>(n, 1)) : o.chart);
  const NearPoint xi = NearPoint::from_json(o.xi, A, chart);
  const Expr f = parse_expr(o.fn, n);
  const AElement v = lift_f(f, xi);
  if (o.json) {
    Json j{{"schema", 1}, {"command", "lift"}, {"algebra", A->name()}, {"fn", o.fn}, {"xi", Json::parse(xi.to_json())},
           {"value", element_json(v)}};
    out << j.dump(2) << "\n";
  } else {
    out << to_string(v) << "\n";
  }
  return 0;
}

int cmd_check(const Options& o, std::ostream& out) {
  if (o.suite != "lie" && o.suite != "lift" && o.suite != "forms" && o.suite != "all")
    throw Error("UsageError", "unknown suite '" + o.suite + "'");
  const SuiteConfig cfg = make_config(o, "box:[-1,1]^2");
  const std::size_t n = cfg.chart.dim();
  Overrides ov;
  for (const auto& f : o.fields) ov.fields.push_back(parse_vector_field(f, cfg.algebra, n));
  if (!o.form.empty()) ov.form = parse_aform(o.form, cfg.algebra, n);

  std::vector<std::pair<std::string, std::vector<IdentityReport>>> parts;
  if (o.suite == "lie" || o.suite == "all") parts.emplace_back("lie", lie_suite(cfg, ov));
  if (o.suite == "lift" || o.suite == "all") parts.emplace_back("lift", lift_suite(cfg));
  if (o.suite == "forms" || o.suite == "all") parts.emplace_back("forms", forms_suite(cfg, ov));

  std::vector<IdentityReport> all;
  for (const auto& [name, recs] : parts) all.insert(all.end(), recs.begin(), recs.end());
  const bool pass = all_pass(all);

  if (o.json) {
    Json records = Json::array();
    for (const auto& [suite, recs] : parts)
      for (const auto& r : recs) {
        Json j = record_json(r);
        j["suite"] = suite;
        records.push_back(j);
      }
    Json j{{"schema", 1},
           {"command", "check"},
           {"suite", o.suite},
           {"config",
            {{"algebra", cfg.algebra->name()},
             {"chart", cfg.chart.name()},
             {"seed", cfg.seed},
             {"samples", cfg.samples},
             {"tol", cfg.tol}}},
           {"records", records},
           {"max_residual", worst_residual(all)},
           {"pass", pass}};
    out << j.dump(2) << "\n";
  } else {
    out << "check " << o.suite << " on " << cfg.algebra->name() << ", chart " << cfg.chart.name() << ", seed "
        << cfg.seed << ", samples " << cfg.samples << ", tol " << format_double(cfg.tol) << "\n";
    for (const auto& [suite, recs] : parts) {
      out << suite << ":\n";
      print_records(out, recs);
    }
    out << "overall: " << (pass ? "pass" : "FAIL") << "\n";
  }
  return pass ? 0 : 1;
}

int cmd_cohomology(const Options& o, std::ostream& out) {
  const std::string default_chart = o.model == "circle" ? "circle" : "box:[-1,1]^2";
  const SuiteConfig cfg = make_config(o, default_chart);
  Overrides ov;
  if (!o.form.empty()) ov.form_text = o.form;
  if (!o.coeff.empty()) ov.coeff = parse_element(o.coeff, *cfg.algebra);

  CohomologyResult res;
  if (o.model == "poincare")
    res = poincare_model(cfg);
  else if (o.model == "circle")
    res = circle_model(cfg, ov);
  else if (o.model == "h0")
    res = h0_model(cfg);
  else
    throw Error("UsageError", "unknown model '" + o.model + "'");

  const bool pass = all_pass(res.records);
  if (o.json) {
    Json records = Json::array();
    for (const auto& r : res.records) records.push_back(record_json(r));
    Json j{{"schema", 1},
           {"check", o.model},
           {"algebra", cfg.algebra->name()},
           {"chart", cfg.chart.name()},
           {"samples", cfg.samples},
           {"seed", cfg.seed},
           {"max_residual", worst_residual(res.records)},
           {"pass", pass},
           {"records", records}};
    if (res.h1_class) {
      j["class"] = element_json(*res.h1_class);
      j["exact"] = res.h1_class->max_abs() <= cfg.tol;
    }
    if (res.h0_value) j["h0_value"] = element_json(*res.h0_value);
    out << j.dump(2) << "\n";
  } else {
    out << "cohomology " << o.model << " on " << cfg.algebra->name() << ", chart " << cfg.chart.name() << ", seed "
        << cfg.seed << ", samples " << cfg.samples << "\n";
    if (res.h1_class)
      out << "class: " << to_string(*res.h1_class) << " ("
          << (res.h1_class->max_abs() <= cfg.tol ? "exact" : "nontrivial") << ")\n";
    if (res.h0_value) out << "h0 value: " << to_string(*res.h0_value) << "\n";
    print_records(out, res.records);
    out << "overall: " << (pass ? "pass" : "FAIL") << "\n";
  }
  return pass ? 0 : 1;
}

void add_common(CLI::App* sub, Options& o) {
  sub->add_option("--algebra", o.algebra, "Weil algebra presentation, e.g. R[x]/(x^2)");
  sub->add_option("--chart", o.chart, "box:[-1,1]^n, box:[a,b]x[c,d] or circle");
  sub->add_option("--seed", o.seed, "random seed")->envname("NPK_SEED");
  sub->add_option("--samples", o.samples, "random samples per check")->check(CLI::PositiveNumber);
  sub->add_option("--tol", o.tol, "residual tolerance")->check(CLI::NonNegativeNumber);
  sub->add_flag("--json", o.json, "emit a JSON report");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Near points, A-vector fields and A-forms on Weil bundles", "npk"};
  app.require_subcommand(1);

  auto* algebra = app.add_subcommand("algebra", "describe a Weil algebra");
  algebra->add_option("presentation", o.algebra, "presentation (same as --algebra)");
  algebra->add_option("--algebra", o.algebra, "Weil algebra presentation");
  algebra->add_flag("--json", o.json, "emit JSON");

  auto* lift = app.add_subcommand("lift", "evaluate a lift f^A at a near point");
  lift->add_option("--algebra", o.algebra, "Weil algebra presentation");
  lift->add_option("--fn", o.fn, "expression in x1..xn")->required();
  lift->add_option("--xi", o.xi, "near point as JSON, e.g. [[1,1]]")->required();
  lift->add_option("--chart", o.chart, "chart containing the base point");
  lift->add_flag("--json", o.json, "emit JSON");

  auto* check = app.add_subcommand("check", "run identity suites");
  add_common(check, o);
  check->add_option("--suite", o.suite, "lie, lift, forms or all")
      ->check(CLI::IsMember({"lie", "lift", "forms", "all"}));
  check->add_option("--field", o.fields, "vector-field literal (repeatable: X, Y, W)");
  check->add_option("--form", o.form, "A-form literal for the forms suite");

  auto* coh = app.add_subcommand("cohomology", "run cohomology checks");
  add_common(coh, o);
  coh->add_option("--model", o.model, "poincare, circle or h0")->check(CLI::IsMember({"poincare", "circle", "h0"}));
  coh->add_option("--form", o.form, "circle 1-form g dx(1)");
  coh->add_option("--coeff", o.coeff, "A-coefficient of --form as JSON");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*algebra) return cmd_algebra(o, out);
    if (*lift) return cmd_lift(o, out);
    if (*check) return cmd_check(o, out);
    if (*coh) return cmd_cohomology(o, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}

}  // namespace npk::cli
