#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "npk/a_forms.hpp"
#include "npk/identities.hpp"
#include "npk/near_points.hpp"
#include "npk/vector_fields.hpp"

namespace npk::cli {

struct SuiteConfig {
  AlgebraPtr algebra;
  ChartModel chart = ChartModel::unit_box(2);
  std::uint64_t seed = 0;
  std::size_t samples = 50;
  double tol = 1e-8;
};

/// User-supplied data that replaces the random inputs of a suite.
struct Overrides {
  std::vector<VectorFieldMA> fields;  // x, y, w of the Lie suite
  std::optional<AFormMA> form;        // η of the forms suite
  std::optional<std::string> form_text;
  std::optional<AElement> coeff;
};

std::vector<IdentityReport> lie_suite(const SuiteConfig& cfg, const Overrides& ov);
std::vector<IdentityReport> lift_suite(const SuiteConfig& cfg);
std::vector<IdentityReport> forms_suite(const SuiteConfig& cfg, const Overrides& ov);

struct CohomologyResult {
  std::vector<IdentityReport> records;
  std::optional<AElement> h1_class;  // circle model with a user form
  std::optional<AElement> h0_value;
};

CohomologyResult poincare_model(const SuiteConfig& cfg);
CohomologyResult circle_model(const SuiteConfig& cfg, const Overrides& ov);
CohomologyResult h0_model(const SuiteConfig& cfg);

}  // namespace npk::cli
