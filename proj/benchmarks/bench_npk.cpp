#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "npk/a_forms.hpp"
#include "npk/cohomology.hpp"
#include "npk/identities.hpp"

using namespace npk;

namespace {

// Algebra by catalog index; dims grow with the index.
AlgebraPtr algebra_at(std::int64_t i) {
  return WeilAlgebra::parse(catalog_presentations()[static_cast<std::size_t>(i)]);
}

void BM_AlgebraMul(benchmark::State& state) {
  const AlgebraPtr A = algebra_at(state.range(0));
  std::mt19937_64 rng(1);
  const AElement a = random_element(*A, rng), b = random_element(*A, rng);
  for (auto _ : state) benchmark::DoNotOptimize(A->mul(a, b));
  state.SetLabel(A->name());
}

void BM_Lift(benchmark::State& state) {
  const AlgebraPtr A = algebra_at(state.range(0));
  const ChartModel c = ChartModel::unit_box(2);
  std::mt19937_64 rng(2);
  const Expr f = random_smooth(2, rng);
  const NearPoint xi = random_near_point(A, c, rng);
  for (auto _ : state) benchmark::DoNotOptimize(lift_f(f, xi));
  state.SetLabel(A->name());
}

void BM_Bracket(benchmark::State& state) {
  const AlgebraPtr A = algebra_at(state.range(0));
  std::mt19937_64 rng(3);
  const VectorFieldMA x = random_general_field(A, 2, rng), y = random_general_field(A, 2, rng);
  for (auto _ : state) benchmark::DoNotOptimize(bracket(x, y));
  state.SetLabel(A->name());
}

void BM_BracketEval(benchmark::State& state) {
  const AlgebraPtr A = algebra_at(state.range(0));
  const ChartModel c = ChartModel::unit_box(2);
  std::mt19937_64 rng(4);
  const VectorFieldMA b = bracket(random_general_field(A, 2, rng), random_general_field(A, 2, rng));
  const NearPoint xi = random_near_point(A, c, rng);
  for (auto _ : state) benchmark::DoNotOptimize(eval_fnma(b.component(0), xi));
  state.SetLabel(A->name());
}

void BM_dA(benchmark::State& state) {
  const AlgebraPtr A = algebra_at(state.range(0));
  const auto n = static_cast<std::size_t>(state.range(1));
  std::mt19937_64 rng(5);
  const AFormMA eta = prolong_form(A, random_poly_form(n, 1, rng));
  for (auto _ : state) benchmark::DoNotOptimize(dA(eta));
  state.SetLabel(A->name());
}

void BM_Homotopy(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(6);
  const PolyForm w = PolyForm::from_form(random_poly_form(n, 1, rng, 3));
  for (auto _ : state) benchmark::DoNotOptimize(homotopy(w));
}

void catalog(benchmark::internal::Benchmark* b) {
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(catalog_presentations().size()); ++i) b->Arg(i);
}

}  // namespace

BENCHMARK(BM_AlgebraMul)->Apply(catalog);
BENCHMARK(BM_Lift)->Apply(catalog);
BENCHMARK(BM_Bracket)->Apply(catalog);
BENCHMARK(BM_BracketEval)->Apply(catalog);
BENCHMARK(BM_dA)->ArgsProduct({{0, 2, 4}, {2, 3}});
BENCHMARK(BM_Homotopy)->DenseRange(1, 4);

BENCHMARK_MAIN();
