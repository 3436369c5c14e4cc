#include "amoo/driver.hpp"
#include "amoo/hessians.hpp"
#include "amoo/linalg.hpp"
#include "amoo/problems.hpp"
#include "amoo/weighting.hpp"

#include <benchmark/benchmark.h>

#include <random>

namespace {

using namespace amoo;

Matrix random_spd(Eigen::Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix b(n, n);
  for (auto& v : b.reshaped()) v = g(rng);
  return b * b.transpose() / static_cast<double>(n) + 0.1 * Matrix::Identity(n, n);
}

void BM_MinEigenpair(benchmark::State& state) {
  const SymMatrix a(random_spd(state.range(0), 1));
  for (auto _ : state) benchmark::DoNotOptimize(min_eigenpair(a));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_MinEigenpair)->RangeMultiplier(2)->Range(2, 32)->Complexity();

void BM_CamooExact(benchmark::State& state) {
  std::vector<SymMatrix> hs;
  for (int i = 0; i < 3; ++i) hs.emplace_back(random_spd(state.range(0), 10 + i));
  const CamooConfig cfg{.mode = CamooMode::kExactEigen};
  for (auto _ : state) benchmark::DoNotOptimize(camoo_weights_exact(hs, cfg));
}
BENCHMARK(BM_CamooExact)->Arg(2)->Arg(8);

void BM_BilinearPu(benchmark::State& state) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 3.0);
  Matrix a(3, state.range(0));
  for (auto& v : a.reshaped()) v = u(rng);
  const CamooConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(solve_bilinear_pu(a, cfg));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_BilinearPu)->RangeMultiplier(8)->Range(8, 4096)->Complexity();

void BM_PamooWeights(benchmark::State& state) {
  const Problem p = build(ProblemSpec{MlpMatchingSpec{}});
  const auto ctx = make_pamoo_context(p.objectives, p.default_start, *p.optimum.f_star);
  PamooConfig cfg;
  cfg.step_rule = state.range(0) ? PamooStepRule::kLipschitz : PamooStepRule::kFixed;
  for (auto _ : state) benchmark::DoNotOptimize(pamoo_weights(ctx, cfg));
}
BENCHMARK(BM_PamooWeights)->Arg(0)->Arg(1);

void BM_HutchinsonMlp(benchmark::State& state) {
  const Problem p = build(ProblemSpec{MlpMatchingSpec{}});
  HutchinsonConfig cfg;
  cfg.num_samples = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(diag_hessian_matrix(p.objectives, p.default_start, cfg));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_HutchinsonMlp)->Arg(1)->Arg(10)->Unit(benchmark::kMillisecond);

void BM_MlpJacobian(benchmark::State& state) {
  MlpMatchingSpec spec;
  if (state.range(0)) spec = MlpMatchingSpec::paper_scale(MlpVariant::kSelection, 0);
  const Problem p = build(ProblemSpec{spec});
  for (auto _ : state) benchmark::DoNotOptimize(p.objectives.jacobian(p.default_start));
  state.counters["params"] = static_cast<double>(p.default_start.size());
}
BENCHMARK(BM_MlpJacobian)->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);

void BM_RunSpecification(benchmark::State& state) {
  RunConfig cfg;
  cfg.problem = ProblemSpec{SpecificationSpec{0.1}};
  CamooConfig cc;
  cc.mode = CamooMode::kExactEigen;
  cfg.weighting = cc;
  cfg.steps = 100;
  const Problem p = build(cfg.problem);
  for (auto _ : state) benchmark::DoNotOptimize(run(cfg, p));
}
BENCHMARK(BM_RunSpecification)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
