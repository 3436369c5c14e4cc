#include "amoo/driver.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

namespace amoo {
namespace {

RunConfig spec_ew(int steps) {
  RunConfig cfg;
  cfg.problem = ProblemSpec{SpecificationSpec{0.1}};
  cfg.inner = GdRule{0.25};
  cfg.x0 = Vector{{1.0, 1.0}};
  cfg.steps = steps;
  return cfg;
}

double dot(const Vector& a, const Vector& b) { return a.dot(b); }

TEST(StepRules, GdExamples) {
  EXPECT_EQ(step_gd(Vector{{1.0}}, Vector{{2.0}}, 0.5), Vector::Zero(1));
  EXPECT_EQ(step_gd(Vector{{3.0, -1.0}}, Vector::Zero(2), 0.7), (Vector{{3.0, -1.0}}));
  EXPECT_THROW(step_gd(Vector{{1.0}}, Vector{{std::nan("")}}, 0.1), NumericError);
}

TEST(StepRules, AdamFirstStepIsUnitDirection) {
  AdamState st;
  AdamRule rule;
  rule.step = 0.1;
  const Vector x = step_adam(st, Vector{{1.0, 2.0}}, Vector{{1.0, -3.0}}, rule);
  // Bias-corrected first moments equal g and sqrt(v_hat) equals |g|.
  EXPECT_NEAR(x[0], 1.0 - 0.1, 1e-7);
  EXPECT_NEAR(x[1], 2.0 + 0.1, 1e-7);
  EXPECT_EQ(st.t, 1);
  EXPECT_THROW(step_adam(st, x, Vector{{INFINITY, 0.0}}, rule), NumericError);
}

TEST(StepRules, AdamSecondStepMatchesRecurrence) {
  AdamState st;
  const AdamRule rule;
  const Vector g1{{0.5}}, g2{{-2.0}};
  Vector x = step_adam(st, Vector{{0.0}}, g1, rule);
  x = step_adam(st, x, g2, rule);
  const double m = (1 - rule.beta1) * (rule.beta1 * g1[0] + g2[0]);
  const double v = (1 - rule.beta2) * (rule.beta2 * g1[0] * g1[0] + g2[0] * g2[0]);
  const double mh = m / (1 - rule.beta1 * rule.beta1);
  const double vh = v / (1 - rule.beta2 * rule.beta2);
  const double expect = -rule.step * 0.5 / (0.5 + rule.eps) - rule.step * mh / (std::sqrt(vh) + rule.eps);
  EXPECT_NEAR(x[0], expect, 1e-15);
}

TEST(Run, EqualWeightsContractAtThreeQuarters) {
  const RunTrace t = run(spec_ew(100));
  ASSERT_EQ(t.records.size(), 101u);
  for (const auto& r : t.records) {
    // Weighted Hessian is the identity, so each GD step scales x by 1 - 0.25.
    EXPECT_NEAR(*r.residual, std::sqrt(2.0) * std::pow(0.75, r.step), 1e-12 * std::pow(0.75, r.step));
    EXPECT_EQ(r.w, Vector::Constant(2, 0.5));
  }
  EXPECT_LE(*t.records.back().residual, 1e-10);
}

TEST(Run, ZeroStepsRecordsStartOnly) {
  for (const ProblemSpec& ps : {ProblemSpec{SpecificationSpec{0.1}}, ProblemSpec{LocalCurvatureSpec{3}}}) {
    RunConfig cfg;
    cfg.problem = ps;
    cfg.steps = 0;
    const Problem p = build(ps);
    const RunTrace t = run(cfg);
    ASSERT_EQ(t.records.size(), 1u);
    EXPECT_EQ(t.records[0].step, 0);
    EXPECT_EQ(t.final_x, p.default_start);
  }
}

TEST(Run, RecordEveryKeepsLastStep) {
  RunConfig cfg = spec_ew(10);
  cfg.record_every = 3;
  const RunTrace t = run(cfg);
  std::vector<int> steps;
  for (const auto& r : t.records) steps.push_back(r.step);
  EXPECT_EQ(steps, (std::vector<int>{0, 3, 6, 9, 10}));
}

TEST(Run, CamooWeightsFollowTheSignOfX) {
  for (CamooMode mode : {CamooMode::kExactEigen, CamooMode::kDiagonalBilinear}) {
    RunConfig cfg;
    cfg.problem = ProblemSpec{LocalCurvatureSpec{1}};
    CamooConfig cc;
    cc.mode = mode;
    cfg.weighting = cc;
    cfg.inner = GdRule{0.25};
    cfg.x0 = Vector::Constant(1, 2.0);
    cfg.steps = 60;
    const RunTrace t = run(cfg);
    int checked = 0;
    for (const auto& r : t.records) {
      // f_1 - f_2 = 2 sinh(x) - 2x has the sign of x.
      const double side = r.f[0] - r.f[1];
      if (std::abs(side) < 1e-12) continue;
      EXPECT_EQ(std::signbit(r.w[0] - r.w[1]), std::signbit(side)) << "step " << r.step;
      ++checked;
    }
    EXPECT_GT(checked, 10);
  }
}

TEST(Run, WeightedObjectiveDecreasesMonotonically) {
  for (const ProblemSpec& ps : {ProblemSpec{SpecificationSpec{0.2}}, ProblemSpec{SelectionSpec{0.1, 3, 2}}}) {
    const Problem p = build(ps);
    CamooConfig cc;
    cc.mode = CamooMode::kExactEigen;
    for (const WeightingSpec& ws : {WeightingSpec{EqualWeighting{}}, WeightingSpec{cc}}) {
      RunConfig cfg;
      cfg.problem = ps;
      cfg.weighting = ws;
      cfg.camoo_lr_scale_by_m = false;
      // Equal weights sum to one here too, so 1/beta is a safe step for both.
      cfg.inner = GdRule{1.0 / *p.meta.beta};
      cfg.x0 = Vector{{1.5, -0.7}};
      cfg.steps = 40;
      const RunTrace t = run(cfg, p);
      for (std::size_t k = 0; k + 1 < t.records.size(); ++k) {
        const auto& a = t.records[k];
        const auto& b = t.records[k + 1];
        EXPECT_LE(dot(a.w, b.f), dot(a.w, a.f) + 1e-12) << p.name << " step " << a.step;
      }
    }
  }
}

TEST(Run, IdenticalConfigsGiveIdenticalTraces) {
  RunConfig cfg;
  MlpMatchingSpec ms;
  ms.hidden = 8;
  ms.dataset_size = 10;
  cfg.problem = ProblemSpec{ms};
  cfg.weighting = CamooConfig{};
  cfg.inner = AdamRule{};
  cfg.steps = 15;
  cfg.seed = 77;
  const RunTrace a = run(cfg);
  const RunTrace b = run(cfg);
  ASSERT_EQ(a.records.size(), b.records.size());
  for (std::size_t k = 0; k < a.records.size(); ++k) {
    EXPECT_EQ(a.records[k].f, b.records[k].f);
    EXPECT_EQ(a.records[k].w, b.records[k].w);
    EXPECT_EQ(a.records[k].pu_gap, b.records[k].pu_gap);
    EXPECT_EQ(a.records[k].msq, b.records[k].msq);
  }
  EXPECT_EQ(a.final_x, b.final_x);
}

TEST(Run, PamooSingleObjectiveIsPolyakStep) {
  QuadFamilySpec q;
  q.hessians = {Matrix::Identity(1, 1)};
  q.alphas = {1.0};
  for (double x0 : {1.0, -3.0, 0.25}) {
    RunConfig cfg;
    cfg.problem = ProblemSpec{q};
    PamooConfig pc;
    pc.gram_tau = 0.0;
    pc.clip_floor = 0.0;
    pc.step_rule = PamooStepRule::kLipschitz;
    pc.iterations = 1000;
    cfg.weighting = pc;
    cfg.inner = GdRule{1.0};
    cfg.x0 = Vector::Constant(1, x0);
    cfg.steps = 1;
    // Polyak: x - (x^2 / (2x)^2) 2x = x / 2.
    EXPECT_NEAR(run(cfg).final_x[0], 0.5 * x0, 1e-9);
  }
}

TEST(Run, PamooWithoutOptimalValuesIsAConfigError) {
  const Problem base = build(ProblemSpec{SpecificationSpec{0.1}});
  const Problem p{"no-optimum", base.objectives, {}, {}, base.default_start, {}};
  RunConfig cfg;
  cfg.weighting = PamooConfig{};
  EXPECT_THROW(run(cfg, p), ConfigError);
  cfg.f_star = Vector::Zero(2);
  EXPECT_NO_THROW(run(cfg, p));
  cfg.f_star = Vector::Zero(3);
  EXPECT_THROW(run(cfg, p), ConfigError);
}

TEST(Run, InvalidSettingsAreConfigErrors) {
  RunConfig cfg = spec_ew(10);
  cfg.inner = GdRule{0.0};
  EXPECT_THROW(run(cfg), ConfigError);
  cfg = spec_ew(-1);
  EXPECT_THROW(run(cfg), ConfigError);
  cfg = spec_ew(10);
  cfg.record_every = 0;
  EXPECT_THROW(run(cfg), ConfigError);
  cfg = spec_ew(10);
  cfg.x0 = Vector::Zero(3);
  EXPECT_THROW(run(cfg), ConfigError);
}

TEST(Run, DivergenceKeepsPartialTrace) {
  RunConfig cfg;
  cfg.problem = ProblemSpec{SelectionSpec{0.1, 3, 2}};
  cfg.inner = GdRule{10.0};
  cfg.steps = 2000;
  try {
    run(cfg);
    FAIL() << "expected RunDiverged";
  } catch (const RunDiverged& e) {
    const auto& recs = e.partial_trace().records;
    ASSERT_FALSE(recs.empty());
    EXPECT_LT(recs.back().step, e.step() + 1);
    for (std::size_t k = 0; k < recs.size(); ++k) {
      EXPECT_TRUE(recs[k].f.allFinite());
      EXPECT_TRUE(std::isfinite(recs[k].grad_norm));
      if (k) EXPECT_GT(recs[k].step, recs[k - 1].step);
    }
  }
}

TEST(Run, EqualWeightsReachTheUniqueMinimizerFromAnyStart) {
  std::mt19937_64 rng(41);
  std::normal_distribution<double> g(0.0, 5.0);
  for (int t = 0; t < 20; ++t) {
    RunConfig cfg = spec_ew(150);
    cfg.x0 = Vector{{g(rng), g(rng)}};
    EXPECT_LE(run(cfg).final_x.norm(), 1e-6);
  }
}

TEST(Presets, TheoryPresetsUseProblemConstants) {
  const Problem p = build(ProblemSpec{SpecificationSpec{0.1}});
  const RunConfig c = apply_preset("camoo-theory", RunConfig{}, p);
  EXPECT_NEAR(std::get<GdRule>(c.inner).step, 1.0 / (2.0 * 1.8), 1e-15);
  const auto& cc = std::get<CamooConfig>(c.weighting);
  EXPECT_EQ(cc.mode, CamooMode::kExactEigen);
  EXPECT_NEAR(cc.w_min, 1.0 / (8.0 * 2.0 * 1.8), 1e-15);
  EXPECT_FALSE(c.camoo_lr_scale_by_m);

  const RunConfig pc = apply_preset("pamoo-theory", RunConfig{}, p);
  EXPECT_EQ(std::get<GdRule>(pc.inner).step, 1.0);
  EXPECT_TRUE(std::holds_alternative<PamooConfig>(pc.weighting));

  EXPECT_EQ(std::get<GdRule>(apply_preset("practical-sgd", RunConfig{}, p).inner).step, 0.0005);
  EXPECT_EQ(std::get<AdamRule>(apply_preset("practical-adam", RunConfig{}, p).inner).step, 0.005);
  EXPECT_EQ(preset_names().size(), 4u);
}

TEST(Presets, RejectUnknownNamesAndMissingConstants) {
  const Problem lc = build(ProblemSpec{LocalCurvatureSpec{1}});
  EXPECT_THROW(apply_preset("camoo-theory", RunConfig{}, lc), ConfigError);
  EXPECT_THROW(apply_preset("fast", RunConfig{}, lc), ConfigError);
}

TEST(Presets, CamooTheoryConvergesOnSpecification) {
  RunConfig cfg;
  cfg.problem = ProblemSpec{SpecificationSpec{0.1}};
  const Problem p = build(cfg.problem);
  cfg = apply_preset("camoo-theory", cfg, p);
  cfg.steps = 200;
  const RunTrace t = run(cfg, p);
  EXPECT_LE(*t.records.back().residual, 1e-8);
  EXPECT_TRUE(t.records.back().lambda_min_est.has_value());
}

}  // namespace
}  // namespace amoo
