#include "amoo/core.hpp"
#include "amoo/problems.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

namespace amoo {
namespace {

Vector fd_gradient(const std::function<double(const Vector&)>& f, const Vector& x) {
  Vector g(x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    const double h = 1e-6 * (1.0 + std::abs(x[j]));
    Vector a = x, b = x;
    a[j] += h;
    b[j] -= h;
    g[j] = (f(a) - f(b)) / (2 * h);
  }
  return g;
}

ObjectiveSet spec_set(double delta) { return build(ProblemSpec{SpecificationSpec{delta}}).objectives; }

TEST(WeightedValue, SpecificationExampleAtOnes) {
  const auto set = spec_set(0.1);
  const auto w = WeightVector::simplex(Vector{{0.5, 0.5}});
  EXPECT_NEAR(weighted_value(set, w, Vector{{1.0, 1.0}}), 1.0, 1e-14);
}

TEST(WeightedValue, ZeroOrthantWeightsGiveZero) {
  const auto set = spec_set(0.3);
  EXPECT_EQ(weighted_value(set, WeightVector::orthant(Vector::Zero(2)), Vector{{2.0, -1.0}}), 0.0);
}

TEST(WeightedValue, SelectionPicksIsotropicObjective) {
  const auto p = build(ProblemSpec{SelectionSpec{0.1, 3, 2}});
  const auto w = WeightVector::simplex(Vector{{0.0, 0.0, 1.0}});
  EXPECT_NEAR(weighted_value(p.objectives, w, Vector{{1.0, 1.0}}), 2.0, 1e-14);
}

TEST(WeightedValue, DimensionMismatchThrows) {
  const auto set = spec_set(0.1);
  EXPECT_THROW(weighted_value(set, WeightVector::simplex(Vector{{1.0}}), Vector{{1.0, 1.0}}),
               ArgumentError);
  EXPECT_THROW(weighted_value(set, WeightVector::simplex(Vector{{0.5, 0.5}}), Vector{{1.0}}),
               ArgumentError);
}

TEST(WeightedGradient, SpecificationExample) {
  const auto set = spec_set(0.1);
  const Vector g = weighted_gradient(set, WeightVector::simplex(Vector{{0.5, 0.5}}), Vector{{1.0, 1.0}});
  EXPECT_NEAR(g[0], 1.0, 1e-14);
  EXPECT_NEAR(g[1], 1.0, 1e-14);
}

TEST(WeightedGradient, VanishesAtSharedOptimum) {
  for (const ProblemSpec& ps : {ProblemSpec{SpecificationSpec{0.2}}, ProblemSpec{SelectionSpec{}},
                                ProblemSpec{LocalCurvatureSpec{3}}}) {
    const Problem p = build(ps);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int t = 0; t < 10; ++t) {
      Vector w(p.objectives.size());
      for (auto& v : w) v = u(rng);
      const Vector g = weighted_gradient(p.objectives, WeightVector::project(w), *p.optimum.x_star);
      EXPECT_LE(g.norm(), 1e-8) << p.name;
    }
  }
}

TEST(WeightedGradient, LocalCurvatureAtZero) {
  const Problem p = build(ProblemSpec{LocalCurvatureSpec{1}});
  const Vector g = weighted_gradient(p.objectives, WeightVector::simplex(Vector{{1.0, 0.0}}),
                                     Vector::Zero(1));
  EXPECT_EQ(g.size(), 1);
  EXPECT_NEAR(g[0], 0.0, 1e-15);
}

TEST(Residual, Examples) {
  OptimalInfo opt;
  opt.x_star = Vector{{0.0, 0.0}};
  EXPECT_EQ(residual(Vector{{0.0, 0.0}}, opt), 0.0);
  EXPECT_DOUBLE_EQ(residual(Vector{{3.0, 4.0}}, opt), 5.0);
  EXPECT_NEAR(residual(Vector{{1.0, 1.0}}, opt), 1.41421356, 1e-8);
}

TEST(Residual, AbsentOptimumIsUnsupported) {
  EXPECT_THROW(residual(Vector{{1.0}}, OptimalInfo{}), UnsupportedQuery);
}

TEST(WeightVector, DomainInvariants) {
  EXPECT_THROW(WeightVector::orthant(Vector{{-0.1, 1.0}}), ArgumentError);
  EXPECT_THROW(WeightVector::simplex(Vector{{0.5, 0.6}}), ArgumentError);
  EXPECT_NO_THROW(WeightVector::simplex(Vector{{0.5, 0.5 + 5e-10}}));
  EXPECT_THROW(WeightVector::floored_simplex(Vector{{0.05, 0.95}}, 0.1), ArgumentError);
  EXPECT_THROW(WeightVector::floored_simplex(Vector{{0.5, 0.5}}, 0.6), ArgumentError);
  const auto w = WeightVector::floored_simplex(Vector{{0.2, 0.8}}, 0.1);
  EXPECT_EQ(w.domain(), WeightDomain::kFlooredSimplex);
  EXPECT_EQ(w.w_min(), 0.1);
}

TEST(WeightVector, ProjectionLandsInFlooredSimplex) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> n(0.0, 3.0);
  for (int t = 0; t < 200; ++t) {
    const int m = 1 + t % 6;
    Vector v(m);
    for (auto& x : v) x = n(rng);
    const double w_min = (t % 3 == 0) ? 0.0 : 0.9 / (m * (1 + t % 4));
    const auto w = WeightVector::project(v, w_min);
    EXPECT_NEAR(w.entries().sum(), 1.0, 1e-9);
    EXPECT_GE(w.entries().minCoeff(), w_min - 1e-15);
  }
}

TEST(ProjectToSimplex, IsTheEuclideanProjection) {
  // Oracle: the projection u satisfies (v - u) . (y - u) <= 0 for every simplex y.
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int t = 0; t < 50; ++t) {
    Vector v(4);
    for (auto& x : v) x = n(rng);
    const Vector u = project_to_simplex(v);
    for (int j = 0; j < 4; ++j) {
      const Vector y = Vector::Unit(4, j);
      EXPECT_LE((v - u).dot(y - u), 1e-12);
    }
  }
  const Vector already{{0.2, 0.3, 0.5}};
  EXPECT_TRUE(project_to_simplex(already).isApprox(already, 1e-15));
}

TEST(ObjectiveSet, RejectsMixedDimensionsAndEmpty) {
  auto make = [](std::size_t n) {
    return std::make_shared<FunctionObjective>(
        n, [](const Vector& x) { return x.squaredNorm(); }, [](const Vector& x) { return Vector(2 * x); });
  };
  EXPECT_THROW(ObjectiveSet({make(2), make(3)}), ArgumentError);
  EXPECT_THROW(ObjectiveSet({}), ArgumentError);
  const ObjectiveSet ok({make(2), make(2)});
  EXPECT_EQ(ok.size(), 2u);
  EXPECT_EQ(ok.dim(), 2u);
  EXPECT_FALSE(ok.has_hessians());
  EXPECT_THROW(ok[0].hessian(Vector::Zero(2)), UnsupportedQuery);
}

// Properties over the analytic problems ----------------------------------------

class ProblemProperties : public ::testing::TestWithParam<ProblemSpec> {};

TEST_P(ProblemProperties, LinearInWeights) {
  const Problem p = build(GetParam());
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  const auto m = static_cast<Eigen::Index>(p.objectives.size());
  const auto n = static_cast<Eigen::Index>(p.objectives.dim());
  for (int t = 0; t < 20; ++t) {
    Vector w1(m), w2(m), x(n);
    for (auto& v : w1) v = u(rng);
    for (auto& v : w2) v = u(rng);
    for (auto& v : x) v = u(rng) - 1.0;
    const double a = u(rng), b = u(rng);
    const double lhs = weighted_value(p.objectives, WeightVector::orthant(a * w1 + b * w2), x);
    const double rhs = a * weighted_value(p.objectives, WeightVector::orthant(w1), x) +
                       b * weighted_value(p.objectives, WeightVector::orthant(w2), x);
    EXPECT_NEAR(lhs, rhs, 1e-12 * (1.0 + std::abs(rhs)));
  }
}

TEST_P(ProblemProperties, SuboptimalityIsNonnegative) {
  const Problem p = build(GetParam());
  std::mt19937_64 rng(22);
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto m = static_cast<Eigen::Index>(p.objectives.size());
  const auto n = static_cast<Eigen::Index>(p.objectives.dim());
  for (int t = 0; t < 50; ++t) {
    Vector w(m), x(n);
    for (auto& v : w) v = u(rng);
    for (auto& v : x) v = g(rng);
    const auto ws = WeightVector::project(w);
    EXPECT_GE(weighted_value(p.objectives, ws, x) - weighted_value(p.objectives, ws, *p.optimum.x_star),
              -1e-12);
  }
}

TEST_P(ProblemProperties, GradientMatchesFiniteDifferences) {
  const Problem p = build(GetParam());
  std::mt19937_64 rng(23);
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto m = static_cast<Eigen::Index>(p.objectives.size());
  const auto n = static_cast<Eigen::Index>(p.objectives.dim());
  for (int t = 0; t < 50; ++t) {
    Vector w(m), x(n);
    for (auto& v : w) v = u(rng);
    for (auto& v : x) v = g(rng);
    const auto ws = WeightVector::project(w);
    const Vector analytic = weighted_gradient(p.objectives, ws, x);
    const Vector fd = fd_gradient([&](const Vector& y) { return weighted_value(p.objectives, ws, y); }, x);
    EXPECT_LE((analytic - fd).norm(), 1e-4 * (1.0 + analytic.norm()));
  }
}

TEST_P(ProblemProperties, HessiansAreSymmetric) {
  const Problem p = build(GetParam());
  if (!p.objectives.has_hessians()) GTEST_SKIP();
  const Vector x = Vector::LinSpaced(static_cast<Eigen::Index>(p.objectives.dim()), -0.7, 0.9);
  for (const Matrix& h : p.objectives.hessians(x)) {
    EXPECT_LE((h - h.transpose()).cwiseAbs().maxCoeff(), 1e-12);
  }
}

INSTANTIATE_TEST_SUITE_P(
    Analytic, ProblemProperties,
    ::testing::Values(ProblemSpec{SpecificationSpec{0.1}}, ProblemSpec{SpecificationSpec{0.0}},
                      ProblemSpec{SelectionSpec{0.1, 3, 2}}, ProblemSpec{SelectionSpec{0.2, 4, 5}},
                      ProblemSpec{LocalCurvatureSpec{1}}, ProblemSpec{LocalCurvatureSpec{4}}));

}  // namespace
}  // namespace amoo
