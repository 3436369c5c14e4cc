#include "amoo/linalg.hpp"
#include "amoo/problems.hpp"

#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <random>

namespace amoo {
namespace {

ProblemSpec scalar_pair() {
  QuadFamilySpec q;
  q.hessians = {Matrix::Identity(1, 1), Matrix::Identity(1, 1)};
  q.alphas = {1.0, 1.0};
  return ProblemSpec{q};
}

// Brute-force min over a box grid of max_i [f_i(x) - f_star_i].
double grid_minimax(const Problem& p, const Vector& lo, const Vector& hi, int steps) {
  const Vector f_star = *p.optimum.f_star;
  double best = INFINITY;
  for (int i = 0; i <= steps; ++i) {
    for (int j = 0; j <= steps; ++j) {
      const Vector x{{lo[0] + (hi[0] - lo[0]) * i / steps, lo[1] + (hi[1] - lo[1]) * j / steps}};
      best = std::min(best, (p.objectives.values(x) - f_star).maxCoeff());
    }
  }
  return best;
}

TEST(Build, SpecificationHessiansAndMeta) {
  const Problem p = build(ProblemSpec{SpecificationSpec{0.1}});
  for (const Vector& x : {Vector{{0.0, 0.0}}, Vector{{3.0, -2.0}}}) {
    const auto hs = p.objectives.hessians(x);
    EXPECT_TRUE(hs[0].isApprox(Matrix(Vector{{1.8, 0.2}}.asDiagonal()), 1e-15));
    EXPECT_TRUE(hs[1].isApprox(Matrix(Vector{{0.2, 1.8}}.asDiagonal()), 1e-15));
  }
  EXPECT_DOUBLE_EQ(*p.meta.beta, 1.8);
  EXPECT_EQ(*p.meta.mu_G, 1.0);
  EXPECT_EQ(*p.meta.M_f, 0.0);
  EXPECT_EQ(*p.optimum.x_star, Vector::Zero(2));
  EXPECT_EQ(*p.optimum.f_star, Vector::Zero(2));
}

TEST(Build, LocalCurvatureAtOrigin) {
  const Problem p = build(ProblemSpec{LocalCurvatureSpec{1}});
  const auto hs = p.objectives.hessians(Vector::Zero(1));
  EXPECT_NEAR(hs[0](0, 0), 1.0, 1e-15);
  EXPECT_NEAR(hs[1](0, 0), 1.0, 1e-15);
  EXPECT_EQ(*p.meta.mu_G, 1.0);
  EXPECT_FALSE(p.meta.beta.has_value());
  EXPECT_EQ(p.objectives.values(Vector::Zero(1)), *p.optimum.f_star);
}

TEST(Build, SelectionUniformWeightsCurvature) {
  const Problem p = build(ProblemSpec{SelectionSpec{0.1, 3, 4}});
  const auto hs = p.objectives.hessians(Vector::Zero(4));
  Matrix sum = Matrix::Zero(4, 4);
  for (const auto& h : hs) sum += h / 3.0;
  const double lambda = Eigen::SelfAdjointEigenSolver<Matrix>(sum).eigenvalues()[0];
  // (m-1) copies contribute 2 delta, the isotropic one 2: (2 (m-1) delta + 2) / m.
  EXPECT_NEAR(lambda, (2.0 * 2.0 * 0.1 + 2.0) / 3.0, 1e-12);
  EXPECT_LT(lambda, *p.meta.mu_G);
  EXPECT_EQ(*p.meta.beta, 2.0);
}

TEST(Build, RejectsInvalidParameters) {
  EXPECT_THROW(build(ProblemSpec{SpecificationSpec{0.6}}), ArgumentError);
  EXPECT_THROW(build(ProblemSpec{SpecificationSpec{-0.1}}), ArgumentError);
  EXPECT_THROW(build(ProblemSpec{SelectionSpec{0.1, 0, 2}}), ArgumentError);
  EXPECT_THROW(build(ProblemSpec{SelectionSpec{0.1, 3, 0}}), ArgumentError);
  EXPECT_THROW(build(ProblemSpec{LocalCurvatureSpec{0}}), ArgumentError);
  QuadFamilySpec q;
  q.hessians = {Matrix::Identity(2, 2)};
  q.alphas = {0.5};
  EXPECT_THROW(build(ProblemSpec{q}), ArgumentError);
  q.alphas = {1.0, 1.0};
  EXPECT_THROW(build(ProblemSpec{q}), ArgumentError);
}

TEST(Build, QuadFamilyPowers) {
  QuadFamilySpec q;
  q.hessians = {Matrix::Identity(2, 2), Matrix(Vector{{2.0, 0.5}}.asDiagonal())};
  q.alphas = {1.5, 2.0};
  const Problem p = build(ProblemSpec{q});
  const Vector x{{1.0, 2.0}};
  EXPECT_NEAR(p.objectives[0].value(x), std::pow(5.0, 1.5), 1e-12);
  EXPECT_NEAR(p.objectives[1].value(x), 16.0, 1e-12);
}

TEST(Build, AlignedGradientsVanishAtOptimum) {
  QuadFamilySpec q;
  q.hessians = {Matrix::Identity(3, 3), Matrix(Vector{{1.0, 0.0, 2.0}}.asDiagonal())};
  q.alphas = {2.0, 1.5};
  for (const ProblemSpec& ps : {ProblemSpec{SpecificationSpec{0.3}}, ProblemSpec{SelectionSpec{0.2, 5, 3}},
                                ProblemSpec{LocalCurvatureSpec{4}}, ProblemSpec{q}}) {
    const Problem p = build(ps);
    const Matrix j = p.objectives.jacobian(*p.optimum.x_star);
    EXPECT_LE(j.cwiseAbs().maxCoeff(), 1e-8) << p.name;
  }
}

TEST(Build, MidpointConvexity) {
  QuadFamilySpec q;
  q.hessians = {Matrix::Identity(2, 2), Matrix{{2.0, 1.0}, {1.0, 1.0}}};
  q.alphas = {1.5, 2.0};
  std::mt19937_64 rng(31);
  std::normal_distribution<double> g(0.0, 1.0);
  for (const ProblemSpec& ps : {ProblemSpec{SpecificationSpec{0.1}}, ProblemSpec{SelectionSpec{0.1, 3, 2}},
                                ProblemSpec{LocalCurvatureSpec{2}}, ProblemSpec{q}}) {
    const Problem p = build(ps);
    for (int t = 0; t < 100; ++t) {
      const Vector x{{g(rng), g(rng)}}, y{{g(rng), g(rng)}};
      const Vector mid = p.objectives.values(Vector(0.5 * (x + y)));
      const Vector avg = 0.5 * (p.objectives.values(x) + p.objectives.values(y));
      EXPECT_TRUE((mid.array() <= avg.array() + 1e-10).all()) << p.name;
    }
  }
}

TEST(Build, NamesDistinguishParameters) {
  EXPECT_NE(ProblemSpec{SpecificationSpec{0.1}}.name(), ProblemSpec{SpecificationSpec{0.2}}.name());
  EXPECT_NE((ProblemSpec{SelectionSpec{0.1, 3, 2}}.name()), (ProblemSpec{SelectionSpec{0.1, 4, 2}}.name()));
  EXPECT_FALSE(problem_catalog().empty());
}

// Misalignment -------------------------------------------------------------------

TEST(Misalign, ZeroShiftsKeepAlignment) {
  const Problem p = misalign(ProblemSpec{SpecificationSpec{0.1}}, {Vector::Zero(2), Vector::Zero(2)});
  EXPECT_EQ(p.optimum.alignment_eps, 0.0);
  EXPECT_EQ(*p.optimum.x_star, Vector::Zero(2));
}

TEST(Misalign, SymmetricScalarQuadratics) {
  const Problem p = misalign(scalar_pair(), {Vector::Zero(1), Vector::Constant(1, 0.2)});
  EXPECT_NEAR((*p.optimum.x_star)[0], 0.1, 1e-8);
  EXPECT_NEAR(p.optimum.alignment_eps, 0.01, 1e-10);
  EXPECT_NEAR(p.objectives[1].value(Vector::Constant(1, 0.2)), 0.0, 1e-15);
}

TEST(Misalign, SpecificationMatchesGridMinimax) {
  const Problem p = misalign(ProblemSpec{SpecificationSpec{0.1}}, {Vector::Zero(2), Vector{{0.1, 0.0}}});
  EXPECT_GT(p.optimum.alignment_eps, 0.0);
  const double grid = grid_minimax(p, Vector{{-0.05, -0.05}}, Vector{{0.15, 0.05}}, 400);
  EXPECT_LE(p.optimum.alignment_eps, grid + 1e-12);
  EXPECT_NEAR(p.optimum.alignment_eps, grid, 1e-5);
  const Vector gaps = p.objectives.values(*p.optimum.x_star) - *p.optimum.f_star;
  EXPECT_NEAR(gaps.maxCoeff(), p.optimum.alignment_eps, 1e-12);
}

TEST(Misalign, ReferenceCertificateBracketsValue) {
  std::mt19937_64 rng(32);
  std::normal_distribution<double> g(0.0, 0.3);
  for (int t = 0; t < 10; ++t) {
    const Problem base = build(ProblemSpec{SelectionSpec{0.2, 3, 2}});
    std::vector<Vector> shifts;
    for (int i = 0; i < 3; ++i) shifts.push_back(Vector{{g(rng), g(rng)}});
    const auto ref = minimax_reference(
        ObjectiveSet([&] {
          std::vector<ObjectivePtr> o;
          for (int i = 0; i < 3; ++i) o.push_back(make_shifted(base.objectives.objectives()[i], shifts[i]));
          return o;
        }()),
        Vector::Zero(3), Vector::Zero(2));
    EXPECT_LE(ref.dual_bound, ref.eps + 1e-12);
    EXPECT_NEAR(ref.dual_bound, ref.eps, 1e-6 * (1.0 + ref.eps));
  }
}

TEST(Misalign, RejectsWrongShiftCount) {
  EXPECT_THROW(misalign(ProblemSpec{SpecificationSpec{0.1}}, {Vector::Zero(2)}), ArgumentError);
}

// Network matching ---------------------------------------------------------------

MlpMatchingSpec small_mlp(MlpVariant variant, Activation act) {
  MlpMatchingSpec s;
  s.variant = variant;
  s.input_dim = 4;
  s.hidden = 6;
  s.output_dim = 3;
  s.dataset_size = 8;
  s.seed = 7;
  s.activation = act;
  return s;
}

TEST(MlpMatching, TeacherIsAGlobalMinimizer) {
  for (auto variant : {MlpVariant::kSelection, MlpVariant::kLocalCurvature}) {
    const Problem p = build(ProblemSpec{small_mlp(variant, Activation::kRelu)});
    const Vector& teacher = *p.optimum.x_star;
    EXPECT_LE(p.objectives.values(teacher).cwiseAbs().maxCoeff(), 1e-20);
    EXPECT_LE(p.objectives.jacobian(teacher).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_EQ(p.match_metrics(teacher).msq, 0.0);
    EXPECT_GT(p.match_metrics(p.default_start).msq, 0.0);
    EXPECT_GT(p.match_metrics(p.default_start).mean_norm, 0.0);
  }
}

TEST(MlpMatching, DeskScaleIsBitReproducible) {
  MlpMatchingSpec s;
  s.seed = 3;
  const Problem a = build(ProblemSpec{s});
  const Problem b = build(ProblemSpec{s});
  EXPECT_EQ(a.default_start, b.default_start);
  EXPECT_EQ(a.objectives.values(a.default_start), b.objectives.values(b.default_start));
  s.seed = 4;
  EXPECT_NE(a.objectives.values(a.default_start), build(ProblemSpec{s}).objectives.values(a.default_start));
}

TEST(MlpMatching, GradientsMatchFiniteDifferencesWithSoftplus) {
  for (auto variant : {MlpVariant::kSelection, MlpVariant::kLocalCurvature}) {
    const Problem p = build(ProblemSpec{small_mlp(variant, Activation::kSoftplus)});
    std::mt19937_64 rng(33);
    std::normal_distribution<double> g(0.0, 0.1);
    const auto n = p.default_start.size();
    for (int t = 0; t < 10; ++t) {
      Vector theta = p.default_start;
      for (auto& v : theta) v += g(rng);
      for (std::size_t i = 0; i < p.objectives.size(); ++i) {
        const Objective& f = p.objectives[i];
        const Vector grad = f.gradient(theta);
        Vector fd(n);
        for (Eigen::Index j = 0; j < n; ++j) {
          const double h = 1e-6;
          Vector a = theta, b = theta;
          a[j] += h;
          b[j] -= h;
          fd[j] = (f.value(a) - f.value(b)) / (2 * h);
        }
        EXPECT_LE((grad - fd).norm(), 1e-3 * grad.norm()) << i;
      }
    }
  }
}

TEST(MlpMatching, MsqIsPositiveAwayFromTeacher) {
  const Problem p = build(ProblemSpec{small_mlp(MlpVariant::kSelection, Activation::kRelu)});
  std::mt19937_64 rng(34);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int t = 0; t < 20; ++t) {
    Vector theta = *p.optimum.x_star;
    for (auto& v : theta) v += 0.1 * g(rng);
    EXPECT_GT(p.match_metrics(theta).msq, 0.0);
  }
}

TEST(MlpMatching, SelectionObjectivesWeightOutputsDifferently) {
  const Problem p = build(ProblemSpec{small_mlp(MlpVariant::kSelection, Activation::kRelu)});
  const Vector f = p.objectives.values(p.default_start);
  // H_0 = I dominates H_1 dominates H_2 entrywise.
  EXPECT_GE(f[0], f[1]);
  EXPECT_GE(f[1], f[2]);
  EXPECT_GT(f[2], 0.0);
}

}  // namespace
}  // namespace amoo
