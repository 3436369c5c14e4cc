#pragma once

#include "amoo/core.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace amoo {

struct ProblemSpec;

/// f_1 = (1-d) x1^2 + d x2^2, f_2 = d x1^2 + (1-d) x2^2.
struct SpecificationSpec {
  double delta = 0.1;
};

/// m-1 copies of (1-d) x1^2 + d sum_{j>1} xj^2, plus |x|^2 as the last objective.
struct SelectionSpec {
  double delta = 0.1;
  std::size_t m = 3;
  std::size_t n = 2;
};

/// f_1 = sum_j (exp(xj) - xj), f_2(x) = f_1(-x).
struct LocalCurvatureSpec {
  std::size_t n = 1;
};

/// f_i(x) = (x^T H_i x)^alpha_i with H_i symmetric positive semidefinite.
struct QuadFamilySpec {
  std::vector<Matrix> hessians;
  std::vector<double> alphas;
};

enum class MlpVariant { kSelection, kLocalCurvature };
enum class Activation { kRelu, kSoftplus };

/// Student/teacher matching with two-layer networks. Desk-scale defaults;
/// paper_scale() gives the 512-hidden, 200-point configuration.
struct MlpMatchingSpec {
  MlpVariant variant = MlpVariant::kSelection;
  std::size_t input_dim = 20;
  std::size_t hidden = 32;
  std::size_t output_dim = 7;
  std::size_t dataset_size = 50;
  std::uint64_t seed = 0;
  Activation activation = Activation::kRelu;
  /// Constant added to teacher outputs to form the targets.
  double target_offset = 10.0;

  static MlpMatchingSpec paper_scale(MlpVariant variant, std::uint64_t seed);
};

/// Objective i of the base problem evaluated at x - shifts[i].
struct MisalignedSpec {
  std::shared_ptr<const ProblemSpec> base;
  std::vector<Vector> shifts;
};

struct ProblemSpec {
  std::variant<SpecificationSpec, SelectionSpec, LocalCurvatureSpec, QuadFamilySpec,
               MlpMatchingSpec, MisalignedSpec>
      kind;

  std::string name() const;
};

/// Analytic constants consumed by the theorem checks. Absent values are not
/// known in closed form (e.g. beta for non-globally-smooth objectives).
struct ProblemMeta {
  std::optional<double> beta;
  std::optional<double> mu_G;
  std::optional<double> mu_L;
  std::optional<double> M_f;
  double alignment_eps = 0.0;
};

/// Output-space error between student and teacher networks.
struct MatchMetrics {
  double msq = 0.0;        // mean squared norm
  double mean_norm = 0.0;  // mean (unsquared) norm
};

struct Problem {
  std::string name;
  ObjectiveSet objectives;
  OptimalInfo optimum;
  ProblemMeta meta;
  Vector default_start;
  std::function<MatchMetrics(const Vector&)> match_metrics;
};

Problem build(const ProblemSpec& spec);
Problem build_mlp_matching(const MlpMatchingSpec& spec);

struct MinimaxReference {
  Vector x_ref;
  double eps = 0.0;
  /// Certified lower bound on the minimax value.
  double dual_bound = 0.0;
};

/// argmin_x max_i [f_i(x) - f_star_i] via the concave dual over the simplex.
/// Needs analytic Hessians for the inner minimizations.
MinimaxReference minimax_reference(const ObjectiveSet& set, const Vector& f_star,
                                   const Vector& start);

Problem misalign(const ProblemSpec& base, const std::vector<Vector>& shifts);

/// Names accepted by the configuration file, with one-line descriptions.
std::vector<std::pair<std::string, std::string>> problem_catalog();

// Building blocks shared with tests.

/// ((x - c)^T H (x - c))^alpha, convex for H PSD and alpha >= 1.
ObjectivePtr make_quad_power(Matrix h, double alpha, Vector center = Vector());

/// f(x - shift).
ObjectivePtr make_shifted(ObjectivePtr base, Vector shift);

}  // namespace amoo
