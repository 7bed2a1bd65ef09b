#pragma once

// Synthetic data generators and the small trainers the experiments use.
// Every record is generated from its own stream derive_seed(seed, id), so a
// dataset is reproducible regardless of how generation is scheduled.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "wsconf/matching.hpp"
#include "wsconf/weak_label.hpp"

namespace wsconf {

struct Dataset {
  std::vector<Record> records;
  /// Per-record latent quantities: oracle class scores (classify) or oracle
  /// item relevances (rank); empty for the other tasks.
  std::vector<std::vector<double>> oracle;
};

struct MulticlassConfig {
  std::size_t n = 10000;
  int k = 10;
  int d = 2;
  double sigma = 1.0;
  std::uint64_t seed = 0;
  /// T is drawn on [S_(L), max S] instead of [min S, max S], so that
  /// |W| >= L. L = 1 is the plain design.
  int min_weak_size = 1;
};

/// S ~ N(x.theta_y, sigma^2) per class, Y = argmin S, T uniform between the
/// L-th smallest and the largest score, W = {y : S_y <= T}. theta_y uniform
/// on the unit sphere, X ~ N(0, I_d).
Dataset gen_multiclass(const MulticlassConfig& cfg);

struct RankingSimConfig {
  std::size_t n = 10000;
  int k = 7;
  int d = 2;
  double sigma = 1.0;
  std::uint64_t seed = 0;
  double poisson_rate = 0.5;
};

/// Oracle relevances as in gen_multiclass, Y sorts them in decreasing order,
/// and the first min(K, 1 + Poisson(rate)) entries are observed.
Dataset gen_ranking(const RankingSimConfig& cfg);

struct RegressionSimConfig {
  std::size_t n = 10000;
  int d = 2;
  double mu = 0.1;
  double noise = 0.1;  // sd of Y given X
  std::uint64_t seed = 0;
};

/// Y = x.beta + N(0, noise^2), W = [Y - Z, Y + Z] with Z ~ N(mu, 1e-4);
/// negative Z is redrawn.
Dataset gen_regression(const RegressionSimConfig& cfg);

struct MatchingSimConfig {
  std::size_t n = 10000;
  int k = 6;
  double noise = 0.0;
  std::uint64_t seed = 0;
  double poisson_rate = 0.5;
};

/// Planted random assignment Y with cost 0 on its edges and 1 elsewhere,
/// plus noise * N(0, 1) on every entry. The record's x holds the K*K costs
/// row-major; W is min(K, 1 + Poisson(rate)) random pairs of Y.
Dataset gen_matching(const MatchingSimConfig& cfg);

CostMatrix record_costs(const Record& r);

// ---------------------------------------------------------------------------
// Trainers. Objectives are per-sample means plus (l2 / 2) * |params|^2 and
// are minimized by full-batch gradient descent from zero.

struct LogisticOptions {
  double step = 0.5;
  int epochs = 300;
  double l2 = 1e-4;
};

/// p(y | x) proportional to exp(theta_y . x + b_y).
struct SoftmaxModel {
  int k = 0;
  int d = 0;
  std::vector<double> params;  // k rows of (theta_y, b_y)

  std::vector<double> probs(std::span<const double> x) const;
};

double multinomial_objective(const SoftmaxModel& m, std::span<const std::vector<double>> x,
                             std::span<const Label> y, double l2);
std::vector<double> multinomial_gradient(const SoftmaxModel& m,
                                         std::span<const std::vector<double>> x,
                                         std::span<const Label> y, double l2);
SoftmaxModel train_multinomial_logistic(std::span<const std::vector<double>> x,
                                        std::span<const Label> y, int k,
                                        const LogisticOptions& options = {});

/// K independent models of P(y in W | x) = sigmoid(theta_y . x + b_y).
struct PerLabelLogisticModel {
  int k = 0;
  int d = 0;
  std::vector<double> params;

  std::vector<double> marginals(std::span<const double> x) const;
};

double per_label_objective(const PerLabelLogisticModel& m, std::span<const std::vector<double>> x,
                           std::span<const ExplicitSet> w, double l2);
std::vector<double> per_label_gradient(const PerLabelLogisticModel& m,
                                       std::span<const std::vector<double>> x,
                                       std::span<const ExplicitSet> w, double l2);
PerLabelLogisticModel train_per_label_logistic(std::span<const std::vector<double>> x,
                                               std::span<const ExplicitSet> w, int k,
                                               const LogisticOptions& options = {});

/// sum of p_k over classes with p_k >= p_y: the deterministic cumulative
/// probability score.
double cumulative_probability_score(std::span<const double> probs, Label y);

}  // namespace wsconf
