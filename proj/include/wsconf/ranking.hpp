#pragma once

// Rankings of K items scored against a relevance vector: pairwise
// disagreement scores, prefix weak labels, the ranking backend for the
// M-best engine, and a ListNet trainer.

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "wsconf/conformal.hpp"
#include "wsconf/mbest.hpp"
#include "wsconf/weak_label.hpp"

namespace wsconf {

inline constexpr int kMaxRankingItems = 64;

/// Pairwise penalty psi(a, b) for an item of relevance a ranked above an
/// item of relevance b.
struct PsiSpec {
  enum class Kind { kHinge, kExpWeighted };
  Kind kind = Kind::kHinge;
  double c = 0.0;

  static PsiSpec hinge() { return {}; }
  static PsiSpec exp_weighted(double c);

  /// (b - a)_+ or exp(-c a) (b - a)_+.
  double operator()(double a, double b) const;
};

/// sum over i < j of psi(r[y(i)], r[y(j)]).
double rank_score(std::span<const double> r, const Ranking& y, const PsiSpec& psi);

/// Completes the prefix with the remaining items by relevance (descending,
/// ties by id) and scores the completion: the minimum over all compatible
/// rankings.
Ranking complete_prefix(std::span<const double> r, const RankingPrefix& prefix);
double partial_rank_score(std::span<const double> r, const RankingPrefix& prefix,
                          const PsiSpec& psi);

/// Items by relevance descending, ties by item id.
Ranking best_ranking(std::span<const double> r);

/// Ordered-pair constraints of a cell. Bit b of before[a] means item a must
/// be ranked above item b.
struct RankingConstraints {
  std::vector<std::uint64_t> before;

  bool requires_before(int a, int b) const { return (before[a] >> b) & 1U; }
  void add(int a, int b);
  bool empty() const;
};

/// Ranking space as a partition backend.
class RankingProblem {
 public:
  using Config = Ranking;
  using Constraints = RankingConstraints;

  RankingProblem(std::vector<double> relevance, PsiSpec psi);

  int k() const { return static_cast<int>(r_.size()); }
  std::span<const double> relevance() const { return r_; }
  const PsiSpec& psi() const { return psi_; }

  Constraints root() const;
  /// Best ranking of an unconstrained cell.
  Config initial_best() const { return best_ranking(r_); }
  /// Throws kInvalidArgument when called with constraints: later cells
  /// carry their best from the split that created them.
  Config best_in_cell(const Constraints& c) const;

  double score(const Config& y) const { return rank_score(r_, y, psi_); }
  /// Admissible adjacent transposition of `best` with the smallest score;
  /// ties go to the smallest position.
  std::optional<Config> second_best(const Constraints& c, const Config& best) const;
  /// Position i of the adjacent transposition and its score change, or
  /// nullopt if every swap is blocked.
  std::optional<std::pair<int, double>> second_best_swap(const Constraints& c,
                                                         const Config& best) const;
  /// Complementary halves: best(i) above best(i+1), and the reverse.
  std::pair<Constraints, Constraints> partition(const Constraints& c, const Config& best,
                                                const Config& second) const;
  bool admits(const Constraints& c, const Config& y) const;

 private:
  std::vector<double> r_;
  PsiSpec psi_;
};

/// Relevance-driven score oracle for one instance.
class RankingScoreOracle final : public ScoreOracle {
 public:
  RankingScoreOracle(std::vector<double> relevance, PsiSpec psi);

  double score(const StrongLabel& y) const override;
  double min_over(const WeakLabel& w) const override;
  PredictionSet predict(double t, std::size_t cap) const override;
  std::vector<SetSize> set_sizes(std::span<const double> thresholds,
                                 std::size_t cap) const override;

  const RankingProblem& problem() const { return problem_; }

 private:
  RankingProblem problem_;
};

/// min-max rescaling to [0, 1]; a constant vector is an error.
std::vector<double> rescale_relevances(std::span<const double> raw);

/// Per-item linear relevance r_k(x) = w_k . x + b_k.
struct ListNetModel {
  int k = 0;
  int d = 0;
  std::vector<double> params;  // k rows of (w_k, b_k), row-major

  std::vector<double> relevance(std::span<const double> x) const;
};

struct ListNetOptions {
  double step = 0.1;
  int epochs = 200;
};

struct ListNetFit {
  ListNetModel model;
  std::vector<double> loss_trace;  // loss before each epoch, then final
};

/// Proxy relevance R_y = K - rank(y), rank 1-based.
std::vector<double> proxy_relevance(const Ranking& y);

/// Summed top-1 cross entropy over the samples.
double listnet_loss(const ListNetModel& model, std::span<const std::vector<double>> x,
                    std::span<const Ranking> y);
/// Gradient of listnet_loss with respect to model.params.
std::vector<double> listnet_gradient(const ListNetModel& model,
                                     std::span<const std::vector<double>> x,
                                     std::span<const Ranking> y);

/// Full-batch gradient descent from zero weights; each step moves along
/// the mean per-sample gradient.
ListNetFit listnet_train(std::span<const std::vector<double>> x, std::span<const Ranking> y,
                         const ListNetOptions& options = {});

}  // namespace wsconf
