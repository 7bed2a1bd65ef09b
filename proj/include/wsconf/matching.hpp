#pragma once

// Perfect matchings of a K x K bipartite graph: min-cost assignment, matching
// scores, partial-matching scores and the matching backend for the M-best
// engine.

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "wsconf/conformal.hpp"
#include "wsconf/mbest.hpp"
#include "wsconf/weak_label.hpp"

namespace wsconf {

/// Square matrix of edge costs; entry (u, v) is the cost of matching left
/// node u to right node v.
class CostMatrix {
 public:
  CostMatrix() = default;
  CostMatrix(int k, std::vector<double> values);
  static CostMatrix from_rows(const std::vector<std::vector<double>>& rows);

  int k() const { return k_; }
  double operator()(int u, int v) const { return values_[static_cast<std::size_t>(u) * k_ + v]; }
  const std::vector<double>& values() const { return values_; }

 private:
  int k_ = 0;
  std::vector<double> values_;
};

/// Pads a rows x cols matrix to a square one with `dummy` on the added
/// (virtual) rows or columns.
CostMatrix pad_cost_matrix(const std::vector<std::vector<double>>& rows, double dummy = 0.0);

/// Forced and forbidden edges of a cell.
struct MatchingConstraints {
  int k = 0;
  std::vector<int> forced;         // forced[u] = v, or -1
  std::vector<char> forbidden;     // k * k flags

  explicit MatchingConstraints(int k = 0)
      : k(k), forced(k, -1), forbidden(static_cast<std::size_t>(k) * k, 0) {}

  bool is_forbidden(int u, int v) const { return forbidden[static_cast<std::size_t>(u) * k + v]; }
  void force(int u, int v);
  void forbid(int u, int v);
  /// y honours every forced and forbidden edge.
  bool admits(const Assignment& y) const;
  int forced_count() const;
};

struct MatchingSolution {
  Assignment assignment;
  double cost = 0.0;
};

/// O(K^3) potentials-based Hungarian algorithm. Forbidden edges carry a
/// sentinel cost large enough that any feasible matching beats every
/// infeasible one; nullopt when the constraints admit no perfect matching.
std::optional<MatchingSolution> hungarian(const CostMatrix& costs,
                                          const MatchingConstraints& constraints);
std::optional<MatchingSolution> hungarian(const CostMatrix& costs);

/// sum over u of costs(u, y(u)).
double matching_score(const CostMatrix& costs, const Assignment& y);

/// Fixed pairs plus the min-cost completion on the remaining rows and
/// columns.
double partial_matching_score(const CostMatrix& costs, const PartialMatching& w);

/// matching_score minus the unconstrained minimum, so the minimizer scores 0.
double translated_score(const CostMatrix& costs, const Assignment& y);

/// Matching space as a partition backend. Scores are translated by the
/// global minimum when `translated` is set; the order is unchanged.
class MatchingProblem {
 public:
  using Config = Assignment;
  using Constraints = MatchingConstraints;

  explicit MatchingProblem(CostMatrix costs, bool translated = false);

  const CostMatrix& costs() const { return costs_; }
  double minimum() const { return minimum_; }

  Constraints root() const { return MatchingConstraints(costs_.k()); }
  Config initial_best() const { return best_; }
  double score(const Config& y) const;
  /// Best matching in the cell that differs from `best` on at least one
  /// non-forced edge: the minimum over edges e of best of the cell with e
  /// forbidden. Ties go to the smallest left node.
  std::optional<Config> second_best(const Constraints& c, const Config& best) const;
  /// Splits on the smallest u with best(u) != second(u): the first half
  /// forces (u, best(u)), the second forbids it.
  std::pair<Constraints, Constraints> partition(const Constraints& c, const Config& best,
                                                const Config& second) const;
  bool admits(const Constraints& c, const Config& y) const { return c.admits(y); }

 private:
  CostMatrix costs_;
  bool translated_;
  Assignment best_;
  double minimum_ = 0.0;
};

/// Translated matching score oracle for one instance.
class MatchingScoreOracle final : public ScoreOracle {
 public:
  explicit MatchingScoreOracle(CostMatrix costs);

  double score(const StrongLabel& y) const override;
  double min_over(const WeakLabel& w) const override;
  PredictionSet predict(double t, std::size_t cap) const override;
  std::vector<SetSize> set_sizes(std::span<const double> thresholds,
                                 std::size_t cap) const override;

  const MatchingProblem& problem() const { return problem_; }

 private:
  MatchingProblem problem_;
};

}  // namespace wsconf
