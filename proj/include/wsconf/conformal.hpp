#pragma once

// Split-conformal calibration from weakly labeled data and coverage
// evaluation.

#include <cstddef>
#include <limits>
#include <map>
#include <memory>
#include <span>
#include <variant>
#include <vector>

#include "wsconf/weak_label.hpp"

namespace wsconf {

/// Calibrated score cutoff. `t_hat` is +infinity when the requested coverage
/// exceeds what n calibration points can certify (order_index > n).
struct ConformalThreshold {
  double t_hat = std::numeric_limits<double>::infinity();
  double alpha = 0.1;
  std::size_t n = 0;
  std::size_t order_index = 0;

  bool is_infinite() const { return order_index > n; }
  /// Closed sub-level membership s <= t_hat, with kTolerance slack.
  bool admits(double score) const;
};

/// ceil((n + 1)(1 - alpha)), computed so that exact products such as
/// 5 * 0.75 are not pushed up by rounding.
std::size_t conformal_order_index(std::size_t n, double alpha);

/// k-th smallest score with k = ceil((n + 1)(1 - alpha)); +infinity if k > n.
ConformalThreshold conformal_threshold(std::span<const double> scores, double alpha);

/// Fully supervised baseline: the same quantile rule applied to s(X_i, Y_i).
inline ConformalThreshold fsc_threshold(std::span<const double> strong_scores, double alpha) {
  return conformal_threshold(strong_scores, alpha);
}

struct LabelSet {
  std::vector<Label> labels;  // sorted
};

template <class Config>
struct ConfigSet {
  std::vector<Config> configs;  // in nondecreasing score order
  bool truncated = false;
};

using RankingSet = ConfigSet<Ranking>;
using AssignmentSet = ConfigSet<Assignment>;

/// A realized confidence set over one of the supported label spaces.
using PredictionSet = std::variant<LabelSet, Interval, RankingSet, AssignmentSet>;

/// Cardinality, or Lebesgue length for intervals.
double set_size(const PredictionSet& set);
bool set_contains(const PredictionSet& set, const StrongLabel& y);
/// W intersects the set.
bool set_meets(const PredictionSet& set, const WeakLabel& w);

/// Size of a sub-level set as computed by an oracle. For combinatorial
/// spaces `size` is capped and `truncated` records that the cap was hit.
struct SetSize {
  double size = 0.0;
  bool truncated = false;
};

/// Nonconformity score s(x, .) bound to one instance x.
class ScoreOracle {
 public:
  virtual ~ScoreOracle() = default;

  virtual double score(const StrongLabel& y) const = 0;
  /// min over y in W of s(x, y). Throws kInvalidArgument on a weak-label
  /// variant this oracle does not understand.
  virtual double min_over(const WeakLabel& w) const = 0;
  /// max over y in W of s(x, y). Only explicit sets and intervals support it.
  virtual double max_over(const WeakLabel& w) const;

  /// {y : s(x, y) <= t}; combinatorial spaces stop after `cap` configs.
  virtual PredictionSet predict(double t, std::size_t cap) const = 0;
  /// Sizes of the sub-level sets at each threshold, in one pass where the
  /// backend allows it.
  virtual std::vector<SetSize> set_sizes(std::span<const double> thresholds,
                                         std::size_t cap) const;
};

/// Scores over a finite label space given as the vector s(x, 0..K-1).
class ExplicitScoreOracle final : public ScoreOracle {
 public:
  explicit ExplicitScoreOracle(std::vector<double> scores);

  double score(const StrongLabel& y) const override;
  double min_over(const WeakLabel& w) const override;
  double max_over(const WeakLabel& w) const override;
  PredictionSet predict(double t, std::size_t cap) const override;

  std::span<const double> scores() const { return scores_; }

 private:
  std::vector<double> scores_;
};

/// min over W of s(x, .), the calibration statistic of weak conformalization.
inline double partial_score(const ScoreOracle& oracle, const WeakLabel& w) {
  return oracle.min_over(w);
}

/// Maps a record (its features) to the score oracle for that instance.
class ScoreModel {
 public:
  virtual ~ScoreModel() = default;
  virtual std::unique_ptr<ScoreOracle> oracle(const Record& record) const = 0;
};

struct CalibrationSample {
  std::vector<std::size_t> ids;
  std::vector<double> scores;

  std::size_t size() const { return scores.size(); }
};

enum class CalibrationKind {
  kPartial,      // min over W  (weakly supervised)
  kStrong,       // s(x, Y)     (fully supervised)
  kPessimistic,  // max over W  (strongly valid from weak data)
};

/// Per-record calibration statistics. Records are checked for Y in W when
/// they carry a strong label; kStrong requires one.
CalibrationSample calibration_scores(const ScoreModel& model, std::span<const Record> records,
                                     CalibrationKind kind);

ConformalThreshold calibrate(const ScoreModel& model, std::span<const Record> records,
                             CalibrationKind kind, double alpha);

/// Weak-label calibration: partial scores min_{y in W} s(X_i, y).
inline ConformalThreshold weak_threshold(const ScoreModel& model,
                                         std::span<const Record> records, double alpha) {
  return calibrate(model, records, CalibrationKind::kPartial, alpha);
}

/// Strongly valid threshold from weak data, calibrated on max_{y in W} s.
inline ConformalThreshold pessimistic_threshold(const ScoreModel& model,
                                                std::span<const Record> records, double alpha) {
  return calibrate(model, records, CalibrationKind::kPessimistic, alpha);
}

struct CoverageReport {
  double strong_coverage = 0.0;
  double weak_coverage = 0.0;
  double avg_size = 0.0;
  /// Integer set sizes only; empty for interval-valued sets.
  std::map<std::size_t, std::size_t> size_histogram;
  std::size_t n_test = 0;
  double truncated_fraction = 0.0;
};

/// Running tally behind CoverageReport.
class CoverageAccumulator {
 public:
  explicit CoverageAccumulator(bool integer_sizes = true) : integer_sizes_(integer_sizes) {}

  /// Throws kInconsistentData if strong_hit && !weak_hit (Y in C implies
  /// W meets C whenever Y in W).
  void add(bool strong_hit, bool weak_hit, double size, bool truncated = false);
  CoverageReport report() const;

 private:
  bool integer_sizes_;
  std::size_t n_ = 0;
  std::size_t strong_ = 0;
  std::size_t weak_ = 0;
  std::size_t truncated_ = 0;
  double size_sum_ = 0.0;
  std::map<std::size_t, std::size_t> histogram_;
};

/// Strong and weak coverage of realized sets. Every record needs a strong
/// label inside its weak set; a record with Y outside W is a hard error.
CoverageReport evaluate(std::span<const PredictionSet> sets, std::span<const Record> records);

}  // namespace wsconf
