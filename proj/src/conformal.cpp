#include "wsconf/conformal.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "wsconf/error.hpp"

namespace wsconf {

bool ConformalThreshold::admits(double score) const {
  if (is_infinite()) return true;
  return score <= t_hat + kTolerance;
}

std::size_t conformal_order_index(std::size_t n, double alpha) {
  const double v = static_cast<double>(n + 1) * (1.0 - alpha);
  const double nearest = std::round(v);
  double k = std::abs(v - nearest) <= 1e-9 * std::max(1.0, v) ? nearest : std::ceil(v);
  return static_cast<std::size_t>(std::max(1.0, k));
}

ConformalThreshold conformal_threshold(std::span<const double> scores, double alpha) {
  require(!scores.empty(), "conformal threshold: empty score list");
  require(alpha > 0.0 && alpha < 1.0, "conformal threshold: alpha must lie in (0, 1)");
  for (double s : scores) require(std::isfinite(s), "conformal threshold: scores must be finite");

  ConformalThreshold t;
  t.alpha = alpha;
  t.n = scores.size();
  t.order_index = conformal_order_index(t.n, alpha);
  if (t.order_index > t.n) return t;

  std::vector<double> sorted(scores.begin(), scores.end());
  auto kth = sorted.begin() + static_cast<std::ptrdiff_t>(t.order_index - 1);
  std::nth_element(sorted.begin(), kth, sorted.end());
  t.t_hat = *kth;
  return t;
}

// ---------------------------------------------------------------------------
// Prediction sets

double set_size(const PredictionSet& set) {
  return std::visit(
      [](const auto& s) -> double {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, LabelSet>) return static_cast<double>(s.labels.size());
        else if constexpr (std::is_same_v<T, Interval>) return s.length();
        else return static_cast<double>(s.configs.size());
      },
      set);
}

bool set_contains(const PredictionSet& set, const StrongLabel& y) {
  if (const auto* s = std::get_if<LabelSet>(&set)) {
    const auto* label = std::get_if<Label>(&y);
    require(label != nullptr, "label set membership needs a class label");
    return std::binary_search(s->labels.begin(), s->labels.end(), *label);
  }
  if (const auto* iv = std::get_if<Interval>(&set)) {
    const auto* value = std::get_if<double>(&y);
    require(value != nullptr, "interval membership needs a real response");
    return iv->contains(*value);
  }
  if (const auto* rs = std::get_if<RankingSet>(&set)) {
    const auto* r = std::get_if<Ranking>(&y);
    require(r != nullptr, "ranking set membership needs a ranking");
    return std::find(rs->configs.begin(), rs->configs.end(), *r) != rs->configs.end();
  }
  const auto& as = std::get<AssignmentSet>(set);
  const auto* a = std::get_if<Assignment>(&y);
  require(a != nullptr, "assignment set membership needs an assignment");
  return std::find(as.configs.begin(), as.configs.end(), *a) != as.configs.end();
}

bool set_meets(const PredictionSet& set, const WeakLabel& w) {
  if (const auto* s = std::get_if<LabelSet>(&set)) {
    const auto* ws = std::get_if<ExplicitSet>(&w);
    require(ws != nullptr, "label set needs an explicit weak set");
    return std::any_of(s->labels.begin(), s->labels.end(), [&](Label y) {
      return std::binary_search(ws->labels.begin(), ws->labels.end(), y);
    });
  }
  if (const auto* iv = std::get_if<Interval>(&set)) {
    const auto* wi = std::get_if<Interval>(&w);
    require(wi != nullptr, "interval set needs an interval weak label");
    return iv->lo <= wi->hi && wi->lo <= iv->hi;
  }
  if (const auto* rs = std::get_if<RankingSet>(&set)) {
    return std::any_of(rs->configs.begin(), rs->configs.end(),
                       [&](const Ranking& r) { return weak_contains(w, r); });
  }
  const auto& as = std::get<AssignmentSet>(set);
  return std::any_of(as.configs.begin(), as.configs.end(),
                     [&](const Assignment& a) { return weak_contains(w, a); });
}

// ---------------------------------------------------------------------------
// Oracles

double ScoreOracle::max_over(const WeakLabel& w) const {
  fail(ErrorCode::kUnsupported,
       std::string("maximum score over a weak label of type '") + variant_name(w) +
           "' is not supported");
}

std::vector<SetSize> ScoreOracle::set_sizes(std::span<const double> thresholds,
                                            std::size_t cap) const {
  std::vector<SetSize> out;
  out.reserve(thresholds.size());
  for (double t : thresholds) {
    PredictionSet set = predict(t, cap);
    bool truncated = false;
    if (const auto* rs = std::get_if<RankingSet>(&set)) truncated = rs->truncated;
    if (const auto* as = std::get_if<AssignmentSet>(&set)) truncated = as->truncated;
    out.push_back({set_size(set), truncated});
  }
  return out;
}

ExplicitScoreOracle::ExplicitScoreOracle(std::vector<double> scores) : scores_(std::move(scores)) {
  require(!scores_.empty(), "explicit scores: empty label space");
}

double ExplicitScoreOracle::score(const StrongLabel& y) const {
  const auto* label = std::get_if<Label>(&y);
  require(label != nullptr, "explicit scores need a class label");
  require(*label >= 0 && *label < static_cast<int>(scores_.size()), "label out of range");
  return scores_[*label];
}

namespace {

const ExplicitSet& as_explicit(const WeakLabel& w, std::size_t k) {
  const auto* s = std::get_if<ExplicitSet>(&w);
  if (s == nullptr) {
    fail(ErrorCode::kInvalidArgument,
         std::string("explicit score oracle cannot handle weak label of type '") +
             variant_name(w) + "'");
  }
  require(static_cast<std::size_t>(s->k) == k, "weak set label space does not match scores");
  require(!s->labels.empty(), "weak set is empty");
  return *s;
}

}  // namespace

double ExplicitScoreOracle::min_over(const WeakLabel& w) const {
  const auto& s = as_explicit(w, scores_.size());
  double best = std::numeric_limits<double>::infinity();
  for (Label y : s.labels) best = std::min(best, scores_.at(y));
  return best;
}

double ExplicitScoreOracle::max_over(const WeakLabel& w) const {
  const auto& s = as_explicit(w, scores_.size());
  double worst = -std::numeric_limits<double>::infinity();
  for (Label y : s.labels) worst = std::max(worst, scores_.at(y));
  return worst;
}

PredictionSet ExplicitScoreOracle::predict(double t, std::size_t /*cap*/) const {
  LabelSet set;
  for (std::size_t y = 0; y < scores_.size(); ++y) {
    if (scores_[y] <= t + kTolerance) set.labels.push_back(static_cast<Label>(y));
  }
  return set;
}

// ---------------------------------------------------------------------------
// Calibration

CalibrationSample calibration_scores(const ScoreModel& model, std::span<const Record> records,
                                     CalibrationKind kind) {
  CalibrationSample sample;
  sample.ids.reserve(records.size());
  sample.scores.reserve(records.size());
  for (const Record& r : records) {
    check_consistent(r);
    const auto oracle = model.oracle(r);
    double s = 0.0;
    switch (kind) {
      case CalibrationKind::kPartial:
        s = oracle->min_over(r.weak);
        break;
      case CalibrationKind::kPessimistic:
        s = oracle->max_over(r.weak);
        break;
      case CalibrationKind::kStrong:
        if (!r.y) {
          fail(ErrorCode::kInvalidArgument,
               "record " + std::to_string(r.id) + ": strong calibration needs a strong label");
        }
        s = oracle->score(*r.y);
        break;
    }
    sample.ids.push_back(r.id);
    sample.scores.push_back(s);
  }
  return sample;
}

ConformalThreshold calibrate(const ScoreModel& model, std::span<const Record> records,
                             CalibrationKind kind, double alpha) {
  const CalibrationSample sample = calibration_scores(model, records, kind);
  return conformal_threshold(sample.scores, alpha);
}

// ---------------------------------------------------------------------------
// Coverage

void CoverageAccumulator::add(bool strong_hit, bool weak_hit, double size, bool truncated) {
  if (strong_hit && !weak_hit) {
    fail(ErrorCode::kInconsistentData, "set covers the strong label but misses the weak set");
  }
  ++n_;
  strong_ += strong_hit ? 1 : 0;
  weak_ += weak_hit ? 1 : 0;
  truncated_ += truncated ? 1 : 0;
  size_sum_ += size;
  if (integer_sizes_ && std::isfinite(size)) {
    ++histogram_[static_cast<std::size_t>(std::llround(size))];
  }
}

CoverageReport CoverageAccumulator::report() const {
  CoverageReport r;
  r.n_test = n_;
  if (n_ == 0) return r;
  const double n = static_cast<double>(n_);
  r.strong_coverage = static_cast<double>(strong_) / n;
  r.weak_coverage = static_cast<double>(weak_) / n;
  r.avg_size = size_sum_ / n;
  r.truncated_fraction = static_cast<double>(truncated_) / n;
  if (integer_sizes_) r.size_histogram = histogram_;
  return r;
}

CoverageReport evaluate(std::span<const PredictionSet> sets, std::span<const Record> records) {
  require(sets.size() == records.size(), "evaluate: one prediction set per record required");
  const bool integer_sizes =
      sets.empty() || !std::holds_alternative<Interval>(sets.front());
  CoverageAccumulator acc(integer_sizes);
  for (std::size_t i = 0; i < sets.size(); ++i) {
    const Record& r = records[i];
    if (!r.y) {
      fail(ErrorCode::kInvalidArgument,
           "record " + std::to_string(r.id) + ": evaluation needs a strong label");
    }
    check_consistent(r);
    bool truncated = false;
    if (const auto* rs = std::get_if<RankingSet>(&sets[i])) truncated = rs->truncated;
    if (const auto* as = std::get_if<AssignmentSet>(&sets[i])) truncated = as->truncated;
    acc.add(set_contains(sets[i], *r.y), set_meets(sets[i], r.weak), set_size(sets[i]), truncated);
  }
  return acc.report();
}

}  // namespace wsconf
