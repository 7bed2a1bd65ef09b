#pragma once

// Sequential partitioning: the M lowest-score configurations of a
// combinatorial space, threshold-driven enumeration by doubling, and
// rank-based conformalization.
//
// A backend describes cells of the space by a constraint payload and
// provides:
//   Constraints root() const;
//   Config initial_best() const;                       best of root()
//   double score(const Config&) const;
//   std::optional<Config> second_best(const Constraints&, const Config& best) const;
//   std::pair<Constraints, Constraints> partition(const Constraints&,
//       const Config& best, const Config& second) const;
//   bool admits(const Constraints&, const Config&) const;
// partition must split the cell into two disjoint halves, the first holding
// `best` and the second holding `second`; the engine checks this on every
// split and throws kInternal otherwise.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <queue>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "wsconf/conformal.hpp"
#include "wsconf/error.hpp"

namespace wsconf {

inline constexpr std::size_t kDefaultMaxConfigs = 100000;

template <class B>
concept PartitionBackend = requires(const B& b, const typename B::Constraints& c,
                                    const typename B::Config& y) {
  { b.root() } -> std::convertible_to<typename B::Constraints>;
  { b.initial_best() } -> std::convertible_to<typename B::Config>;
  { b.score(y) } -> std::convertible_to<double>;
  { b.second_best(c, y) } -> std::convertible_to<std::optional<typename B::Config>>;
  { b.partition(c, y, y) } ->
      std::convertible_to<std::pair<typename B::Constraints, typename B::Constraints>>;
  { b.admits(c, y) } -> std::convertible_to<bool>;
};

template <class Config>
struct MBestResult {
  std::vector<Config> configs;
  std::vector<double> scores;  // nondecreasing
  bool truncated = false;

  std::size_t size() const { return configs.size(); }
};

template <PartitionBackend B>
class MBestEngine {
 public:
  using Config = typename B::Config;
  using Constraints = typename B::Constraints;

  struct Cell {
    Constraints constraints;
    Config best;
    double best_score = 0.0;
    std::optional<Config> second;
    double second_score = std::numeric_limits<double>::infinity();
    std::size_t index = 0;  // creation order; the first half of a split keeps it
  };

  using Observer = std::function<void(const MBestEngine&)>;

  explicit MBestEngine(const B& backend) : backend_(backend) {
    Cell root;
    root.constraints = backend_.root();
    root.best = backend_.initial_best();
    root.best_score = backend_.score(root.best);
    root.index = next_index_++;
    configs_.push_back(root.best);
    scores_.push_back(root.best_score);
    refresh_second(root);
    push(std::move(root));
  }

  void set_observer(Observer observer) { observer_ = std::move(observer); }

  const std::vector<Config>& configs() const { return configs_; }
  const std::vector<double>& scores() const { return scores_; }
  const std::vector<Cell>& cells() const { return cells_; }
  std::size_t size() const { return configs_.size(); }
  /// No cell has a second-best left: the whole space has been produced.
  bool exhausted() const { return frontier_.empty(); }

  /// Produces the next configuration. Returns false once exhausted.
  bool next() {
    if (frontier_.empty()) return false;
    const std::size_t slot = frontier_.top().slot;
    frontier_.pop();

    Cell& cell = cells_[slot];
    Config best = cell.best;
    const double best_score = cell.best_score;
    Config second = *cell.second;
    const double second_score = cell.second_score;
    const std::size_t keep_index = cell.index;

    auto halves = backend_.partition(cell.constraints, best, second);
    validate(halves.first, halves.second, best, second);

    Cell first{std::move(halves.first), std::move(best), best_score, std::nullopt,
               std::numeric_limits<double>::infinity(), keep_index};
    Cell other{std::move(halves.second), second, second_score, std::nullopt,
               std::numeric_limits<double>::infinity(), next_index_++};
    refresh_second(first);
    refresh_second(other);

    configs_.push_back(std::move(second));
    scores_.push_back(second_score);

    cells_[slot] = std::move(first);
    if (cells_[slot].second) frontier_.push({cells_[slot].second_score, cells_[slot].index, slot});
    push(std::move(other));

    if (observer_) observer_(*this);
    return true;
  }

  /// Grows the output to at least m configurations unless the space runs
  /// out first. Returns size() >= m.
  bool grow(std::size_t m) {
    while (configs_.size() < m && next()) {
    }
    return configs_.size() >= m;
  }

 private:
  struct Entry {
    double score;
    std::size_t index;
    std::size_t slot;
    bool operator>(const Entry& o) const {
      if (score != o.score) return score > o.score;
      return index > o.index;
    }
  };

  void refresh_second(Cell& cell) const {
    cell.second = backend_.second_best(cell.constraints, cell.best);
    if (!cell.second) return;
    cell.second_score = backend_.score(*cell.second);
    if (cell.second_score < cell.best_score - kTolerance) {
      fail(ErrorCode::kInternal, "second-best configuration scores below the cell best");
    }
  }

  void push(Cell cell) {
    const std::size_t slot = cells_.size();
    const bool live = cell.second.has_value();
    const double s = cell.second_score;
    const std::size_t index = cell.index;
    cells_.push_back(std::move(cell));
    if (live) frontier_.push({s, index, slot});
  }

  void validate(const Constraints& a, const Constraints& b, const Config& best,
                const Config& second) const {
    if (!backend_.admits(a, best) || !backend_.admits(b, second) || backend_.admits(a, second) ||
        backend_.admits(b, best)) {
      fail(ErrorCode::kInternal,
           "invalid partition: a half excludes its designated configuration or the halves "
           "overlap");
    }
  }

  const B& backend_;
  std::vector<Cell> cells_;
  std::vector<Config> configs_;
  std::vector<double> scores_;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> frontier_;
  std::size_t next_index_ = 0;
  Observer observer_;
};

/// The M lowest-score configurations in nondecreasing score order; all of
/// them if the space holds fewer than M.
template <PartitionBackend B>
MBestResult<typename B::Config> m_best(const B& backend, std::size_t m) {
  require(m >= 1, "m_best: M must be at least 1");
  MBestEngine<B> engine(backend);
  engine.grow(m);
  MBestResult<typename B::Config> out;
  const std::size_t count = std::min(m, engine.size());
  out.configs.assign(engine.configs().begin(), engine.configs().begin() + count);
  out.scores.assign(engine.scores().begin(), engine.scores().begin() + count);
  return out;
}

/// Every configuration with score <= threshold, found by doubling M until
/// the last score exceeds the threshold. At most `cap` configurations are
/// returned; `truncated` is set when more than `cap` qualify.
template <PartitionBackend B>
MBestResult<typename B::Config> enumerate_until(MBestEngine<B>& engine, double threshold,
                                                std::size_t cap = kDefaultMaxConfigs) {
  require(cap >= 1, "enumerate_until: cap must be at least 1");
  require(!std::isnan(threshold), "enumerate_until: threshold is NaN");
  for (std::size_t m = 1;; m = std::min(2 * m, cap + 1)) {
    const bool full = engine.grow(m);
    const bool passed = engine.scores().back() > threshold + kTolerance;
    if (!full || passed || m == cap + 1) break;
  }
  MBestResult<typename B::Config> out;
  const auto& scores = engine.scores();
  std::size_t count = 0;
  while (count < scores.size() && scores[count] <= threshold + kTolerance) ++count;
  if (count > cap) {
    count = cap;
    out.truncated = true;
  }
  out.configs.assign(engine.configs().begin(), engine.configs().begin() + count);
  out.scores.assign(scores.begin(), scores.begin() + count);
  return out;
}

template <PartitionBackend B>
MBestResult<typename B::Config> enumerate_until(const B& backend, double threshold,
                                                std::size_t cap = kDefaultMaxConfigs) {
  MBestEngine<B> engine(backend);
  return enumerate_until(engine, threshold, cap);
}

/// Sizes of the sub-level sets {y : s(y) <= t} for each threshold, from a
/// single enumeration up to the largest one. Sizes are capped at `cap`.
template <PartitionBackend B>
std::vector<SetSize> sublevel_sizes(const B& backend, std::span<const double> thresholds,
                                    std::size_t cap = kDefaultMaxConfigs) {
  std::vector<SetSize> out;
  if (thresholds.empty()) return out;
  const double top = *std::max_element(thresholds.begin(), thresholds.end());
  MBestEngine<B> engine(backend);
  enumerate_until(engine, top, cap);
  const auto& scores = engine.scores();
  for (double t : thresholds) {
    std::size_t count = 0;
    while (count < scores.size() && scores[count] <= t + kTolerance) ++count;
    const bool truncated = count > cap;
    out.push_back({static_cast<double>(std::min(count, cap)), truncated});
  }
  return out;
}

/// 1-based rank, in score order, of the first configuration accepted by
/// `compatible`. Throws kLimitExceeded if none is found within `cap`
/// configurations, kInconsistentData if the space runs out.
template <PartitionBackend B, class Pred>
std::size_t compatible_rank(const B& backend, Pred&& compatible,
                            std::size_t cap = kDefaultMaxConfigs) {
  MBestEngine<B> engine(backend);
  std::size_t scanned = 0;
  for (std::size_t m = 1;; m = std::min(2 * m, cap)) {
    engine.grow(m);
    for (; scanned < engine.size() && scanned < cap; ++scanned) {
      if (compatible(engine.configs()[scanned])) return scanned + 1;
    }
    if (scanned >= cap) {
      fail(ErrorCode::kLimitExceeded,
           "no compatible configuration among the first " + std::to_string(cap));
    }
    if (engine.exhausted()) {
      fail(ErrorCode::kInconsistentData, "no configuration is compatible with the weak label");
    }
  }
}

/// Q_hat from calibration ranks M_i and predictor offsets M_hat(X_i): the
/// ceil((n + 1)(1 - alpha))-th smallest M_i - M_hat(X_i). `infinite` is set
/// when that order index exceeds n (the full space is required).
struct RankThreshold {
  std::int64_t q_hat = 0;
  bool infinite = false;
  std::size_t order_index = 0;

  /// Size of the prediction set for an instance with offset M_hat(x).
  std::size_t set_size(std::int64_t offset) const {
    if (infinite) return std::numeric_limits<std::size_t>::max();
    return static_cast<std::size_t>(std::max<std::int64_t>(0, offset + q_hat));
  }
};

RankThreshold rank_conformalize(std::span<const std::int64_t> ranks,
                                std::span<const std::int64_t> offsets, double alpha);

}  // namespace wsconf
