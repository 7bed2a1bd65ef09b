#pragma once

// Weak and strong label types shared by every task.
//
// Labels and items are 0-based internally. The JSON-lines format (see
// dataset_io.hpp) uses 1-based ids and converts at the boundary.

#include <cstddef>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

namespace wsconf {

using Label = int;

/// Finite label subset. `labels` is strictly increasing; `k` is the size of
/// the label space the subset lives in.
struct ExplicitSet {
  std::vector<Label> labels;
  int k = 0;
};

/// Closed real interval [lo, hi].
struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double length() const { return hi - lo; }
  bool contains(double y) const { return lo <= y && y <= hi; }
};

/// The first prefix.size() entries of a ranking of `total_items` items.
struct RankingPrefix {
  std::vector<int> prefix;
  int total_items = 0;
};

/// Injective partial map from left nodes to right nodes of a K x K bipartite
/// graph.
struct PartialMatching {
  std::vector<std::pair<int, int>> pairs;
  int k = 0;
};

using WeakLabel = std::variant<ExplicitSet, Interval, RankingPrefix, PartialMatching>;

/// perm[i] is the item at rank i.
struct Ranking {
  std::vector<int> perm;

  int size() const { return static_cast<int>(perm.size()); }
  bool operator==(const Ranking&) const = default;
  auto operator<=>(const Ranking&) const = default;
};

/// map[u] is the right node matched to left node u.
struct Assignment {
  std::vector<int> map;

  int size() const { return static_cast<int>(map.size()); }
  bool operator==(const Assignment&) const = default;
  auto operator<=>(const Assignment&) const = default;
};

/// Ground-truth label: class id, real response, ranking, or perfect matching.
using StrongLabel = std::variant<Label, double, Ranking, Assignment>;

/// One observation: features, weak supervision and (when known) the strong
/// label. `id` is the record's position in its dataset; it keys any
/// per-record randomization.
struct Record {
  std::size_t id = 0;
  std::vector<double> x;
  WeakLabel weak;
  std::optional<StrongLabel> y;
};

/// Throws kInvalidArgument when the weak label breaks its variant invariants.
void validate(const WeakLabel& w);
void validate(const Ranking& y);
void validate(const Assignment& y);

bool is_permutation_of_range(const std::vector<int>& values);

/// y in W. Throws kInvalidArgument on a variant mismatch.
bool weak_contains(const WeakLabel& w, const StrongLabel& y);

/// Throws kInconsistentData when the record carries a strong label outside
/// its weak set.
void check_consistent(const Record& record);

const char* variant_name(const WeakLabel& w);

}  // namespace wsconf
