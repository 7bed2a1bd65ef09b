#include "wsconf/weak_label.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "wsconf/error.hpp"

namespace wsconf {
namespace {

void validate_set(const ExplicitSet& s) {
  require(s.k >= 1, "explicit set: label space size must be positive");
  require(!s.labels.empty(), "explicit set: must be nonempty");
  for (std::size_t i = 0; i < s.labels.size(); ++i) {
    const Label y = s.labels[i];
    require(y >= 0 && y < s.k, "explicit set: label " + std::to_string(y) + " out of range");
    if (i > 0) require(s.labels[i - 1] < y, "explicit set: labels must be strictly increasing");
  }
}

void validate_interval(const Interval& w) {
  require(std::isfinite(w.lo) && std::isfinite(w.hi), "interval: endpoints must be finite");
  require(w.lo <= w.hi, "interval: lo must not exceed hi");
}

void validate_prefix(const RankingPrefix& w) {
  const int k = w.total_items;
  require(k >= 1, "ranking prefix: total_items must be positive");
  require(!w.prefix.empty() && static_cast<int>(w.prefix.size()) <= k,
          "ranking prefix: length must lie in [1, K]");
  std::vector<bool> seen(k, false);
  for (int item : w.prefix) {
    require(item >= 0 && item < k, "ranking prefix: item out of range");
    require(!seen[item], "ranking prefix: repeated item");
    seen[item] = true;
  }
}

void validate_matching(const PartialMatching& w) {
  const int k = w.k;
  require(k >= 1, "partial matching: K must be positive");
  require(static_cast<int>(w.pairs.size()) <= k, "partial matching: more pairs than nodes");
  std::vector<bool> left(k, false), right(k, false);
  for (auto [u, v] : w.pairs) {
    require(u >= 0 && u < k && v >= 0 && v < k, "partial matching: node out of range");
    require(!left[u] && !right[v], "partial matching: pairs must be injective");
    left[u] = right[v] = true;
  }
}

}  // namespace

bool is_permutation_of_range(const std::vector<int>& values) {
  std::vector<bool> seen(values.size(), false);
  for (int v : values) {
    if (v < 0 || v >= static_cast<int>(values.size()) || seen[v]) return false;
    seen[v] = true;
  }
  return true;
}

void validate(const WeakLabel& w) {
  std::visit(
      [](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, ExplicitSet>) validate_set(v);
        else if constexpr (std::is_same_v<T, Interval>) validate_interval(v);
        else if constexpr (std::is_same_v<T, RankingPrefix>) validate_prefix(v);
        else validate_matching(v);
      },
      w);
}

void validate(const Ranking& y) {
  require(!y.perm.empty() && is_permutation_of_range(y.perm), "ranking: not a permutation");
}

void validate(const Assignment& y) {
  require(!y.map.empty() && is_permutation_of_range(y.map), "assignment: not a bijection");
}

bool weak_contains(const WeakLabel& w, const StrongLabel& y) {
  if (const auto* s = std::get_if<ExplicitSet>(&w)) {
    const auto* label = std::get_if<Label>(&y);
    require(label != nullptr, "explicit weak set needs a class label");
    return std::binary_search(s->labels.begin(), s->labels.end(), *label);
  }
  if (const auto* iv = std::get_if<Interval>(&w)) {
    const auto* value = std::get_if<double>(&y);
    require(value != nullptr, "interval weak label needs a real response");
    return iv->contains(*value);
  }
  if (const auto* p = std::get_if<RankingPrefix>(&w)) {
    const auto* r = std::get_if<Ranking>(&y);
    require(r != nullptr, "ranking prefix needs a ranking");
    if (r->size() != p->total_items) return false;
    return std::equal(p->prefix.begin(), p->prefix.end(), r->perm.begin());
  }
  const auto& m = std::get<PartialMatching>(w);
  const auto* a = std::get_if<Assignment>(&y);
  require(a != nullptr, "partial matching needs an assignment");
  if (a->size() != m.k) return false;
  return std::all_of(m.pairs.begin(), m.pairs.end(),
                     [&](const auto& e) { return a->map[e.first] == e.second; });
}

void check_consistent(const Record& record) {
  if (!record.y) return;
  if (!weak_contains(record.weak, *record.y)) {
    fail(ErrorCode::kInconsistentData,
         "record " + std::to_string(record.id) + ": strong label lies outside its weak set");
  }
}

const char* variant_name(const WeakLabel& w) {
  static constexpr const char* kNames[] = {"set", "interval", "prefix", "matching"};
  return kNames[w.index()];
}

}  // namespace wsconf
