#include "wsconf/matching.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "wsconf/error.hpp"

namespace wsconf {

CostMatrix::CostMatrix(int k, std::vector<double> values) : k_(k), values_(std::move(values)) {
  require(k >= 1, "cost matrix: K must be positive");
  require(values_.size() == static_cast<std::size_t>(k) * k, "cost matrix: expected K*K entries");
  for (double c : values_) require(std::isfinite(c), "cost matrix: entries must be finite");
}

CostMatrix CostMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
  const int k = static_cast<int>(rows.size());
  require(k >= 1, "cost matrix: no rows");
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(k) * k);
  for (const auto& row : rows) {
    require(static_cast<int>(row.size()) == k, "cost matrix: must be square");
    values.insert(values.end(), row.begin(), row.end());
  }
  return CostMatrix(k, std::move(values));
}

CostMatrix pad_cost_matrix(const std::vector<std::vector<double>>& rows, double dummy) {
  require(!rows.empty(), "cost matrix: no rows");
  const std::size_t cols = rows.front().size();
  require(cols >= 1, "cost matrix: no columns");
  for (const auto& row : rows) require(row.size() == cols, "cost matrix: ragged rows");
  require(std::isfinite(dummy), "cost matrix: dummy cost must be finite");
  const int k = static_cast<int>(std::max(rows.size(), cols));
  std::vector<double> values(static_cast<std::size_t>(k) * k, dummy);
  for (std::size_t u = 0; u < rows.size(); ++u) {
    std::copy(rows[u].begin(), rows[u].end(), values.begin() + u * k);
  }
  return CostMatrix(k, std::move(values));
}

// ---------------------------------------------------------------------------

void MatchingConstraints::force(int u, int v) {
  require(u >= 0 && u < k && v >= 0 && v < k, "matching constraint: node out of range");
  require(forced[u] == -1 || forced[u] == v, "matching constraint: left node already forced");
  for (int w = 0; w < k; ++w) {
    require(w == u || forced[w] != v, "matching constraint: right node already forced");
  }
  require(!is_forbidden(u, v), "matching constraint: edge is forbidden");
  forced[u] = v;
}

void MatchingConstraints::forbid(int u, int v) {
  require(u >= 0 && u < k && v >= 0 && v < k, "matching constraint: node out of range");
  require(forced[u] != v, "matching constraint: edge is forced");
  forbidden[static_cast<std::size_t>(u) * k + v] = 1;
}

bool MatchingConstraints::admits(const Assignment& y) const {
  if (y.size() != k) return false;
  for (int u = 0; u < k; ++u) {
    if (forced[u] >= 0 && y.map[u] != forced[u]) return false;
    if (is_forbidden(u, y.map[u])) return false;
  }
  return true;
}

int MatchingConstraints::forced_count() const {
  return static_cast<int>(std::count_if(forced.begin(), forced.end(), [](int v) { return v >= 0; }));
}

// ---------------------------------------------------------------------------

namespace {

// Hungarian algorithm on a dense n x n matrix (row-major); returns row -> col.
std::vector<int> solve_dense(int n, const std::vector<double>& a) {
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> pu(n + 1, 0.0), pv(n + 1, 0.0);
  std::vector<int> match(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    match[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = match[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = a[static_cast<std::size_t>(i0 - 1) * n + (j - 1)] - pu[i0] - pv[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          pu[match[j]] += delta;
          pv[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const int j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> row_to_col(n, -1);
  for (int j = 1; j <= n; ++j) row_to_col[match[j] - 1] = j - 1;
  return row_to_col;
}

}  // namespace

std::optional<MatchingSolution> hungarian(const CostMatrix& costs,
                                          const MatchingConstraints& constraints) {
  const int k = costs.k();
  require(constraints.k == k, "hungarian: constraint size differs from cost matrix");
  const auto [lo, hi] = std::minmax_element(costs.values().begin(), costs.values().end());
  const double big = *hi + static_cast<double>(k) * (*hi - *lo + 1.0);

  std::vector<int> column_owner(k, -1);
  for (int u = 0; u < k; ++u) {
    const int v = constraints.forced[u];
    if (v < 0) continue;
    if (column_owner[v] >= 0) return std::nullopt;
    column_owner[v] = u;
  }
  std::vector<double> a(costs.values());
  for (int u = 0; u < k; ++u) {
    for (int v = 0; v < k; ++v) {
      const bool blocked = constraints.is_forbidden(u, v) ||
                           (constraints.forced[u] >= 0 && constraints.forced[u] != v) ||
                           (column_owner[v] >= 0 && column_owner[v] != u);
      if (blocked) a[static_cast<std::size_t>(u) * k + v] = big;
    }
  }
  MatchingSolution sol;
  sol.assignment.map = solve_dense(k, a);
  if (!constraints.admits(sol.assignment)) return std::nullopt;
  sol.cost = matching_score(costs, sol.assignment);
  return sol;
}

std::optional<MatchingSolution> hungarian(const CostMatrix& costs) {
  return hungarian(costs, MatchingConstraints(costs.k()));
}

double matching_score(const CostMatrix& costs, const Assignment& y) {
  require(y.size() == costs.k(), "matching score: assignment size differs from cost matrix");
  double total = 0.0;
  for (int u = 0; u < y.size(); ++u) total += costs(u, y.map[u]);
  return total;
}

double partial_matching_score(const CostMatrix& costs, const PartialMatching& w) {
  const int k = costs.k();
  require(w.k == k, "partial matching: node count differs from cost matrix");
  validate(WeakLabel{w});
  std::vector<char> row_used(k, 0), col_used(k, 0);
  double fixed = 0.0;
  for (auto [u, v] : w.pairs) {
    fixed += costs(u, v);
    row_used[u] = col_used[v] = 1;
  }
  std::vector<int> rows, cols;
  for (int i = 0; i < k; ++i) {
    if (!row_used[i]) rows.push_back(i);
    if (!col_used[i]) cols.push_back(i);
  }
  const int n = static_cast<int>(rows.size());
  if (n == 0) return fixed;
  std::vector<double> reduced(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) reduced[static_cast<std::size_t>(i) * n + j] = costs(rows[i], cols[j]);
  }
  const std::vector<int> sol = solve_dense(n, reduced);
  double rest = 0.0;
  for (int i = 0; i < n; ++i) rest += reduced[static_cast<std::size_t>(i) * n + sol[i]];
  return fixed + rest;
}

double translated_score(const CostMatrix& costs, const Assignment& y) {
  return matching_score(costs, y) - hungarian(costs)->cost;
}

// ---------------------------------------------------------------------------

MatchingProblem::MatchingProblem(CostMatrix costs, bool translated)
    : costs_(std::move(costs)), translated_(translated) {
  require(costs_.k() >= 1, "matching problem: empty cost matrix");
  const auto sol = hungarian(costs_);
  if (!sol) fail(ErrorCode::kInternal, "hungarian failed on an unconstrained problem");
  best_ = sol->assignment;
  minimum_ = sol->cost;
}

double MatchingProblem::score(const Assignment& y) const {
  const double s = matching_score(costs_, y);
  return translated_ ? s - minimum_ : s;
}

std::optional<Assignment> MatchingProblem::second_best(const Constraints& c,
                                                       const Assignment& best) const {
  std::optional<MatchingSolution> pick;
  for (int u = 0; u < costs_.k(); ++u) {
    if (c.forced[u] >= 0) continue;
    Constraints tighter = c;
    tighter.forbid(u, best.map[u]);
    auto sol = hungarian(costs_, tighter);
    if (sol && (!pick || sol->cost < pick->cost)) pick = std::move(sol);
  }
  if (!pick) return std::nullopt;
  return pick->assignment;
}

std::pair<MatchingConstraints, MatchingConstraints> MatchingProblem::partition(
    const Constraints& c, const Assignment& best, const Assignment& second) const {
  require(best.size() == second.size(), "matching partition: size mismatch");
  int u = 0;
  while (u < best.size() && best.map[u] == second.map[u]) ++u;
  require(u < best.size(), "matching partition: best and second coincide");
  std::pair<MatchingConstraints, MatchingConstraints> out{c, c};
  out.first.force(u, best.map[u]);
  out.second.forbid(u, best.map[u]);
  return out;
}

// ---------------------------------------------------------------------------

MatchingScoreOracle::MatchingScoreOracle(CostMatrix costs)
    : problem_(std::move(costs), /*translated=*/true) {}

double MatchingScoreOracle::score(const StrongLabel& y) const {
  const auto* a = std::get_if<Assignment>(&y);
  require(a != nullptr, "matching oracle needs an assignment label");
  validate(*a);
  return problem_.score(*a);
}

double MatchingScoreOracle::min_over(const WeakLabel& w) const {
  const auto* p = std::get_if<PartialMatching>(&w);
  if (p == nullptr) {
    fail(ErrorCode::kInvalidArgument,
         std::string("matching oracle cannot handle weak label of type '") + variant_name(w) +
             "'");
  }
  return partial_matching_score(problem_.costs(), *p) - problem_.minimum();
}

PredictionSet MatchingScoreOracle::predict(double t, std::size_t cap) const {
  auto found = enumerate_until(problem_, t, cap);
  return AssignmentSet{std::move(found.configs), found.truncated};
}

std::vector<SetSize> MatchingScoreOracle::set_sizes(std::span<const double> thresholds,
                                                    std::size_t cap) const {
  return sublevel_sizes(problem_, thresholds, cap);
}

}  // namespace wsconf
