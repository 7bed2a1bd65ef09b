#include "wsconf/ranking.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <string>

#include "wsconf/error.hpp"

namespace wsconf {

PsiSpec PsiSpec::exp_weighted(double c) {
  require(std::isfinite(c) && c >= 0.0, "psi: c must be finite and nonnegative");
  return {Kind::kExpWeighted, c};
}

double PsiSpec::operator()(double a, double b) const {
  const double gap = std::max(0.0, b - a);
  if (kind == Kind::kHinge || gap == 0.0) return gap;
  return std::exp(-c * a) * gap;
}

double rank_score(std::span<const double> r, const Ranking& y, const PsiSpec& psi) {
  require(y.size() == static_cast<int>(r.size()), "rank score: ranking and relevance sizes differ");
  double total = 0.0;
  for (int i = 0; i < y.size(); ++i) {
    const double a = r[y.perm[i]];
    for (int j = i + 1; j < y.size(); ++j) total += psi(a, r[y.perm[j]]);
  }
  return total;
}

Ranking best_ranking(std::span<const double> r) {
  Ranking y;
  y.perm.resize(r.size());
  std::iota(y.perm.begin(), y.perm.end(), 0);
  std::stable_sort(y.perm.begin(), y.perm.end(), [&](int a, int b) { return r[a] > r[b]; });
  return y;
}

Ranking complete_prefix(std::span<const double> r, const RankingPrefix& prefix) {
  require(prefix.total_items == static_cast<int>(r.size()),
          "ranking prefix: item count differs from relevance length");
  validate(WeakLabel{prefix});
  std::vector<bool> used(r.size(), false);
  Ranking y;
  y.perm = prefix.prefix;
  for (int item : prefix.prefix) used[item] = true;
  for (int item : best_ranking(r).perm) {
    if (!used[item]) y.perm.push_back(item);
  }
  return y;
}

double partial_rank_score(std::span<const double> r, const RankingPrefix& prefix,
                          const PsiSpec& psi) {
  return rank_score(r, complete_prefix(r, prefix), psi);
}

// ---------------------------------------------------------------------------

void RankingConstraints::add(int a, int b) {
  before[a] |= std::uint64_t{1} << b;
}

bool RankingConstraints::empty() const {
  return std::all_of(before.begin(), before.end(), [](std::uint64_t m) { return m == 0; });
}

RankingProblem::RankingProblem(std::vector<double> relevance, PsiSpec psi)
    : r_(std::move(relevance)), psi_(psi) {
  require(!r_.empty() && static_cast<int>(r_.size()) <= kMaxRankingItems,
          "ranking problem: item count must lie in [1, 64]");
  for (double v : r_) require(std::isfinite(v), "ranking problem: relevances must be finite");
}

RankingConstraints RankingProblem::root() const {
  return RankingConstraints{std::vector<std::uint64_t>(r_.size(), 0)};
}

Ranking RankingProblem::best_in_cell(const Constraints& c) const {
  require(c.empty(), "best_in_cell only seeds the unconstrained cell");
  return best_ranking(r_);
}

std::optional<std::pair<int, double>> RankingProblem::second_best_swap(const Constraints& c,
                                                                       const Ranking& best) const {
  std::optional<std::pair<int, double>> pick;
  for (int i = 0; i + 1 < best.size(); ++i) {
    const int a = best.perm[i];
    const int b = best.perm[i + 1];
    if (c.requires_before(a, b)) continue;
    // Only the (i, i+1) pair term changes.
    const double delta = psi_(r_[b], r_[a]) - psi_(r_[a], r_[b]);
    if (!pick || delta < pick->second) pick = std::make_pair(i, delta);
  }
  return pick;
}

std::optional<Ranking> RankingProblem::second_best(const Constraints& c,
                                                   const Ranking& best) const {
  const auto swap = second_best_swap(c, best);
  if (!swap) return std::nullopt;
  Ranking y = best;
  std::swap(y.perm[swap->first], y.perm[swap->first + 1]);
  return y;
}

std::pair<RankingConstraints, RankingConstraints> RankingProblem::partition(
    const Constraints& c, const Ranking& best, const Ranking& second) const {
  require(best.size() == second.size(), "ranking partition: size mismatch");
  int i = 0;
  while (i < best.size() && best.perm[i] == second.perm[i]) ++i;
  require(i + 1 < best.size() && best.perm[i] == second.perm[i + 1] &&
              best.perm[i + 1] == second.perm[i] &&
              std::equal(best.perm.begin() + i + 2, best.perm.end(), second.perm.begin() + i + 2),
          "ranking partition: configurations must differ by one adjacent transposition");
  const int a = best.perm[i];
  const int b = best.perm[i + 1];
  std::pair<RankingConstraints, RankingConstraints> out{c, c};
  out.first.add(a, b);
  out.second.add(b, a);
  return out;
}

bool RankingProblem::admits(const Constraints& c, const Ranking& y) const {
  if (y.size() != k()) return false;
  std::vector<int> pos(y.size());
  for (int i = 0; i < y.size(); ++i) pos[y.perm[i]] = i;
  for (int a = 0; a < k(); ++a) {
    std::uint64_t m = c.before[a];
    while (m) {
      const int b = std::countr_zero(m);
      if (pos[a] > pos[b]) return false;
      m &= m - 1;
    }
  }
  return true;
}

// ---------------------------------------------------------------------------

RankingScoreOracle::RankingScoreOracle(std::vector<double> relevance, PsiSpec psi)
    : problem_(std::move(relevance), psi) {}

double RankingScoreOracle::score(const StrongLabel& y) const {
  const auto* r = std::get_if<Ranking>(&y);
  require(r != nullptr, "ranking oracle needs a ranking label");
  validate(*r);
  return problem_.score(*r);
}

double RankingScoreOracle::min_over(const WeakLabel& w) const {
  const auto* p = std::get_if<RankingPrefix>(&w);
  if (p == nullptr) {
    fail(ErrorCode::kInvalidArgument,
         std::string("ranking oracle cannot handle weak label of type '") + variant_name(w) + "'");
  }
  return partial_rank_score(problem_.relevance(), *p, problem_.psi());
}

PredictionSet RankingScoreOracle::predict(double t, std::size_t cap) const {
  auto found = enumerate_until(problem_, t, cap);
  return RankingSet{std::move(found.configs), found.truncated};
}

std::vector<SetSize> RankingScoreOracle::set_sizes(std::span<const double> thresholds,
                                                   std::size_t cap) const {
  return sublevel_sizes(problem_, thresholds, cap);
}

std::vector<double> rescale_relevances(std::span<const double> raw) {
  require(!raw.empty(), "rescale: empty relevance vector");
  const auto [lo, hi] = std::minmax_element(raw.begin(), raw.end());
  require(std::isfinite(*lo) && std::isfinite(*hi), "rescale: relevances must be finite");
  require(*hi > *lo, "rescale: constant relevance vector cannot be rescaled");
  std::vector<double> out(raw.size());
  const double span = *hi - *lo;
  for (std::size_t i = 0; i < raw.size(); ++i) out[i] = (raw[i] - *lo) / span;
  return out;
}

// ---------------------------------------------------------------------------
// ListNet

std::vector<double> ListNetModel::relevance(std::span<const double> x) const {
  require(static_cast<int>(x.size()) == d, "ListNet: feature dimension mismatch");
  std::vector<double> r(k);
  const int stride = d + 1;
  for (int item = 0; item < k; ++item) {
    const double* w = params.data() + item * stride;
    double v = w[d];
    for (int j = 0; j < d; ++j) v += w[j] * x[j];
    r[item] = v;
  }
  return r;
}

std::vector<double> proxy_relevance(const Ranking& y) {
  const int k = y.size();
  std::vector<double> r(k);
  for (int i = 0; i < k; ++i) r[y.perm[i]] = static_cast<double>(k - (i + 1));
  return r;
}

namespace {

std::vector<double> softmax(std::span<const double> v) {
  const double top = *std::max_element(v.begin(), v.end());
  std::vector<double> p(v.size());
  double z = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) z += p[i] = std::exp(v[i] - top);
  for (double& e : p) e /= z;
  return p;
}

double log_sum_exp(std::span<const double> v) {
  const double top = *std::max_element(v.begin(), v.end());
  double z = 0.0;
  for (double e : v) z += std::exp(e - top);
  return top + std::log(z);
}

void check_listnet(const ListNetModel& model, std::span<const std::vector<double>> x,
                   std::span<const Ranking> y) {
  require(x.size() == y.size(), "ListNet: feature and ranking counts differ");
  require(static_cast<int>(model.params.size()) == model.k * (model.d + 1),
          "ListNet: parameter size mismatch");
  for (std::size_t i = 0; i < x.size(); ++i) {
    require(static_cast<int>(x[i].size()) == model.d, "ListNet: feature dimension mismatch");
    require(y[i].size() == model.k, "ListNet: ranking length mismatch");
  }
}

}  // namespace

double listnet_loss(const ListNetModel& model, std::span<const std::vector<double>> x,
                    std::span<const Ranking> y) {
  check_listnet(model, x, y);
  double loss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const std::vector<double> target = softmax(proxy_relevance(y[i]));
    const std::vector<double> r = model.relevance(x[i]);
    const double lse = log_sum_exp(r);
    for (int k = 0; k < model.k; ++k) loss -= target[k] * (r[k] - lse);
  }
  return loss;
}

std::vector<double> listnet_gradient(const ListNetModel& model,
                                     std::span<const std::vector<double>> x,
                                     std::span<const Ranking> y) {
  check_listnet(model, x, y);
  std::vector<double> grad(model.params.size(), 0.0);
  const int stride = model.d + 1;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const std::vector<double> target = softmax(proxy_relevance(y[i]));
    const std::vector<double> pred = softmax(model.relevance(x[i]));
    for (int k = 0; k < model.k; ++k) {
      const double g = pred[k] - target[k];
      double* row = grad.data() + k * stride;
      for (int j = 0; j < model.d; ++j) row[j] += g * x[i][j];
      row[model.d] += g;
    }
  }
  return grad;
}

ListNetFit listnet_train(std::span<const std::vector<double>> x, std::span<const Ranking> y,
                         const ListNetOptions& options) {
  require(!x.empty(), "ListNet: no training samples");
  require(options.epochs >= 0 && options.step > 0.0, "ListNet: bad optimizer settings");
  ListNetFit fit;
  fit.model.k = y.front().size();
  fit.model.d = static_cast<int>(x.front().size());
  fit.model.params.assign(fit.model.k * (fit.model.d + 1), 0.0);
  const double scale = options.step / static_cast<double>(x.size());
  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    fit.loss_trace.push_back(listnet_loss(fit.model, x, y));
    const std::vector<double> grad = listnet_gradient(fit.model, x, y);
    for (std::size_t p = 0; p < grad.size(); ++p) fit.model.params[p] -= scale * grad[p];
  }
  fit.loss_trace.push_back(listnet_loss(fit.model, x, y));
  return fit;
}

}  // namespace wsconf
