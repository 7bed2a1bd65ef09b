#include "wsconf/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "wsconf/error.hpp"
#include "wsconf/rng.hpp"

namespace wsconf {

namespace {

// Stream index for dataset-level parameters, disjoint from record ids.
constexpr std::uint64_t kParamStream = ~std::uint64_t{0};

std::vector<double> gaussian_vector(Rng& rng, int d) {
  std::normal_distribution<double> n01(0.0, 1.0);
  std::vector<double> v(d);
  for (double& e : v) e = n01(rng);
  return v;
}

std::vector<std::vector<double>> sphere_directions(Rng& rng, int count, int d) {
  std::vector<std::vector<double>> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    std::vector<double> v;
    double norm = 0.0;
    do {
      v = gaussian_vector(rng, d);
      norm = std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
    } while (norm == 0.0);
    for (double& e : v) e /= norm;
    out.push_back(std::move(v));
  }
  return out;
}

double dot(std::span<const double> a, std::span<const double> b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

// Noisy linear scores S_y = x.theta_y + sigma * eps_y.
std::vector<double> noisy_scores(Rng& rng, const std::vector<double>& x,
                                 const std::vector<std::vector<double>>& theta, double sigma) {
  std::normal_distribution<double> n01(0.0, 1.0);
  std::vector<double> s(theta.size());
  for (std::size_t y = 0; y < theta.size(); ++y) s[y] = dot(x, theta[y]) + sigma * n01(rng);
  return s;
}

int partial_count(Rng& rng, int k, double rate) {
  std::poisson_distribution<int> poisson(rate);
  return std::min(k, 1 + poisson(rng));
}

}  // namespace

Dataset gen_multiclass(const MulticlassConfig& cfg) {
  require(cfg.k >= 2 && cfg.k <= 64, "multiclass generator: K must lie in [2, 64]");
  require(cfg.d >= 1, "multiclass generator: d must be positive");
  require(cfg.sigma > 0.0 && std::isfinite(cfg.sigma), "multiclass generator: sigma must be positive");
  require(cfg.min_weak_size >= 1 && cfg.min_weak_size <= cfg.k,
          "multiclass generator: min_weak_size must lie in [1, K]");
  Rng param_rng = make_rng(cfg.seed, kParamStream);
  const auto theta = sphere_directions(param_rng, cfg.k, cfg.d);

  Dataset data;
  data.records.reserve(cfg.n);
  data.oracle.reserve(cfg.n);
  for (std::size_t i = 0; i < cfg.n; ++i) {
    Rng rng = make_rng(cfg.seed, i);
    Record r;
    r.id = i;
    r.x = gaussian_vector(rng, cfg.d);
    std::vector<double> s = noisy_scores(rng, r.x, theta, cfg.sigma);
    const Label y = static_cast<Label>(std::min_element(s.begin(), s.end()) - s.begin());
    std::vector<double> sorted = s;
    std::sort(sorted.begin(), sorted.end());
    const double lo = sorted[cfg.min_weak_size - 1];
    const double hi = sorted.back();
    const double t = lo + uniform01(rng) * (hi - lo);
    ExplicitSet w{{}, cfg.k};
    for (int c = 0; c < cfg.k; ++c) {
      if (s[c] <= t) w.labels.push_back(c);
    }
    r.weak = std::move(w);
    r.y = y;
    data.records.push_back(std::move(r));
    data.oracle.push_back(std::move(s));
  }
  return data;
}

Dataset gen_ranking(const RankingSimConfig& cfg) {
  require(cfg.k >= 2 && cfg.k <= 64, "ranking generator: K must lie in [2, 64]");
  require(cfg.d >= 1, "ranking generator: d must be positive");
  require(cfg.sigma > 0.0 && std::isfinite(cfg.sigma), "ranking generator: sigma must be positive");
  require(cfg.poisson_rate >= 0.0, "ranking generator: Poisson rate must be nonnegative");
  Rng param_rng = make_rng(cfg.seed, kParamStream);
  const auto theta = sphere_directions(param_rng, cfg.k, cfg.d);

  Dataset data;
  data.records.reserve(cfg.n);
  data.oracle.reserve(cfg.n);
  for (std::size_t i = 0; i < cfg.n; ++i) {
    Rng rng = make_rng(cfg.seed, i);
    Record r;
    r.id = i;
    r.x = gaussian_vector(rng, cfg.d);
    std::vector<double> s = noisy_scores(rng, r.x, theta, cfg.sigma);
    Ranking y;
    y.perm.resize(cfg.k);
    std::iota(y.perm.begin(), y.perm.end(), 0);
    std::stable_sort(y.perm.begin(), y.perm.end(), [&](int a, int b) { return s[a] > s[b]; });
    const int kp = partial_count(rng, cfg.k, cfg.poisson_rate);
    r.weak = RankingPrefix{std::vector<int>(y.perm.begin(), y.perm.begin() + kp), cfg.k};
    r.y = std::move(y);
    data.records.push_back(std::move(r));
    data.oracle.push_back(std::move(s));
  }
  return data;
}

Dataset gen_regression(const RegressionSimConfig& cfg) {
  require(cfg.d >= 1, "regression generator: d must be positive");
  require(cfg.mu > 0.0 && std::isfinite(cfg.mu), "regression generator: mu must be positive");
  require(cfg.noise >= 0.0, "regression generator: noise must be nonnegative");
  Rng param_rng = make_rng(cfg.seed, kParamStream);
  const auto beta = sphere_directions(param_rng, 1, cfg.d).front();

  Dataset data;
  data.records.reserve(cfg.n);
  std::normal_distribution<double> n01(0.0, 1.0);
  std::normal_distribution<double> half_width(cfg.mu, 0.01);
  for (std::size_t i = 0; i < cfg.n; ++i) {
    Rng rng = make_rng(cfg.seed, i);
    Record r;
    r.id = i;
    r.x = gaussian_vector(rng, cfg.d);
    const double y = dot(r.x, beta) + cfg.noise * n01(rng);
    double z = half_width(rng);
    while (z < 0.0) z = half_width(rng);
    r.weak = Interval{y - z, y + z};
    r.y = y;
    data.records.push_back(std::move(r));
  }
  return data;
}

Dataset gen_matching(const MatchingSimConfig& cfg) {
  require(cfg.k >= 1 && cfg.k <= 64, "matching generator: K must lie in [1, 64]");
  require(cfg.noise >= 0.0, "matching generator: noise must be nonnegative");
  require(cfg.poisson_rate >= 0.0, "matching generator: Poisson rate must be nonnegative");
  Dataset data;
  data.records.reserve(cfg.n);
  std::normal_distribution<double> n01(0.0, 1.0);
  for (std::size_t i = 0; i < cfg.n; ++i) {
    Rng rng = make_rng(cfg.seed, i);
    Assignment y;
    y.map.resize(cfg.k);
    std::iota(y.map.begin(), y.map.end(), 0);
    std::shuffle(y.map.begin(), y.map.end(), rng);
    Record r;
    r.id = i;
    r.x.resize(static_cast<std::size_t>(cfg.k) * cfg.k);
    for (int u = 0; u < cfg.k; ++u) {
      for (int v = 0; v < cfg.k; ++v) {
        const double base = y.map[u] == v ? 0.0 : 1.0;
        r.x[static_cast<std::size_t>(u) * cfg.k + v] =
            cfg.noise > 0.0 ? base + cfg.noise * n01(rng) : base;
      }
    }
    const int kp = partial_count(rng, cfg.k, cfg.poisson_rate);
    std::vector<int> rows(cfg.k);
    std::iota(rows.begin(), rows.end(), 0);
    std::shuffle(rows.begin(), rows.end(), rng);
    rows.resize(kp);
    std::sort(rows.begin(), rows.end());
    PartialMatching w{{}, cfg.k};
    for (int u : rows) w.pairs.emplace_back(u, y.map[u]);
    r.weak = std::move(w);
    r.y = std::move(y);
    data.records.push_back(std::move(r));
  }
  return data;
}

CostMatrix record_costs(const Record& r) {
  const auto k = static_cast<int>(std::lround(std::sqrt(static_cast<double>(r.x.size()))));
  require(k >= 1 && static_cast<std::size_t>(k) * k == r.x.size(),
          "record " + std::to_string(r.id) + ": features are not a square cost matrix");
  return CostMatrix(k, r.x);
}

// ---------------------------------------------------------------------------
// Trainers

namespace {

void check_features(std::span<const std::vector<double>> x, int d, std::size_t n) {
  require(!x.empty(), "trainer: no samples");
  require(x.size() == n, "trainer: feature and label counts differ");
  for (const auto& row : x) require(static_cast<int>(row.size()) == d, "trainer: feature dimension mismatch");
}

// Affine scores z_c = theta_c . x + b_c for k rows of (theta_c, b_c).
std::vector<double> affine(std::span<const double> params, int k, int d,
                           std::span<const double> x) {
  require(static_cast<int>(x.size()) == d, "model: feature dimension mismatch");
  std::vector<double> z(k);
  for (int c = 0; c < k; ++c) {
    const double* row = params.data() + static_cast<std::size_t>(c) * (d + 1);
    double v = row[d];
    for (int j = 0; j < d; ++j) v += row[j] * x[j];
    z[c] = v;
  }
  return z;
}

void add_outer(std::vector<double>& grad, int c, int d, double g, std::span<const double> x) {
  double* row = grad.data() + static_cast<std::size_t>(c) * (d + 1);
  for (int j = 0; j < d; ++j) row[j] += g * x[j];
  row[d] += g;
}

double l2_term(std::span<const double> params, double l2) {
  return 0.5 * l2 * std::inner_product(params.begin(), params.end(), params.begin(), 0.0);
}

double log1p_exp(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

template <class Model, class Grad>
void descend(Model& m, const LogisticOptions& options, Grad&& gradient) {
  require(options.step > 0.0 && options.epochs >= 0 && options.l2 >= 0.0,
          "trainer: bad optimizer settings");
  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    const std::vector<double> g = gradient(m);
    for (std::size_t p = 0; p < g.size(); ++p) m.params[p] -= options.step * g[p];
  }
}

}  // namespace

std::vector<double> SoftmaxModel::probs(std::span<const double> x) const {
  std::vector<double> z = affine(params, k, d, x);
  const double top = *std::max_element(z.begin(), z.end());
  double total = 0.0;
  for (double& e : z) total += e = std::exp(e - top);
  for (double& e : z) e /= total;
  return z;
}

double multinomial_objective(const SoftmaxModel& m, std::span<const std::vector<double>> x,
                             std::span<const Label> y, double l2) {
  check_features(x, m.d, y.size());
  double loss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    require(y[i] >= 0 && y[i] < m.k, "multinomial logistic: label out of range");
    const std::vector<double> z = affine(m.params, m.k, m.d, x[i]);
    const double top = *std::max_element(z.begin(), z.end());
    double total = 0.0;
    for (double e : z) total += std::exp(e - top);
    loss += top + std::log(total) - z[y[i]];
  }
  return loss / static_cast<double>(x.size()) + l2_term(m.params, l2);
}

std::vector<double> multinomial_gradient(const SoftmaxModel& m,
                                         std::span<const std::vector<double>> x,
                                         std::span<const Label> y, double l2) {
  check_features(x, m.d, y.size());
  std::vector<double> grad(m.params.size(), 0.0);
  const double inv = 1.0 / static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const std::vector<double> p = m.probs(x[i]);
    for (int c = 0; c < m.k; ++c) add_outer(grad, c, m.d, inv * (p[c] - (c == y[i] ? 1.0 : 0.0)), x[i]);
  }
  for (std::size_t q = 0; q < grad.size(); ++q) grad[q] += l2 * m.params[q];
  return grad;
}

SoftmaxModel train_multinomial_logistic(std::span<const std::vector<double>> x,
                                        std::span<const Label> y, int k,
                                        const LogisticOptions& options) {
  require(k >= 2, "multinomial logistic: need at least two classes");
  require(!x.empty(), "multinomial logistic: no samples");
  SoftmaxModel m{k, static_cast<int>(x.front().size()), {}};
  m.params.assign(static_cast<std::size_t>(k) * (m.d + 1), 0.0);
  check_features(x, m.d, y.size());
  for (Label l : y) require(l >= 0 && l < k, "multinomial logistic: label out of range");
  descend(m, options, [&](const SoftmaxModel& cur) { return multinomial_gradient(cur, x, y, options.l2); });
  return m;
}

std::vector<double> PerLabelLogisticModel::marginals(std::span<const double> x) const {
  std::vector<double> z = affine(params, k, d, x);
  for (double& e : z) e = sigmoid(e);
  return z;
}

namespace {

std::vector<char> membership(const ExplicitSet& w, int k) {
  require(w.k == k, "per-label logistic: weak set label space differs from K");
  std::vector<char> in(k, 0);
  for (Label y : w.labels) {
    require(y >= 0 && y < k, "per-label logistic: label out of range");
    in[y] = 1;
  }
  return in;
}

}  // namespace

double per_label_objective(const PerLabelLogisticModel& m, std::span<const std::vector<double>> x,
                           std::span<const ExplicitSet> w, double l2) {
  check_features(x, m.d, w.size());
  double loss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const std::vector<char> in = membership(w[i], m.k);
    const std::vector<double> z = affine(m.params, m.k, m.d, x[i]);
    for (int c = 0; c < m.k; ++c) loss += log1p_exp(z[c]) - (in[c] ? z[c] : 0.0);
  }
  return loss / static_cast<double>(x.size()) + l2_term(m.params, l2);
}

std::vector<double> per_label_gradient(const PerLabelLogisticModel& m,
                                       std::span<const std::vector<double>> x,
                                       std::span<const ExplicitSet> w, double l2) {
  check_features(x, m.d, w.size());
  std::vector<double> grad(m.params.size(), 0.0);
  const double inv = 1.0 / static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const std::vector<char> in = membership(w[i], m.k);
    const std::vector<double> p = m.marginals(x[i]);
    for (int c = 0; c < m.k; ++c) add_outer(grad, c, m.d, inv * (p[c] - (in[c] ? 1.0 : 0.0)), x[i]);
  }
  for (std::size_t q = 0; q < grad.size(); ++q) grad[q] += l2 * m.params[q];
  return grad;
}

PerLabelLogisticModel train_per_label_logistic(std::span<const std::vector<double>> x,
                                               std::span<const ExplicitSet> w, int k,
                                               const LogisticOptions& options) {
  require(k >= 1, "per-label logistic: K must be positive");
  require(!x.empty(), "per-label logistic: no samples");
  PerLabelLogisticModel m{k, static_cast<int>(x.front().size()), {}};
  m.params.assign(static_cast<std::size_t>(k) * (m.d + 1), 0.0);
  check_features(x, m.d, w.size());
  descend(m, options,
          [&](const PerLabelLogisticModel& cur) { return per_label_gradient(cur, x, w, options.l2); });
  return m;
}

double cumulative_probability_score(std::span<const double> probs, Label y) {
  require(y >= 0 && static_cast<std::size_t>(y) < probs.size(), "cumulative score: label out of range");
  const double py = probs[y];
  double total = 0.0;
  for (double p : probs) {
    if (p >= py) total += p;
  }
  return total;
}

}  // namespace wsconf
