#include "wsconf/greedy.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <unordered_map>

#include "wsconf/error.hpp"

namespace wsconf {

namespace {

LabelMask bit(Label y) { return LabelMask{1} << y; }

bool has(LabelMask m, Label y) { return (m >> y) & 1U; }

void check_eta(double eta) {
  require(eta > 0.0 && eta <= 1.0, "coverage level eta must lie in (0, 1]");
}

// Indices of the vertices of the concave majorant of (x[i], y[i]), x strictly
// increasing. Points within `eps` of a chord are dropped.
std::vector<std::size_t> upper_hull(std::span<const double> x, std::span<const double> y,
                                    double eps = 1e-12) {
  std::vector<std::size_t> hull;
  for (std::size_t i = 0; i < x.size(); ++i) {
    while (hull.size() >= 2) {
      const std::size_t a = hull[hull.size() - 2];
      const std::size_t b = hull.back();
      // b is dropped unless it lies strictly above the chord a -> i.
      const double cross = (x[b] - x[a]) * (y[i] - y[a]) - (y[b] - y[a]) * (x[i] - x[a]);
      if (cross >= -eps) {
        hull.pop_back();
      } else {
        break;
      }
    }
    hull.push_back(i);
  }
  return hull;
}

// g[T] = sum of p over atoms contained in T.
std::vector<double> subset_mass(const DiscreteWeakDistribution& dist) {
  const int k = dist.k();
  if (k > kMaxBruteForceLabels) {
    fail(ErrorCode::kLimitExceeded, "exhaustive subset search needs K <= " +
                                        std::to_string(kMaxBruteForceLabels) + ", got " +
                                        std::to_string(k));
  }
  std::vector<double> g(std::size_t{1} << k, 0.0);
  for (const Atom& a : dist.atoms()) g[a.set] += a.p;
  for (int b = 0; b < k; ++b) {
    for (std::size_t m = 0; m < g.size(); ++m) {
      if ((m >> b) & 1U) g[m] += g[m ^ (std::size_t{1} << b)];
    }
  }
  return g;
}

struct SizeTable {
  std::vector<double> best;      // F(s)
  std::vector<LabelMask> which;  // a set attaining F(s)
};

SizeTable best_by_size(const DiscreteWeakDistribution& dist) {
  const int k = dist.k();
  const std::vector<double> g = subset_mass(dist);
  const std::size_t full = g.size() - 1;
  SizeTable t;
  t.best.assign(k + 1, -1.0);
  t.which.assign(k + 1, 0);
  t.best[0] = 0.0;
  for (std::size_t s = 1; s <= full; ++s) {
    const int size = std::popcount(s);
    const double cov = std::clamp(1.0 - g[full & ~s], 0.0, 1.0);
    if (cov > t.best[size] + 1e-15) {
      t.best[size] = cov;
      t.which[size] = s;
    }
  }
  t.best[k] = 1.0;
  for (int s = 1; s <= k; ++s) t.best[s] = std::max(t.best[s], t.best[s - 1]);
  return t;
}

}  // namespace

// ---------------------------------------------------------------------------

DiscreteWeakDistribution::DiscreteWeakDistribution(int k, std::vector<Atom> atoms)
    : k_(k), atoms_(std::move(atoms)) {
  require(k >= 1 && k <= kMaxGreedyLabels,
          "weak distribution: K must lie in [1, 64], got " + std::to_string(k));
  require(!atoms_.empty(), "weak distribution: no atoms");
  const LabelMask full = full_mask();
  double total = 0.0;
  for (const Atom& a : atoms_) {
    require(a.set != 0, "weak distribution: empty atom");
    require((a.set & ~full) == 0, "weak distribution: atom label out of range");
    require(std::isfinite(a.p) && a.p >= 0.0, "weak distribution: negative or non-finite mass");
    total += a.p;
  }
  require(std::abs(total - 1.0) <= kTolerance,
          "weak distribution: masses sum to " + std::to_string(total) + ", not 1");
  std::vector<LabelMask> sets;
  sets.reserve(atoms_.size());
  for (const Atom& a : atoms_) sets.push_back(a.set);
  std::sort(sets.begin(), sets.end());
  require(std::adjacent_find(sets.begin(), sets.end()) == sets.end(),
          "weak distribution: duplicate atom");
  for (Atom& a : atoms_) a.p /= total;
}

DiscreteWeakDistribution DiscreteWeakDistribution::label_independent(
    std::span<const double> marginals) {
  const int k = static_cast<int>(marginals.size());
  require(k >= 1 && k <= kMaxBruteForceLabels,
          "label-independent law: K must lie in [1, 20]");
  double none = 1.0;
  for (double p : marginals) {
    require(p >= 0.0 && p <= 1.0, "label-independent law: marginals must lie in [0, 1]");
    none *= 1.0 - p;
  }
  const double norm = 1.0 - none;
  require(norm > 0.0, "label-independent law: W is empty almost surely");
  std::vector<Atom> atoms;
  const LabelMask full = (LabelMask{1} << k) - 1;
  for (LabelMask s = 1; s <= full; ++s) {
    double q = 1.0;
    for (int y = 0; y < k; ++y) q *= has(s, y) ? marginals[y] : 1.0 - marginals[y];
    if (q > 0.0) atoms.push_back({s, q / norm});
  }
  return DiscreteWeakDistribution(k, std::move(atoms));
}

LabelMask DiscreteWeakDistribution::full_mask() const {
  return k_ == 64 ? ~LabelMask{0} : (LabelMask{1} << k_) - 1;
}

double DiscreteWeakDistribution::coverage(LabelMask c) const {
  double total = 0.0;
  for (const Atom& a : atoms_) {
    if (a.set & c) total += a.p;
  }
  return std::min(total, 1.0);
}

double DiscreteWeakDistribution::increment(LabelMask c, Label y) const {
  double total = 0.0;
  for (const Atom& a : atoms_) {
    if (!(a.set & c) && has(a.set, y)) total += a.p;
  }
  return total;
}

LabelMask mask_of(std::span<const Label> labels) {
  LabelMask m = 0;
  for (Label y : labels) {
    require(y >= 0 && y < kMaxGreedyLabels, "label out of mask range");
    m |= bit(y);
  }
  return m;
}

std::vector<Label> labels_of(LabelMask mask) {
  std::vector<Label> out;
  while (mask) {
    out.push_back(std::countr_zero(mask));
    mask &= mask - 1;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Greedy construction

namespace {

GreedySequence finish(std::vector<Label> order, std::vector<double> cum) {
  GreedySequence seq;
  seq.position.assign(order.size(), -1);
  for (std::size_t j = 0; j < order.size(); ++j) seq.position[order[j]] = static_cast<int>(j);
  seq.order = std::move(order);
  seq.cum_coverage = std::move(cum);
  return seq;
}

}  // namespace

GreedySequence greedy_sequence(const DiscreteWeakDistribution& dist) {
  const int k = dist.k();
  std::vector<Label> order;
  std::vector<double> cum;
  order.reserve(k);
  cum.reserve(k);
  LabelMask chosen = 0;
  double prev = 0.0;
  for (int step = 0; step < k; ++step) {
    Label pick = -1;
    double best = -1.0;
    for (Label y = 0; y < k; ++y) {
      if (has(chosen, y)) continue;
      const double d = dist.increment(chosen, y);
      if (d > best + 1e-15) {
        best = d;
        pick = y;
      }
    }
    chosen |= bit(pick);
    order.push_back(pick);
    prev = std::clamp(dist.coverage(chosen), prev, 1.0);
    cum.push_back(prev);
  }
  cum.back() = 1.0;
  return finish(std::move(order), std::move(cum));
}

GreedySequence greedy_sequence_independent(std::span<const double> marginals) {
  const int k = static_cast<int>(marginals.size());
  require(k >= 1, "label-independent greedy: no labels");
  double none = 1.0;
  for (double p : marginals) {
    require(p >= 0.0 && p <= 1.0, "label-independent greedy: marginals must lie in [0, 1]");
    none *= 1.0 - p;
  }
  const double norm = 1.0 - none;
  require(norm > 0.0, "label-independent greedy: W is empty almost surely");

  std::vector<Label> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](Label a, Label b) { return marginals[a] > marginals[b]; });
  std::vector<double> cum(k);
  double miss = 1.0;
  double prev = 0.0;
  for (int j = 0; j < k; ++j) {
    miss *= 1.0 - marginals[order[j]];
    prev = std::clamp((1.0 - miss) / norm, prev, 1.0);
    cum[j] = prev;
  }
  cum.back() = 1.0;
  return finish(std::move(order), std::move(cum));
}

std::vector<Label> RandomizedSet::realize(double u) const {
  std::vector<Label> out = u < t ? outer : inner;
  std::sort(out.begin(), out.end());
  return out;
}

RandomizedSet greedy_set(const GreedySequence& seq, double eta) {
  check_eta(eta);
  const int k = seq.k();
  int j = k;
  for (int i = 1; i <= k; ++i) {
    if (seq.c(i) >= eta - kTolerance) {
      j = i;
      break;
    }
  }
  RandomizedSet set;
  set.inner.assign(seq.order.begin(), seq.order.begin() + (j - 1));
  set.outer.assign(seq.order.begin(), seq.order.begin() + j);
  const double lo = seq.c(j - 1);
  const double hi = seq.c(j);
  if (std::abs(hi - eta) <= kTolerance || hi - lo <= 0.0) {
    set.t = 1.0;
  } else {
    set.t = std::clamp((eta - lo) / (hi - lo), 0.0, 1.0);
  }
  return set;
}

RandomizedSet greedy_set(const DiscreteWeakDistribution& dist, double eta) {
  return greedy_set(greedy_sequence(dist), eta);
}

double nested_score(const GreedySequence& seq, Label y, double u) {
  require(y >= 0 && y < seq.k(), "nested score: label out of range");
  require(u >= 0.0 && u <= 1.0, "nested score: u must lie in [0, 1]");
  const int j = seq.position[y] + 1;
  const double lo = seq.c(j - 1);
  return lo + u * (seq.c(j) - lo);
}

// ---------------------------------------------------------------------------
// Optimality oracles

std::vector<double> best_coverage_by_size(const DiscreteWeakDistribution& dist) {
  return best_by_size(dist).best;
}

OptimalMixture brute_force_optimal(const DiscreteWeakDistribution& dist, double eta) {
  check_eta(eta);
  const SizeTable table = best_by_size(dist);
  const int k = dist.k();
  std::vector<double> sizes(k + 1);
  std::iota(sizes.begin(), sizes.end(), 0.0);
  const std::vector<std::size_t> hull = upper_hull(sizes, table.best);

  OptimalMixture out;
  for (std::size_t h = 0; h < hull.size(); ++h) {
    const std::size_t b = hull[h];
    if (table.best[b] < eta - kTolerance) continue;
    if (h == 0 || std::abs(table.best[b] - eta) <= kTolerance) {
      out.expected_size = static_cast<double>(b);
      out.low = out.high = table.which[b];
      out.weight_high = 1.0;
      return out;
    }
    const std::size_t a = hull[h - 1];
    const double w = (eta - table.best[a]) / (table.best[b] - table.best[a]);
    out.expected_size = static_cast<double>(a) + w * static_cast<double>(b - a);
    out.low = table.which[a];
    out.high = table.which[b];
    out.weight_high = w;
    return out;
  }
  fail(ErrorCode::kInternal, "brute-force optimum: full label space misses eta");
}

int min_deterministic_cover(const DiscreteWeakDistribution& dist, double eta) {
  check_eta(eta);
  const std::vector<double> best = best_coverage_by_size(dist);
  for (std::size_t s = 0; s < best.size(); ++s) {
    if (best[s] >= eta - kTolerance) return static_cast<int>(s);
  }
  return dist.k();
}

double wolsey_constant(const DiscreteWeakDistribution& dist, double eta) {
  const GreedySequence seq = greedy_sequence(dist);
  const RandomizedSet set = greedy_set(seq, eta);
  const int j = static_cast<int>(set.outer.size());
  const int k = dist.k();
  const double inf = std::numeric_limits<double>::infinity();

  const double c_inner = seq.c(j - 1);
  double term1 = eta - c_inner > 0.0 ? eta / (eta - c_inner) : inf;

  std::vector<double> base(k);
  for (Label y = 0; y < k; ++y) base[y] = dist.increment(0, y);

  double term2 = -inf;
  LabelMask prefix = 0;
  for (int jp = 0; jp <= j; ++jp) {
    if (jp > 0) prefix |= bit(seq.order[jp - 1]);
    for (Label y = 0; y < k; ++y) {
      const double d = dist.increment(prefix, y);
      if (d > 0.0) term2 = std::max(term2, base[y] / d);
    }
  }
  if (term2 == -inf) term2 = inf;

  const LabelMask inner = mask_of(set.inner);
  double num = 0.0;
  double den = 0.0;
  for (Label y = 0; y < k; ++y) {
    num = std::max(num, base[y]);
    den = std::max(den, dist.increment(inner, y));
  }
  const double term3 = den > 0.0 ? num / den : inf;

  return std::min({term1, term2, term3});
}

// ---------------------------------------------------------------------------
// Structure

const char* structure_name(WeakStructure s) {
  switch (s) {
    case WeakStructure::kLabelIndependent:
      return "label_independent";
    case WeakStructure::kTree:
      return "tree";
    case WeakStructure::kGeneral:
      return "general";
  }
  return "general";
}

namespace {

bool is_label_independent(const std::vector<Atom>& support) {
  LabelMask always = ~LabelMask{0};
  LabelMask ever = 0;
  for (const Atom& a : support) {
    always &= a.set;
    ever |= a.set;
  }
  const LabelMask varying = ever & ~always;
  const int nv = std::popcount(varying);
  if (nv == 0) return support.size() == 1;
  if (nv > kMaxBruteForceLabels) return false;
  const std::size_t expected = (std::size_t{1} << nv) - (always == 0 ? 1 : 0);
  if (support.size() != expected) return false;

  std::unordered_map<LabelMask, double> mass;
  for (const Atom& a : support) mass.emplace(a.set, a.p);
  const std::vector<Label> v = labels_of(varying);

  // Odds p_y / (1 - p_y) from ratios of neighbouring atoms.
  std::unordered_map<Label, double> odds;
  for (Label y : v) {
    double num = 0.0;
    double den = 0.0;
    if (always != 0) {
      num = mass.at(always | bit(y));
      den = mass.at(always);
    } else {
      const Label z = v[0] == y ? v[1] : v[0];
      num = mass.at(bit(y) | bit(z));
      den = mass.at(bit(z));
    }
    odds[y] = num / den;
  }

  std::vector<double> predicted(support.size());
  double total = 0.0;
  for (std::size_t i = 0; i < support.size(); ++i) {
    double w = 1.0;
    for (Label y : labels_of(support[i].set & varying)) w *= odds[y];
    predicted[i] = w;
    total += w;
  }
  for (std::size_t i = 0; i < support.size(); ++i) {
    if (std::abs(predicted[i] / total - support[i].p) > kTolerance) return false;
  }
  return true;
}

}  // namespace

WeakStructure check_structure(const DiscreteWeakDistribution& dist) {
  std::vector<Atom> support;
  for (const Atom& a : dist.atoms()) {
    if (a.p > 0.0) support.push_back(a);
  }
  if (is_label_independent(support)) return WeakStructure::kLabelIndependent;
  for (std::size_t i = 0; i < support.size(); ++i) {
    for (std::size_t j = i + 1; j < support.size(); ++j) {
      const LabelMask a = support[i].set;
      const LabelMask b = support[j].set;
      const LabelMask both = a & b;
      if (both != 0 && both != a && both != b) return WeakStructure::kGeneral;
    }
  }
  return WeakStructure::kTree;
}

// ---------------------------------------------------------------------------
// Marginal allocation

MarginalAllocation marginal_allocation(std::span<const CoverageCurve> curves, double alpha) {
  require(alpha > 0.0 && alpha < 1.0, "marginal allocation: alpha must lie in (0, 1)");
  require(!curves.empty(), "marginal allocation: no curves");
  double weight_sum = 0.0;
  for (const CoverageCurve& c : curves) {
    require(!c.cum_coverage.empty(), "marginal allocation: empty curve");
    require(c.weight >= 0.0 && std::isfinite(c.weight), "marginal allocation: bad weight");
    weight_sum += c.weight;
    double prev = 0.0;
    for (double v : c.cum_coverage) {
      require(v >= prev - kTolerance && v <= 1.0 + kTolerance,
              "marginal allocation: coverage curve must be nondecreasing in [0, 1]");
      prev = v;
    }
    require(std::abs(c.cum_coverage.back() - 1.0) <= kTolerance,
            "marginal allocation: coverage curve must reach 1");
  }
  require(weight_sum > 0.0, "marginal allocation: weights sum to zero");

  struct Segment {
    std::size_t curve;
    double gain;  // coverage
    double cost;  // expected size
    double efficiency;
  };
  const std::size_t n = curves.size();
  MarginalAllocation out;
  out.eta.assign(n, 0.0);
  out.expected_size.assign(n, 0.0);
  out.projected.assign(n, false);

  std::vector<Segment> segments;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& cum = curves[i].cum_coverage;
    std::vector<double> xs(cum.size() + 1);
    std::vector<double> ys(cum.size() + 1);
    for (std::size_t s = 0; s <= cum.size(); ++s) {
      xs[s] = static_cast<double>(s);
      ys[s] = s == 0 ? 0.0 : cum[s - 1];
    }
    const auto hull = upper_hull(xs, ys);
    for (std::size_t h = 0; h + 1 < hull.size(); ++h) {
      const std::size_t a = hull[h];
      const std::size_t b = hull[h + 1];
      const double slope = (ys[b] - ys[a]) / (xs[b] - xs[a]);
      for (std::size_t m = a + 1; m < b; ++m) {
        if (ys[a] + slope * (xs[m] - xs[a]) - ys[m] > 1e-12) out.projected[i] = true;
      }
      const double gain = ys[b] - ys[a];
      if (gain > 0.0) segments.push_back({i, gain, xs[b] - xs[a], gain / (xs[b] - xs[a])});
    }
  }
  std::stable_sort(segments.begin(), segments.end(),
                   [](const Segment& a, const Segment& b) { return a.efficiency > b.efficiency; });

  double remaining = 1.0 - alpha;
  for (std::size_t g = 0; g < segments.size() && remaining > 0.0;) {
    std::size_t end = g + 1;
    while (end < segments.size() &&
           segments[g].efficiency - segments[end].efficiency <=
               1e-12 * std::max(1.0, segments[g].efficiency)) {
      ++end;
    }
    double group_gain = 0.0;
    for (std::size_t s = g; s < end; ++s) {
      group_gain += curves[segments[s].curve].weight / weight_sum * segments[s].gain;
    }
    const double fraction = group_gain <= remaining ? 1.0 : remaining / group_gain;
    for (std::size_t s = g; s < end; ++s) {
      out.eta[segments[s].curve] += fraction * segments[s].gain;
      out.expected_size[segments[s].curve] += fraction * segments[s].cost;
    }
    remaining -= fraction * group_gain;
    if (fraction < 1.0) remaining = 0.0;
    g = end;
  }

  for (std::size_t i = 0; i < n; ++i) {
    const double w = curves[i].weight / weight_sum;
    out.eta[i] = std::min(out.eta[i], 1.0);
    out.total_coverage += w * out.eta[i];
    out.total_size += w * out.expected_size[i];
  }
  return out;
}

}  // namespace wsconf
