#pragma once

// Size-minimal randomized confidence sets over a finite label space, built
// from a model of the law of W given X = x.

#include <cstdint>
#include <span>
#include <vector>

#include "wsconf/weak_label.hpp"

namespace wsconf {

/// Subset of {0, .., K-1} with bit y set iff y is in the subset.
using LabelMask = std::uint64_t;

inline constexpr int kMaxGreedyLabels = 64;
inline constexpr int kMaxBruteForceLabels = 20;

struct Atom {
  LabelMask set = 0;
  double p = 0.0;
};

/// Probability mass over nonempty subsets of {0, .., K-1}.
class DiscreteWeakDistribution {
 public:
  /// Throws kInvalidArgument on K outside [1, 64], empty or out-of-range
  /// atoms, duplicate atoms, negative mass, or total mass off 1 by more
  /// than kTolerance.
  DiscreteWeakDistribution(int k, std::vector<Atom> atoms);

  /// Product-form law of independent indicators 1{y in W} with
  /// P(y in W) = marginals[y], conditioned on W being nonempty. K <= 20.
  static DiscreteWeakDistribution label_independent(std::span<const double> marginals);

  int k() const { return k_; }
  const std::vector<Atom>& atoms() const { return atoms_; }
  LabelMask full_mask() const;

  /// P(W meets C).
  double coverage(LabelMask c) const;
  /// P(W misses C, y in W): the gain in coverage from adding y to C.
  double increment(LabelMask c, Label y) const;

 private:
  int k_;
  std::vector<Atom> atoms_;
};

LabelMask mask_of(std::span<const Label> labels);
std::vector<Label> labels_of(LabelMask mask);

struct GreedySequence {
  std::vector<Label> order;          // y_1, .., y_K
  std::vector<double> cum_coverage;  // c_1 <= .. <= c_K = 1
  std::vector<int> position;         // position[y] = j - 1 where y = y_j

  int k() const { return static_cast<int>(order.size()); }
  /// c_j with c_0 = 0.
  double c(int j) const { return j == 0 ? 0.0 : cum_coverage[j - 1]; }
};

/// Greedy order of maximal coverage increments; ties go to the smallest
/// label.
GreedySequence greedy_sequence(const DiscreteWeakDistribution& dist);

/// Closed form for label-independent laws (conditioned on W nonempty):
/// labels sorted by marginal descending, ties by label.
GreedySequence greedy_sequence_independent(std::span<const double> marginals);

/// Two nested deterministic sets and the probability of taking the larger.
struct RandomizedSet {
  std::vector<Label> inner;  // first j - 1 greedy labels
  std::vector<Label> outer;  // first j greedy labels
  double t = 0.0;

  /// outer if u < t, else inner. Returned sorted.
  std::vector<Label> realize(double u) const;
  double expected_size() const { return static_cast<double>(inner.size()) + t; }
};

/// j = min{j : c_j >= eta}, t = (eta - c_{j-1}) / (c_j - c_{j-1}); c_j == eta
/// (within kTolerance) gives t = 1.
RandomizedSet greedy_set(const GreedySequence& seq, double eta);
RandomizedSet greedy_set(const DiscreteWeakDistribution& dist, double eta);

/// c_{j-1} + u (c_j - c_{j-1}) for y = y_j. y is in greedy_set(seq, eta)
/// realized at u iff nested_score(seq, y, u) <= eta, except on a null set
/// of u.
double nested_score(const GreedySequence& seq, Label y, double u);

/// Expected size of a conditionally optimal randomized set: the concave
/// majorant of F(s) = max{P(W meets C) : |C| = s} interpolated at eta.
struct OptimalMixture {
  double expected_size = 0.0;
  LabelMask low = 0;     // size floor(expected_size) or the lower hull vertex
  LabelMask high = 0;    // taken with probability weight_high
  double weight_high = 0.0;
};

/// Exhaustive over 2^K subsets, K <= 20 (kLimitExceeded otherwise).
OptimalMixture brute_force_optimal(const DiscreteWeakDistribution& dist, double eta);

/// min{|C| : P(W meets C) >= eta}, exhaustive, K <= 20.
int min_deterministic_cover(const DiscreteWeakDistribution& dist, double eta);

/// Best coverage per subset size, F(0..K), exhaustive, K <= 20.
std::vector<double> best_coverage_by_size(const DiscreteWeakDistribution& dist);

/// K_{P,eta,x} as the minimum of three ratios; a term whose denominator
/// vanishes is dropped. +infinity if all three are dropped.
double wolsey_constant(const DiscreteWeakDistribution& dist, double eta);

enum class WeakStructure { kLabelIndependent, kTree, kGeneral };

const char* structure_name(WeakStructure s);

/// Label independence is tested first (conditioned on W nonempty), then the
/// nested-or-disjoint tree condition on the support.
WeakStructure check_structure(const DiscreteWeakDistribution& dist);

/// Per-x coverage profile: greedy cumulative coverages and the mass p(x).
struct CoverageCurve {
  std::vector<double> cum_coverage;
  double weight = 0.0;
};

struct MarginalAllocation {
  std::vector<double> eta;
  std::vector<double> expected_size;
  /// True where the concave-majorant projection changed the curve.
  std::vector<bool> projected;
  double total_coverage = 0.0;  // sum p(x) eta(x), weights normalized
  double total_size = 0.0;      // sum p(x) size(x, eta(x))
};

/// Minimizes the weighted expected size subject to weighted coverage
/// >= 1 - alpha. Weights are normalized to sum to one. Segments with equal
/// coverage-per-size efficiency are filled by a common fraction.
MarginalAllocation marginal_allocation(std::span<const CoverageCurve> curves, double alpha);

}  // namespace wsconf
