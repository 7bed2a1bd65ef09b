#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "oracles.hpp"
#include "wsconf/dataset_io.hpp"
#include "wsconf/error.hpp"
#include "wsconf/matching.hpp"
#include "wsconf/synth.hpp"

using namespace wsconf;

namespace {

std::string dump(const Dataset& d) {
  std::ostringstream ss;
  write_records(ss, d.records);
  return ss.str();
}

}  // namespace

TEST(Multiclass, ConsistentAndDeterministic) {
  MulticlassConfig cfg;
  cfg.n = 500;
  cfg.seed = 5;
  const auto a = gen_multiclass(cfg);
  const auto b = gen_multiclass(cfg);
  EXPECT_EQ(dump(a), dump(b));
  ASSERT_EQ(a.records.size(), 500u);
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    const Record& r = a.records[i];
    EXPECT_EQ(r.id, i);
    EXPECT_NO_THROW(check_consistent(r));
    const auto& w = std::get<ExplicitSet>(r.weak);
    EXPECT_GE(w.labels.size(), 1u);
    // Y is the argmin of the oracle scores.
    const auto& s = a.oracle[i];
    EXPECT_EQ(std::get<Label>(*r.y), std::min_element(s.begin(), s.end()) - s.begin());
  }
  cfg.seed = 6;
  EXPECT_NE(dump(gen_multiclass(cfg)), dump(a));
}

TEST(Multiclass, MinimumWeakSize) {
  MulticlassConfig cfg;
  cfg.n = 300;
  cfg.min_weak_size = 3;
  for (const Record& r : gen_multiclass(cfg).records) {
    EXPECT_GE(std::get<ExplicitSet>(r.weak).labels.size(), 3u);
  }
}

// As sigma -> 0, Y is the noiseless argmin of x . theta_y: two tiny noise
// levels on the same seed give the same labels.
TEST(Multiclass, SmallSigmaIsNoiseless) {
  MulticlassConfig cfg;
  cfg.n = 500;
  cfg.sigma = 1e-9;
  const auto a = gen_multiclass(cfg);
  cfg.sigma = 1e-12;
  const auto b = gen_multiclass(cfg);
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    EXPECT_EQ(a.records[i].x, b.records[i].x);
    EXPECT_EQ(std::get<Label>(*a.records[i].y), std::get<Label>(*b.records[i].y));
  }
}

TEST(Ranking, PrefixesAreCompatibleAndShort) {
  RankingSimConfig cfg;
  cfg.n = 2000;
  const auto d = gen_ranking(cfg);
  std::map<std::size_t, int> lengths;
  for (const Record& r : d.records) {
    EXPECT_NO_THROW(check_consistent(r));
    const auto& p = std::get<RankingPrefix>(r.weak);
    ++lengths[p.prefix.size()];
    EXPECT_LE(p.prefix.size(), 7u);
  }
  const int short_ones = lengths[1] + lengths[2] + lengths[3];
  EXPECT_GT(short_ones, 0.95 * 2000);
  EXPECT_GT(lengths[1], lengths[2]);
}

TEST(Ranking, FullPrefixWhenKIsTiny) {
  RankingSimConfig cfg;
  cfg.n = 200;
  cfg.k = 2;
  cfg.poisson_rate = 5.0;
  int full = 0;
  for (const Record& r : gen_ranking(cfg).records) {
    const auto& p = std::get<RankingPrefix>(r.weak);
    EXPECT_LE(p.prefix.size(), 2u);
    full += p.prefix.size() == 2 ? 1 : 0;
  }
  EXPECT_GT(full, 150);
}

TEST(Regression, IntervalLengthTracksMu) {
  for (double mu : {0.05, 0.1}) {
    RegressionSimConfig cfg;
    cfg.n = 5000;
    cfg.mu = mu;
    const auto d = gen_regression(cfg);
    double total = 0.0;
    for (const Record& r : d.records) {
      EXPECT_NO_THROW(check_consistent(r));
      total += std::get<Interval>(r.weak).length();
    }
    EXPECT_NEAR(total / cfg.n, 2 * mu, 0.005);
  }
}

TEST(Matching, PlantedOptimumAndPartialPairs) {
  MatchingSimConfig cfg;
  cfg.n = 300;
  const auto d = gen_matching(cfg);
  for (const Record& r : d.records) {
    EXPECT_NO_THROW(check_consistent(r));
    const auto sol = hungarian(record_costs(r));
    EXPECT_EQ(sol->assignment, std::get<Assignment>(*r.y));
    const auto& w = std::get<PartialMatching>(r.weak);
    EXPECT_GE(w.pairs.size(), 1u);
    EXPECT_LE(w.pairs.size(), 6u);
  }
}

TEST(Logistic, CumulativeScoreOfModalClass) {
  const std::vector<double> p{0.2, 0.5, 0.3};
  EXPECT_DOUBLE_EQ(cumulative_probability_score(p, 1), 0.5);
  EXPECT_DOUBLE_EQ(cumulative_probability_score(p, 2), 0.8);
  EXPECT_NEAR(cumulative_probability_score(p, 0), 1.0, 1e-15);
}

TEST(Logistic, SeparableClasses) {
  Rng rng = make_rng(71, 0);
  std::vector<std::vector<double>> x, xt;
  std::vector<Label> y, yt;
  for (int i = 0; i < 400; ++i) {
    auto v = oracle::random_vector(rng, 2, -1, 1);
    const Label c = v[0] + v[1] > 0 ? 1 : 0;
    if (std::abs(v[0] + v[1]) < 0.05) continue;
    (i < 200 ? x : xt).push_back(v);
    (i < 200 ? y : yt).push_back(c);
  }
  const auto m = train_multinomial_logistic(x, y, 2);
  int correct = 0;
  for (std::size_t i = 0; i < xt.size(); ++i) {
    const auto p = m.probs(xt[i]);
    correct += (p[1] > p[0] ? 1 : 0) == yt[i] ? 1 : 0;
  }
  EXPECT_GT(static_cast<double>(correct) / xt.size(), 0.95);
}

TEST(Logistic, GradientsMatchFiniteDifferences) {
  Rng rng = make_rng(72, 0);
  for (int rep = 0; rep < 20; ++rep) {
    const int k = 3, d = 2, n = 6;
    std::vector<std::vector<double>> x;
    std::vector<Label> y;
    std::vector<ExplicitSet> w;
    for (int i = 0; i < n; ++i) {
      x.push_back(oracle::random_vector(rng, d, -1, 1));
      y.push_back(static_cast<Label>(uniform01(rng) * k));
      std::vector<Label> labels;
      for (Label l = 0; l < k; ++l) {
        if (l == y.back() || uniform01(rng) < 0.3) labels.push_back(l);
      }
      w.push_back({labels, k});
    }
    SoftmaxModel sm{k, d, oracle::random_vector(rng, k * (d + 1), -1, 1)};
    const auto g = multinomial_gradient(sm, x, y, 0.01);
    const auto fd = oracle::numeric_gradient(
        [&](const std::vector<double>& p) {
          SoftmaxModel q = sm;
          q.params = p;
          return multinomial_objective(q, x, y, 0.01);
        },
        sm.params);
    EXPECT_LT(oracle::relative_error(g, fd), 1e-5);

    PerLabelLogisticModel pl{k, d, oracle::random_vector(rng, k * (d + 1), -1, 1)};
    const auto g2 = per_label_gradient(pl, x, w, 0.01);
    const auto fd2 = oracle::numeric_gradient(
        [&](const std::vector<double>& p) {
          PerLabelLogisticModel q = pl;
          q.params = p;
          return per_label_objective(q, x, w, 0.01);
        },
        pl.params);
    EXPECT_LT(oracle::relative_error(g2, fd2), 1e-5);
  }
}

TEST(Logistic, DimensionMismatch) {
  std::vector<std::vector<double>> x{{1.0, 2.0}, {1.0}};
  std::vector<Label> y{0, 1};
  EXPECT_THROW(train_multinomial_logistic(x, y, 2), Error);
  std::vector<Label> bad{0, 5};
  std::vector<std::vector<double>> x2{{1.0}, {2.0}};
  EXPECT_THROW(train_multinomial_logistic(x2, bad, 2), Error);
}
