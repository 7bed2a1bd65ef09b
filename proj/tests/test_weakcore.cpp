#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "oracles.hpp"
#include "wsconf/conformal.hpp"
#include "wsconf/error.hpp"
#include "wsconf/regression.hpp"
#include "wsconf/weak_label.hpp"

using namespace wsconf;

namespace {

const double kInf = std::numeric_limits<double>::infinity();

ExplicitSet set_of(std::vector<Label> labels, int k) { return ExplicitSet{std::move(labels), k}; }

class FixedScores final : public ScoreModel {
 public:
  explicit FixedScores(std::vector<std::vector<double>> s) : s_(std::move(s)) {}
  std::unique_ptr<ScoreOracle> oracle(const Record& r) const override {
    return std::make_unique<ExplicitScoreOracle>(s_[r.id]);
  }

 private:
  std::vector<std::vector<double>> s_;
};

}  // namespace

TEST(ConformalThreshold, OrderStatisticExamples) {
  std::vector<double> s{0.1, 0.2, 0.3, 0.4};
  auto t = conformal_threshold(s, 0.25);
  EXPECT_EQ(t.order_index, 4u);
  EXPECT_DOUBLE_EQ(t.t_hat, 0.4);

  std::vector<double> one{5.0};
  t = conformal_threshold(one, 0.9);
  EXPECT_EQ(t.order_index, 1u);
  EXPECT_DOUBLE_EQ(t.t_hat, 5.0);

  std::vector<double> two{1.0, 2.0};
  t = conformal_threshold(two, 0.01);
  EXPECT_EQ(t.order_index, 3u);
  EXPECT_TRUE(t.is_infinite());
  EXPECT_EQ(t.t_hat, kInf);
}

TEST(ConformalThreshold, UnsortedInputAndFsc) {
  std::vector<double> s{0.8, 0.2, 0.6, 0.4};
  EXPECT_DOUBLE_EQ(fsc_threshold(s, 0.25).t_hat, 0.8);
}

TEST(ConformalThreshold, OrderIndexAvoidsRoundingUp) {
  // (n + 1)(1 - alpha) is an integer in exact arithmetic for all of these.
  EXPECT_EQ(conformal_order_index(4, 0.25), 4u);
  EXPECT_EQ(conformal_order_index(9, 0.1), 9u);
  EXPECT_EQ(conformal_order_index(19, 0.05), 19u);
  EXPECT_EQ(conformal_order_index(99, 0.1), 90u);
  EXPECT_EQ(conformal_order_index(1000, 0.1), 901u);
}

TEST(ConformalThreshold, Errors) {
  std::vector<double> empty;
  std::vector<double> s{1.0};
  std::vector<double> nan{std::nan("")};
  EXPECT_THROW(conformal_threshold(empty, 0.1), Error);
  EXPECT_THROW(conformal_threshold(s, 0.0), Error);
  EXPECT_THROW(conformal_threshold(s, 1.0), Error);
  EXPECT_THROW(conformal_threshold(nan, 0.1), Error);
}

TEST(ConformalThreshold, AdmitsWithTolerance) {
  ConformalThreshold t;
  t.t_hat = 0.5;
  t.n = 1;
  t.order_index = 1;
  EXPECT_TRUE(t.admits(0.5));
  EXPECT_TRUE(t.admits(0.5 + 1e-12));
  EXPECT_FALSE(t.admits(0.51));
}

TEST(ConformalThreshold, WeakNeverAboveStrong) {
  Rng rng = make_rng(7, 0);
  for (int rep = 0; rep < 200; ++rep) {
    const int n = 1 + static_cast<int>(uniform01(rng) * 50);
    std::vector<double> strong = oracle::random_vector(rng, n);
    std::vector<double> weak(n);
    for (int i = 0; i < n; ++i) weak[i] = strong[i] * uniform01(rng);
    const double alpha = 0.01 + 0.9 * uniform01(rng);
    EXPECT_LE(conformal_threshold(weak, alpha).t_hat, conformal_threshold(strong, alpha).t_hat);
    EXPECT_EQ(conformal_threshold(strong, alpha).t_hat, fsc_threshold(strong, alpha).t_hat);
  }
}

TEST(PartialScore, ExplicitSetIsDirectMinimum) {
  ExplicitScoreOracle o({0.5, 0.9, 0.1});
  // Labels {2, 3} in 1-based ids.
  EXPECT_DOUBLE_EQ(partial_score(o, set_of({1, 2}, 3)), 0.1);
  EXPECT_DOUBLE_EQ(partial_score(o, set_of({1}, 3)), o.score(Label{1}));
}

TEST(PartialScore, IntervalClampDistance) {
  IntervalScoreOracle o(0.5);
  EXPECT_NEAR(partial_score(o, Interval{0.6, 0.8}), 0.1, 1e-15);
}

TEST(PartialScore, VariantMismatchIsAnError) {
  ExplicitScoreOracle o({0.5, 0.9, 0.1});
  EXPECT_THROW(o.min_over(Interval{0, 1}), Error);
  IntervalScoreOracle r(0.5);
  EXPECT_THROW(r.min_over(set_of({0}, 3)), Error);
}

TEST(PessimisticScore, UsesMaximumOverW) {
  ExplicitScoreOracle o({0.1, 0.9, 0.5});
  EXPECT_DOUBLE_EQ(o.max_over(set_of({0, 1}, 3)), 0.9);
}

TEST(PessimisticThreshold, SingletonsMatchFsc) {
  std::vector<std::vector<double>> scores;
  std::vector<Record> recs;
  Rng rng = make_rng(3, 0);
  for (std::size_t i = 0; i < 40; ++i) {
    scores.push_back(oracle::random_vector(rng, 4));
    const Label y = static_cast<Label>(i % 4);
    recs.push_back({i, {}, set_of({y}, 4), StrongLabel{y}});
  }
  FixedScores model(scores);
  const auto pess = pessimistic_threshold(model, recs, 0.1);
  const auto fsc = calibrate(model, recs, CalibrationKind::kStrong, 0.1);
  const auto wsc = weak_threshold(model, recs, 0.1);
  EXPECT_EQ(pess.t_hat, fsc.t_hat);
  EXPECT_EQ(wsc.t_hat, fsc.t_hat);
}

TEST(Calibration, RejectsRecordsWithoutStrongLabelForFsc) {
  FixedScores model({{0.1, 0.2}});
  std::vector<Record> recs{{0, {}, set_of({0}, 2), std::nullopt}};
  EXPECT_THROW(calibrate(model, recs, CalibrationKind::kStrong, 0.1), Error);
  EXPECT_NO_THROW(calibrate(model, recs, CalibrationKind::kPartial, 0.1));
}

TEST(Evaluate, FullAndEmptySets) {
  std::vector<Record> recs;
  for (std::size_t i = 0; i < 3; ++i) {
    recs.push_back({i, {}, set_of({0, 1}, 3), StrongLabel{Label{1}}});
  }
  std::vector<PredictionSet> full(3, LabelSet{{0, 1, 2}});
  auto rep = evaluate(full, recs);
  EXPECT_DOUBLE_EQ(rep.strong_coverage, 1.0);
  EXPECT_DOUBLE_EQ(rep.weak_coverage, 1.0);
  EXPECT_DOUBLE_EQ(rep.avg_size, 3.0);

  std::vector<PredictionSet> empty(3, LabelSet{});
  rep = evaluate(empty, recs);
  EXPECT_DOUBLE_EQ(rep.strong_coverage, 0.0);
  EXPECT_DOUBLE_EQ(rep.weak_coverage, 0.0);
}

TEST(Evaluate, CoversWButNotY) {
  std::vector<Record> recs;
  for (std::size_t i = 0; i < 3; ++i) {
    recs.push_back({i, {}, set_of({0, 1}, 3), StrongLabel{Label{1}}});
  }
  std::vector<PredictionSet> sets{LabelSet{{1}}, LabelSet{{0}}, LabelSet{{1, 2}}};
  const auto rep = evaluate(sets, recs);
  EXPECT_NEAR(rep.strong_coverage, 2.0 / 3.0, 1e-15);
  EXPECT_DOUBLE_EQ(rep.weak_coverage, 1.0);
  EXPECT_EQ(rep.size_histogram.at(1), 2u);
  EXPECT_EQ(rep.size_histogram.at(2), 1u);
}

TEST(Evaluate, InconsistentRecordIsAnError) {
  std::vector<Record> recs{{0, {}, set_of({0}, 3), StrongLabel{Label{2}}}};
  std::vector<PredictionSet> sets{LabelSet{{0}}};
  try {
    evaluate(sets, recs);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInconsistentData);
  }
}

TEST(Evaluate, IntervalSets) {
  std::vector<Record> recs{{0, {}, Interval{0.6, 0.8}, StrongLabel{0.7}}};
  std::vector<PredictionSet> sets{Interval{0.4, 0.6}};
  const auto rep = evaluate(sets, recs);
  EXPECT_DOUBLE_EQ(rep.strong_coverage, 0.0);
  EXPECT_DOUBLE_EQ(rep.weak_coverage, 1.0);
  EXPECT_NEAR(rep.avg_size, 0.2, 1e-15);
  EXPECT_TRUE(rep.size_histogram.empty());
}

TEST(WeakLabel, Validation) {
  EXPECT_THROW(validate(WeakLabel{set_of({}, 3)}), Error);
  EXPECT_THROW(validate(WeakLabel{set_of({2, 1}, 3)}), Error);
  EXPECT_THROW(validate(WeakLabel{set_of({3}, 3)}), Error);
  EXPECT_THROW(validate(WeakLabel{Interval{1.0, 0.0}}), Error);
  EXPECT_THROW(validate(WeakLabel{RankingPrefix{{0, 0}, 3}}), Error);
  EXPECT_THROW(validate(WeakLabel{PartialMatching{{{0, 1}, {1, 1}}, 3}}), Error);
  EXPECT_NO_THROW(validate(WeakLabel{PartialMatching{{{0, 1}, {1, 0}}, 3}}));
}

TEST(WeakLabel, Containment) {
  EXPECT_TRUE(weak_contains(set_of({0, 2}, 3), StrongLabel{Label{2}}));
  EXPECT_FALSE(weak_contains(set_of({0, 2}, 3), StrongLabel{Label{1}}));
  EXPECT_TRUE(weak_contains(Interval{0, 1}, StrongLabel{1.0}));
  EXPECT_TRUE(weak_contains(RankingPrefix{{2}, 3}, StrongLabel{Ranking{{2, 0, 1}}}));
  EXPECT_FALSE(weak_contains(RankingPrefix{{2}, 3}, StrongLabel{Ranking{{0, 2, 1}}}));
  EXPECT_TRUE(weak_contains(PartialMatching{{{1, 0}}, 2}, StrongLabel{Assignment{{1, 0}}}));
  EXPECT_FALSE(weak_contains(PartialMatching{{{1, 1}}, 2}, StrongLabel{Assignment{{1, 0}}}));
}

// Split-conformal weak coverage on exchangeable synthetic scores: the
// threshold from partial scores covers W at level 1 - alpha on average.
TEST(CoverageProperty, WeakCoverageMonteCarlo) {
  const double alpha = 0.1;
  const int k = 6;
  Rng rng = make_rng(11, 0);
  double total = 0.0;
  const int reps = 200, n_cal = 200, n_test = 200;
  for (int rep = 0; rep < reps; ++rep) {
    std::vector<std::vector<double>> scores;
    std::vector<Record> recs;
    for (std::size_t i = 0; i < static_cast<std::size_t>(n_cal + n_test); ++i) {
      scores.push_back(oracle::random_vector(rng, k));
      std::vector<Label> w;
      for (Label y = 0; y < k; ++y) {
        if (uniform01(rng) < 0.3) w.push_back(y);
      }
      if (w.empty()) w.push_back(0);
      recs.push_back({i, {}, set_of(w, k), StrongLabel{w.front()}});
    }
    FixedScores model(scores);
    std::span<const Record> cal(recs.data(), n_cal);
    const auto t = weak_threshold(model, cal, alpha);
    int hit = 0;
    for (int i = n_cal; i < n_cal + n_test; ++i) {
      hit += t.admits(model.oracle(recs[i])->min_over(recs[i].weak)) ? 1 : 0;
    }
    total += static_cast<double>(hit) / n_test;
  }
  const double mean = total / reps;
  EXPECT_GE(mean, 1 - alpha - 0.01);
  EXPECT_LE(mean, 1 - alpha + 1.0 / (n_cal + 1) + 0.01);
}
