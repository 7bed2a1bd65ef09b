#pragma once

// Real-valued responses with interval weak labels.

#include <span>
#include <vector>

#include "wsconf/conformal.hpp"
#include "wsconf/weak_label.hpp"

namespace wsconf {

/// |y_hat - y|.
double abs_score(double y_hat, double y);

/// min over y in w of |y_hat - y|: zero inside w, else the distance to the
/// nearer endpoint.
double interval_partial_score(double y_hat, const Interval& w);

/// max over y in w of |y_hat - y|: the distance to the farther endpoint.
double interval_pessimistic_score(double y_hat, const Interval& w);

/// [y_hat - t, y_hat + t]; the whole line when t is infinite.
Interval interval_predict(double y_hat, double t);
inline Interval interval_predict(double y_hat, const ConformalThreshold& t) {
  return interval_predict(y_hat, t.t_hat);
}

/// Absolute-error oracle around a point prediction.
class IntervalScoreOracle final : public ScoreOracle {
 public:
  explicit IntervalScoreOracle(double y_hat) : y_hat_(y_hat) {}

  double score(const StrongLabel& y) const override;
  double min_over(const WeakLabel& w) const override;
  double max_over(const WeakLabel& w) const override;
  PredictionSet predict(double t, std::size_t cap) const override;

  double y_hat() const { return y_hat_; }

 private:
  double y_hat_;
};

/// Ordinary least squares with an intercept.
struct LinearModel {
  std::vector<double> coef;  // d slopes followed by the intercept

  double predict(std::span<const double> x) const;
};

LinearModel fit_ols(std::span<const std::vector<double>> x, std::span<const double> y);

}  // namespace wsconf
