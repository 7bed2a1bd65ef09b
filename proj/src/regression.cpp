#include "wsconf/regression.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <string>

#include "wsconf/error.hpp"

namespace wsconf {

double abs_score(double y_hat, double y) { return std::abs(y_hat - y); }

double interval_partial_score(double y_hat, const Interval& w) {
  require(w.lo <= w.hi, "interval: lo must not exceed hi");
  if (y_hat < w.lo) return w.lo - y_hat;
  if (y_hat > w.hi) return y_hat - w.hi;
  return 0.0;
}

double interval_pessimistic_score(double y_hat, const Interval& w) {
  require(w.lo <= w.hi, "interval: lo must not exceed hi");
  return std::max(std::abs(y_hat - w.lo), std::abs(y_hat - w.hi));
}

Interval interval_predict(double y_hat, double t) {
  require(!std::isnan(t), "interval prediction: threshold is NaN");
  if (std::isinf(t)) {
    const double inf = std::numeric_limits<double>::infinity();
    return {-inf, inf};
  }
  require(t >= 0.0, "interval prediction: threshold must be nonnegative");
  return {y_hat - t, y_hat + t};
}

double IntervalScoreOracle::score(const StrongLabel& y) const {
  const auto* v = std::get_if<double>(&y);
  require(v != nullptr, "interval oracle needs a real response");
  return abs_score(y_hat_, *v);
}

namespace {

const Interval& as_interval(const WeakLabel& w) {
  const auto* iv = std::get_if<Interval>(&w);
  if (iv == nullptr) {
    fail(ErrorCode::kInvalidArgument,
         std::string("interval oracle cannot handle weak label of type '") + variant_name(w) + "'");
  }
  return *iv;
}

}  // namespace

double IntervalScoreOracle::min_over(const WeakLabel& w) const {
  return interval_partial_score(y_hat_, as_interval(w));
}

double IntervalScoreOracle::max_over(const WeakLabel& w) const {
  return interval_pessimistic_score(y_hat_, as_interval(w));
}

PredictionSet IntervalScoreOracle::predict(double t, std::size_t /*cap*/) const {
  return interval_predict(y_hat_, t);
}

double LinearModel::predict(std::span<const double> x) const {
  require(x.size() + 1 == coef.size(), "linear model: feature dimension mismatch");
  double v = coef.back();
  for (std::size_t j = 0; j < x.size(); ++j) v += coef[j] * x[j];
  return v;
}

LinearModel fit_ols(std::span<const std::vector<double>> x, std::span<const double> y) {
  require(!x.empty() && x.size() == y.size(), "OLS: need matching, nonempty inputs");
  const Eigen::Index n = static_cast<Eigen::Index>(x.size());
  const Eigen::Index d = static_cast<Eigen::Index>(x.front().size());
  Eigen::MatrixXd design(n, d + 1);
  Eigen::VectorXd target(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    require(static_cast<Eigen::Index>(x[i].size()) == d, "OLS: ragged features");
    for (Eigen::Index j = 0; j < d; ++j) design(i, j) = x[i][j];
    design(i, d) = 1.0;
    target(i) = y[i];
  }
  const Eigen::VectorXd beta = design.colPivHouseholderQr().solve(target);
  LinearModel m;
  m.coef.assign(beta.data(), beta.data() + beta.size());
  return m;
}

}  // namespace wsconf
