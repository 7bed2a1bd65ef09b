#include "wsconf/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <future>
#include <iomanip>
#include <map>
#include <sstream>

#include "wsconf/error.hpp"
#include "wsconf/greedy.hpp"
#include "wsconf/matching.hpp"
#include "wsconf/ranking.hpp"
#include "wsconf/regression.hpp"
#include "wsconf/rng.hpp"

namespace wsconf {

using nlohmann::json;

const char* library_version() { return "0.1.0"; }

const char* task_name(Task t) {
  switch (t) {
    case Task::kClassify:
      return "classify";
    case Task::kRank:
      return "rank";
    case Task::kMatch:
      return "match";
    case Task::kRegress:
      return "regress";
  }
  return "classify";
}

Task task_from_name(const std::string& name) {
  if (name == "classify") return Task::kClassify;
  if (name == "rank") return Task::kRank;
  if (name == "match") return Task::kMatch;
  if (name == "regress") return Task::kRegress;
  fail(ErrorCode::kInvalidArgument,
       "unknown task '" + name + "' (expected classify, rank, match or regress)");
}

int ExperimentConfig::effective_k() const {
  if (k > 0) return k;
  switch (task) {
    case Task::kClassify:
      return 10;
    case Task::kRank:
      return 7;
    case Task::kMatch:
      return 6;
    case Task::kRegress:
      return 1;
  }
  return 1;
}

std::vector<std::string> ExperimentConfig::effective_methods() const {
  if (!methods.empty()) return methods;
  if (task == Task::kClassify) return {"gws", "wsc", "fsc"};
  return {"wsc", "fsc"};
}

double ExperimentConfig::param() const {
  switch (task) {
    case Task::kClassify:
    case Task::kRank:
      return sigma;
    case Task::kRegress:
      return mu;
    case Task::kMatch:
      return cost_noise;
  }
  return 0.0;
}

void ExperimentConfig::validate() const {
  require(alpha > 0.0 && alpha < 1.0, "config: alpha must lie in (0, 1)");
  require(trials >= 1, "config: trials must be at least 1");
  require(d >= 1, "config: d must be positive");
  require(m_max >= 1, "config: m_max must be at least 1");
  require(threads >= 1, "config: threads must be at least 1");
  const bool explicit_split = n_train + n_cal + n_test > 0;
  if (explicit_split) {
    require(n_train >= 1 && n_cal >= 1 && n_test >= 1,
            "config: n_train, n_cal and n_test must all be positive when any is given");
  } else {
    require(train_frac > 0.0 && cal_frac > 0.0 && train_frac + cal_frac < 1.0,
            "config: split fractions must be positive and leave room for a test split");
    require(static_cast<double>(n) * cal_frac >= 1.0 &&
                static_cast<double>(n) * (1.0 - train_frac - cal_frac) >= 1.0 &&
                static_cast<double>(n) * train_frac >= 1.0,
            "config: n is too small for the split");
  }
  require(psi == "hinge" || psi == "exp", "config: psi must be 'hinge' or 'exp'");
  for (const std::string& m : effective_methods()) {
    require(m == "gws" || m == "wsc" || m == "fsc" || m == "pessimistic",
            "config: unknown method '" + m + "'");
    if (m == "gws" && task != Task::kClassify) {
      fail(ErrorCode::kUnsupported, "config: method 'gws' is only available for classify");
    }
    if (m == "pessimistic" && (task == Task::kRank || task == Task::kMatch)) {
      fail(ErrorCode::kUnsupported,
           "config: method 'pessimistic' needs a maximum over W, available for classify and "
           "regress only");
    }
  }
}

// ---------------------------------------------------------------------------
// Config (de)serialization

namespace {

template <class T>
void take(const json& j, const char* key, T& out) {
  if (auto it = j.find(key); it != j.end()) {
    try {
      out = it->get<T>();
    } catch (const json::exception& e) {
      fail(ErrorCode::kInvalidArgument, std::string("config: bad value for '") + key + "': " + e.what());
    }
  }
}

}  // namespace

ExperimentConfig config_from_json(const json& j, ExperimentConfig c) {
  require(j.is_object(), "config: expected a JSON object");
  static const char* known[] = {"task",   "alpha",          "trials",         "seed",
                                "methods", "n",             "train_frac",     "cal_frac",
                                "n_train", "n_cal",         "n_test",         "k",
                                "d",       "sigma",         "mu",             "response_noise",
                                "cost_noise", "poisson_rate", "min_weak_size", "psi",
                                "psi_c",   "m_max",         "threads",        "logistic_step",
                                "logistic_epochs", "logistic_l2", "listnet_step", "listnet_epochs",
                                "out"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::find_if(std::begin(known), std::end(known),
                     [&](const char* k) { return it.key() == k; }) == std::end(known)) {
      fail(ErrorCode::kInvalidArgument, "config: unknown key '" + it.key() + "'");
    }
  }
  if (auto it = j.find("task"); it != j.end()) {
    require(it->is_string(), "config: task must be a string");
    c.task = task_from_name(it->get<std::string>());
  }
  take(j, "alpha", c.alpha);
  take(j, "trials", c.trials);
  take(j, "seed", c.seed);
  take(j, "methods", c.methods);
  take(j, "n", c.n);
  take(j, "train_frac", c.train_frac);
  take(j, "cal_frac", c.cal_frac);
  take(j, "n_train", c.n_train);
  take(j, "n_cal", c.n_cal);
  take(j, "n_test", c.n_test);
  take(j, "k", c.k);
  take(j, "d", c.d);
  take(j, "sigma", c.sigma);
  take(j, "mu", c.mu);
  take(j, "response_noise", c.response_noise);
  take(j, "cost_noise", c.cost_noise);
  take(j, "poisson_rate", c.poisson_rate);
  take(j, "min_weak_size", c.min_weak_size);
  take(j, "psi", c.psi);
  take(j, "psi_c", c.psi_c);
  take(j, "m_max", c.m_max);
  take(j, "threads", c.threads);
  take(j, "logistic_step", c.logistic.step);
  take(j, "logistic_epochs", c.logistic.epochs);
  take(j, "logistic_l2", c.logistic.l2);
  take(j, "listnet_step", c.listnet_step);
  take(j, "listnet_epochs", c.listnet_epochs);
  take(j, "out", c.out);
  return c;
}

json config_to_json(const ExperimentConfig& c) {
  return {{"task", task_name(c.task)},
          {"alpha", c.alpha},
          {"trials", c.trials},
          {"seed", c.seed},
          {"methods", c.effective_methods()},
          {"n", c.n},
          {"train_frac", c.train_frac},
          {"cal_frac", c.cal_frac},
          {"n_train", c.n_train},
          {"n_cal", c.n_cal},
          {"n_test", c.n_test},
          {"k", c.effective_k()},
          {"d", c.d},
          {"sigma", c.sigma},
          {"mu", c.mu},
          {"response_noise", c.response_noise},
          {"cost_noise", c.cost_noise},
          {"poisson_rate", c.poisson_rate},
          {"min_weak_size", c.min_weak_size},
          {"psi", c.psi},
          {"psi_c", c.psi_c},
          {"m_max", c.m_max},
          {"threads", c.threads},
          {"logistic_step", c.logistic.step},
          {"logistic_epochs", c.logistic.epochs},
          {"logistic_l2", c.logistic.l2},
          {"listnet_step", c.listnet_step},
          {"listnet_epochs", c.listnet_epochs},
          {"out", c.out}};
}

// ---------------------------------------------------------------------------
// Score models

namespace {

class CumulativeProbabilityModel final : public ScoreModel {
 public:
  explicit CumulativeProbabilityModel(SoftmaxModel m) : m_(std::move(m)) {}

  std::unique_ptr<ScoreOracle> oracle(const Record& r) const override {
    const std::vector<double> p = m_.probs(r.x);
    std::vector<double> s(p.size());
    for (std::size_t y = 0; y < p.size(); ++y) s[y] = cumulative_probability_score(p, static_cast<Label>(y));
    return std::make_unique<ExplicitScoreOracle>(std::move(s));
  }

 private:
  SoftmaxModel m_;
};

// Nested greedy scores under a label-independent model of W, with one
// uniform u per record.
class GreedyNestedModel final : public ScoreModel {
 public:
  GreedyNestedModel(PerLabelLogisticModel m, std::uint64_t seed) : m_(std::move(m)), seed_(seed) {}

  std::unique_ptr<ScoreOracle> oracle(const Record& r) const override {
    const GreedySequence seq = greedy_sequence_independent(m_.marginals(r.x));
    Rng rng = make_rng(seed_, r.id);
    const double u = uniform01(rng);
    std::vector<double> s(seq.k());
    for (Label y = 0; y < seq.k(); ++y) s[y] = nested_score(seq, y, u);
    return std::make_unique<ExplicitScoreOracle>(std::move(s));
  }

 private:
  PerLabelLogisticModel m_;
  std::uint64_t seed_;
};

class ListNetRankingModel final : public ScoreModel {
 public:
  ListNetRankingModel(ListNetModel m, PsiSpec psi, bool rescale)
      : m_(std::move(m)), psi_(psi), rescale_(rescale) {}

  std::unique_ptr<ScoreOracle> oracle(const Record& r) const override {
    std::vector<double> rel = m_.relevance(r.x);
    if (rescale_) {
      const auto [lo, hi] = std::minmax_element(rel.begin(), rel.end());
      if (*hi > *lo) rel = rescale_relevances(rel);
    }
    return std::make_unique<RankingScoreOracle>(std::move(rel), psi_);
  }

 private:
  ListNetModel m_;
  PsiSpec psi_;
  bool rescale_;
};

class CostMatrixModel final : public ScoreModel {
 public:
  std::unique_ptr<ScoreOracle> oracle(const Record& r) const override {
    return std::make_unique<MatchingScoreOracle>(record_costs(r));
  }
};

class LinearIntervalModel final : public ScoreModel {
 public:
  explicit LinearIntervalModel(LinearModel m) : m_(std::move(m)) {}

  std::unique_ptr<ScoreOracle> oracle(const Record& r) const override {
    return std::make_unique<IntervalScoreOracle>(m_.predict(r.x));
  }

 private:
  LinearModel m_;
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

Dataset generate(const ExperimentConfig& c, std::uint64_t seed, std::size_t n) {
  switch (c.task) {
    case Task::kClassify:
      return gen_multiclass({n, c.effective_k(), c.d, c.sigma, seed, c.min_weak_size});
    case Task::kRank:
      return gen_ranking({n, c.effective_k(), c.d, c.sigma, seed, c.poisson_rate});
    case Task::kMatch:
      return gen_matching({n, c.effective_k(), c.cost_noise, seed, c.poisson_rate});
    case Task::kRegress:
      return gen_regression({n, c.d, c.mu, c.response_noise, seed});
  }
  fail(ErrorCode::kInternal, "unhandled task");
}

template <class T>
std::vector<T> strong_as(const std::vector<Record>& records) {
  std::vector<T> out;
  out.reserve(records.size());
  for (const Record& r : records) out.push_back(std::get<T>(*r.y));
  return out;
}

std::vector<std::vector<double>> features(const std::vector<Record>& records) {
  std::vector<std::vector<double>> out;
  out.reserve(records.size());
  for (const Record& r : records) out.push_back(r.x);
  return out;
}

double quantile(std::vector<double> v, double q) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

}  // namespace

// ---------------------------------------------------------------------------
// Trials

const MethodPlan& PreparedTrial::plan(const std::string& method) const {
  for (const MethodPlan& m : methods) {
    if (m.method == method) return m;
  }
  fail(ErrorCode::kInvalidArgument, "trial has no method '" + method + "'");
}

std::uint64_t trial_seed(const ExperimentConfig& c, std::size_t trial) {
  return derive_seed(c.seed, trial);
}

namespace {

void split_sizes(const ExperimentConfig& c, std::size_t& n_train, std::size_t& n_cal,
                 std::size_t& n_test) {
  n_train = c.n_train;
  n_cal = c.n_cal;
  n_test = c.n_test;
  if (n_train + n_cal + n_test == 0) {
    n_train = static_cast<std::size_t>(std::floor(static_cast<double>(c.n) * c.train_frac));
    n_cal = static_cast<std::size_t>(std::floor(static_cast<double>(c.n) * c.cal_frac));
    n_test = c.n - n_train - n_cal;
  }
}

}  // namespace

std::vector<Record> trial_records(const ExperimentConfig& c, std::size_t trial) {
  c.validate();
  std::size_t n_train = 0, n_cal = 0, n_test = 0;
  split_sizes(c, n_train, n_cal, n_test);
  return generate(c, trial_seed(c, trial), n_train + n_cal + n_test).records;
}

PreparedTrial prepare_trial(const ExperimentConfig& c, std::size_t trial) {
  c.validate();
  PreparedTrial p;
  p.trial = trial;
  p.seed = trial_seed(c, trial);

  std::size_t n_train = 0, n_cal = 0, n_test = 0;
  split_sizes(c, n_train, n_cal, n_test);
  std::vector<Record> recs = trial_records(c, trial);
  p.train.assign(std::make_move_iterator(recs.begin()),
                 std::make_move_iterator(recs.begin() + n_train));
  p.cal.assign(std::make_move_iterator(recs.begin() + n_train),
               std::make_move_iterator(recs.begin() + n_train + n_cal));
  p.test.assign(std::make_move_iterator(recs.begin() + n_train + n_cal),
                std::make_move_iterator(recs.end()));

  const std::vector<std::string> methods = c.effective_methods();
  const bool needs_base = std::any_of(methods.begin(), methods.end(),
                                      [](const std::string& m) { return m != "gws"; });
  const auto x_train = features(p.train);

  std::shared_ptr<const ScoreModel> base;
  double base_seconds = 0.0;
  if (needs_base) {
    const auto start = std::chrono::steady_clock::now();
    switch (c.task) {
      case Task::kClassify:
        base = std::make_shared<CumulativeProbabilityModel>(train_multinomial_logistic(
            x_train, strong_as<Label>(p.train), c.effective_k(), c.logistic));
        break;
      case Task::kRank: {
        const auto y = strong_as<Ranking>(p.train);
        ListNetFit fit = listnet_train(x_train, y, {c.listnet_step, c.listnet_epochs});
        const bool exp_psi = c.psi == "exp";
        base = std::make_shared<ListNetRankingModel>(
            std::move(fit.model), exp_psi ? PsiSpec::exp_weighted(c.psi_c) : PsiSpec::hinge(),
            exp_psi);
        break;
      }
      case Task::kMatch:
        base = std::make_shared<CostMatrixModel>();
        break;
      case Task::kRegress:
        base = std::make_shared<LinearIntervalModel>(fit_ols(x_train, strong_as<double>(p.train)));
        break;
    }
    base_seconds = seconds_since(start);
  }

  for (const std::string& m : methods) {
    const auto start = std::chrono::steady_clock::now();
    MethodPlan plan;
    plan.method = m;
    if (m == "gws") {
      std::vector<ExplicitSet> w;
      w.reserve(p.train.size());
      for (const Record& r : p.train) w.push_back(std::get<ExplicitSet>(r.weak));
      plan.model = std::make_shared<GreedyNestedModel>(
          train_per_label_logistic(x_train, w, c.effective_k(), c.logistic),
          derive_seed(p.seed, 0x6A09E667F3BCC908ULL));
      plan.threshold = calibrate(*plan.model, p.cal, CalibrationKind::kPartial, c.alpha);
    } else {
      plan.model = base;
      const CalibrationKind kind = m == "wsc"   ? CalibrationKind::kPartial
                                   : m == "fsc" ? CalibrationKind::kStrong
                                                : CalibrationKind::kPessimistic;
      plan.threshold = calibrate(*plan.model, p.cal, kind, c.alpha);
      plan.seconds = base_seconds;
    }
    plan.seconds += seconds_since(start);
    p.methods.push_back(std::move(plan));
  }
  return p;
}

std::vector<TrialResult> evaluate_trial(const ExperimentConfig& c, const PreparedTrial& p) {
  const std::size_t nm = p.methods.size();
  std::vector<CoverageAccumulator> acc(nm, CoverageAccumulator(c.task != Task::kRegress));
  std::vector<std::vector<double>> sizes(nm);
  std::vector<double> seconds(nm, 0.0);

  // Methods sharing a model share one oracle and one enumeration per record.
  std::map<const ScoreModel*, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < nm; ++i) groups[p.methods[i].model.get()].push_back(i);

  for (const auto& [model, members] : groups) {
    const auto start = std::chrono::steady_clock::now();
    std::vector<double> thresholds;
    for (std::size_t i : members) thresholds.push_back(p.methods[i].threshold.t_hat);
    for (const Record& r : p.test) {
      const auto oracle = model->oracle(r);
      const double partial = oracle->min_over(r.weak);
      const double strong = oracle->score(*r.y);
      const std::vector<SetSize> s = oracle->set_sizes(thresholds, c.m_max);
      for (std::size_t g = 0; g < members.size(); ++g) {
        const std::size_t i = members[g];
        const ConformalThreshold& t = p.methods[i].threshold;
        acc[i].add(t.admits(strong), t.admits(partial), s[g].size, s[g].truncated);
        sizes[i].push_back(s[g].size);
      }
    }
    const double elapsed = seconds_since(start) / static_cast<double>(members.size());
    for (std::size_t i : members) seconds[i] = elapsed;
  }

  std::vector<TrialResult> out;
  for (std::size_t i = 0; i < nm; ++i) {
    const CoverageReport rep = acc[i].report();
    TrialResult r;
    r.trial = p.trial;
    r.method = p.methods[i].method;
    r.param = c.param();
    r.strong_cov = rep.strong_coverage;
    r.weak_cov = rep.weak_coverage;
    r.avg_size = rep.avg_size;
    r.p50_size = quantile(sizes[i], 0.5);
    r.p90_size = quantile(sizes[i], 0.9);
    r.threshold = p.methods[i].threshold.t_hat;
    r.seconds = p.methods[i].seconds + seconds[i];
    r.truncated_fraction = rep.truncated_fraction;
    r.n_test = rep.n_test;
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<TrialResult> run(const ExperimentConfig& c) {
  c.validate();
  auto one = [&c](std::size_t trial) {
    try {
      return evaluate_trial(c, prepare_trial(c, trial));
    } catch (const Error& e) {
      fail(e.code(), "trial " + std::to_string(trial) + ": " + e.what());
    }
  };
  std::vector<std::vector<TrialResult>> per_trial(c.trials);
  if (c.threads <= 1) {
    for (std::size_t t = 0; t < c.trials; ++t) per_trial[t] = one(t);
  } else {
    for (std::size_t start = 0; start < c.trials; start += c.threads) {
      std::vector<std::future<std::vector<TrialResult>>> batch;
      const std::size_t end = std::min<std::size_t>(c.trials, start + c.threads);
      for (std::size_t t = start; t < end; ++t) batch.push_back(std::async(std::launch::async, one, t));
      for (std::size_t t = start; t < end; ++t) per_trial[t] = batch[t - start].get();
    }
  }
  std::vector<TrialResult> out;
  for (auto& rows : per_trial) out.insert(out.end(), rows.begin(), rows.end());
  return out;
}

// ---------------------------------------------------------------------------
// Output

namespace {

std::string fmt(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream ss;
  ss << std::setprecision(10) << v;
  return ss.str();
}

json number_or_string(double v) {
  if (std::isfinite(v)) return v;
  return fmt(v);
}

std::string base_path(const std::string& out) {
  for (const char* ext : {".csv", ".jsonl"}) {
    const std::string e(ext);
    if (out.size() > e.size() && out.compare(out.size() - e.size(), e.size(), e) == 0) {
      return out.substr(0, out.size() - e.size());
    }
  }
  return out;
}

}  // namespace

std::string csv_row(const TrialResult& r) {
  std::ostringstream ss;
  ss << r.trial << ',' << r.method << ',' << fmt(r.param) << ',' << fmt(r.strong_cov) << ','
     << fmt(r.weak_cov) << ',' << fmt(r.avg_size) << ',' << fmt(r.p50_size) << ','
     << fmt(r.p90_size) << ',' << fmt(r.threshold) << ',' << fmt(r.seconds);
  return ss.str();
}

json result_to_json(const TrialResult& r) {
  return {{"trial", r.trial},
          {"method", r.method},
          {"param", r.param},
          {"strong_cov", r.strong_cov},
          {"weak_cov", r.weak_cov},
          {"avg_size", r.avg_size},
          {"p50_size", r.p50_size},
          {"p90_size", r.p90_size},
          {"threshold", number_or_string(r.threshold)},
          {"seconds", r.seconds},
          {"truncated_fraction", r.truncated_fraction},
          {"n_test", r.n_test}};
}

json run_metadata(const ExperimentConfig& c) {
  return {{"config", config_to_json(c)},
          {"version", library_version()},
          {"decisions",
           {{"quantile", "k = ceil((n + 1)(1 - alpha))-th smallest score; +inf when k > n"},
            {"membership", "s(x, y) <= t + 1e-9"},
            {"classify_score", "deterministic cumulative probability: sum of p_k with p_k >= p_y"},
            {"gws_model", "per-label logistic, label-independent law conditioned on W nonempty"},
            {"gws_randomization", "one uniform u per record from (trial seed, record id)"},
            {"logistic", {{"step", c.logistic.step}, {"epochs", c.logistic.epochs},
                          {"l2", c.logistic.l2}, {"intercept", true}}},
            {"listnet", {{"step", c.listnet_step}, {"epochs", c.listnet_epochs},
                         {"init", "zero"}, {"intercept", true}}},
            {"match_score", "translated: matching cost minus the minimum cost"},
            {"regress_model", "ordinary least squares with intercept"},
            {"set_size_cap", c.m_max},
            {"ids", "1-based on disk"}}}};
}

void write_results(const ExperimentConfig& c, const std::vector<TrialResult>& results) {
  require(!c.out.empty(), "write_results: no output path");
  const std::string base = base_path(c.out);
  const std::string csv_path = base + ".csv";
  bool fresh = true;
  {
    std::ifstream probe(csv_path, std::ios::ate);
    if (probe && probe.tellg() > 0) fresh = false;
  }
  std::ofstream csv(csv_path, std::ios::app);
  if (!csv) fail(ErrorCode::kIo, "cannot open '" + csv_path + "' for appending");
  if (fresh) csv << kCsvHeader << '\n';
  for (const TrialResult& r : results) csv << csv_row(r) << '\n';
  if (!csv) fail(ErrorCode::kIo, "write to '" + csv_path + "' failed");

  const std::string json_path = base + ".jsonl";
  std::ofstream js(json_path, std::ios::app);
  if (!js) fail(ErrorCode::kIo, "cannot open '" + json_path + "' for appending");
  json rows = json::array();
  for (const TrialResult& r : results) rows.push_back(result_to_json(r));
  js << json{{"meta", run_metadata(c)}, {"results", rows}}.dump() << '\n';
  if (!js) fail(ErrorCode::kIo, "write to '" + json_path + "' failed");
}

}  // namespace wsconf
