#pragma once

// Experiment harness: generate, train, calibrate and evaluate the GWS, WSC,
// FSC and pessimistic pipelines over repeated trials.

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"
#include "wsconf/conformal.hpp"
#include "wsconf/synth.hpp"

namespace wsconf {

enum class Task { kClassify, kRank, kMatch, kRegress };

const char* task_name(Task t);
Task task_from_name(const std::string& name);

struct ExperimentConfig {
  Task task = Task::kClassify;
  double alpha = 0.1;
  std::size_t trials = 20;
  std::uint64_t seed = 0;
  /// Empty selects the task default: gws, wsc, fsc for classify; wsc, fsc
  /// otherwise. "pessimistic" is available for classify and regress.
  std::vector<std::string> methods;

  std::size_t n = 10000;
  double train_frac = 0.3;
  double cal_frac = 0.2;
  /// Explicit split sizes; when any is nonzero all three are used and n is
  /// ignored.
  std::size_t n_train = 0;
  std::size_t n_cal = 0;
  std::size_t n_test = 0;

  int k = 0;  // 0 selects the task default (10, 7, 6; unused for regress)
  int d = 2;
  double sigma = 1.0;           // classify, rank
  double mu = 0.1;              // regress
  double response_noise = 0.1;  // regress
  double cost_noise = 0.0;      // match
  double poisson_rate = 0.5;    // rank, match
  int min_weak_size = 1;        // classify

  std::string psi = "hinge";  // rank: "hinge" or "exp"
  double psi_c = 1.0;

  std::size_t m_max = 1000;  // cap on enumerated set sizes (rank, match)
  unsigned threads = 1;

  LogisticOptions logistic;
  double listnet_step = 0.1;
  int listnet_epochs = 200;

  std::string out;  // results go to <out>.csv and <out>.jsonl

  int effective_k() const;
  std::vector<std::string> effective_methods() const;
  /// Value reported in the CSV "param" column: sigma (classify, rank), mu
  /// (regress) or cost noise (match).
  double param() const;
  void validate() const;
};

/// Applies the keys present in `j` on top of `base`. Unknown keys are an
/// error.
ExperimentConfig config_from_json(const nlohmann::json& j, ExperimentConfig base = {});
nlohmann::json config_to_json(const ExperimentConfig& c);

struct TrialResult {
  std::size_t trial = 0;
  std::string method;
  double param = 0.0;
  double strong_cov = 0.0;
  double weak_cov = 0.0;
  double avg_size = 0.0;
  double p50_size = 0.0;
  double p90_size = 0.0;
  double threshold = 0.0;
  double seconds = 0.0;
  double truncated_fraction = 0.0;
  std::size_t n_test = 0;
};

struct MethodPlan {
  std::string method;
  std::shared_ptr<const ScoreModel> model;
  ConformalThreshold threshold;
  double seconds = 0.0;  // training share plus calibration
};

/// One trial after training and calibration, before evaluation.
struct PreparedTrial {
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  std::vector<Record> train;
  std::vector<Record> cal;
  std::vector<Record> test;
  std::vector<MethodPlan> methods;

  const MethodPlan& plan(const std::string& method) const;
};

std::uint64_t trial_seed(const ExperimentConfig& c, std::size_t trial);

/// Train, calibration and test records of one trial (train first), before
/// any model is fitted. Record ids are positions in this list.
std::vector<Record> trial_records(const ExperimentConfig& c, std::size_t trial);

PreparedTrial prepare_trial(const ExperimentConfig& c, std::size_t trial);
std::vector<TrialResult> evaluate_trial(const ExperimentConfig& c, const PreparedTrial& p);

/// All trials, ordered by trial and then by method.
std::vector<TrialResult> run(const ExperimentConfig& c);

inline constexpr const char* kCsvHeader =
    "trial,method,param,strong_cov,weak_cov,avg_size,p50_size,p90_size,threshold,seconds";

std::string csv_row(const TrialResult& r);
nlohmann::json result_to_json(const TrialResult& r);
/// Run metadata: config echo, library version and the conventions in force.
nlohmann::json run_metadata(const ExperimentConfig& c);

/// Appends rows to <out>.csv (header only when the file is new or empty)
/// and one {"meta", "results"} object to <out>.jsonl.
void write_results(const ExperimentConfig& c, const std::vector<TrialResult>& results);

const char* library_version();

}  // namespace wsconf
