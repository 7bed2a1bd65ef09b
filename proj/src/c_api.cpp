#include "wsconf/wsconf.h"

#include <cstdlib>
#include <cstring>
#include <memory>
#include <new>
#include <string>

#include "wsconf/dataset_io.hpp"
#include "wsconf/error.hpp"
#include "wsconf/experiment.hpp"
#include "wsconf/greedy.hpp"
#include "wsconf/matching.hpp"
#include "wsconf/mbest.hpp"
#include "wsconf/ranking.hpp"

using namespace wsconf;

struct wsc_distribution {
  DiscreteWeakDistribution dist;
  GreedySequence seq;
};

namespace {

thread_local std::string g_last_error;

wsc_status set_error(wsc_status s, const std::string& msg) {
  g_last_error = msg;
  return s;
}

template <class F>
wsc_status guarded(F&& f) {
  try {
    f();
    return WSC_OK;
  } catch (const Error& e) {
    return set_error(static_cast<wsc_status>(e.code()), e.what());
  } catch (const nlohmann::json::exception& e) {
    return set_error(WSC_ERR_PARSE, e.what());
  } catch (const std::bad_alloc&) {
    return set_error(WSC_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return set_error(WSC_ERR_INTERNAL, e.what());
  } catch (...) {
    return set_error(WSC_ERR_INTERNAL, "unknown exception");
  }
}

void need(const void* p, const char* what) {
  if (p == nullptr) fail(ErrorCode::kInvalidArgument, std::string(what) + " is NULL");
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

// Engines keep a reference to their backend, so each owner holds both.
class EngineBase {
 public:
  virtual ~EngineBase() = default;
  virtual void grow(std::size_t m) = 0;
  virtual std::pair<std::size_t, bool> until(double threshold, std::size_t cap) = 0;
  virtual std::size_t count() const = 0;
  virtual bool exhausted() const = 0;
  virtual void config(std::size_t i, int* out, double* score) const = 0;
};

template <class B>
class EngineOwner final : public EngineBase {
 public:
  explicit EngineOwner(B backend)
      : backend_(std::make_unique<B>(std::move(backend))), engine_(*backend_) {}

  void grow(std::size_t m) override { engine_.grow(m); }
  std::pair<std::size_t, bool> until(double threshold, std::size_t cap) override {
    const auto r = enumerate_until(engine_, threshold, cap);
    return {r.size(), r.truncated};
  }
  std::size_t count() const override { return engine_.size(); }
  bool exhausted() const override { return engine_.exhausted(); }
  void config(std::size_t i, int* out, double* score) const override {
    require(i < engine_.size(), "config index out of range");
    const auto& c = engine_.configs()[i];
    if constexpr (std::is_same_v<typename B::Config, Ranking>) {
      for (std::size_t j = 0; j < c.perm.size(); ++j) out[j] = c.perm[j];
    } else {
      for (std::size_t j = 0; j < c.map.size(); ++j) out[j] = c.map[j];
    }
    if (score != nullptr) *score = engine_.scores()[i];
  }

 private:
  std::unique_ptr<B> backend_;
  MBestEngine<B> engine_;
};

}  // namespace

struct wsc_mbest {
  std::unique_ptr<EngineBase> engine;
  int k = 0;
};

struct wsc_instances {
  std::string task;
  std::vector<std::vector<double>> relevance;
  std::vector<CostMatrix> costs;
};

extern "C" {

const char* wsc_last_error(void) { return g_last_error.c_str(); }

const char* wsc_status_name(wsc_status s) {
  switch (s) {
    case WSC_OK:
      return "ok";
    case WSC_ERR_INVALID_ARGUMENT:
      return "invalid_argument";
    case WSC_ERR_PARSE:
      return "parse_error";
    case WSC_ERR_IO:
      return "io_error";
    case WSC_ERR_INFEASIBLE:
      return "infeasible";
    case WSC_ERR_LIMIT_EXCEEDED:
      return "limit_exceeded";
    case WSC_ERR_INCONSISTENT_DATA:
      return "inconsistent_data";
    case WSC_ERR_UNSUPPORTED:
      return "unsupported";
    case WSC_ERR_INTERNAL:
      return "internal_error";
  }
  return "unknown";
}

const char* wsc_version(void) { return library_version(); }

void wsc_string_free(char* s) { std::free(s); }

// ---- thresholds ----

wsc_status wsc_conformal_threshold(const double* scores, size_t n, double alpha, double* t_hat,
                                   size_t* order_index) {
  return guarded([&] {
    need(scores, "scores");
    need(t_hat, "t_hat");
    const ConformalThreshold t = conformal_threshold(std::span<const double>(scores, n), alpha);
    *t_hat = t.t_hat;
    if (order_index != nullptr) *order_index = t.order_index;
  });
}

wsc_status wsc_calibrate_file(const char* path, double alpha, double* t_hat, size_t* order_index,
                              size_t* n_out) {
  return guarded([&] {
    need(path, "path");
    need(t_hat, "t_hat");
    const std::vector<double> scores = read_scores(std::string(path));
    const ConformalThreshold t = conformal_threshold(scores, alpha);
    *t_hat = t.t_hat;
    if (order_index != nullptr) *order_index = t.order_index;
    if (n_out != nullptr) *n_out = scores.size();
  });
}

wsc_status wsc_rank_conformalize(const int64_t* ranks, const int64_t* offsets, size_t n,
                                 double alpha, int64_t* q_hat, int* infinite) {
  return guarded([&] {
    need(ranks, "ranks");
    need(q_hat, "q_hat");
    std::vector<std::int64_t> off(n, 0);
    if (offsets != nullptr) off.assign(offsets, offsets + n);
    const RankThreshold r =
        rank_conformalize(std::span<const std::int64_t>(ranks, n), off, alpha);
    *q_hat = r.q_hat;
    if (infinite != nullptr) *infinite = r.infinite ? 1 : 0;
  });
}

// ---- distributions ----

wsc_status wsc_distribution_from_json(const char* json, wsc_distribution** out) {
  return guarded([&] {
    need(json, "json");
    need(out, "out");
    Json j;
    try {
      j = Json::parse(json);
    } catch (const Json::parse_error& e) {
      fail(ErrorCode::kParse, std::string("distribution: ") + e.what());
    }
    DiscreteWeakDistribution d = distribution_from_json(j);
    GreedySequence seq = greedy_sequence(d);
    *out = new wsc_distribution{std::move(d), std::move(seq)};
  });
}

wsc_status wsc_distribution_label_independent(const double* marginals, int k,
                                              wsc_distribution** out) {
  return guarded([&] {
    need(marginals, "marginals");
    need(out, "out");
    require(k >= 1, "k must be positive");
    const std::span<const double> p(marginals, static_cast<std::size_t>(k));
    DiscreteWeakDistribution d = DiscreteWeakDistribution::label_independent(p);
    GreedySequence seq = greedy_sequence_independent(p);
    *out = new wsc_distribution{std::move(d), std::move(seq)};
  });
}

void wsc_distribution_free(wsc_distribution* d) { delete d; }

int wsc_distribution_k(const wsc_distribution* d) { return d == nullptr ? 0 : d->dist.k(); }

wsc_status wsc_greedy_sequence(const wsc_distribution* d, int* order, double* cum_coverage) {
  return guarded([&] {
    need(d, "distribution");
    for (int j = 0; j < d->seq.k(); ++j) {
      if (order != nullptr) order[j] = d->seq.order[j];
      if (cum_coverage != nullptr) cum_coverage[j] = d->seq.cum_coverage[j];
    }
  });
}

wsc_status wsc_greedy_set(const wsc_distribution* d, double eta, uint64_t* inner, uint64_t* outer,
                          double* t, double* expected_size) {
  return guarded([&] {
    need(d, "distribution");
    const RandomizedSet s = greedy_set(d->seq, eta);
    if (inner != nullptr) *inner = mask_of(s.inner);
    if (outer != nullptr) *outer = mask_of(s.outer);
    if (t != nullptr) *t = s.t;
    if (expected_size != nullptr) *expected_size = s.expected_size();
  });
}

wsc_status wsc_optimal_set(const wsc_distribution* d, double eta, double* expected_size,
                           uint64_t* low, uint64_t* high, double* weight_high) {
  return guarded([&] {
    need(d, "distribution");
    const OptimalMixture m = brute_force_optimal(d->dist, eta);
    if (expected_size != nullptr) *expected_size = m.expected_size;
    if (low != nullptr) *low = m.low;
    if (high != nullptr) *high = m.high;
    if (weight_high != nullptr) *weight_high = m.weight_high;
  });
}

wsc_status wsc_min_deterministic_cover(const wsc_distribution* d, double eta, int* size) {
  return guarded([&] {
    need(d, "distribution");
    need(size, "size");
    *size = min_deterministic_cover(d->dist, eta);
  });
}

wsc_status wsc_wolsey_constant(const wsc_distribution* d, double eta, double* constant) {
  return guarded([&] {
    need(d, "distribution");
    need(constant, "constant");
    *constant = wolsey_constant(d->dist, eta);
  });
}

wsc_status wsc_check_structure(const wsc_distribution* d, int* structure) {
  return guarded([&] {
    need(d, "distribution");
    need(structure, "structure");
    *structure = static_cast<int>(check_structure(d->dist));
  });
}

wsc_status wsc_nested_score(const wsc_distribution* d, int label, double u, double* score) {
  return guarded([&] {
    need(d, "distribution");
    need(score, "score");
    require(label >= 0 && label < d->seq.k(), "label out of range");
    require(u >= 0.0 && u <= 1.0, "u must lie in [0, 1]");
    *score = nested_score(d->seq, label, u);
  });
}

// ---- mbest ----

wsc_status wsc_mbest_ranking(const double* relevance, int k, wsc_psi psi, double c,
                             wsc_mbest** out) {
  return guarded([&] {
    need(relevance, "relevance");
    need(out, "out");
    require(k >= 1, "k must be positive");
    require(psi == WSC_PSI_HINGE || psi == WSC_PSI_EXP, "unknown psi");
    const PsiSpec spec = psi == WSC_PSI_EXP ? PsiSpec::exp_weighted(c) : PsiSpec::hinge();
    RankingProblem problem(std::vector<double>(relevance, relevance + k), spec);
    auto h = std::make_unique<wsc_mbest>();
    h->engine = std::make_unique<EngineOwner<RankingProblem>>(std::move(problem));
    h->k = k;
    *out = h.release();
  });
}

wsc_status wsc_mbest_matching(const double* costs, int k, int translated, wsc_mbest** out) {
  return guarded([&] {
    need(costs, "costs");
    need(out, "out");
    require(k >= 1, "k must be positive");
    CostMatrix m(k, std::vector<double>(costs, costs + static_cast<std::size_t>(k) * k));
    auto h = std::make_unique<wsc_mbest>();
    h->engine =
        std::make_unique<EngineOwner<MatchingProblem>>(MatchingProblem(std::move(m), translated != 0));
    h->k = k;
    *out = h.release();
  });
}

void wsc_mbest_free(wsc_mbest* e) { delete e; }

int wsc_mbest_k(const wsc_mbest* e) { return e == nullptr ? 0 : e->k; }

wsc_status wsc_mbest_grow(wsc_mbest* e, size_t m) {
  return guarded([&] {
    need(e, "engine");
    e->engine->grow(m);
  });
}

wsc_status wsc_mbest_until(wsc_mbest* e, double threshold, size_t cap, size_t* count,
                           int* truncated) {
  return guarded([&] {
    need(e, "engine");
    const auto [n, trunc] = e->engine->until(threshold, cap);
    if (count != nullptr) *count = n;
    if (truncated != nullptr) *truncated = trunc ? 1 : 0;
  });
}

size_t wsc_mbest_count(const wsc_mbest* e) { return e == nullptr ? 0 : e->engine->count(); }

int wsc_mbest_exhausted(const wsc_mbest* e) {
  return e == nullptr ? 1 : (e->engine->exhausted() ? 1 : 0);
}

wsc_status wsc_mbest_config(const wsc_mbest* e, size_t i, int* config, double* score) {
  return guarded([&] {
    need(e, "engine");
    need(config, "config");
    e->engine->config(i, config, score);
  });
}

wsc_status wsc_hungarian(const double* costs, int k, int* assignment, double* cost) {
  return guarded([&] {
    need(costs, "costs");
    require(k >= 1, "k must be positive");
    CostMatrix m(k, std::vector<double>(costs, costs + static_cast<std::size_t>(k) * k));
    const auto sol = hungarian(m);
    if (!sol) fail(ErrorCode::kInfeasible, "no perfect assignment");
    if (assignment != nullptr) {
      for (int u = 0; u < k; ++u) assignment[u] = sol->assignment.map[u];
    }
    if (cost != nullptr) *cost = sol->cost;
  });
}

// ---- instances ----

wsc_status wsc_instances_read(const char* task, const char* path, wsc_instances** out) {
  return guarded([&] {
    need(task, "task");
    need(path, "path");
    need(out, "out");
    auto s = std::make_unique<wsc_instances>();
    s->task = task;
    if (s->task == "rank") {
      s->relevance = read_relevance_csv(path);
    } else if (s->task == "match") {
      s->costs = read_cost_matrices(path);
    } else {
      fail(ErrorCode::kInvalidArgument, "task must be 'rank' or 'match'");
    }
    *out = s.release();
  });
}

void wsc_instances_free(wsc_instances* s) { delete s; }

size_t wsc_instances_count(const wsc_instances* s) {
  if (s == nullptr) return 0;
  return s->task == "rank" ? s->relevance.size() : s->costs.size();
}

wsc_status wsc_instances_mbest(const wsc_instances* s, size_t i, wsc_psi psi, double c,
                               int translated, wsc_mbest** out) {
  if (s == nullptr) return set_error(WSC_ERR_INVALID_ARGUMENT, "instances is NULL");
  if (i >= wsc_instances_count(s)) {
    return set_error(WSC_ERR_INVALID_ARGUMENT, "instance index out of range");
  }
  if (s->task == "rank") {
    const auto& r = s->relevance[i];
    return wsc_mbest_ranking(r.data(), static_cast<int>(r.size()), psi, c, out);
  }
  const CostMatrix& m = s->costs[i];
  return wsc_mbest_matching(m.values().data(), m.k(), translated, out);
}

// ---- datasets, evaluation, experiments ----

namespace {

ExperimentConfig parse_config(const char* config_json) {
  need(config_json, "config_json");
  Json j;
  try {
    j = Json::parse(config_json);
  } catch (const Json::parse_error& e) {
    fail(ErrorCode::kParse, std::string("config: ") + e.what());
  }
  ExperimentConfig c = config_from_json(j);
  c.validate();
  return c;
}

}  // namespace

wsc_status wsc_eval_files(const char* sets_path, const char* records_path, char** report_json) {
  return guarded([&] {
    need(sets_path, "sets_path");
    need(records_path, "records_path");
    need(report_json, "report_json");
    const std::vector<PredictionSet> sets = read_sets(sets_path);
    const std::vector<Record> records = read_records(std::string(records_path));
    *report_json = dup_string(report_to_json(evaluate(sets, records)).dump());
  });
}

wsc_status wsc_generate(const char* config_json, size_t trial, const char* path,
                        size_t* n_written) {
  return guarded([&] {
    need(path, "path");
    const ExperimentConfig c = parse_config(config_json);
    const std::vector<Record> records = trial_records(c, trial);
    write_records(std::string(path), records);
    if (n_written != nullptr) *n_written = records.size();
  });
}

wsc_status wsc_run_experiment(const char* config_json, char** results_json) {
  return guarded([&] {
    const ExperimentConfig c = parse_config(config_json);
    const std::vector<TrialResult> results = run(c);
    if (!c.out.empty()) write_results(c, results);
    if (results_json != nullptr) {
      Json rows = Json::array();
      for (const TrialResult& r : results) rows.push_back(result_to_json(r));
      *results_json = dup_string(Json{{"meta", run_metadata(c)}, {"results", rows}}.dump());
    }
  });
}

wsc_status wsc_config_check(const char* config_json, char** canonical_json) {
  return guarded([&] {
    const ExperimentConfig c = parse_config(config_json);
    if (canonical_json != nullptr) *canonical_json = dup_string(config_to_json(c).dump());
  });
}

}  // extern "C"
