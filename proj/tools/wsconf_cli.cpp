// wsconf command-line tool. Talks to the library only through wsconf.h.

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "wsconf/wsconf.h"

using nlohmann::json;

namespace {

struct CliFailure {
  wsc_status status;
  std::string message;
};

void check(wsc_status s) {
  if (s != WSC_OK) throw CliFailure{s, wsc_last_error()};
}

[[noreturn]] void usage_error(const std::string& msg) {
  throw CliFailure{WSC_ERR_INVALID_ARGUMENT, msg};
}

std::string num(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

json num_json(double v) {
  if (std::isfinite(v)) return v;
  return num(v);
}

std::string take_string(char* s) {
  std::string out(s == nullptr ? "" : s);
  wsc_string_free(s);
  return out;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CliFailure{WSC_ERR_IO, "cannot open '" + path + "'"};
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw CliFailure{WSC_ERR_PARSE, path + ": " + e.what()};
  }
}

// ---- calibrate ----

struct CalibrateArgs {
  double alpha = 0.1;
  std::string scores;
  bool as_json = false;
};

void cmd_calibrate(const CalibrateArgs& a) {
  double t = 0.0;
  size_t k = 0, n = 0;
  check(wsc_calibrate_file(a.scores.c_str(), a.alpha, &t, &k, &n));
  if (a.as_json) {
    std::cout << json{{"t_hat", num_json(t)}, {"order_index", k}, {"n", n}, {"alpha", a.alpha}}.dump()
              << '\n';
  } else {
    std::cout << num(t) << '\n';
  }
}

// ---- mbest ----

struct MBestArgs {
  std::string task;
  std::string instance;
  size_t m = 10;
  std::string psi = "hinge";
  double c = 1.0;
  double threshold = NAN;
  bool translated = false;
};

void cmd_mbest(const MBestArgs& a) {
  wsc_instances* raw = nullptr;
  check(wsc_instances_read(a.task.c_str(), a.instance.c_str(), &raw));
  std::unique_ptr<wsc_instances, void (*)(wsc_instances*)> inst(raw, wsc_instances_free);
  if (a.psi != "hinge" && a.psi != "exp") usage_error("--psi must be 'hinge' or 'exp'");
  const wsc_psi psi = a.psi == "exp" ? WSC_PSI_EXP : WSC_PSI_HINGE;
  const bool until = !std::isnan(a.threshold);

  for (size_t i = 0; i < wsc_instances_count(inst.get()); ++i) {
    wsc_mbest* e = nullptr;
    check(wsc_instances_mbest(inst.get(), i, psi, a.c, a.translated ? 1 : 0, &e));
    std::unique_ptr<wsc_mbest, void (*)(wsc_mbest*)> engine(e, wsc_mbest_free);
    size_t count = 0;
    int truncated = 0;
    if (until) {
      check(wsc_mbest_until(engine.get(), a.threshold, a.m, &count, &truncated));
    } else {
      check(wsc_mbest_grow(engine.get(), a.m));
      count = std::min(a.m, wsc_mbest_count(engine.get()));
    }
    std::vector<int> cfg(static_cast<size_t>(wsc_mbest_k(engine.get())));
    for (size_t j = 0; j < count; ++j) {
      double score = 0.0;
      check(wsc_mbest_config(engine.get(), j, cfg.data(), &score));
      std::vector<int> one_based(cfg.size());
      for (size_t q = 0; q < cfg.size(); ++q) one_based[q] = cfg[q] + 1;
      json line{{"instance", i + 1}, {"rank", j + 1}, {"score", score}, {"config", one_based}};
      if (until) line["truncated"] = truncated != 0;
      std::cout << line.dump() << '\n';
    }
  }
}

// ---- eval ----

void cmd_eval(const std::string& sets, const std::string& labels) {
  char* out = nullptr;
  check(wsc_eval_files(sets.c_str(), labels.c_str(), &out));
  std::cout << take_string(out) << '\n';
}

// ---- gen / run ----

struct ExperimentFlags {
  std::map<std::string, json> set;  // flags given on the command line
  std::string config_path;
};

json merged_config(const ExperimentFlags& f) {
  json c = json::object();
  for (const auto& [k, v] : f.set) c[k] = v;
  if (!f.config_path.empty()) {
    const json file = read_json_file(f.config_path);
    if (!file.is_object()) throw CliFailure{WSC_ERR_PARSE, f.config_path + ": expected an object"};
    for (auto it = file.begin(); it != file.end(); ++it) c[it.key()] = it.value();
  }
  return c;
}

void cmd_gen(const ExperimentFlags& f, size_t trial, const std::string& output) {
  const std::string cfg = merged_config(f).dump();
  size_t n = 0;
  check(wsc_generate(cfg.c_str(), trial, output.c_str(), &n));
  std::cerr << json{{"written", n}, {"path", output}}.dump() << '\n';
}

void cmd_run(const ExperimentFlags& f, bool quiet) {
  const std::string cfg = merged_config(f).dump();
  char* out = nullptr;
  check(wsc_run_experiment(cfg.c_str(), &out));
  const json res = json::parse(take_string(out));
  if (quiet) return;

  struct Mean {
    double strong = 0, weak = 0, size = 0, threshold = 0;
    size_t n = 0;
    bool inf_threshold = false;
  };
  std::vector<std::string> order;
  std::map<std::string, Mean> by_method;
  for (const json& r : res["results"]) {
    const std::string m = r["method"];
    if (!by_method.count(m)) order.push_back(m);
    Mean& s = by_method[m];
    s.strong += r["strong_cov"].get<double>();
    s.weak += r["weak_cov"].get<double>();
    s.size += r["avg_size"].get<double>();
    if (r["threshold"].is_number()) {
      s.threshold += r["threshold"].get<double>();
    } else {
      s.inf_threshold = true;
    }
    ++s.n;
  }
  std::printf("%-12s %10s %10s %10s %12s\n", "method", "strong_cov", "weak_cov", "avg_size",
              "threshold");
  for (const std::string& m : order) {
    const Mean& s = by_method[m];
    const double n = static_cast<double>(s.n);
    if (s.inf_threshold) {
      std::printf("%-12s %10.4f %10.4f %10.4f %12s\n", m.c_str(), s.strong / n, s.weak / n, s.size / n, "inf");
    } else {
      std::printf("%-12s %10.4f %10.4f %10.4f %12.6g\n", m.c_str(), s.strong / n, s.weak / n, s.size / n,
                  s.threshold / n);
    }
  }
}

void add_experiment_flags(CLI::App* cmd, ExperimentFlags& f) {
  auto flag = [&](const char* name, const char* key, auto sample, const char* help) {
    using T = decltype(sample);
    cmd->add_option_function<T>(
        name, [&f, key](const T& v) { f.set[key] = v; }, help);
  };
  flag("--task", "task", std::string(), "classify, rank, match or regress");
  flag("--alpha", "alpha", 0.0, "miscoverage level in (0, 1)");
  flag("--trials", "trials", size_t{0}, "number of trials");
  flag("--seed", "seed", std::uint64_t{0}, "master seed");
  flag("--sigma", "sigma", 0.0, "signal scale (classify, rank)");
  flag("--mu", "mu", 0.0, "mean interval half-width (regress)");
  flag("--k", "k", 0, "number of labels, items or nodes");
  flag("--n", "n", size_t{0}, "records per trial");
  flag("--noise", "cost_noise", 0.0, "cost noise (match)");
  flag("--m-max", "m_max", size_t{0}, "cap on enumerated set sizes");
  flag("--threads", "threads", 1u, "trials run concurrently");
  flag("--psi", "psi", std::string(), "ranking score: hinge or exp");
  flag("--out", "out", std::string(), "results go to <out>.csv and <out>.jsonl");
  cmd->add_option_function<std::vector<std::string>>(
      "--methods", [&f](const std::vector<std::string>& v) { f.set["methods"] = v; },
      "subset of gws, wsc, fsc, pessimistic");
  cmd->add_option("--config", f.config_path, "JSON config; its keys override flags");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Conformal prediction sets from weakly labelled data"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(wsc_version()));

  CalibrateArgs cal;
  auto* c_cal = app.add_subcommand("calibrate", "threshold from a file of scores");
  c_cal->add_option("--alpha", cal.alpha, "miscoverage level")->required();
  c_cal->add_option("--scores", cal.scores, "one score per line")->required();
  c_cal->add_flag("--json", cal.as_json, "print a JSON object");

  MBestArgs mb;
  auto* c_mb = app.add_subcommand("mbest", "lowest-score rankings or matchings");
  c_mb->add_option("--task", mb.task, "rank or match")->required()->check(CLI::IsMember({"rank", "match"}));
  c_mb->add_option("--instance", mb.instance, "relevance CSV (rank) or cost matrices (match)")
      ->required();
  c_mb->add_option("--m", mb.m, "number of configurations, or the cap with --threshold");
  c_mb->add_option("--psi", mb.psi, "hinge or exp");
  c_mb->add_option("--c", mb.c, "constant of the exp score");
  c_mb->add_option("--threshold", mb.threshold, "all configurations with score <= threshold");
  c_mb->add_flag("--translated", mb.translated, "matching score minus the minimum cost");

  std::string sets, labels;
  auto* c_eval = app.add_subcommand("eval", "coverage of prediction sets");
  c_eval->add_option("--sets", sets, "prediction sets, JSON lines")->required();
  c_eval->add_option("--labels", labels, "records with weak and strong labels")->required();

  ExperimentFlags gen_flags;
  size_t gen_trial = 0;
  std::string gen_output;
  auto* c_gen = app.add_subcommand("gen", "write a synthetic dataset");
  add_experiment_flags(c_gen, gen_flags);
  c_gen->add_option("--trial", gen_trial, "trial whose data to write");
  c_gen->add_option("--output,-o", gen_output, "records file")->required();

  ExperimentFlags run_flags;
  bool quiet = false;
  auto* c_run = app.add_subcommand("run", "run an experiment");
  add_experiment_flags(c_run, run_flags);
  c_run->add_flag("--quiet,-q", quiet, "no summary table");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << json{{"error", wsc_status_name(WSC_ERR_INVALID_ARGUMENT)},
                      {"code", static_cast<int>(WSC_ERR_INVALID_ARGUMENT)},
                      {"message", e.what()}}
                     .dump()
              << '\n';
    return static_cast<int>(WSC_ERR_INVALID_ARGUMENT);
  }

  try {
    if (*c_cal) cmd_calibrate(cal);
    if (*c_mb) cmd_mbest(mb);
    if (*c_eval) cmd_eval(sets, labels);
    if (*c_gen) cmd_gen(gen_flags, gen_trial, gen_output);
    if (*c_run) cmd_run(run_flags, quiet);
  } catch (const CliFailure& f) {
    std::cerr << json{{"error", wsc_status_name(f.status)},
                      {"code", static_cast<int>(f.status)},
                      {"message", f.message}}
                     .dump()
              << '\n';
    return static_cast<int>(f.status);
  } catch (const std::exception& e) {
    std::cerr << json{{"error", wsc_status_name(WSC_ERR_INTERNAL)},
                      {"code", static_cast<int>(WSC_ERR_INTERNAL)},
                      {"message", e.what()}}
                     .dump()
              << '\n';
    return static_cast<int>(WSC_ERR_INTERNAL);
  }
  return 0;
}
