// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Usage: wsconf_acceptance [criterion ...]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "wsconf/experiment.hpp"
#include "wsconf/greedy.hpp"
#include "wsconf/matching.hpp"
#include "wsconf/mbest.hpp"
#include "wsconf/ranking.hpp"
#include "wsconf/synth.hpp"

using namespace wsconf;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

LabelMask mask(std::initializer_list<int> one_based) {
  LabelMask out = 0;
  for (int y : one_based) out |= LabelMask{1} << (y - 1);
  return out;
}

ExperimentConfig harness(Task task, double alpha) {
  ExperimentConfig c;
  c.task = task;
  c.alpha = alpha;
  c.trials = 20;
  c.seed = 2024;
  c.n_train = 1500;
  c.n_cal = 1000;
  c.n_test = 2000;
  c.m_max = 50;
  if (task == Task::kMatch) c.cost_noise = 1.0;
  if (task == Task::kRegress) c.mu = 0.05;
  return c;
}

bool subset(const PredictionSet& small, const PredictionSet& large) {
  if (const auto* a = std::get_if<LabelSet>(&small)) {
    const auto& b = std::get<LabelSet>(large);
    return std::includes(b.labels.begin(), b.labels.end(), a->labels.begin(), a->labels.end());
  }
  if (const auto* a = std::get_if<Interval>(&small)) {
    const auto& b = std::get<Interval>(large);
    return a->lo >= b.lo && a->hi <= b.hi;
  }
  auto configs = [](const auto& s, const auto& l) {
    std::set<std::decay_t<decltype(s.configs.front())>> pool(l.configs.begin(), l.configs.end());
    for (const auto& c : s.configs) {
      if (!pool.count(c)) return false;
    }
    return true;
  };
  if (const auto* a = std::get_if<RankingSet>(&small)) return configs(*a, std::get<RankingSet>(large));
  return configs(std::get<AssignmentSet>(small), std::get<AssignmentSet>(large));
}

// Criteria 1 and 2 share the harness runs.
struct HarnessRun {
  std::string label;
  double alpha = 0.0;
  std::vector<double> weak_cov;  // per method, mean over trials
  std::vector<std::string> methods;
  std::size_t threshold_violations = 0;
  std::size_t subset_violations = 0;
  std::size_t subset_checks = 0;
};

std::vector<HarnessRun> harness_runs;

void run_harness() {
  if (!harness_runs.empty()) return;
  for (Task task : {Task::kClassify, Task::kRank, Task::kMatch, Task::kRegress}) {
    for (double alpha : {0.05, 0.1}) {
      const ExperimentConfig c = harness(task, alpha);
      HarnessRun run;
      run.label = task_name(task);
      run.alpha = alpha;
      run.methods = c.effective_methods();
      run.weak_cov.assign(run.methods.size(), 0.0);
      for (std::size_t trial = 0; trial < c.trials; ++trial) {
        const PreparedTrial p = prepare_trial(c, trial);
        const auto results = evaluate_trial(c, p);
        for (const auto& r : results) {
          const auto at = std::find(run.methods.begin(), run.methods.end(), r.method) - run.methods.begin();
          run.weak_cov[at] += r.weak_cov / static_cast<double>(c.trials);
        }
        const MethodPlan& wsc = p.plan("wsc");
        const MethodPlan& fsc = p.plan("fsc");
        if (wsc.threshold.t_hat > fsc.threshold.t_hat) ++run.threshold_violations;
        const bool combinatorial = task == Task::kRank || task == Task::kMatch;
        const std::size_t checks = combinatorial ? std::min<std::size_t>(100, p.test.size()) : p.test.size();
        for (std::size_t i = 0; i < checks; ++i) {
          const auto weak_oracle = wsc.model->oracle(p.test[i]);
          const auto full_oracle = fsc.model->oracle(p.test[i]);
          const auto a = weak_oracle->predict(wsc.threshold.t_hat, c.m_max);
          const auto b = full_oracle->predict(fsc.threshold.t_hat, c.m_max);
          ++run.subset_checks;
          if (!subset(a, b)) ++run.subset_violations;
        }
      }
      harness_runs.push_back(std::move(run));
    }
  }
}

Outcome criterion1() {
  run_harness();
  Outcome o{true, ""};
  for (const auto& run : harness_runs) {
    const double lo = 1 - run.alpha - 0.01;
    const double hi = 1 - run.alpha + 1.0 / 1001 + 0.01;
    for (std::size_t m = 0; m < run.methods.size(); ++m) {
      if (run.methods[m] == "fsc") continue;
      const double w = run.weak_cov[m];
      const bool ok = w >= lo && w <= hi;
      o.pass = o.pass && ok;
      o.detail += fmt("%s%s/%s a=%.2f weak=%.4f", o.detail.empty() ? "" : "; ", run.label.c_str(),
                      run.methods[m].c_str(), run.alpha, w);
      if (!ok) o.detail += " (out of range)";
    }
  }
  return o;
}

Outcome criterion2() {
  run_harness();
  std::size_t thresholds = 0, subsets = 0, checks = 0;
  for (const auto& run : harness_runs) {
    thresholds += run.threshold_violations;
    subsets += run.subset_violations;
    checks += run.subset_checks;
  }
  return {thresholds == 0 && subsets == 0,
          fmt("%zu trials, threshold violations %zu, set inclusion violations %zu of %zu",
              harness_runs.size() * 20, thresholds, subsets, checks)};
}

Outcome criterion3() {
  const DiscreteWeakDistribution d(
      3, {{mask({1, 2}), 0.3}, {mask({1, 3}), 0.25}, {mask({2}), 0.2}, {mask({3}), 0.15}, {mask({1}), 0.1}});
  const auto g = greedy_set(d, 0.9);
  const auto opt = brute_force_optimal(d, 0.9);
  const bool greedy_ok = g.inner == std::vector<Label>{0, 1} && g.outer == std::vector<Label>{0, 1, 2} &&
                         std::abs(g.t - 1.0 / 3.0) <= 1e-12;
  const bool opt_ok = std::abs(opt.expected_size - 2.0) <= 1e-12 && opt.low == mask({2, 3}) &&
                      (opt.weight_high == 0.0 || opt.high == opt.low);
  return {greedy_ok && opt_ok,
          fmt("greedy t=%.15f |inner|=%zu |outer|=%zu; optimum size %.12f", g.t, g.inner.size(),
              g.outer.size(), opt.expected_size)};
}

Outcome criterion4() {
  Rng rng = make_rng(404, 0);
  std::size_t failures = 0, cases = 0;
  double worst = 0.0;
  auto check = [&](const DiscreteWeakDistribution& d) {
    for (int e = 0; e < 10; ++e) {
      const double eta = 0.01 + 0.98 * uniform01(rng);
      const double gap = std::abs(greedy_set(d, eta).expected_size() - brute_force_optimal(d, eta).expected_size);
      worst = std::max(worst, gap);
      ++cases;
      if (gap > 1e-9) ++failures;
    }
  };
  for (int rep = 0; rep < 500; ++rep) check(oracle::random_tree(rng, 1 + static_cast<int>(uniform01(rng) * 8)));
  for (int rep = 0; rep < 500; ++rep) {
    check(DiscreteWeakDistribution::label_independent(
        oracle::random_marginals(rng, 1 + static_cast<int>(uniform01(rng) * 8))));
  }
  return {failures == 0, fmt("%zu cases, %zu failures, max gap %.3g", cases, failures, worst)};
}

Outcome criterion5() {
  Rng rng = make_rng(505, 0);
  std::size_t violations = 0;
  double tightest = 1e300;
  for (int rep = 0; rep < 1000; ++rep) {
    const auto d = oracle::random_general(rng, 1 + static_cast<int>(uniform01(rng) * 8));
    const double eta = 0.01 + 0.98 * uniform01(rng);
    const double bound = (1 + std::log(wolsey_constant(d, eta))) * min_deterministic_cover(d, eta);
    const double outer = static_cast<double>(greedy_set(d, eta).outer.size());
    tightest = std::min(tightest, bound - outer);
    if (outer > bound + 1e-9) ++violations;
  }
  return {violations == 0, fmt("1000 distributions, %zu violations, min slack %.3g", violations, tightest)};
}

Outcome criterion6() {
  Rng rng = make_rng(606, 0);
  std::size_t mismatches = 0;
  std::string first;
  for (int rep = 0; rep < 200; ++rep) {
    const auto r = oracle::random_vector(rng, 5);
    const double c = 0.25 + 2.75 * uniform01(rng);
    for (const PsiSpec& psi : {PsiSpec::hinge(), PsiSpec::exp_weighted(c)}) {
      const auto res = m_best(RankingProblem(r, psi), 120);
      const std::string msg = oracle::compare_enumeration(res.configs, res.scores, oracle::sorted_rankings(r, psi), 1e-9);
      if (!msg.empty() || res.size() != 120) {
        ++mismatches;
        if (first.empty()) first = msg;
      }
    }
  }
  for (int rep = 0; rep < 200; ++rep) {
    const auto costs = oracle::random_costs(rng, 4, -1, 1);
    const auto res = m_best(MatchingProblem(costs), 24);
    const std::string msg = oracle::compare_enumeration(res.configs, res.scores, oracle::sorted_matchings(costs), 1e-9);
    if (!msg.empty() || res.size() != 24) {
      ++mismatches;
      if (first.empty()) first = msg;
    }
  }
  return {mismatches == 0, fmt("400 ranking + 200 matching enumerations, %zu mismatches%s%s", mismatches,
                               first.empty() ? "" : ": ", first.c_str())};
}

Outcome criterion7() {
  Rng rng = make_rng(707, 0);
  std::size_t failures = 0;
  double worst = 0.0;
  for (int rep = 0; rep < 1000; ++rep) {
    const int k = 1 + static_cast<int>(uniform01(rng) * 6);
    const auto c = oracle::random_costs(rng, k, -10, 10);
    const auto sol = hungarian(c);
    const double gap = sol ? std::abs(sol->cost - oracle::brute_force_min_cost(c)) : 1e300;
    worst = std::max(worst, gap);
    if (gap > 1e-9) ++failures;
  }
  return {failures == 0, fmt("1000 matrices, %zu failures, max gap %.3g", failures, worst)};
}

// x is a draw from a pool of conditional laws; W ~ P(. | x) and u ~ U(0, 1)
// independent; the statistic is min over W of the nested score.
Outcome criterion8() {
  const double critical = 1.628 / std::sqrt(5000.0);
  int passes = 0;
  double worst = 0.0;
  for (int seed = 0; seed < 20; ++seed) {
    Rng rng = make_rng(808, static_cast<std::uint64_t>(seed));
    std::vector<DiscreteWeakDistribution> pool;
    std::vector<GreedySequence> seqs;
    for (int i = 0; i < 40; ++i) {
      pool.push_back(oracle::random_general(rng, 1 + static_cast<int>(uniform01(rng) * 8)));
      seqs.push_back(greedy_sequence(pool.back()));
    }
    std::vector<double> v;
    v.reserve(5000);
    for (int s = 0; s < 5000; ++s) {
      const auto x = static_cast<std::size_t>(uniform01(rng) * pool.size());
      const LabelMask w = oracle::sample_atom(pool[x], rng);
      const double u = uniform01(rng);
      double best = 1e300;
      for (Label y = 0; y < pool[x].k(); ++y) {
        if (w >> y & 1) best = std::min(best, nested_score(seqs[x], y, u));
      }
      v.push_back(best);
    }
    const double ks = oracle::ks_uniform(std::move(v));
    worst = std::max(worst, ks);
    if (ks < critical) ++passes;
  }
  return {passes >= 18, fmt("%d of 20 seeds below %.4f, max KS %.4f", passes, critical, worst)};
}

Outcome criterion9() {
  ExperimentConfig cls;
  cls.task = Task::kClassify;
  cls.alpha = 0.1;
  cls.trials = 10;
  cls.seed = 909;
  cls.n_train = 1500;
  cls.n_cal = 1000;
  cls.n_test = 2000;
  cls.min_weak_size = 3;
  cls.methods = {"pessimistic"};
  double size = 0.0, strong = 0.0;
  for (const auto& r : run(cls)) {
    size += r.avg_size / 10;
    strong += r.strong_cov / 10;
  }

  ExperimentConfig reg = cls;
  reg.task = Task::kRegress;
  reg.mu = 0.15;
  reg.min_weak_size = 1;
  double length = 0.0, reg_strong = 0.0, min_weak = 1e300;
  for (std::size_t t = 0; t < reg.trials; ++t) {
    for (const Record& r : trial_records(reg, t)) min_weak = std::min(min_weak, std::get<Interval>(r.weak).length());
  }
  for (const auto& r : run(reg)) {
    length += r.avg_size / 10;
    reg_strong += r.strong_cov / 10;
  }
  const bool ok = size >= 3 * 0.9 - 0.05 && length >= 0.2 * 0.9 - 0.005 && min_weak >= 0.2;
  return {ok, fmt("classify |W|>=3: avg size %.4f (>= 2.65), strong cov %.4f; regress min |W| %.4f: "
                  "avg length %.4f (>= 0.175), strong cov %.4f",
                  size, strong, min_weak, length, reg_strong)};
}

Outcome criterion10() {
  ExperimentConfig c;
  c.task = Task::kClassify;
  c.alpha = 0.1;
  c.trials = 20;
  c.seed = 1010;
  c.sigma = 100.0;
  c.n_train = 1500;
  c.n_cal = 1000;
  c.n_test = 2000;
  c.methods = {"wsc", "fsc"};
  double wsc_size = 0, fsc_size = 0, strong = 0, weak = 0;
  for (const auto& r : run(c)) {
    if (r.method == "wsc") {
      wsc_size += r.avg_size / 20;
      strong += r.strong_cov / 20;
      weak += r.weak_cov / 20;
    } else {
      fsc_size += r.avg_size / 20;
    }
  }
  const double ratio = fsc_size / wsc_size;
  const bool ok = ratio >= 1.5 && strong < 0.9 && weak >= 0.89;
  return {ok, fmt("sigma^-1=1e-2: FSC size %.3f / WSC size %.3f = %.3f; WSC strong %.4f, weak %.4f", fsc_size,
                  wsc_size, ratio, strong, weak)};
}

Outcome criterion11() {
  ExperimentConfig c;
  c.task = Task::kMatch;
  c.alpha = 0.02;
  c.trials = 20;
  c.seed = 1111;
  c.cost_noise = 0.0;
  c.n_train = 100;
  c.n_cal = 1000;
  c.n_test = 2000;
  c.m_max = 50;
  c.methods = {"wsc", "fsc"};
  double wsc = 0, fsc = 0;
  for (const auto& r : run(c)) (r.method == "wsc" ? wsc : fsc) += r.avg_size / 20;
  return {wsc <= 1.05 && fsc <= 1.05, fmt("noiseless, a=0.02: WSC size %.4f, FSC size %.4f", wsc, fsc)};
}

Outcome criterion12() {
  Rng rng = make_rng(1212, 0);
  double worst_listnet = 0, worst_multi = 0, worst_label = 0;
  for (int rep = 0; rep < 50; ++rep) {
    const int k = 2 + static_cast<int>(uniform01(rng) * 3);
    const int d = 1 + static_cast<int>(uniform01(rng) * 3);
    const int n = 2 + static_cast<int>(uniform01(rng) * 6);
    const auto perms = oracle::permutations(k);
    std::vector<std::vector<double>> x;
    std::vector<Ranking> rankings;
    std::vector<Label> labels;
    std::vector<ExplicitSet> weak;
    for (int i = 0; i < n; ++i) {
      x.push_back(oracle::random_vector(rng, d, -1, 1));
      rankings.push_back(Ranking{perms[static_cast<std::size_t>(uniform01(rng) * perms.size())]});
      labels.push_back(static_cast<Label>(uniform01(rng) * k));
      std::vector<Label> w;
      for (Label l = 0; l < k; ++l) {
        if (l == labels.back() || uniform01(rng) < 0.3) w.push_back(l);
      }
      weak.push_back({w, k});
    }
    const std::size_t dim = static_cast<std::size_t>(k) * (d + 1);

    ListNetModel ln{k, d, oracle::random_vector(rng, static_cast<int>(dim), -1, 1)};
    const auto fd1 = oracle::numeric_gradient(
        [&](const std::vector<double>& p) { return listnet_loss(ListNetModel{k, d, p}, x, rankings); }, ln.params);
    worst_listnet = std::max(worst_listnet, oracle::relative_error(listnet_gradient(ln, x, rankings), fd1));

    SoftmaxModel sm{k, d, oracle::random_vector(rng, static_cast<int>(dim), -1, 1)};
    const auto fd2 = oracle::numeric_gradient(
        [&](const std::vector<double>& p) { return multinomial_objective(SoftmaxModel{k, d, p}, x, labels, 0.01); },
        sm.params);
    worst_multi = std::max(worst_multi, oracle::relative_error(multinomial_gradient(sm, x, labels, 0.01), fd2));

    PerLabelLogisticModel pl{k, d, oracle::random_vector(rng, static_cast<int>(dim), -1, 1)};
    const auto fd3 = oracle::numeric_gradient(
        [&](const std::vector<double>& p) {
          return per_label_objective(PerLabelLogisticModel{k, d, p}, x, weak, 0.01);
        },
        pl.params);
    worst_label = std::max(worst_label, oracle::relative_error(per_label_gradient(pl, x, weak, 0.01), fd3));
  }
  const bool ok = worst_listnet < 1e-5 && worst_multi < 1e-5 && worst_label < 1e-5;
  return {ok, fmt("50 instances, max relative error: listnet %.2g, multinomial %.2g, per-label %.2g",
                  worst_listnet, worst_multi, worst_label)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::function<Outcome()>> criteria{criterion1, criterion2, criterion3,  criterion4,
                                                       criterion5, criterion6, criterion7,  criterion8,
                                                       criterion9, criterion10, criterion11, criterion12};
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!selected.empty() && !selected.count(id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i]();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s criterion %d: %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", id, o.detail.c_str(), secs);
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
