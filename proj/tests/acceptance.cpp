// Copyright 2026 The miasig Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Acceptance driver: one PASS/FAIL line per criterion, exit status 1 when a
// criterion fails that was not listed with --known-red.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "miasig/evaluation.hpp"
#include "miasig/logit_signals.hpp"
#include "miasig/search/agents.hpp"
#include "miasig/search/loop.hpp"
#include "miasig/search/runner.hpp"
#include "miasig/signals.hpp"
#include "miasig/subprocess.hpp"
#include "miasig/text_signals.hpp"
#include "oracles.hpp"
#include "scripted.hpp"
#include "search_support.hpp"
#include "support.hpp"

using namespace miasig;
using namespace miasig::search;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int number;
  double limit_seconds;  // 0: no runtime limit
  std::function<Outcome()> run;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

Outcome edit_distance_oracle() {
  Rng rng(101);
  std::size_t capped = 0;
  for (int t = 0; t < 1000; ++t) {
    const auto a = testing_support::random_tokens(rng, 20, 10);
    const auto b = testing_support::random_tokens(rng, 20, 10);
    const auto truth = oracle::wagner_fischer(a, b);
    const auto got = text::levenshtein_capped(a, b, 10);
    const std::size_t want = truth <= 10 ? truth : 11;
    if (got != want) {
      return {false, "pair " + std::to_string(t) + ": capped " + std::to_string(got) + " vs " + std::to_string(want)};
    }
    capped += truth > 10;
  }
  return {true, "1000 pairs agree (" + std::to_string(capped) + " beyond the cap)"};
}

std::vector<ScoredSample> random_scores(Rng& rng, std::size_t n) {
  std::vector<ScoredSample> out;
  const bool coarse = rng.below(2);
  for (std::size_t i = 0; i < n; ++i) {
    const double s = coarse ? static_cast<double>(rng.below(5)) : rng.normal();
    out.push_back({"s" + std::to_string(i), s, rng.below(2) ? Membership::Member : Membership::NonMember});
  }
  out[0].label = Membership::Member;
  out[1].label = Membership::NonMember;
  return out;
}

Outcome metrics_oracle() {
  Rng rng(102);
  double worst = 0.0;
  for (int t = 0; t < 500; ++t) {
    const auto s = random_scores(rng, 2 + rng.below(199));
    worst = std::max(worst, std::abs(auc(s) - oracle::pair_auc(s)));
    for (double target : {0.0, 0.01, 0.05, 0.1, 0.25, 0.5, 1.0}) {
      if (tpr_at_fpr(s, target) != oracle::sweep_tpr(s, target)) {
        return {false, "set " + std::to_string(t) + ": tpr@" + fmt("%g", target) + " differs from the sweep"};
      }
    }
  }
  if (worst > 1e-12) return {false, "auc differs by " + fmt("%.3g", worst)};
  return {true, "500 sets, max auc diff " + fmt("%.3g", worst) + ", tpr exact"};
}

Outcome formula_transcription() {
  std::map<std::string, double> worst;
  Rng rng(103);
  std::vector<TextSample> samples;
  for (int i = 0; i < 100; ++i) samples.push_back(testing_support::random_text_sample(rng, "s" + std::to_string(i)));
  const auto table = text::build_trigram_freq_table(Dataset(samples));
  std::vector<oracle::Seq> corpus;
  for (const auto& s : samples) {
    for (const auto& g : s.suffix_generations) corpus.push_back(oracle::split(g));
  }
  const auto freq = oracle::naive_ngram_counts(corpus, 3);
  auto note = [&](const std::string& name, double a, double b) {
    worst[name] = std::max(worst[name], std::abs(a - b));
  };
  for (const auto& s : samples) {
    note("max_coverage", text::signal_max_coverage(s, 4), oracle::max_coverage(s, 4));
    note("geo_edit_distance", text::signal_geometric_edit_distance(s, 10), oracle::geo_edit_distance(s, 10));
    note("rare_trigram_agg", text::signal_rare_trigram_aggregation(s, table), oracle::rare_trigram_agg(s, freq));
    note("rarity_longest_match", text::signal_rarity_weighted_longest_match(s, 10),
         oracle::rarity_longest_match(s, 10));
    note("inv_freq_mismatch", text::signal_inverse_frequency_mismatch(s, 10, 0.7),
         oracle::inv_freq_mismatch(s, 10, 0.7));
    note("recurrent_rare_trigram", text::signal_recurrent_rare_trigram(s), oracle::recurrent_rare_trigram(s));
    note("internal_repetition", text::signal_internal_repetition(s), oracle::internal_repetition(s));
  }
  for (int t = 0; t < 100; ++t) {
    const std::size_t L = 6 + rng.below(35);
    const std::size_t V = 10 + rng.below(55);
    const auto s = testing_support::random_logit_sample(rng, "l" + std::to_string(t), L, V, 1.0 + 4.0 * rng.uniform());
    note("max_renyi", logit::signal_max_renyi(s), oracle::max_renyi(s, 0.5, 0.1));
    note("rank_stability", logit::signal_rank_stability(s, {5, 0.1, 0}, 10), oracle::rank_stability(s, 5, 0.1, 0, 10));
    note("log_ratio_variance", logit::signal_log_ratio_variance(s), oracle::log_ratio_variance(s, 8.0, 0.05));
    note("topk_confidence", logit::signal_topk_confidence(s), oracle::topk_confidence(s, 5, 0.1));
    note("neighbor_entropy_contrast", logit::signal_neighbor_entropy_contrast(s),
         oracle::neighbor_entropy_contrast(s, 128, 5));
  }
  double max_diff = 0.0;
  std::string off;
  for (const auto& [name, d] : worst) {
    if (d > max_diff) max_diff = d;
    if (!(d <= 1e-9)) off += " " + name + "=" + fmt("%.3g", d);
  }
  if (!off.empty()) return {false, "beyond 1e-9:" + off};
  return {true, std::to_string(worst.size()) + " signals x 100 samples, max diff " + fmt("%.3g", max_diff)};
}

Outcome analytic_anchors() {
  std::string detail;
  bool ok = true;
  double uniform_gap = 0.0;
  for (std::size_t V = 2; V <= 64; ++V) {
    const std::vector<double> p(V, 1.0 / static_cast<double>(V));
    for (double alpha : {0.5, 2.0}) {
      uniform_gap = std::max(uniform_gap, std::abs(logit::renyi_entropy(p, alpha) - std::log(static_cast<double>(V))));
    }
  }
  if (uniform_gap > 1e-12) ok = false;
  detail += "uniform max gap " + fmt("%.3g", uniform_gap);

  const double h = logit::renyi_entropy(std::vector<double>{0.5, 0.25, 0.25}, 0.5);
  const double closed = 2.0 * std::log(std::sqrt(0.5) + 0.5 + 0.5);
  const double stated_gap = std::abs(h - 1.0697);
  if (std::abs(h - closed) > 1e-12 || stated_gap > 1e-4) ok = false;
  detail += "; H_0.5([.5,.25,.25])=" + fmt("%.10f", h) + " (closed form " + fmt("%.10f", closed) +
            "), |H-1.0697|=" + fmt("%.7g", stated_gap) + (stated_gap > 1e-4 ? " > 1e-4" : " <= 1e-4");

  Rng rng(104);
  double worst_rel = 0.0;
  for (int t = 0; t < 100; ++t) {
    std::vector<double> p(2 + rng.below(40));
    double sum = 0.0;
    for (auto& v : p) sum += (v = rng.uniform() + 1e-4);
    for (auto& v : p) v /= sum;
    const double shannon = logit::shannon_entropy(p);
    worst_rel = std::max(worst_rel, std::abs(logit::renyi_entropy(p, 0.999) - shannon) / shannon);
  }
  if (worst_rel > 1e-2) ok = false;
  detail += "; alpha 0.999 vs Shannon max rel " + fmt("%.3g", worst_rel);
  return {ok, detail};
}

Outcome separability() {
  const Dataset data(testing_support::separable_samples(200));
  const Dataset shuffled(testing_support::shuffle_labels(testing_support::separable_samples(200), 99));
  SignalParams params;
  params.ngram = 4;
  bool ok = true;
  std::string detail;
  for (const char* name : {"geo_edit_distance", "max_coverage", "rarity_longest_match"}) {
    const double a = auc(score_dataset(data, name, params));
    const double b = auc(score_dataset(shuffled, name, params));
    ok = ok && a == 1.0 && b >= 0.4 && b <= 0.6;
    detail += std::string(detail.empty() ? "" : ", ") + name + " " + fmt("%.4f", a) + "/" + fmt("%.4f", b);
  }
  return {ok, detail + " (separable/shuffled)"};
}

Outcome exploiter_law() {
  ExperimentDb db;
  db.insert(testing_support::make_record("first", 0.9));
  db.insert(testing_support::make_record("second", 0.6));
  SearchConfig config;
  Rng rng(105);
  std::size_t first = 0;
  for (int i = 0; i < 10000; ++i) first += exploiter_select_parent(db, config, rng).id == 0;
  const double f = static_cast<double>(first) / 10000.0;
  return {std::abs(f - 0.8) <= 0.02, "first cluster frequency " + fmt("%.4f", f)};
}

Outcome schedule_and_retries() {
  using testing_support::ScriptedExecutor;
  using testing_support::ScriptedGenerator;
  using testing_support::ScriptedJudge;
  const Dataset data(testing_support::separable_samples(20));
  struct Trace {
    ExperimentDb db;
    LoopStats stats;
    std::vector<nlohmann::json> runs;
  };
  auto run = [&](std::size_t budget, std::size_t cap, std::deque<std::string> refs, std::deque<std::string> fixes) {
    ScriptedGenerator gen;
    gen.code_refs = std::move(refs);
    gen.fix_refs = std::move(fixes);
    ScriptedJudge judge;
    ScriptedExecutor exec{&data, {}};
    std::ostringstream journal;
    SearchConfig config;
    config.budget = budget;
    config.max_attempts = cap;
    LoopOptions options;
    options.run_journal = &journal;
    options.executor = [&exec](const std::string& r) { return exec(r); };
    Trace t;
    t.stats = main_loop(config, gen, judge, data, std::nullopt, t.db, options);
    std::istringstream in(journal.str());
    std::string line;
    while (std::getline(in, line)) t.runs.push_back(nlohmann::json::parse(line));
    return t;
  };

  const auto a = run(9, 0, {}, {});
  bool sched = a.db.size() == 9;
  for (const auto& r : a.db.records()) {
    sched = sched && ((r.iteration % 3 == 0) == (r.mode == SearchMode::Explore));
  }
  const auto b = run(1, 0, {"fail-1"}, {"fail-2", "ok-3"});
  const bool retry = b.db.size() == 1 && b.db.records()[0].fix_rounds == 2 && b.stats.executions == 3;
  const auto c = run(1, 1, {"timeout-1"}, {"timeout-2", "timeout-3"});
  std::vector<int> rounds;
  for (const auto& r : c.runs) rounds.push_back(r["fix_round"].get<int>());
  const bool timeouts = c.db.size() == 0 && c.stats.abandoned == 1 && rounds == std::vector<int>{0, 2, 4};

  std::string detail = std::string("(a) schedule ") + (sched ? "ok" : "wrong") + ", (b) inserted after " +
                       (b.db.size() ? std::to_string(b.db.records()[0].fix_rounds) : std::string("-")) +
                       " fix rounds, (c) timeout fix_round trace";
  for (int r : rounds) detail += " " + std::to_string(r);
  detail += c.db.size() == 0 ? ", nothing inserted" : ", inserted";
  return {sched && retry && timeouts, detail};
}

struct SearchRun {
  int exit_code = -1;
  std::string journal;
  double best = 0.0;
  double seed = 0.0;
  std::size_t records = 0;
  bool all_ok = true;
  std::string err;
};

SearchRun offline_search(const fs::path& root, const std::string& tag) {
  const auto data = root / "data.jsonl";
  if (!fs::exists(data)) write_text_samples(data, testing_support::separable_samples(200));
  const auto seed = root / "seed.sh";
  if (!fs::exists(seed)) {
    testing_support::write_script(seed, std::string("exec '") + MIA_BIN + "' score --signal max_coverage --ngram 4\n");
  }
  const auto out = root / tag;
  const auto r = run_process({MIA_BIN, "search", "--data", data.string(), "--generator", GENERATOR_BIN, "--judge",
                              JUDGE_BIN, "--out-dir", out.string(), "--budget", "10", "--rng-seed", "8",
                              "--timeout-seconds", "60", "--seed-candidate", seed.string(), "--seed-idea",
                              "max n-gram coverage baseline"},
                             "", std::chrono::seconds(300));
  SearchRun s;
  s.exit_code = r.timed_out ? -1 : r.exit_code;
  s.err = last_lines(r.err, 3);
  if (s.exit_code != 0) return s;
  s.journal = testing_support::read_text(out / "experiments.jsonl");
  std::istringstream in(s.journal);
  std::string line;
  s.best = -1.0;
  while (std::getline(in, line)) {
    const auto rec = record_from_json(nlohmann::json::parse(line));
    ++s.records;
    s.all_ok = s.all_ok && rec.status == RunStatus::Ok;
    if (rec.mode == SearchMode::Seed) s.seed = rec.auc();
    s.best = std::max(s.best, rec.auc());
  }
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  std::vector<int> known_red;
  app.add_option("--known-red", known_red, "Criteria expected to fail; they still print FAIL");
  CLI11_PARSE(app, argc, argv);

  testing_support::TempDir work;
  SearchRun first;

  const std::vector<Criterion> criteria = {
      {1, 5, edit_distance_oracle},
      {2, 10, metrics_oracle},
      {3, 60, formula_transcription},
      {4, 0, analytic_anchors},
      {5, 30, separability},
      {6, 5, exploiter_law},
      {7, 10, schedule_and_retries},
      {8, 120,
       [&] {
         first = offline_search(work.path(), "run1");
         if (first.exit_code != 0) return Outcome{false, "mia search exited " + std::to_string(first.exit_code) + ": " + first.err};
         return Outcome{first.records == 10 && first.all_ok && first.best >= first.seed,
                        std::to_string(first.records) + " ok records, seed auc " + fmt("%.4f", first.seed) +
                            ", best auc " + fmt("%.4f", first.best)};
       }},
      {9, 4,
       [&] {
         const auto dir = work / "sleeper";
         fs::create_directories(dir);
         testing_support::write_script(dir / "cand.sh", "sleep 30\n");
         SearchConfig config;
         config.timeout_seconds = 2;
         const auto run = run_candidate("cand.sh", Dataset(testing_support::separable_samples(4)), config, dir);
         return Outcome{run.status == RunStatus::Timeout, std::string("status ") + std::string(to_string(run.status)) +
                                                              " after " + fmt("%.2f", run.elapsed.count() / 1000.0) + "s"};
       }},
      {10, 0,
       [&] {
         if (first.exit_code != 0) first = offline_search(work.path(), "run1");
         const auto second = offline_search(work.path(), "run2");
         if (first.exit_code != 0 || second.exit_code != 0) return Outcome{false, "search did not complete"};
         return Outcome{first.journal == second.journal,
                        first.journal == second.journal ? "journals byte-identical (" + std::to_string(first.journal.size()) + " bytes)"
                                                        : "journals differ"};
       }},
  };

  const std::set<int> expected_red(known_red.begin(), known_red.end());
  std::set<int> red;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.limit_seconds > 0 && secs >= c.limit_seconds) {
      o.pass = false;
      o.detail += "; over the " + fmt("%g", c.limit_seconds) + "s limit";
    }
    if (!o.pass) red.insert(c.number);
    std::printf("%s criterion %d: %s (%.2fs)\n", o.pass ? "PASS" : "FAIL", c.number, o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria pass\n", criteria.size() - red.size(), criteria.size());
  if (!expected_red.empty()) {
    if (red != expected_red) {
      std::printf("failing set differs from --known-red\n");
      return 1;
    }
    return 0;
  }
  return red.empty() ? 0 : 1;
}
