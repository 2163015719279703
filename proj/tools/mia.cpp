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

// mia: evaluate membership signals and run the design search.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "miasig/datamodel.hpp"
#include "miasig/errors.hpp"
#include "miasig/evaluation.hpp"
#include "miasig/search/database.hpp"
#include "miasig/search/loop.hpp"
#include "miasig/search/plugins.hpp"
#include "miasig/signals.hpp"
#include "miasig/subprocess.hpp"

namespace fs = std::filesystem;
using namespace miasig;
using namespace miasig::search;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;

// Data and usage problems exit 1; failures while running plugins or
// candidates exit 2.
struct RuntimeFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt_short(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string signal_listing() {
  std::string out = "Signals:\n";
  for (const auto& s : registered_signals()) {
    out += "  ";
    out += s.name;
    out += std::string(28 > s.name.size() ? 28 - s.name.size() : 1, ' ');
    out += s.family == SignalFamily::Text ? "[text]  " : "[logit] ";
    out += s.summary;
    out += '\n';
  }
  return out;
}

struct SignalOptions {
  std::string signal;
  SignalParams params;
  double top_fraction = 0.0;
  std::size_t top_k = 0;
  bool flip = false;
  unsigned jobs = 1;

  void add_to(CLI::App& cmd) {
    cmd.add_option("--signal", signal, "Registered signal name")->required();
    cmd.add_option("--ngram", params.ngram, "n-gram length (max_coverage)")->capture_default_str();
    cmd.add_option("--d-max,--d_max", params.d_max, "Edit distance cap")->capture_default_str();
    cmd.add_option("--keep-fraction,--keep_fraction", params.keep_fraction, "Kept generation fraction")
        ->capture_default_str();
    cmd.add_option("--alpha", params.alpha, "Renyi order (max_renyi)")->capture_default_str();
    cmd.add_option("--top-fraction,--top_fraction", top_fraction, "Upper-tail fraction (signal default if unset)");
    cmd.add_option("--passes", params.passes, "Noise passes (rank_stability)")->capture_default_str();
    cmd.add_option("--sigma", params.sigma, "Noise scale (rank_stability)")->capture_default_str();
    cmd.add_option("--noise-seed,--noise_seed", params.noise_seed, "Noise seed (rank_stability)")
        ->capture_default_str();
    cmd.add_option("--top-k,--top_k", top_k, "Top-k size (signal default if unset)");
    cmd.add_option("--decay-scale,--decay_scale", params.decay_scale, "Position decay (log_ratio_variance)")
        ->capture_default_str();
    cmd.add_option("--embed-dims,--embed_dims", params.embed_dims, "Row embedding size")->capture_default_str();
    cmd.add_flag("--flip", flip, "Negate scores before evaluation");
    cmd.add_option("--jobs", jobs, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
  }

  void resolve(const CLI::App& cmd) {
    if (cmd.count("--top-fraction")) params.top_fraction = top_fraction;
    if (cmd.count("--top-k")) params.top_k = top_k;
    require_signal(signal);
  }
};

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InvalidArgument("cannot write " + path.string());
  out << text;
  if (!out) throw InvalidArgument("write failed: " + path.string());
}

std::vector<std::string> split_command(const std::string& command) {
  std::istringstream in(command);
  std::vector<std::string> argv;
  for (std::string w; in >> w;) argv.push_back(w);
  if (argv.empty()) throw InvalidArgument("empty plugin command");
  return argv;
}

// --- eval / roc / score ------------------------------------------------------

int cmd_eval(SignalOptions& o, const CLI::App& cmd, const std::string& data_path, const std::string& out_path) {
  o.resolve(cmd);
  const auto data = load_dataset(data_path);
  EvalOptions eo;
  eo.flip = o.flip;
  eo.jobs = o.jobs;
  const auto report = evaluate_signal(data, o.signal, o.params, eo);
  if (!out_path.empty()) write_file(out_path, to_json(report).dump(2) + "\n");
  std::cout << report.signal_name << " auc=" << fmt_short(report.auc);
  for (const auto& [fpr, tpr] : report.tpr_at) std::cout << " tpr@" << fpr_key(fpr) << "=" << fmt_short(tpr);
  std::cout << " members=" << report.n_members << " nonmembers=" << report.n_nonmembers << "\n";
  return kExitOk;
}

int cmd_roc(SignalOptions& o, const CLI::App& cmd, const std::string& data_path, const std::string& out_path) {
  o.resolve(cmd);
  const auto data = load_dataset(data_path);
  auto scores = score_dataset(data, o.signal, o.params, o.jobs);
  if (o.flip) {
    for (auto& s : scores) s.score = -s.score;
  }
  const auto roc = roc_curve(scores);
  std::ostringstream csv;
  write_roc_csv(csv, roc);
  write_file(out_path, csv.str());
  std::cout << o.signal << " auc=" << fmt_short(auc(scores)) << " points=" << roc.size() << "\n";
  return kExitOk;
}

int cmd_score(SignalOptions& o, const CLI::App& cmd) {
  o.resolve(cmd);
  const auto data = read_text_samples(std::cin, /*require_label=*/false);
  if (data.empty()) return kExitOk;
  const auto scores = score_dataset(data, o.signal, o.params, o.jobs);
  std::string out;
  for (const auto& s : scores) {
    out += fmt_double(o.flip ? -s.score : s.score);
    out += '\n';
  }
  std::cout << out;
  return kExitOk;
}

// --- split --------------------------------------------------------------------

void write_dataset(const Dataset& data, const fs::path& path) {
  if (data.kind() == DatasetKind::Text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    write_text_samples(path, data.text_samples());
    return;
  }
  fs::create_directories(path);
  std::size_t i = 0;
  for (const auto& s : data.logit_samples()) {
    char name[32];
    std::snprintf(name, sizeof name, "%06zu.mial", i++);
    write_logit_sample(path / name, s);
  }
}

int cmd_split(const std::string& data_path, std::uint64_t seed, const std::string& train, const std::string& test) {
  const auto data = load_dataset(data_path);
  const auto [a, b] = split_dataset(data, seed);
  write_dataset(a, train);
  write_dataset(b, test);
  std::cout << "train=" << a.size() << " test=" << b.size() << "\n";
  return kExitOk;
}

// --- diversity ------------------------------------------------------------------

int cmd_diversity(const std::string& journal, const std::string& descriptions_path, const std::string& out_path,
                  std::size_t embed_dim) {
  std::vector<double> sims;
  std::vector<std::string> labels;
  if (!descriptions_path.empty()) {
    std::ifstream in(descriptions_path);
    if (!in) throw InvalidArgument("cannot open " + descriptions_path);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(std::string("descriptions: ") + e.what(), 1);
    }
    if (!j.is_array()) throw InvalidArgument("descriptions must be a JSON array of strings");
    std::vector<std::string> descriptions;
    for (const auto& d : j) {
      if (!d.is_string()) throw InvalidArgument("descriptions must be a JSON array of strings");
      descriptions.push_back(d.get<std::string>());
      labels.push_back(std::to_string(labels.size()));
    }
    sims = pairwise_description_similarity(descriptions, embed_dim);
  } else {
    const auto db = ExperimentDb::load_journal(journal, embed_dim);
    for (const auto& r : db.records()) labels.push_back(std::to_string(r.id));
    sims = pairwise_design_similarity(db.records(), embed_dim);
  }
  nlohmann::json pairs = nlohmann::json::array();
  double sum = 0.0;
  std::size_t k = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    for (std::size_t j = i + 1; j < labels.size(); ++j, ++k) {
      pairs.push_back({{"a", labels[i]}, {"b", labels[j]}, {"cosine", sims[k]}});
      sum += sims[k];
    }
  }
  const double mean = sum / static_cast<double>(sims.size());
  if (!out_path.empty()) {
    write_file(out_path, nlohmann::json{{"n", labels.size()}, {"mean_similarity", mean}, {"pairs", pairs}}.dump(2) + "\n");
  }
  std::cout << "designs=" << labels.size() << " pairs=" << sims.size() << " mean_similarity=" << fmt_short(mean) << "\n";
  return kExitOk;
}

// --- search ---------------------------------------------------------------------

struct SearchArgs {
  std::string config_path;
  std::string data_path;
  std::string generator;
  std::string judge;
  std::string out_dir;
  std::string seed_candidate;
  std::string seed_idea = "Baseline membership signal supplied as the search seed";
  std::string seed_justification = "Reference point that later designs must beat";
  SearchConfig cfg;
  std::string exploit_mode;
};

void add_search_options(CLI::App& cmd, SearchArgs& a) {
  cmd.add_option("--config", a.config_path, "JSON file with search configuration fields");
  cmd.add_option("--data", a.data_path, "Text dataset (JSON Lines)")->required();
  cmd.add_option("--generator", a.generator, "Generator plugin command")->required();
  cmd.add_option("--judge", a.judge, "Novelty judge plugin command")->required();
  cmd.add_option("--out-dir,--out_dir", a.out_dir, "Output directory")->required();
  cmd.add_option("--seed-candidate,--seed_candidate", a.seed_candidate, "Executable inserted as the seed design");
  cmd.add_option("--seed-idea,--seed_idea", a.seed_idea, "Idea text of the seed design");
  cmd.add_option("--seed-justification,--seed_justification", a.seed_justification,
                 "Justification text of the seed design");
  auto& c = a.cfg;
  cmd.add_option("--budget", c.budget, "Total designs in the database");
  cmd.add_option("--timeout-seconds,--timeout_seconds", c.timeout_seconds, "Per-candidate wall-clock limit");
  cmd.add_option("--explore-period,--explore_period", c.explore_period, "Explore when count mod period is 0");
  cmd.add_option("--top-k-exploit,--top_k_exploit", c.top_k_exploit, "Parent pool size");
  cmd.add_option("--explorer-seed-count,--explorer_seed_count", c.explorer_seed_count, "Seed records per design");
  cmd.add_option("--explorer-refine-budget,--explorer_refine_budget", c.explorer_refine_budget,
                 "Judge rounds per explore step");
  cmd.add_option("--max-fix-rounds,--max_fix_rounds", c.max_fix_rounds, "Fix round limit");
  cmd.add_option("--retrieval-k,--retrieval_k", c.retrieval_k, "BM25 neighbours");
  cmd.add_option("--embed-dim,--embed_dim", c.embed_dim, "Hashed embedding size");
  cmd.add_option("--rng-seed,--rng_seed", c.rng_seed, "Search seed");
  cmd.add_option("--exploit-mode,--exploit_mode", a.exploit_mode, "lineage or flat")
      ->check(CLI::IsMember({"lineage", "flat"}));
  cmd.add_option("--max-attempts,--max_attempts", c.max_attempts, "Design attempt cap (0: 5 x budget)");
  cmd.add_option("--plugin-timeout-seconds,--plugin_timeout_seconds", c.plugin_timeout_seconds,
                 "Wall-clock limit per plugin call");
}

// Config file first, then explicit flags on top.
SearchConfig resolve_config(const CLI::App& cmd, const SearchArgs& a) {
  SearchConfig cfg;
  if (!a.config_path.empty()) {
    std::ifstream in(a.config_path);
    if (!in) throw InvalidArgument("cannot open config " + a.config_path);
    try {
      cfg = config_from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(std::string("config: ") + e.what(), 1);
    }
  }
  const auto& f = a.cfg;
  auto set = [&](const char* flag, auto& dst, const auto& src) {
    if (cmd.count(flag)) dst = src;
  };
  set("--budget", cfg.budget, f.budget);
  set("--timeout-seconds", cfg.timeout_seconds, f.timeout_seconds);
  set("--explore-period", cfg.explore_period, f.explore_period);
  set("--top-k-exploit", cfg.top_k_exploit, f.top_k_exploit);
  set("--explorer-seed-count", cfg.explorer_seed_count, f.explorer_seed_count);
  set("--explorer-refine-budget", cfg.explorer_refine_budget, f.explorer_refine_budget);
  set("--max-fix-rounds", cfg.max_fix_rounds, f.max_fix_rounds);
  set("--retrieval-k", cfg.retrieval_k, f.retrieval_k);
  set("--embed-dim", cfg.embed_dim, f.embed_dim);
  set("--rng-seed", cfg.rng_seed, f.rng_seed);
  set("--max-attempts", cfg.max_attempts, f.max_attempts);
  set("--plugin-timeout-seconds", cfg.plugin_timeout_seconds, f.plugin_timeout_seconds);
  if (cmd.count("--exploit-mode")) {
    cfg.exploit_mode = a.exploit_mode == "flat" ? ExploitMode::Flat : ExploitMode::Lineage;
  }
  validate(cfg);
  return cfg;
}

int cmd_search(const CLI::App& cmd, const SearchArgs& a) {
  const auto cfg = resolve_config(cmd, a);
  const auto data = load_text_samples(a.data_path);
  const auto generator_argv = split_command(a.generator);
  const auto judge_argv = split_command(a.judge);
  for (const auto* argv : {&generator_argv, &judge_argv}) {
    if (!is_executable(argv->front())) throw RuntimeFailure("plugin not executable: " + argv->front());
  }
  std::optional<SeedCandidate> seed;
  if (!a.seed_candidate.empty()) {
    const auto path = fs::absolute(a.seed_candidate).lexically_normal();
    if (!is_executable(path.string())) throw RuntimeFailure("seed candidate not executable: " + path.string());
    seed = SeedCandidate{path.string(), a.seed_idea, a.seed_justification};
  }

  const fs::path out_dir = fs::absolute(a.out_dir).lexically_normal();
  fs::create_directories(out_dir);
  const auto db_path = out_dir / "experiments.jsonl";
  const auto runs_path = out_dir / "runs.jsonl";
  const auto best_path = out_dir / "best.json";
  fs::remove(db_path);
  fs::remove(best_path);
  write_file(out_dir / "config.json", to_json(cfg).dump(2) + "\n");

  ExperimentDb db(cfg.embed_dim);
  db.attach_journal(db_path);
  std::ofstream runs(runs_path, std::ios::trunc);
  ProcessGenerator generator(generator_argv, out_dir, cfg.rng_seed, cfg.plugin_timeout_seconds);
  ProcessJudge judge(judge_argv, out_dir, cfg.plugin_timeout_seconds);
  LoopOptions options;
  options.workdir = out_dir;
  options.run_journal = &runs;

  LoopStats stats;
  try {
    stats = main_loop(cfg, generator, judge, data, seed, db, options);
  } catch (const InvalidArgument&) {
    throw;
  } catch (const std::exception& e) {
    throw RuntimeFailure(std::string("search aborted with ") + std::to_string(db.size()) +
                         " records kept: " + e.what());
  }

  const ExperimentRecord* best = nullptr;
  for (const auto& r : db.records()) {
    if (!best || r.auc() > best->auc()) best = &r;
  }
  nlohmann::json summary = {
      {"records", db.size()},
      {"attempts", stats.attempts},
      {"executions", stats.executions},
      {"abandoned", stats.abandoned},
  };
  if (best) summary["best"] = to_json(*best);
  write_file(best_path, summary.dump(2) + "\n");

  std::cout << "records=" << db.size() << " attempts=" << stats.attempts << " abandoned=" << stats.abandoned;
  if (best) std::cout << " best_id=" << best->id << " best_auc=" << fmt_short(best->auc());
  std::cout << "\n";
  if (db.size() < cfg.budget) {
    std::cerr << "mia: attempt cap reached before the budget (" << db.size() << "/" << cfg.budget << ")\n";
    return kExitRuntime;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Membership inference signal toolkit and design search"};
  app.require_subcommand(1);
  app.footer(signal_listing());

  std::string data_path, out_path;

  SignalOptions eval_o;
  auto* eval = app.add_subcommand("eval", "Score a dataset with one signal and write a metrics report");
  eval_o.add_to(*eval);
  eval->add_option("--data", data_path, "Dataset (.jsonl or directory of .mial)")->required();
  eval->add_option("--out", out_path, "Metrics JSON path");

  SignalOptions roc_o;
  auto* roc = app.add_subcommand("roc", "Write the ROC curve of one signal as CSV");
  roc_o.add_to(*roc);
  roc->add_option("--data", data_path, "Dataset (.jsonl or directory of .mial)")->required();
  roc->add_option("--out", out_path, "CSV path")->required();

  SignalOptions score_o;
  auto* score = app.add_subcommand("score", "Read JSON Lines on stdin, print one score per line");
  score_o.add_to(*score);

  std::uint64_t split_seed = 0;
  std::string train_out, test_out;
  auto* split = app.add_subcommand("split", "Seeded 50/50 train/test split");
  split->add_option("--data", data_path, "Dataset (.jsonl or directory of .mial)")->required();
  split->add_option("--seed", split_seed, "Shuffle seed")->capture_default_str();
  split->add_option("--train-out,--train_out", train_out, "Train split path")->required();
  split->add_option("--test-out,--test_out", test_out, "Test split path")->required();

  std::string journal, descriptions;
  std::size_t div_dim = 256;
  auto* diversity = app.add_subcommand("diversity", "Pairwise cosine similarity of design descriptions");
  auto* journal_opt = diversity->add_option("--journal", journal, "Experiment journal (JSON Lines)");
  auto* desc_opt = diversity->add_option("--descriptions", descriptions, "JSON array of description strings");
  journal_opt->excludes(desc_opt);
  diversity->add_option("--out", out_path, "JSON report path");
  diversity->add_option("--embed-dim,--embed_dim", div_dim, "Hashed embedding size")->capture_default_str();

  SearchArgs search_args;
  auto* search = app.add_subcommand("search", "Run the explore/exploit design search");
  add_search_options(*search, search_args);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*eval) return cmd_eval(eval_o, *eval, data_path, out_path);
    if (*roc) return cmd_roc(roc_o, *roc, data_path, out_path);
    if (*score) return cmd_score(score_o, *score);
    if (*split) return cmd_split(data_path, split_seed, train_out, test_out);
    if (*diversity) {
      if (journal.empty() && descriptions.empty()) throw InvalidArgument("diversity needs --journal or --descriptions");
      return cmd_diversity(journal, descriptions, out_path, div_dim);
    }
    if (*search) return cmd_search(*search, search_args);
  } catch (const RuntimeFailure& e) {
    std::cerr << "mia: " << e.what() << "\n";
    return kExitRuntime;
  } catch (const PluginError& e) {
    std::cerr << "mia: " << e.what() << "\n";
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "mia: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
