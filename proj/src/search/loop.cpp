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

#include "miasig/search/loop.hpp"

#include <cmath>
#include <ostream>
#include <sstream>

#include "miasig/errors.hpp"
#include "miasig/evaluation.hpp"
#include "miasig/rng.hpp"
#include "miasig/search/agents.hpp"
#include "miasig/search/retrieval.hpp"

namespace miasig::search {

SearchMode scheduled_mode(std::size_t count, std::size_t explore_period) {
  if (explore_period == 0) throw InvalidArgument("explore_period must be positive");
  return count % explore_period == 0 ? SearchMode::Explore : SearchMode::Exploit;
}

namespace {

void journal_run(const LoopOptions& options, std::size_t iteration, SearchMode mode, const Design& design,
                 const std::string& code_ref, std::size_t fix_round, const CandidateRun& run) {
  if (!options.run_journal) return;
  nlohmann::json j = {
      {"iteration", iteration},
      {"mode", to_string(mode)},
      {"idea", design.idea},
      {"code_ref", code_ref},
      {"fix_round", fix_round},
      {"status", to_string(run.status)},
      {"error", run.error},
  };
  if (design.parent_id) j["parent_id"] = *design.parent_id;
  *options.run_journal << j.dump() << '\n';
  options.run_journal->flush();
}

void require_both_classes(const Dataset& data) {
  bool member = false, nonmember = false;
  for (auto label : data.labels()) (label == Membership::Member ? member : nonmember) = true;
  if (!member || !nonmember) throw InvalidArgument("search data needs both members and non-members");
}

}  // namespace

LoopStats main_loop(const SearchConfig& config, DesignGenerator& generator, NoveltyJudge& judge,
                    const Dataset& data, const std::optional<SeedCandidate>& seed, ExperimentDb& db,
                    const LoopOptions& options) {
  validate(config);
  if (data.kind() != DatasetKind::Text) throw InvalidArgument("search runs on text datasets only");
  require_both_classes(data);

  Executor execute = options.executor;
  if (!execute) {
    execute = [&](const std::string& code_ref) { return run_candidate(code_ref, data, config, options.workdir); };
  }

  Rng rng(mix64(config.rng_seed));
  LoopStats stats;

  auto finish = [&](const Design& design, const std::string& code_ref, const CandidateRun& run,
                    std::size_t iteration, SearchMode mode, std::size_t fix_round) {
    if (run.status != RunStatus::Ok) {
      ++stats.abandoned;
      return;
    }
    auto metrics = evaluate_scores(code_ref, run.scores);
    ExperimentRecord record;
    record.design = design;
    record.code_ref = code_ref;
    record.status = RunStatus::Ok;
    record.analysis = generator.analyze(design, metrics);
    record.metrics = std::move(metrics);
    record.iteration = iteration;
    record.mode = mode;
    record.fix_rounds = fix_round;
    db.insert(std::move(record));
    ++stats.inserted;
  };

  if (seed && db.size() < config.budget) {
    Design design{seed->idea, seed->justification, "", std::nullopt};
    const std::size_t iteration = db.size();
    ++stats.attempts;
    ++stats.executions;
    auto run = execute(seed->code_ref);
    journal_run(options, iteration, SearchMode::Seed, design, seed->code_ref, 0, run);
    finish(design, seed->code_ref, run, iteration, SearchMode::Seed, 0);
  }

  while (db.size() < config.budget && stats.attempts < config.attempt_cap()) {
    const std::size_t iteration = db.size();
    ++stats.attempts;

    SearchMode mode = scheduled_mode(iteration, config.explore_period);
    if (mode == SearchMode::Exploit && !db.has_scored()) mode = SearchMode::Explore;
    Design design = mode == SearchMode::Explore ? explorer_step(db, config, generator, judge, rng)
                                                : exploiter_step(db, config, generator, rng);

    std::string code_ref = generator.codegen(design);
    std::size_t fix_round = 0;
    ++stats.executions;
    CandidateRun run = execute(code_ref);
    journal_run(options, iteration, mode, design, code_ref, fix_round, run);
    while (run.status != RunStatus::Ok && fix_round < config.max_fix_rounds) {
      code_ref = generator.fix(design, code_ref, run.error);
      ++fix_round;
      if (run.status == RunStatus::Timeout) ++fix_round;
      ++stats.executions;
      run = execute(code_ref);
      journal_run(options, iteration, mode, design, code_ref, fix_round, run);
    }
    finish(design, code_ref, run, iteration, mode, fix_round);
  }
  return stats;
}

std::string canonical_description(const std::string& analysis) {
  static constexpr std::string_view kKeys[] = {"REPRESENTATION:", "COMPARISON:", "AGGREGATION:", "SCORE:"};
  std::istringstream in(analysis);
  std::string line, out;
  while (std::getline(in, line)) {
    for (auto key : kKeys) {
      if (line.rfind(key, 0) == 0) {
        out += line;
        out += '\n';
        break;
      }
    }
  }
  return out.empty() ? analysis : out;
}

std::vector<double> pairwise_description_similarity(const std::vector<std::string>& descriptions,
                                                    std::size_t embed_dim) {
  if (descriptions.size() < 2) throw InvalidArgument("diversity needs at least 2 designs");
  std::vector<std::vector<double>> emb;
  emb.reserve(descriptions.size());
  for (const auto& d : descriptions) emb.push_back(embed_text(d, embed_dim));
  std::vector<double> sims;
  sims.reserve(descriptions.size() * (descriptions.size() - 1) / 2);
  for (std::size_t i = 0; i < emb.size(); ++i) {
    for (std::size_t j = i + 1; j < emb.size(); ++j) sims.push_back(cosine(emb[i], emb[j]));
  }
  return sims;
}

std::vector<double> pairwise_design_similarity(const std::vector<ExperimentRecord>& records, std::size_t embed_dim) {
  std::vector<std::string> descriptions;
  descriptions.reserve(records.size());
  for (const auto& r : records) descriptions.push_back(canonical_description(r.analysis));
  return pairwise_description_similarity(descriptions, embed_dim);
}

}  // namespace miasig::search
