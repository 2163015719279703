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

#include "miasig/search/agents.hpp"

#include <algorithm>
#include <numeric>
#include <unordered_set>

#include "miasig/errors.hpp"

namespace miasig::search {

namespace {

constexpr std::size_t kSemanticNeighbors = 2;

void append_unique(std::vector<ExperimentRecord>& out, std::unordered_set<ExperimentId>& seen,
                   std::vector<ExperimentRecord> more) {
  for (auto& r : more) {
    if (seen.insert(r.id).second) out.push_back(std::move(r));
  }
}

template <typename Fn>
auto with_context(const char* stage, Fn&& fn) {
  try {
    return fn();
  } catch (const PluginError& e) {
    throw PluginError(std::string(stage) + ": " + e.what());
  }
}

}  // namespace

std::vector<ExperimentRecord> sample_records(const ExperimentDb& db, std::size_t k, Rng& rng) {
  std::vector<std::size_t> idx(db.size());
  std::iota(idx.begin(), idx.end(), 0);
  k = std::min(k, idx.size());
  std::vector<ExperimentRecord> out;
  for (std::size_t i = 0; i < k; ++i) {
    const auto j = i + static_cast<std::size_t>(rng.below(idx.size() - i));
    std::swap(idx[i], idx[j]);
    out.push_back(db.records()[idx[i]]);
  }
  return out;
}

std::vector<ExperimentRecord> explorer_neighbors(const ExperimentDb& db, const Design& design,
                                                 const SearchConfig& config) {
  std::vector<ExperimentRecord> out;
  if (db.empty()) return out;
  std::unordered_set<ExperimentId> seen;
  append_unique(out, seen, db.semantic_nn(design.idea, RecordField::Idea, kSemanticNeighbors));
  append_unique(out, seen, db.semantic_nn(design.design_justification, RecordField::Justification, kSemanticNeighbors));
  append_unique(out, seen, db.semantic_nn(design.design_justification, RecordField::Analysis, kSemanticNeighbors));
  append_unique(out, seen, db.bm25(design.idea + " " + design.design_justification, config.retrieval_k));
  return out;
}

Design explorer_step(const ExperimentDb& db, const SearchConfig& config, DesignGenerator& generator,
                     NoveltyJudge& judge, Rng& rng) {
  return with_context("explorer", [&] {
    Design design = generator.generate(sample_records(db, config.explorer_seed_count, rng));
    for (std::size_t round = 0; round < config.explorer_refine_budget; ++round) {
      const auto neighbors = explorer_neighbors(db, design, config);
      const auto verdict = judge.judge(design, neighbors);
      if (verdict.action == JudgeAction::Accept) break;
      if (verdict.action == JudgeAction::Revise) {
        design = generator.revise(design, neighbors, verdict.suggestions);
      } else {
        design = generator.generate(sample_records(db, config.explorer_seed_count, rng));
      }
    }
    design.parent_id.reset();
    return design;
  });
}

ParentCandidates exploit_candidates(const ExperimentDb& db, const SearchConfig& config) {
  ParentCandidates c;
  for (const auto& r : db.records()) {
    if (r.metrics) c.top.push_back(r);
  }
  if (c.top.empty()) throw InvalidArgument("exploiter needs at least one scored experiment");
  std::stable_sort(c.top.begin(), c.top.end(),
                   [](const ExperimentRecord& a, const ExperimentRecord& b) { return a.auc() > b.auc(); });
  if (c.top.size() > config.top_k_exploit) c.top.resize(config.top_k_exploit);
  for (const auto& r : c.top) c.cluster_of.push_back(db.root_of(r.id));
  return c;
}

ExperimentRecord exploiter_select_parent(const ExperimentDb& db, const SearchConfig& config, Rng& rng) {
  const auto c = exploit_candidates(db, config);
  const std::size_t n = c.top.size();
  auto excess = [](double auc) { return std::max(auc - 0.5, 0.0); };

  if (config.exploit_mode == ExploitMode::Flat) {
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i) w[i] = std::abs(c.top[i].auc() - 0.5);
    if (std::all_of(w.begin(), w.end(), [](double x) { return x == 0.0; })) return c.top[rng.below(n)];
    return c.top[rng.weighted_index(w)];
  }

  // Clusters in order of first appearance among the top-K.
  std::vector<ExperimentId> roots;
  std::vector<double> cluster_weight;
  for (std::size_t i = 0; i < n; ++i) {
    auto it = std::find(roots.begin(), roots.end(), c.cluster_of[i]);
    const double w = excess(c.top[i].auc());
    if (it == roots.end()) {
      roots.push_back(c.cluster_of[i]);
      cluster_weight.push_back(w);
    } else {
      auto& cw = cluster_weight[static_cast<std::size_t>(it - roots.begin())];
      cw = std::max(cw, w);
    }
  }
  if (std::all_of(cluster_weight.begin(), cluster_weight.end(), [](double x) { return x == 0.0; })) {
    return c.top[rng.below(n)];
  }
  const ExperimentId root = roots[rng.weighted_index(cluster_weight)];
  std::vector<std::size_t> members;
  std::vector<double> w;
  for (std::size_t i = 0; i < n; ++i) {
    if (c.cluster_of[i] == root) {
      members.push_back(i);
      w.push_back(excess(c.top[i].auc()));
    }
  }
  return c.top[members[rng.weighted_index(w)]];
}

Design exploiter_step(const ExperimentDb& db, const SearchConfig& config, DesignGenerator& generator, Rng& rng) {
  ExploitContext ctx;
  ctx.parent = exploiter_select_parent(db, config, rng);
  ctx.ancestors = db.ancestors(ctx.parent.id);
  ctx.siblings = db.siblings(ctx.parent.id);

  std::unordered_set<ExperimentId> seen{ctx.parent.id};
  for (const auto& a : ctx.ancestors) seen.insert(a.id);
  for (const auto& s : ctx.siblings) seen.insert(s.id);
  append_unique(ctx.related, seen, db.semantic_nn(ctx.parent.design.idea, RecordField::Idea, config.retrieval_k));
  append_unique(ctx.related, seen,
                db.bm25(ctx.parent.design.idea + " " + ctx.parent.design.design_justification, config.retrieval_k));

  Design child = with_context("exploiter", [&] { return generator.exploit(ctx); });
  child.parent_id = ctx.parent.id;
  return child;
}

}  // namespace miasig::search
