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

#include "miasig/search/types.hpp"

#include <set>

#include "miasig/errors.hpp"

namespace miasig::search {

namespace {

template <typename T>
T field(const nlohmann::json& j, const char* key, const char* what) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ParseError(std::string(what) + ": missing or mistyped key '" + key + "'", 0);
  }
}

}  // namespace

std::string_view to_string(RunStatus s) {
  switch (s) {
    case RunStatus::Ok: return "ok";
    case RunStatus::Fail: return "fail";
    case RunStatus::Timeout: return "timeout";
  }
  return "fail";
}

std::string_view to_string(SearchMode m) {
  switch (m) {
    case SearchMode::Seed: return "seed";
    case SearchMode::Explore: return "explore";
    case SearchMode::Exploit: return "exploit";
  }
  return "explore";
}

RunStatus parse_run_status(std::string_view s) {
  if (s == "ok") return RunStatus::Ok;
  if (s == "fail") return RunStatus::Fail;
  if (s == "timeout") return RunStatus::Timeout;
  throw ParseError("unknown run status '" + std::string(s) + "'", 0);
}

SearchMode parse_search_mode(std::string_view s) {
  if (s == "seed") return SearchMode::Seed;
  if (s == "explore") return SearchMode::Explore;
  if (s == "exploit") return SearchMode::Exploit;
  throw ParseError("unknown search mode '" + std::string(s) + "'", 0);
}

void validate(const SearchConfig& c) {
  auto positive = [](std::size_t v, const char* name) {
    if (v == 0) throw InvalidArgument(std::string("search config: ") + name + " must be >= 1");
  };
  positive(c.budget, "budget");
  positive(c.timeout_seconds, "timeout_seconds");
  positive(c.explore_period, "explore_period");
  positive(c.top_k_exploit, "top_k_exploit");
  positive(c.explorer_seed_count, "explorer_seed_count");
  positive(c.explorer_refine_budget, "explorer_refine_budget");
  positive(c.max_fix_rounds, "max_fix_rounds");
  positive(c.retrieval_k, "retrieval_k");
  positive(c.plugin_timeout_seconds, "plugin_timeout_seconds");
  if (c.embed_dim < 8) throw InvalidArgument("search config: embed_dim must be >= 8");
}

nlohmann::json to_json(const Design& d) {
  return {{"idea", d.idea},
          {"design_justification", d.design_justification},
          {"implementation_instruction", d.implementation_instruction},
          {"parent_id", d.parent_id ? nlohmann::json(*d.parent_id) : nlohmann::json(nullptr)}};
}

Design design_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ParseError("design must be a JSON object", 0);
  Design d;
  d.idea = field<std::string>(j, "idea", "design");
  d.design_justification = j.value("design_justification", std::string{});
  d.implementation_instruction = j.value("implementation_instruction", std::string{});
  if (auto it = j.find("parent_id"); it != j.end() && !it->is_null()) {
    if (!it->is_number_integer()) throw ParseError("design: parent_id must be an integer", 0);
    d.parent_id = it->get<ExperimentId>();
  }
  return d;
}

nlohmann::json to_json(const ExperimentRecord& r) {
  return {{"id", r.id},
          {"design", to_json(r.design)},
          {"code_ref", r.code_ref},
          {"status", to_string(r.status)},
          {"metrics", r.metrics ? to_json(*r.metrics) : nlohmann::json(nullptr)},
          {"analysis", r.analysis},
          {"iteration", r.iteration},
          {"mode", to_string(r.mode)},
          {"fix_rounds", r.fix_rounds}};
}

ExperimentRecord record_from_json(const nlohmann::json& j) {
  ExperimentRecord r;
  r.id = field<ExperimentId>(j, "id", "experiment record");
  r.design = design_from_json(j.at("design"));
  r.code_ref = field<std::string>(j, "code_ref", "experiment record");
  r.status = parse_run_status(field<std::string>(j, "status", "experiment record"));
  if (auto it = j.find("metrics"); it != j.end() && !it->is_null()) r.metrics = metrics_from_json(*it);
  r.analysis = field<std::string>(j, "analysis", "experiment record");
  r.iteration = field<std::size_t>(j, "iteration", "experiment record");
  r.mode = parse_search_mode(field<std::string>(j, "mode", "experiment record"));
  r.fix_rounds = j.value("fix_rounds", std::size_t{0});
  return r;
}

nlohmann::json to_json(const SearchConfig& c) {
  return {{"budget", c.budget},
          {"timeout_seconds", c.timeout_seconds},
          {"explore_period", c.explore_period},
          {"top_k_exploit", c.top_k_exploit},
          {"explorer_seed_count", c.explorer_seed_count},
          {"explorer_refine_budget", c.explorer_refine_budget},
          {"max_fix_rounds", c.max_fix_rounds},
          {"retrieval_k", c.retrieval_k},
          {"embed_dim", c.embed_dim},
          {"rng_seed", c.rng_seed},
          {"exploit_mode", c.exploit_mode == ExploitMode::Flat ? "flat" : "lineage"},
          {"max_attempts", c.max_attempts},
          {"plugin_timeout_seconds", c.plugin_timeout_seconds}};
}

SearchConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ParseError("search config must be a JSON object", 0);
  SearchConfig c;
  static const std::set<std::string, std::less<>> kKeys = {
      "budget",       "timeout_seconds", "explore_period", "top_k_exploit",   "explorer_seed_count",
      "explorer_refine_budget", "max_fix_rounds", "retrieval_k", "embed_dim", "rng_seed",
      "exploit_mode", "max_attempts", "plugin_timeout_seconds"};
  for (const auto& [key, _] : j.items()) {
    if (!kKeys.contains(key)) throw ParseError("search config: unknown key '" + key + "'", 0);
  }
  auto read = [&](const char* key, auto& target) {
    if (j.contains(key)) target = field<std::decay_t<decltype(target)>>(j, key, "search config");
  };
  read("budget", c.budget);
  read("timeout_seconds", c.timeout_seconds);
  read("explore_period", c.explore_period);
  read("top_k_exploit", c.top_k_exploit);
  read("explorer_seed_count", c.explorer_seed_count);
  read("explorer_refine_budget", c.explorer_refine_budget);
  read("max_fix_rounds", c.max_fix_rounds);
  read("retrieval_k", c.retrieval_k);
  read("embed_dim", c.embed_dim);
  read("rng_seed", c.rng_seed);
  read("max_attempts", c.max_attempts);
  read("plugin_timeout_seconds", c.plugin_timeout_seconds);
  if (j.contains("exploit_mode")) {
    const auto mode = field<std::string>(j, "exploit_mode", "search config");
    if (mode == "lineage") {
      c.exploit_mode = ExploitMode::Lineage;
    } else if (mode == "flat") {
      c.exploit_mode = ExploitMode::Flat;
    } else {
      throw ParseError("search config: exploit_mode must be 'lineage' or 'flat'", 0);
    }
  }
  validate(c);
  return c;
}

nlohmann::json to_json(const JudgeVerdict& v) {
  const char* action = v.action == JudgeAction::Accept   ? "accept"
                       : v.action == JudgeAction::Revise ? "revise"
                                                         : "redesign";
  return {{"action", action}, {"novelty_score", v.novelty_score}, {"suggestions", v.suggestions}};
}

JudgeVerdict verdict_from_json(const nlohmann::json& j) {
  JudgeVerdict v;
  const auto action = field<std::string>(j, "action", "judge verdict");
  if (action == "accept") {
    v.action = JudgeAction::Accept;
  } else if (action == "revise") {
    v.action = JudgeAction::Revise;
  } else if (action == "redesign") {
    v.action = JudgeAction::Redesign;
  } else {
    throw ParseError("judge verdict: unknown action '" + action + "'", 0);
  }
  v.novelty_score = j.value("novelty_score", 0.0);
  v.suggestions = j.value("suggestions", std::string{});
  if (!(v.novelty_score >= 0.0 && v.novelty_score <= 1.0)) {
    throw ParseError("judge verdict: novelty_score outside [0, 1]", 0);
  }
  if (v.action == JudgeAction::Revise && v.suggestions.empty()) {
    throw ParseError("judge verdict: revise requires suggestions", 0);
  }
  return v;
}

}  // namespace miasig::search
