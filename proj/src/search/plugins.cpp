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

#include "miasig/search/plugins.hpp"

#include <chrono>

#include "miasig/errors.hpp"
#include "miasig/subprocess.hpp"

namespace miasig::search {

nlohmann::json records_to_json(const std::vector<ExperimentRecord>& records) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& r : records) out.push_back(to_json(r));
  return out;
}

nlohmann::json call_plugin(const std::vector<std::string>& command, const nlohmann::json& request,
                           std::size_t timeout_seconds, const std::filesystem::path& cwd) {
  const std::string mode = request.value("mode", std::string("judge"));
  const auto result = run_process(command, request.dump() + "\n",
                                  std::chrono::seconds(timeout_seconds), cwd);
  const auto where = "plugin '" + command.front() + "' (" + mode + ")";
  if (result.timed_out) {
    throw PluginError(where + " timed out after " + std::to_string(timeout_seconds) + "s");
  }
  if (!result.ok()) {
    const auto how = result.term_signal ? "killed by signal " + std::to_string(result.term_signal)
                                        : "exited with status " + std::to_string(result.exit_code);
    throw PluginError(where + " " + how + ": " + last_lines(result.err, 20));
  }
  try {
    auto response = nlohmann::json::parse(result.out);
    if (!response.is_object()) throw PluginError(where + " returned a non-object response");
    return response;
  } catch (const nlohmann::json::parse_error& e) {
    throw PluginError(where + " returned invalid JSON: " + e.what());
  }
}

ProcessGenerator::ProcessGenerator(std::vector<std::string> command, std::filesystem::path workdir,
                                   std::uint64_t rng_seed, std::size_t timeout_seconds)
    : command_(std::move(command)),
      workdir_(std::move(workdir)),
      rng_seed_(rng_seed),
      timeout_seconds_(timeout_seconds) {
  if (command_.empty()) throw InvalidArgument("generator command is empty");
}

nlohmann::json ProcessGenerator::call(const char* mode, nlohmann::json context) {
  context["workdir"] = workdir_.string();
  context["rng_seed"] = rng_seed_;
  context["nonce"] = nonce_++;
  return call_plugin(command_, {{"mode", mode}, {"context", std::move(context)}}, timeout_seconds_, workdir_);
}

Design ProcessGenerator::design_call(const char* mode, nlohmann::json context,
                                     const std::optional<ExperimentId>& parent) {
  auto response = call(mode, std::move(context));
  Design d;
  try {
    d.idea = response.at("idea").get<std::string>();
    d.design_justification = response.at("design_justification").get<std::string>();
    d.implementation_instruction = response.at("implementation_instruction").get<std::string>();
  } catch (const nlohmann::json::exception&) {
    throw PluginError(std::string("generator (") + mode +
                      ") response lacks idea/design_justification/implementation_instruction");
  }
  if (d.idea.empty()) throw PluginError(std::string("generator (") + mode + ") returned an empty idea");
  d.parent_id = parent;
  return d;
}

std::string ProcessGenerator::code_call(const char* mode, nlohmann::json context) {
  auto response = call(mode, std::move(context));
  auto it = response.find("code_ref");
  if (it == response.end() || !it->is_string() || it->get<std::string>().empty()) {
    throw PluginError(std::string("generator (") + mode + ") response lacks code_ref");
  }
  return it->get<std::string>();
}

Design ProcessGenerator::generate(const std::vector<ExperimentRecord>& seeds) {
  return design_call("generate", {{"seeds", records_to_json(seeds)}}, std::nullopt);
}

Design ProcessGenerator::revise(const Design& design, const std::vector<ExperimentRecord>& neighbors,
                                const std::string& suggestions) {
  return design_call("revise",
                     {{"design", to_json(design)}, {"neighbors", records_to_json(neighbors)},
                      {"suggestions", suggestions}},
                     design.parent_id);
}

Design ProcessGenerator::exploit(const ExploitContext& c) {
  return design_call("exploit",
                     {{"parent", to_json(c.parent)},
                      {"ancestors", records_to_json(c.ancestors)},
                      {"siblings", records_to_json(c.siblings)},
                      {"related", records_to_json(c.related)}},
                     c.parent.id);
}

std::string ProcessGenerator::codegen(const Design& design) {
  return code_call("codegen", {{"design", to_json(design)}});
}

std::string ProcessGenerator::fix(const Design& design, const std::string& code_ref, const std::string& error) {
  return code_call("fix", {{"design", to_json(design)}, {"code_ref", code_ref}, {"error", error}});
}

std::string ProcessGenerator::analyze(const Design& design, const MetricsReport& metrics) {
  auto response = call("analyze", {{"design", to_json(design)}, {"metrics", to_json(metrics)}});
  auto it = response.find("analysis");
  if (it == response.end() || !it->is_string()) throw PluginError("generator (analyze) response lacks analysis");
  return it->get<std::string>();
}

ProcessJudge::ProcessJudge(std::vector<std::string> command, std::filesystem::path workdir,
                           std::size_t timeout_seconds)
    : command_(std::move(command)), workdir_(std::move(workdir)), timeout_seconds_(timeout_seconds) {
  if (command_.empty()) throw InvalidArgument("judge command is empty");
}

JudgeVerdict ProcessJudge::judge(const Design& design, const std::vector<ExperimentRecord>& neighbors) {
  auto response = call_plugin(command_, {{"design", to_json(design)}, {"neighbors", records_to_json(neighbors)}},
                              timeout_seconds_, workdir_);
  try {
    return verdict_from_json(response);
  } catch (const ParseError& e) {
    throw PluginError(std::string("judge: ") + e.what());
  }
}

}  // namespace miasig::search
