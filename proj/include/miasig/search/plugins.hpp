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

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "miasig/search/types.hpp"

namespace miasig::search {

/// What the exploiter hands the generator alongside the chosen parent.
struct ExploitContext {
  ExperimentRecord parent;
  std::vector<ExperimentRecord> ancestors;  // root first, parent excluded
  std::vector<ExperimentRecord> siblings;
  std::vector<ExperimentRecord> related;
};

/// Design/programmer/analyzer agent. Code is referenced by an opaque string
/// that the candidate runner resolves (relative paths against the search
/// working directory).
class DesignGenerator {
 public:
  virtual ~DesignGenerator() = default;

  virtual Design generate(const std::vector<ExperimentRecord>& seeds) = 0;
  virtual Design revise(const Design& design, const std::vector<ExperimentRecord>& neighbors,
                        const std::string& suggestions) = 0;
  virtual Design exploit(const ExploitContext& context) = 0;
  virtual std::string codegen(const Design& design) = 0;
  virtual std::string fix(const Design& design, const std::string& code_ref, const std::string& error) = 0;
  virtual std::string analyze(const Design& design, const MetricsReport& metrics) = 0;
};

class NoveltyJudge {
 public:
  virtual ~NoveltyJudge() = default;
  virtual JudgeVerdict judge(const Design& design, const std::vector<ExperimentRecord>& neighbors) = 0;
};

/// Runs `command` once per request: one JSON object on stdin, one JSON
/// object on stdout. Failures (spawn error, non-zero exit, timeout, bad
/// JSON, missing response keys) raise PluginError with the mode and the
/// tail of the plugin's stderr.
nlohmann::json call_plugin(const std::vector<std::string>& command, const nlohmann::json& request,
                           std::size_t timeout_seconds, const std::filesystem::path& cwd);

/// DesignGenerator speaking the child-process protocol:
///   {"mode": "generate"|"revise"|"exploit"|"codegen"|"fix"|"analyze",
///    "context": {...}}
/// Every context also carries "workdir", "rng_seed" and "nonce" (a
/// per-generator call counter) so plugins can be deterministic.
class ProcessGenerator final : public DesignGenerator {
 public:
  ProcessGenerator(std::vector<std::string> command, std::filesystem::path workdir, std::uint64_t rng_seed,
                   std::size_t timeout_seconds);

  Design generate(const std::vector<ExperimentRecord>& seeds) override;
  Design revise(const Design& design, const std::vector<ExperimentRecord>& neighbors,
                const std::string& suggestions) override;
  Design exploit(const ExploitContext& context) override;
  std::string codegen(const Design& design) override;
  std::string fix(const Design& design, const std::string& code_ref, const std::string& error) override;
  std::string analyze(const Design& design, const MetricsReport& metrics) override;

 private:
  nlohmann::json call(const char* mode, nlohmann::json context);
  Design design_call(const char* mode, nlohmann::json context, const std::optional<ExperimentId>& parent);
  std::string code_call(const char* mode, nlohmann::json context);

  std::vector<std::string> command_;
  std::filesystem::path workdir_;
  std::uint64_t rng_seed_;
  std::size_t timeout_seconds_;
  std::uint64_t nonce_ = 0;
};

/// NoveltyJudge over the child-process protocol:
///   request {"design": {...}, "neighbors": [...]}
///   response {"action", "novelty_score", "suggestions"}
class ProcessJudge final : public NoveltyJudge {
 public:
  ProcessJudge(std::vector<std::string> command, std::filesystem::path workdir, std::size_t timeout_seconds);
  JudgeVerdict judge(const Design& design, const std::vector<ExperimentRecord>& neighbors) override;

 private:
  std::vector<std::string> command_;
  std::filesystem::path workdir_;
  std::size_t timeout_seconds_;
};

nlohmann::json records_to_json(const std::vector<ExperimentRecord>& records);

}  // namespace miasig::search
