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

#include <chrono>
#include <filesystem>
#include <string>
#include <vector>

#include "miasig/datamodel.hpp"
#include "miasig/search/types.hpp"

namespace miasig::search {

inline constexpr std::size_t kErrorTailLines = 20;

struct CandidateRun {
  RunStatus status = RunStatus::Fail;
  std::vector<ScoredSample> scores;  // one per sample when status is Ok
  std::string error;                 // diagnostic plus the stderr tail
  std::chrono::milliseconds elapsed{0};
};

/// JSON Lines fed to candidates: the text samples with labels removed.
std::string candidate_input(const Dataset& data);

/// Parses candidate stdout: exactly `expected` lines, each a finite decimal
/// number (surrounding blanks allowed). Returns an error message instead of
/// throwing; empty on success.
std::string parse_candidate_scores(const std::string& out, std::size_t expected, std::vector<double>& scores);

/// Executes the candidate named by code_ref (relative paths resolve against
/// workdir, which is also its working directory) on a text dataset under the
/// configured wall-clock timeout.
CandidateRun run_candidate(const std::string& code_ref, const Dataset& data, const SearchConfig& config,
                           const std::filesystem::path& workdir = {});

}  // namespace miasig::search
