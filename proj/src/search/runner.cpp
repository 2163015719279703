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

#include "miasig/search/runner.hpp"

#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <sstream>

#include "miasig/errors.hpp"
#include "miasig/subprocess.hpp"

namespace miasig::search {

std::string candidate_input(const Dataset& data) {
  std::ostringstream out;
  write_text_samples(out, data.text_samples(), /*include_label=*/false);
  return out.str();
}

std::string parse_candidate_scores(const std::string& out, std::size_t expected, std::vector<double>& scores) {
  scores.clear();
  const auto last = out.find_last_not_of(" \t\r\n");
  std::istringstream in(last == std::string::npos ? std::string() : out.substr(0, last + 1));
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const char* begin = line.c_str();
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(begin, &end);
    const bool blank_tail = std::string_view(end).find_first_not_of(" \t\r") == std::string_view::npos;
    if (end == begin || !blank_tail || errno == ERANGE) {
      return "output line " + std::to_string(line_no) + " is not a decimal number: '" + line + "'";
    }
    if (!std::isfinite(v)) return "output line " + std::to_string(line_no) + " is not finite";
    scores.push_back(v);
  }
  if (scores.size() != expected) {
    return "expected " + std::to_string(expected) + " scores, got " + std::to_string(scores.size());
  }
  return {};
}

CandidateRun run_candidate(const std::string& code_ref, const Dataset& data, const SearchConfig& config,
                           const std::filesystem::path& workdir) {
  if (data.kind() != DatasetKind::Text) throw InvalidArgument("candidates run on text datasets only");
  std::filesystem::path program(code_ref);
  if (program.is_relative() && !workdir.empty()) program = workdir / program;

  CandidateRun run;
  const auto result = run_process({program.string()}, candidate_input(data),
                                  std::chrono::seconds(config.timeout_seconds), workdir);
  run.elapsed = result.elapsed;
  const auto tail = last_lines(result.err, kErrorTailLines);
  auto fail = [&](RunStatus status, const std::string& why) {
    run.status = status;
    run.scores.clear();
    run.error = tail.empty() ? why : why + "\n" + tail;
    return run;
  };

  if (result.timed_out) {
    return fail(RunStatus::Timeout, "candidate timed out after " + std::to_string(config.timeout_seconds) + "s");
  }
  if (result.term_signal) return fail(RunStatus::Fail, "candidate killed by signal " + std::to_string(result.term_signal));
  if (result.exit_code != 0) return fail(RunStatus::Fail, "candidate exited with status " + std::to_string(result.exit_code));

  std::vector<double> values;
  if (auto why = parse_candidate_scores(result.out, data.size(), values); !why.empty()) {
    return fail(RunStatus::Fail, why);
  }
  const auto& samples = data.text_samples();
  run.scores.reserve(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) run.scores.push_back({samples[i].id, values[i], samples[i].label});
  run.status = RunStatus::Ok;
  run.error = tail;
  return run;
}

}  // namespace miasig::search
