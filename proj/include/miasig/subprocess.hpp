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
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace miasig {

struct ProcessResult {
  int exit_code = -1;      // valid when the child exited normally
  int term_signal = 0;     // non-zero when the child died from a signal
  bool timed_out = false;  // the watchdog killed the process group
  std::string out;
  std::string err;
  std::chrono::milliseconds elapsed{0};

  bool ok() const noexcept { return !timed_out && term_signal == 0 && exit_code == 0; }
};

/// Runs argv[0] (PATH lookup applies) in its own process group, feeding
/// `input` to its stdin and capturing stdout/stderr. When `timeout` elapses
/// the whole group is killed with SIGKILL and timed_out is set. Leftover
/// members of the group are killed once the child exits. An exec failure
/// shows up as exit code 127 with the reason on stderr.
ProcessResult run_process(const std::vector<std::string>& argv, std::string_view input,
                          std::optional<std::chrono::milliseconds> timeout = std::nullopt,
                          const std::filesystem::path& cwd = {});

/// Last `n` lines of `text` (trailing newline ignored).
std::string last_lines(std::string_view text, std::size_t n);

/// True when `path` names an existing regular file we may execute. Bare
/// names are searched on PATH.
bool is_executable(const std::string& path);

}  // namespace miasig
