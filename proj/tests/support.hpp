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

#include <stdlib.h>
#include <sys/stat.h>

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "miasig/datamodel.hpp"
#include "miasig/rng.hpp"

namespace testing_support {

namespace fs = std::filesystem;

/// Fresh directory under /tmp, removed on destruction.
class TempDir {
 public:
  TempDir() {
    std::string tmpl = (fs::temp_directory_path() / "miasig-test-XXXXXX").string();
    if (!::mkdtemp(tmpl.data())) throw std::runtime_error("mkdtemp failed");
    path_ = tmpl;
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

inline void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
}

inline std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

inline fs::path write_script(const fs::path& path, const std::string& body) {
  write_text(path, "#!/bin/sh\n" + body);
  ::chmod(path.c_str(), 0755);
  return path;
}

inline std::vector<std::string> random_tokens(miasig::Rng& rng, std::size_t max_len, std::size_t vocab,
                                              std::size_t min_len = 0, const std::string& prefix = "t") {
  const std::size_t n = min_len + rng.below(max_len - min_len + 1);
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(prefix + std::to_string(rng.below(vocab)));
  return out;
}

inline std::string join(const std::vector<std::string>& tokens) {
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out += ' ';
    out += t;
  }
  return out;
}

/// Random well-formed sample: suffix of 1..max_tokens tokens, 1..max_gens
/// generations of 0..max_tokens tokens over a small vocabulary, some of them
/// near copies of the suffix so matches actually occur.
inline miasig::TextSample random_text_sample(miasig::Rng& rng, const std::string& id, std::size_t max_gens = 10,
                                             std::size_t max_tokens = 30, std::size_t vocab = 6) {
  miasig::TextSample s;
  s.id = id;
  s.label = rng.below(2) ? miasig::Membership::Member : miasig::Membership::NonMember;
  const auto prefix = random_tokens(rng, 8, vocab, 1);
  const auto suffix = random_tokens(rng, max_tokens, vocab, 1);
  s.prefix = join(prefix);
  s.ground_truth_suffix = join(suffix);
  s.original_text = s.prefix + " " + s.ground_truth_suffix;
  const std::size_t d = 1 + rng.below(max_gens);
  for (std::size_t i = 0; i < d; ++i) {
    if (rng.below(3) == 0) {
      auto g = suffix;
      for (auto& t : g) {
        if (rng.below(5) == 0) t = "t" + std::to_string(rng.below(vocab));
      }
      if (!g.empty() && rng.below(2)) g.pop_back();
      s.suffix_generations.push_back(join(g));
    } else {
      s.suffix_generations.push_back(join(random_tokens(rng, max_tokens, vocab)));
    }
  }
  return s;
}

/// 200 samples, half members. Members' generations copy the suffix;
/// non-members' generations use a vocabulary disjoint from the suffix.
inline std::vector<miasig::TextSample> separable_samples(std::size_t n = 200, std::uint64_t seed = 7,
                                                         std::size_t gens = 5) {
  miasig::Rng rng(seed);
  std::vector<miasig::TextSample> out;
  for (std::size_t i = 0; i < n; ++i) {
    miasig::TextSample s;
    s.id = "s" + std::to_string(i);
    s.label = i % 2 ? miasig::Membership::Member : miasig::Membership::NonMember;
    const auto tokens = random_tokens(rng, 24, 40, 16, "w");
    const auto cut = tokens.size() * 7 / 10;
    s.original_text = join(tokens);
    s.prefix = join({tokens.begin(), tokens.begin() + static_cast<long>(cut)});
    const std::vector<std::string> suffix(tokens.begin() + static_cast<long>(cut), tokens.end());
    s.ground_truth_suffix = join(suffix);
    for (std::size_t g = 0; g < gens; ++g) {
      if (s.label == miasig::Membership::Member) {
        s.suffix_generations.push_back(s.ground_truth_suffix);
      } else {
        s.suffix_generations.push_back(join(random_tokens(rng, suffix.size(), 40, suffix.size(), "x")));
      }
    }
    out.push_back(std::move(s));
  }
  return out;
}

/// Same samples with labels permuted by a seeded shuffle.
inline std::vector<miasig::TextSample> shuffle_labels(std::vector<miasig::TextSample> samples, std::uint64_t seed) {
  std::vector<miasig::Membership> labels;
  for (const auto& s : samples) labels.push_back(s.label);
  miasig::Rng rng(seed);
  for (std::size_t i = labels.size(); i > 1; --i) std::swap(labels[i - 1], labels[rng.below(i)]);
  for (std::size_t i = 0; i < samples.size(); ++i) samples[i].label = labels[i];
  return samples;
}

inline miasig::LogitSample random_logit_sample(miasig::Rng& rng, const std::string& id, std::size_t L, std::size_t V,
                                               double scale = 3.0) {
  miasig::LogitSample s;
  s.id = id;
  s.label = rng.below(2) ? miasig::Membership::Member : miasig::Membership::NonMember;
  s.logits = miasig::LogitMatrix(L, V);
  for (std::size_t i = 0; i < L; ++i) {
    for (std::size_t v = 0; v < V; ++v) s.logits(i, v) = static_cast<float>(scale * rng.normal());
    s.true_tokens.push_back(static_cast<std::uint32_t>(rng.below(V)));
  }
  return s;
}

}  // namespace testing_support
