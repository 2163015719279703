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

// mia-offline-generator: deterministic stand-in for a design agent. Reads one
// request on stdin and answers with one JSON object on stdout. Designs are
// parameter templates over the registered text signals; candidates are shell
// scripts that exec `mia score`.

#include <sys/stat.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "miasig/rng.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Family {
  const char* signal;
  const char* phrase;
  const char* justification;
  const char* representation;
  const char* comparison;
  const char* aggregation;
  const char* score;
};

const Family kFamilies[] = {
    {"max_coverage", "Longest n-gram coverage of the true suffix by any model generation",
     "Memorized text is regenerated verbatim, so long shared n-grams mark members",
     "REPRESENTATION: whitespace tokens of the suffix and of each generation",
     "COMPARISON: fraction of suffix positions closing an n-gram found in a generation",
     "AGGREGATION: maximum over generations",
     "SCORE: best coverage fraction"},
    {"geo_edit_distance", "Geometric mean of suffix proximity and agreement among generations under capped edit distance",
     "Generations of seen text stay within a few edits of the reference",
     "REPRESENTATION: whitespace tokens of the suffix and of each generation",
     "COMPARISON: median banded Levenshtein distance to the suffix and between generations",
     "AGGREGATION: geometric mean of suffix proximity and inter-generation consistency",
     "SCORE: combined proximity"},
    {"rare_trigram_agg", "Log inverse corpus frequency of generation trigrams discounted by their recurrence",
     "Rare phrases only come back when the model has seen them",
     "REPRESENTATION: distinct generation trigrams with corpus frequencies",
     "COMPARISON: corpus frequency and recurrence across generations",
     "AGGREGATION: sum of log inverse frequency times recurrence",
     "SCORE: rarity mass of the generations"},
    {"rarity_longest_match", "Longest contiguous match weighted by rarity of the matched span",
     "A long exact match made of rare tokens is strong evidence of recall",
     "REPRESENTATION: token sequences with n-gram frequency table",
     "COMPARISON: edit distance discounted by the rarity of the longest suffix match",
     "AGGREGATION: maximum over generations",
     "SCORE: rarity discounted proximity"},
    {"inv_freq_mismatch", "Inverse frequency weighting of mismatched tokens among the closest generations",
     "Members leave fewer rare tokens unexplained by the closest generations",
     "REPRESENTATION: token sequences ranked by normalized edit distance",
     "COMPARISON: positional mismatches against the suffix weighted by inverse frequency",
     "AGGREGATION: maximum over the closest kept fraction",
     "SCORE: mismatch mass"},
    {"recurrent_rare_trigram", "Rare suffix trigrams that recur across several generations",
     "Recall repeats the same rare phrase in many samples",
     "REPRESENTATION: token trigrams counted per generation",
     "COMPARISON: suffix trigrams reproduced by at least two generations",
     "AGGREGATION: sum of one over one plus corpus count",
     "SCORE: recurrent rarity mass"},
    {"internal_repetition", "Excess repeated 3, 4 and 5-grams inside each generation",
     "Degenerate looping output separates seen from unseen continuations",
     "REPRESENTATION: 3, 4 and 5-grams of each generation",
     "COMPARISON: repeated n-grams counted per token",
     "AGGREGATION: mean over generations",
     "SCORE: internal repetition rate"},
};
constexpr std::size_t kFamilyCount = std::size(kFamilies);

struct Params {
  std::size_t family = 0;
  std::size_t ngram = 4;
  std::size_t d_max = 10;
  int keep_tenths = 7;
  bool flip = false;
};

std::size_t family_index(const std::string& signal) {
  for (std::size_t i = 0; i < kFamilyCount; ++i) {
    if (signal == kFamilies[i].signal) return i;
  }
  return kFamilyCount;
}

std::string instruction(const Params& p) {
  char buf[200];
  std::snprintf(buf, sizeof buf, "signal=%s d_max=%zu ngram=%zu keep_fraction=%.1f flip=%d", kFamilies[p.family].signal,
                p.d_max, p.ngram, p.keep_tenths / 10.0, p.flip ? 1 : 0);
  return buf;
}

// Unknown or missing keys keep their defaults, so foreign designs (such as a
// hand-written seed) still parse.
Params parse_instruction(const std::string& text) {
  Params p;
  std::istringstream in(text);
  for (std::string kv; in >> kv;) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) continue;
    const auto key = kv.substr(0, eq);
    const auto val = kv.substr(eq + 1);
    try {
      if (key == "signal") {
        const auto f = family_index(val);
        if (f < kFamilyCount) p.family = f;
      } else if (key == "d_max") {
        p.d_max = std::clamp<std::size_t>(std::stoul(val), 1, 30);
      } else if (key == "ngram") {
        p.ngram = std::clamp<std::size_t>(std::stoul(val), 1, 8);
      } else if (key == "keep_fraction") {
        p.keep_tenths = std::clamp(static_cast<int>(std::stod(val) * 10.0 + 0.5), 1, 10);
      } else if (key == "flip") {
        p.flip = val == "1";
      }
    } catch (const std::exception&) {
    }
  }
  return p;
}

json design_json(const Params& p) {
  const auto& f = kFamilies[p.family];
  char detail[160];
  std::snprintf(detail, sizeof detail, " (n-gram %zu, edit cap %zu, keep %.1f, %s)", p.ngram, p.d_max,
                p.keep_tenths / 10.0, p.flip ? "lower means member" : "higher means member");
  return {{"idea", std::string(f.phrase) + detail},
          {"design_justification", f.justification},
          {"implementation_instruction", instruction(p)}};
}

Params random_params(miasig::Rng& rng, const std::vector<std::size_t>& avoid) {
  std::vector<std::size_t> pool;
  for (std::size_t i = 0; i < kFamilyCount; ++i) {
    if (std::find(avoid.begin(), avoid.end(), i) == avoid.end()) pool.push_back(i);
  }
  if (pool.empty()) {
    for (std::size_t i = 0; i < kFamilyCount; ++i) pool.push_back(i);
  }
  Params p;
  p.family = pool[rng.below(pool.size())];
  p.ngram = 2 + rng.below(5);
  p.d_max = 3 + rng.below(13);
  p.keep_tenths = 5 + static_cast<int>(rng.below(6));
  return p;
}

std::vector<std::size_t> families_of(const json& records) {
  std::vector<std::size_t> out;
  for (const auto& r : records) {
    const auto instr = r.at("design").value("implementation_instruction", std::string());
    if (instr.find("signal=") == std::string::npos) continue;
    out.push_back(parse_instruction(instr).family);
  }
  return out;
}

// One parameter step away from the parent; a parent scoring below chance is
// flipped instead.
Params mutate(const Params& parent, double parent_auc, miasig::Rng& rng) {
  Params p = parent;
  if (parent_auc < 0.5) {
    p.flip = !p.flip;
    return p;
  }
  const int step = rng.below(2) ? 1 : -1;
  switch (rng.below(3)) {
    case 0:
      p.ngram = std::clamp<std::size_t>(p.ngram + step, 1, 8);
      break;
    case 1:
      p.d_max = std::clamp<std::size_t>(p.d_max + step, 1, 30);
      break;
    default:
      p.keep_tenths = std::clamp(p.keep_tenths + step, 1, 10);
      break;
  }
  return p;
}

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) out += c == '\'' ? std::string("'\\''") : std::string(1, c);
  return out + "'";
}

json write_candidate(const json& ctx, const std::string& scorer) {
  const auto p = parse_instruction(ctx.at("design").value("implementation_instruction", std::string()));
  const fs::path workdir = ctx.value("workdir", std::string("."));
  const auto rel = fs::path("candidates") / ("cand_" + std::to_string(ctx.at("nonce").get<std::uint64_t>()) + ".sh");
  fs::create_directories(workdir / "candidates");
  std::ostringstream script;
  script << "#!/bin/sh\n"
         << "exec " << shell_quote(scorer) << " score --signal " << kFamilies[p.family].signal << " --ngram " << p.ngram
         << " --d-max " << p.d_max << " --keep-fraction " << p.keep_tenths / 10.0 << (p.flip ? " --flip" : "") << "\n";
  const auto path = workdir / rel;
  {
    std::ofstream out(path, std::ios::trunc);
    out << script.str();
    if (!out) throw std::runtime_error("cannot write " + path.string());
  }
  ::chmod(path.c_str(), 0755);
  return {{"code_ref", rel.string()}};
}

json analyze(const json& ctx) {
  const auto p = parse_instruction(ctx.at("design").value("implementation_instruction", std::string()));
  const auto& f = kFamilies[p.family];
  const auto& m = ctx.at("metrics");
  std::ostringstream out;
  char auc[32];
  std::snprintf(auc, sizeof auc, "%.6f", m.at("auc").get<double>());
  out << f.representation << "\n"
      << f.comparison << "\n"
      << f.aggregation << "\n"
      << f.score << (p.flip ? ", negated" : "") << "\n"
      << "RESULT: auc=" << auc;
  for (const auto& [key, val] : m.at("tpr").items()) {
    char tpr[32];
    std::snprintf(tpr, sizeof tpr, "%.6f", val.get<double>());
    out << " tpr@" << key << "=" << tpr;
  }
  return {{"analysis", out.str()}};
}

json handle(const json& request, const std::string& scorer) {
  const auto mode = request.at("mode").get<std::string>();
  const auto& ctx = request.at("context");
  const std::uint64_t seed = ctx.value("rng_seed", std::uint64_t{0});
  const std::uint64_t nonce = ctx.value("nonce", std::uint64_t{0});
  miasig::Rng rng(miasig::mix64(miasig::mix64(seed) ^ (nonce + 1)));

  if (mode == "generate") return design_json(random_params(rng, families_of(ctx.at("seeds"))));
  if (mode == "revise") {
    auto avoid = families_of(ctx.at("neighbors"));
    avoid.push_back(parse_instruction(ctx.at("design").value("implementation_instruction", std::string())).family);
    return design_json(random_params(rng, avoid));
  }
  if (mode == "exploit") {
    const auto& parent = ctx.at("parent");
    const double auc = parent.contains("metrics") ? parent["metrics"].at("auc").get<double>() : 0.5;
    const auto base = parse_instruction(parent.at("design").value("implementation_instruction", std::string()));
    return design_json(mutate(base, auc, rng));
  }
  if (mode == "codegen" || mode == "fix") return write_candidate(ctx, scorer);
  if (mode == "analyze") return analyze(ctx);
  throw std::runtime_error("unknown mode '" + mode + "'");
}

std::string default_scorer() {
  std::error_code ec;
  const auto self = fs::read_symlink("/proc/self/exe", ec);
  if (ec) return "mia";
  return (self.parent_path() / "mia").string();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Deterministic offline design generator plugin"};
  std::string scorer = default_scorer();
  app.add_option("--scorer", scorer, "Path of the mia binary used by candidates");
  CLI11_PARSE(app, argc, argv);

  try {
    const auto request = json::parse(std::cin);
    std::cout << handle(request, scorer).dump() << "\n";
  } catch (const std::exception& e) {
    std::cerr << "offline generator: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
