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

// mia-offline-judge: accepts a design unless a neighbour's idea and
// justification embed within cosine 0.95 of its own.

#include <algorithm>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "miasig/search/retrieval.hpp"

using nlohmann::json;

namespace {

std::vector<double> embed_design(const json& design, std::size_t dim) {
  return miasig::search::embed_text(
      design.value("idea", std::string()) + " " + design.value("design_justification", std::string()), dim);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Deterministic offline novelty judge plugin"};
  double threshold = 0.95;
  std::size_t dim = 256;
  app.add_option("--threshold", threshold, "Reject at or above this cosine")->capture_default_str();
  app.add_option("--embed-dim", dim, "Hashed embedding size")->capture_default_str()->check(CLI::Range(8, 1 << 20));
  CLI11_PARSE(app, argc, argv);

  try {
    const auto request = json::parse(std::cin);
    const auto mine = embed_design(request.at("design"), dim);
    double best = 0.0;
    std::string closest;
    for (const auto& n : request.at("neighbors")) {
      const auto& d = n.contains("design") ? n.at("design") : n;
      const double c = miasig::search::cosine(mine, embed_design(d, dim));
      if (c > best) {
        best = c;
        closest = d.value("idea", std::string());
      }
    }
    json verdict;
    verdict["novelty_score"] = std::clamp(1.0 - best, 0.0, 1.0);
    if (best < threshold) {
      verdict["action"] = "accept";
      verdict["suggestions"] = "";
    } else {
      verdict["action"] = "revise";
      verdict["suggestions"] = "Too close to an existing design: " + closest + ". Use a different signal family.";
    }
    std::cout << verdict.dump() << "\n";
  } catch (const std::exception& e) {
    std::cerr << "offline judge: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
