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

#include "miasig/search/database.hpp"

#include <algorithm>
#include <cmath>

#include "miasig/errors.hpp"
#include "miasig/search/retrieval.hpp"

namespace miasig::search {

ExperimentDb::ExperimentDb(std::size_t embed_dim) : embed_dim_(embed_dim) {
  if (embed_dim < 8) throw InvalidArgument("embedding dimension must be >= 8");
}

ExperimentId ExperimentDb::insert(ExperimentRecord record) {
  if (record.design.idea.empty()) throw InvalidArgument("experiment design has an empty idea");
  if ((record.status == RunStatus::Ok) != record.metrics.has_value()) {
    throw InvalidArgument("experiment metrics must be present exactly when status is ok");
  }
  if (record.metrics && !std::isfinite(record.metrics->auc)) {
    throw InvalidArgument("experiment metrics carry a non-finite AUC");
  }
  if (record.design.parent_id && *record.design.parent_id >= records_.size()) {
    throw InvalidArgument("parent_id " + std::to_string(*record.design.parent_id) +
                          " does not name an existing experiment");
  }
  record.id = records_.size();
  embeddings_.push_back({embed_text(record.design.idea, embed_dim_),
                         embed_text(record.design.design_justification, embed_dim_),
                         embed_text(record.analysis, embed_dim_)});
  records_.push_back(std::move(record));
  if (journal_) {
    *journal_ << to_json(records_.back()).dump() << '\n';
    journal_->flush();
    if (!*journal_) throw Error("failed to append to the experiment journal");
  }
  return records_.back().id;
}

void ExperimentDb::attach_journal(const std::filesystem::path& path) {
  auto out = std::make_unique<std::ofstream>(path, std::ios::binary | std::ios::app);
  if (!*out) throw Error("cannot open journal " + path.string());
  journal_ = std::move(out);
}

ExperimentDb ExperimentDb::load_journal(const std::filesystem::path& path, std::size_t embed_dim) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open journal " + path.string(), 0);
  ExperimentDb db(embed_dim);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    ExperimentRecord r;
    try {
      r = record_from_json(nlohmann::json::parse(line));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("invalid journal record: ") + e.what(), line_no);
    } catch (const ParseError& e) {
      throw ParseError(e.what(), line_no);
    }
    const auto expected = db.size();
    if (r.id != expected) {
      throw ParseError("journal id " + std::to_string(r.id) + " out of sequence, expected " +
                           std::to_string(expected),
                       line_no);
    }
    db.insert(std::move(r));
  }
  return db;
}

const ExperimentRecord& ExperimentDb::get(ExperimentId id) const {
  if (id >= records_.size()) throw InvalidArgument("no experiment with id " + std::to_string(id));
  return records_[id];
}

bool ExperimentDb::has_scored() const {
  return std::any_of(records_.begin(), records_.end(), [](const auto& r) { return r.metrics.has_value(); });
}

std::vector<ExperimentRecord> ExperimentDb::semantic_nn(std::string_view query, RecordField field,
                                                        std::size_t k) const {
  const auto q = embed_text(query, embed_dim_);
  std::vector<double> sims(records_.size());
  for (std::size_t i = 0; i < records_.size(); ++i) {
    const auto& e = embeddings_[i];
    const auto& v = field == RecordField::Idea            ? e.idea
                    : field == RecordField::Justification ? e.justification
                                                          : e.analysis;
    sims[i] = cosine(q, v);
  }
  std::vector<ExperimentRecord> out;
  for (auto i : top_k_by_score(sims, k)) out.push_back(records_[i]);
  return out;
}

std::vector<ExperimentRecord> ExperimentDb::bm25(std::string_view query, std::size_t k) const {
  std::vector<std::string> docs;
  docs.reserve(records_.size());
  for (const auto& r : records_) docs.push_back(r.design.idea + " " + r.design.design_justification);
  const Bm25 index(docs);
  const auto scores = index.scores(query);
  std::vector<ExperimentRecord> out;
  for (auto i : top_k_by_score(scores, k)) out.push_back(records_[i]);
  return out;
}

std::vector<ExperimentRecord> ExperimentDb::ancestors(ExperimentId id) const {
  std::vector<ExperimentRecord> chain;
  auto parent = get(id).design.parent_id;
  while (parent) {
    chain.push_back(records_[*parent]);
    parent = records_[*parent].design.parent_id;
  }
  std::reverse(chain.begin(), chain.end());
  return chain;
}

std::vector<ExperimentRecord> ExperimentDb::siblings(ExperimentId id) const {
  const auto parent = get(id).design.parent_id;
  std::vector<ExperimentRecord> out;
  if (!parent) return out;
  for (const auto& r : records_) {
    if (r.id != id && r.design.parent_id == parent) out.push_back(r);
  }
  return out;
}

ExperimentId ExperimentDb::root_of(ExperimentId id) const {
  ExperimentId cur = get(id).id;
  while (records_[cur].design.parent_id) cur = *records_[cur].design.parent_id;
  return cur;
}

}  // namespace miasig::search
