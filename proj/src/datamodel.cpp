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

#include "miasig/datamodel.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_set>

#include "miasig/errors.hpp"
#include "miasig/rng.hpp"

namespace miasig {

namespace {

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

template <typename Sample>
void check_unique_ids(const std::vector<Sample>& samples) {
  std::unordered_set<std::string_view> seen;
  seen.reserve(samples.size());
  for (const auto& s : samples) {
    if (!seen.insert(s.id).second) throw InvalidArgument("duplicate sample id '" + s.id + "'");
  }
}

}  // namespace

std::vector<std::string> tokenize_whitespace(std::string_view text) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    const std::size_t start = i;
    while (i < text.size() && !is_space(text[i])) ++i;
    if (i > start) tokens.emplace_back(text.substr(start, i - start));
  }
  return tokens;
}

LogitMatrix::LogitMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), values_(rows * cols, 0.0f) {}

LogitMatrix::LogitMatrix(std::size_t rows, std::size_t cols, std::vector<float> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  if (values_.size() != rows * cols) {
    throw InvalidArgument("logit matrix expects " + std::to_string(rows * cols) + " values, got " +
                          std::to_string(values_.size()));
  }
}

bool bit_identical(const LogitSample& a, const LogitSample& b) {
  if (a.id != b.id || a.label != b.label || a.true_tokens != b.true_tokens) return false;
  if (a.logits.rows() != b.logits.rows() || a.logits.cols() != b.logits.cols()) return false;
  const auto& va = a.logits.values();
  const auto& vb = b.logits.values();
  return std::memcmp(va.data(), vb.data(), va.size() * sizeof(float)) == 0;
}

void validate(const TextSample& s) {
  if (s.suffix_generations.empty()) {
    throw InvalidArgument("sample '" + s.id + "': suffix_generations is empty");
  }
  if (tokenize_whitespace(s.prefix).empty()) {
    throw InvalidArgument("sample '" + s.id + "': prefix has no tokens");
  }
  if (tokenize_whitespace(s.ground_truth_suffix).empty()) {
    throw InvalidArgument("sample '" + s.id + "': ground_truth_suffix has no tokens");
  }
}

void validate(const LogitSample& s) {
  const auto L = s.logits.rows();
  const auto V = s.logits.cols();
  if (L < 1) throw InvalidArgument("sample '" + s.id + "': needs at least one position");
  if (V < 2) throw InvalidArgument("sample '" + s.id + "': vocabulary size must be >= 2");
  if (s.true_tokens.size() != L) {
    throw InvalidArgument("sample '" + s.id + "': true_tokens length " +
                          std::to_string(s.true_tokens.size()) + " != L " + std::to_string(L));
  }
  for (auto t : s.true_tokens) {
    if (t >= V) {
      throw InvalidArgument("sample '" + s.id + "': token id " + std::to_string(t) +
                            " out of range for V=" + std::to_string(V));
    }
  }
  for (float x : s.logits.values()) {
    if (!std::isfinite(x)) throw InvalidArgument("sample '" + s.id + "': non-finite logit");
  }
}

// --- Dataset -----------------------------------------------------------------

Dataset::Dataset(std::vector<TextSample> samples) {
  check_unique_ids(samples);
  samples_ = std::move(samples);
}

Dataset::Dataset(std::vector<LogitSample> samples) {
  check_unique_ids(samples);
  samples_ = std::move(samples);
}

std::size_t Dataset::size() const noexcept {
  return std::visit([](const auto& v) { return v.size(); }, samples_);
}

const std::vector<TextSample>& Dataset::text_samples() const {
  if (kind() != DatasetKind::Text) throw InvalidArgument("dataset holds logit samples, not text");
  return std::get<std::vector<TextSample>>(samples_);
}

const std::vector<LogitSample>& Dataset::logit_samples() const {
  if (kind() != DatasetKind::Logit) throw InvalidArgument("dataset holds text samples, not logits");
  return std::get<std::vector<LogitSample>>(samples_);
}

std::vector<std::string> Dataset::ids() const {
  return std::visit(
      [](const auto& v) {
        std::vector<std::string> out;
        out.reserve(v.size());
        for (const auto& s : v) out.push_back(s.id);
        return out;
      },
      samples_);
}

std::vector<Membership> Dataset::labels() const {
  return std::visit(
      [](const auto& v) {
        std::vector<Membership> out;
        out.reserve(v.size());
        for (const auto& s : v) out.push_back(s.label);
        return out;
      },
      samples_);
}

// --- JSON Lines --------------------------------------------------------------

nlohmann::json to_json(const TextSample& s, bool include_label) {
  nlohmann::json j;
  j["id"] = s.id;
  if (include_label) j["label"] = static_cast<int>(s.label);
  j["original_text"] = s.original_text;
  j["prefix"] = s.prefix;
  j["ground_truth_suffix"] = s.ground_truth_suffix;
  j["suffix_generations"] = s.suffix_generations;
  return j;
}

TextSample parse_text_sample(std::string_view line, std::size_t line_no, bool require_label) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what(), line_no);
  }
  if (!j.is_object()) throw ParseError("record is not a JSON object", line_no);

  static const std::set<std::string, std::less<>> kKnown = {
      "id", "label", "original_text", "prefix", "ground_truth_suffix", "suffix_generations"};
  for (const auto& [key, _] : j.items()) {
    if (!kKnown.contains(key)) throw ParseError("unexpected key '" + key + "'", line_no);
  }

  auto string_field = [&](const char* key) -> std::string {
    auto it = j.find(key);
    if (it == j.end()) throw ParseError(std::string("missing key '") + key + "'", line_no);
    if (!it->is_string()) throw ParseError(std::string("key '") + key + "' must be a string", line_no);
    return it->get<std::string>();
  };

  TextSample s;
  s.id = string_field("id");
  s.original_text = string_field("original_text");
  s.prefix = string_field("prefix");
  s.ground_truth_suffix = string_field("ground_truth_suffix");

  if (auto it = j.find("label"); it != j.end()) {
    if (!it->is_number_integer()) throw ParseError("key 'label' must be the integer 0 or 1", line_no);
    const auto v = it->get<std::int64_t>();
    if (v != 0 && v != 1) throw ParseError("key 'label' must be the integer 0 or 1", line_no);
    s.label = v == 1 ? Membership::Member : Membership::NonMember;
  } else if (require_label) {
    throw ParseError("missing key 'label'", line_no);
  }

  auto gens = j.find("suffix_generations");
  if (gens == j.end()) throw ParseError("missing key 'suffix_generations'", line_no);
  if (!gens->is_array()) throw ParseError("key 'suffix_generations' must be an array", line_no);
  for (const auto& g : *gens) {
    if (!g.is_string()) throw ParseError("key 'suffix_generations' must hold strings", line_no);
    s.suffix_generations.push_back(g.get<std::string>());
  }
  if (s.suffix_generations.empty()) throw ParseError("key 'suffix_generations' is empty", line_no);

  try {
    validate(s);
  } catch (const InvalidArgument& e) {
    throw ParseError(e.what(), line_no);
  }
  return s;
}

Dataset read_text_samples(std::istream& in, bool require_label) {
  std::vector<TextSample> samples;
  std::string line;
  std::size_t line_no = 0;
  std::unordered_set<std::string> seen;
  while (std::getline(in, line)) {
    ++line_no;
    if (std::all_of(line.begin(), line.end(), is_space)) continue;
    auto s = parse_text_sample(line, line_no, require_label);
    if (!seen.insert(s.id).second) throw ParseError("duplicate id '" + s.id + "'", line_no);
    samples.push_back(std::move(s));
  }
  if (in.bad()) throw ParseError("read failure", line_no + 1);
  return Dataset(std::move(samples));
}

Dataset load_text_samples(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string(), 0);
  return read_text_samples(in);
}

void write_text_samples(std::ostream& out, std::span<const TextSample> samples, bool include_label) {
  for (const auto& s : samples) out << to_json(s, include_label).dump() << '\n';
}

void write_text_samples(const std::filesystem::path& path, std::span<const TextSample> samples) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  write_text_samples(out, samples);
}

std::pair<std::string, std::string> split_prefix_suffix(std::string_view original_text,
                                                        double prefix_fraction) {
  const auto tokens = tokenize_whitespace(original_text);
  const std::size_t n = tokens.size();
  if (n < 2) throw InvalidArgument("need at least two tokens to split a text");
  auto cut = static_cast<std::size_t>(std::floor(prefix_fraction * static_cast<double>(n) + 1e-9));
  cut = std::clamp<std::size_t>(cut, 1, n - 1);
  auto join = [&](std::size_t from, std::size_t to) {
    std::string out;
    for (std::size_t i = from; i < to; ++i) {
      if (i > from) out += ' ';
      out += tokens[i];
    }
    return out;
  };
  return {join(0, cut), join(cut, n)};
}

// --- Logit container ---------------------------------------------------------

namespace {

constexpr char kMagic[4] = {'M', 'I', 'A', 'L'};

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::span<const std::uint8_t> take(std::size_t n, const char* what) {
    if (bytes_.size() - pos_ < n) {
      throw FormatError(std::string("truncated logit container while reading ") + what);
    }
    auto out = bytes_.subspan(pos_, n);
    pos_ += n;
    return out;
  }

  std::uint32_t u32(const char* what) {
    auto b = take(4, what);
    return static_cast<std::uint32_t>(b[0]) | static_cast<std::uint32_t>(b[1]) << 8 |
           static_cast<std::uint32_t>(b[2]) << 16 | static_cast<std::uint32_t>(b[3]) << 24;
  }

  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> encode_logit_sample(const LogitSample& s) {
  const auto L = s.logits.rows();
  const auto V = s.logits.cols();
  if (s.true_tokens.size() != L) throw InvalidArgument("true_tokens length must equal L");
  std::vector<std::uint8_t> out;
  out.reserve(16 + 4 * L * V + 4 * L + 5 + s.id.size());
  out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
  put_u32(out, kLogitFormatVersion);
  put_u32(out, static_cast<std::uint32_t>(L));
  put_u32(out, static_cast<std::uint32_t>(V));
  for (float x : s.logits.values()) put_u32(out, std::bit_cast<std::uint32_t>(x));
  for (auto t : s.true_tokens) put_u32(out, t);
  out.push_back(static_cast<std::uint8_t>(s.label));
  put_u32(out, static_cast<std::uint32_t>(s.id.size()));
  out.insert(out.end(), s.id.begin(), s.id.end());
  return out;
}

LogitSample decode_logit_sample(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  auto magic = r.take(4, "magic");
  if (!std::equal(magic.begin(), magic.end(), std::begin(kMagic))) {
    throw FormatError("bad magic: not a MIAL logit container");
  }
  const auto version = r.u32("version");
  if (version != kLogitFormatVersion) {
    throw FormatError("unsupported logit container version " + std::to_string(version));
  }
  const std::size_t L = r.u32("L");
  const std::size_t V = r.u32("V");
  if (r.remaining() / 4 / (V ? V : 1) < L) throw FormatError("truncated logit container: payload");

  std::vector<float> values(L * V);
  for (auto& x : values) x = std::bit_cast<float>(r.u32("logits"));

  LogitSample s;
  s.logits = LogitMatrix(L, V, std::move(values));
  s.true_tokens.resize(L);
  for (auto& t : s.true_tokens) {
    t = r.u32("true tokens");
    if (t >= V) {
      throw FormatError("token id " + std::to_string(t) + " >= V=" + std::to_string(V));
    }
  }
  const auto label = r.take(1, "label")[0];
  if (label > 1) throw FormatError("label byte must be 0 or 1");
  s.label = label ? Membership::Member : Membership::NonMember;
  const auto id_len = r.u32("id length");
  auto id = r.take(id_len, "id");
  s.id.assign(id.begin(), id.end());
  if (r.remaining() != 0) throw FormatError("trailing bytes after logit container");
  return s;
}

LogitSample load_logit_sample(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return decode_logit_sample(bytes);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_logit_sample(const std::filesystem::path& path, const LogitSample& sample) {
  const auto bytes = encode_logit_sample(sample);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

Dataset load_logit_dir(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".mial") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<LogitSample> samples;
  samples.reserve(files.size());
  for (const auto& f : files) samples.push_back(load_logit_sample(f));
  return Dataset(std::move(samples));
}

Dataset load_dataset(const std::filesystem::path& path) {
  if (std::filesystem::is_directory(path)) return load_logit_dir(path);
  return load_text_samples(path);
}

// --- Splitting ---------------------------------------------------------------

std::pair<Dataset, Dataset> split_dataset(const Dataset& data, std::uint64_t seed) {
  const std::size_t n = data.size();
  if (n < 2) throw InvalidArgument("split_dataset needs at least 2 samples, got " + std::to_string(n));

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  for (std::size_t i = n - 1; i > 0; --i) std::swap(order[i], order[rng.below(i + 1)]);

  const std::size_t n_train = (n + 1) / 2;
  auto pick = [&](const auto& samples) {
    using Sample = typename std::decay_t<decltype(samples)>::value_type;
    std::vector<Sample> train, test;
    for (std::size_t i = 0; i < n; ++i) {
      (i < n_train ? train : test).push_back(samples[order[i]]);
    }
    return std::pair{Dataset(std::move(train)), Dataset(std::move(test))};
  };
  return data.kind() == DatasetKind::Text ? pick(data.text_samples()) : pick(data.logit_samples());
}

}  // namespace miasig
