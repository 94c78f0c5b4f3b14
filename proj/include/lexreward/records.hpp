/* Copyright 2026 The lexreward Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

// JSONL schemas for preference pairs and corpus records. Unknown fields are
// carried in `raw` and written back unchanged.

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

namespace lexreward {

using Json = nlohmann::ordered_json;

enum class HumanLabel { kX, kY, kTie };

enum class Domain { kQA, kCode, kWriting, kMathReasoning, kMultilingual, kPlanning };

const char* to_string(HumanLabel label) noexcept;
const char* to_string(Domain domain) noexcept;
HumanLabel parse_human_label(std::string_view text);
Domain parse_domain(std::string_view text);

struct TaggedText {
  std::string tag;
  std::string text;

  friend bool operator==(const TaggedText&, const TaggedText&) = default;
};

struct ScorePair {
  double x = 0.0;
  double y = 0.0;
};

struct PreferenceRecord {
  std::string id;
  std::string prompt;
  std::string output_x;
  std::string output_y;
  HumanLabel human_label = HumanLabel::kTie;
  std::optional<Domain> domain;
  std::map<std::string, ScorePair> external_scores;
  std::vector<TaggedText> references;  // list input gets tags "0", "1", ...
  Json raw = Json::object();

  const TaggedText* find_reference(std::string_view tag) const;
};

struct CorpusRecord {
  std::string id;
  std::string prompt;
  std::vector<TaggedText> references;
  std::optional<std::string> base_output;
  std::vector<std::pair<std::string, double>> scores;
  std::optional<std::string> source;
  std::optional<std::string> language;
  Json raw = Json::object();

  const TaggedText* find_reference(std::string_view tag) const;
  std::optional<double> score(std::string_view metric) const;
  void set_score(const std::string& metric, double value);
};

/// Parses one JSON value per non-blank line. Throws kParse with the 1-based
/// line number on malformed input.
std::vector<Json> parse_jsonl(std::string_view text);
std::vector<Json> read_jsonl(std::istream& in);
std::string to_jsonl(const std::vector<Json>& rows);

PreferenceRecord parse_preference(const Json& obj);
CorpusRecord parse_corpus_record(const Json& obj);
Json to_json(const CorpusRecord& record);

std::vector<PreferenceRecord> parse_preferences(std::string_view jsonl);
std::vector<CorpusRecord> parse_corpus(std::string_view jsonl);
std::string corpus_to_jsonl(const std::vector<CorpusRecord>& records);

/// Parses references given either as a list of texts or as a tag -> text object.
std::vector<TaggedText> parse_references(const Json& value);

/// Reads a whole file; throws kIo on failure. "-" reads stdin.
std::string read_file(const std::string& path);

}  // namespace lexreward
