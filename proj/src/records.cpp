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

#include "lexreward/records.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iostream>
#include <sstream>
#include <unordered_set>

#include "lexreward/error.hpp"

namespace lexreward {

namespace {

std::string lower_ascii(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string record_context(const Json& obj) {
  if (obj.is_object()) {
    const auto it = obj.find("id");
    if (it != obj.end() && it->is_string()) return "record " + it->get<std::string>() + ": ";
  }
  return "";
}

const Json& require(const Json& obj, const char* key) {
  const auto it = obj.find(key);
  if (it == obj.end()) fail(ErrorCode::kParse, record_context(obj) + "missing field '" + key + "'");
  return *it;
}

std::string require_string(const Json& obj, const char* key) {
  const Json& v = require(obj, key);
  if (!v.is_string())
    fail(ErrorCode::kParse, record_context(obj) + "field '" + key + "' must be a string");
  return v.get<std::string>();
}

std::string id_of(const Json& obj) {
  const Json& v = require(obj, "id");
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  fail(ErrorCode::kParse, "field 'id' must be a string or integer");
}

std::optional<std::string> optional_string(const Json& obj, const char* key) {
  const auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_string())
    fail(ErrorCode::kParse, record_context(obj) + "field '" + key + "' must be a string");
  return it->get<std::string>();
}

double number(const Json& v, const std::string& what) {
  if (!v.is_number()) fail(ErrorCode::kParse, what + " must be a number");
  return v.get<double>();
}

}  // namespace

const char* to_string(HumanLabel label) noexcept {
  switch (label) {
    case HumanLabel::kX: return "X";
    case HumanLabel::kY: return "Y";
    case HumanLabel::kTie: return "tie";
  }
  return "tie";
}

const char* to_string(Domain domain) noexcept {
  switch (domain) {
    case Domain::kQA: return "QA";
    case Domain::kCode: return "Code";
    case Domain::kWriting: return "Writing";
    case Domain::kMathReasoning: return "MathReasoning";
    case Domain::kMultilingual: return "Multilingual";
    case Domain::kPlanning: return "Planning";
  }
  return "QA";
}

HumanLabel parse_human_label(std::string_view text) {
  const std::string s = lower_ascii(text);
  if (s == "x" || s == "model_a" || s == "a") return HumanLabel::kX;
  if (s == "y" || s == "model_b" || s == "b") return HumanLabel::kY;
  if (s == "tie" || s == "tie (bothbad)") return HumanLabel::kTie;
  fail(ErrorCode::kParse, "unknown human_label '" + std::string(text) + "'");
}

Domain parse_domain(std::string_view text) {
  std::string s = lower_ascii(text);
  s.erase(std::remove_if(s.begin(), s.end(),
                         [](char c) { return c == '/' || c == ' ' || c == '_' || c == '-'; }),
          s.end());
  if (s == "qa") return Domain::kQA;
  if (s == "code") return Domain::kCode;
  if (s == "writing") return Domain::kWriting;
  if (s == "mathreasoning" || s == "math") return Domain::kMathReasoning;
  if (s == "multilingual" || s == "multilinguality") return Domain::kMultilingual;
  if (s == "planning") return Domain::kPlanning;
  fail(ErrorCode::kParse, "unknown domain '" + std::string(text) + "'");
}

const TaggedText* PreferenceRecord::find_reference(std::string_view tag) const {
  for (const auto& r : references)
    if (r.tag == tag) return &r;
  return nullptr;
}

const TaggedText* CorpusRecord::find_reference(std::string_view tag) const {
  for (const auto& r : references)
    if (r.tag == tag) return &r;
  return nullptr;
}

std::optional<double> CorpusRecord::score(std::string_view metric) const {
  for (const auto& [name, value] : scores)
    if (name == metric) return value;
  return std::nullopt;
}

void CorpusRecord::set_score(const std::string& metric, double value) {
  for (auto& [name, v] : scores) {
    if (name == metric) {
      v = value;
      return;
    }
  }
  scores.emplace_back(metric, value);
}

std::vector<Json> parse_jsonl(std::string_view text) {
  std::vector<Json> rows;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    ++line_no;
    pos = end + 1;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) {
      if (end == text.size()) break;
      continue;
    }
    try {
      rows.push_back(Json::parse(line));
    } catch (const Json::parse_error& e) {
      fail(ErrorCode::kParse, "line " + std::to_string(line_no) + ": " + e.what());
    }
    if (end == text.size()) break;
  }
  return rows;
}

std::vector<Json> read_jsonl(std::istream& in) {
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_jsonl(buf.str());
}

std::string to_jsonl(const std::vector<Json>& rows) {
  std::string out;
  for (const auto& row : rows) {
    out += row.dump();
    out.push_back('\n');
  }
  return out;
}

std::vector<TaggedText> parse_references(const Json& value) {
  std::vector<TaggedText> refs;
  if (value.is_null()) return refs;
  if (value.is_string()) {
    refs.push_back({"0", value.get<std::string>()});
  } else if (value.is_array()) {
    for (std::size_t i = 0; i < value.size(); ++i) {
      if (!value[i].is_string()) fail(ErrorCode::kParse, "references must be strings");
      refs.push_back({std::to_string(i), value[i].get<std::string>()});
    }
  } else if (value.is_object()) {
    for (const auto& [tag, text] : value.items()) {
      if (!text.is_string()) fail(ErrorCode::kParse, "reference '" + tag + "' must be a string");
      refs.push_back({tag, text.get<std::string>()});
    }
  } else {
    fail(ErrorCode::kParse, "references must be a list or an object");
  }
  return refs;
}

PreferenceRecord parse_preference(const Json& obj) {
  if (!obj.is_object()) fail(ErrorCode::kParse, "preference record must be a JSON object");
  PreferenceRecord r;
  r.id = id_of(obj);
  r.prompt = optional_string(obj, "prompt").value_or("");
  r.output_x = require_string(obj, "output_x");
  r.output_y = require_string(obj, "output_y");
  r.human_label = parse_human_label(require_string(obj, "human_label"));
  if (auto d = optional_string(obj, "domain")) r.domain = parse_domain(*d);
  if (const auto it = obj.find("external_scores"); it != obj.end() && !it->is_null()) {
    if (!it->is_object()) fail(ErrorCode::kParse, "record " + r.id + ": external_scores must be an object");
    for (const auto& [metric, v] : it->items()) {
      const std::string what = "record " + r.id + ": external score '" + metric + "'";
      ScorePair pair;
      if (v.is_array() && v.size() == 2) {
        pair = {number(v[0], what), number(v[1], what)};
      } else if (v.is_object() && v.contains("x") && v.contains("y")) {
        pair = {number(v["x"], what), number(v["y"], what)};
      } else {
        fail(ErrorCode::kParse, what + " must be [x, y] or {\"x\":..,\"y\":..}");
      }
      r.external_scores.emplace(metric, pair);
    }
  }
  if (const auto it = obj.find("references"); it != obj.end()) {
    try {
      r.references = parse_references(*it);
    } catch (const Error& e) {
      fail(ErrorCode::kParse, "record " + r.id + ": " + e.what());
    }
  }
  r.raw = obj;
  return r;
}

CorpusRecord parse_corpus_record(const Json& obj) {
  if (!obj.is_object()) fail(ErrorCode::kParse, "corpus record must be a JSON object");
  CorpusRecord r;
  r.id = id_of(obj);
  r.prompt = optional_string(obj, "prompt").value_or("");
  if (const auto it = obj.find("references"); it != obj.end()) {
    try {
      r.references = parse_references(*it);
    } catch (const Error& e) {
      fail(ErrorCode::kParse, "record " + r.id + ": " + e.what());
    }
  }
  r.base_output = optional_string(obj, "base_output");
  if (const auto it = obj.find("scores"); it != obj.end() && !it->is_null()) {
    if (!it->is_object()) fail(ErrorCode::kParse, "record " + r.id + ": scores must be an object");
    for (const auto& [metric, v] : it->items())
      r.scores.emplace_back(metric, number(v, "record " + r.id + ": score '" + metric + "'"));
  }
  r.source = optional_string(obj, "source");
  r.language = optional_string(obj, "language");
  r.raw = obj;
  return r;
}

Json to_json(const CorpusRecord& record) {
  Json out = record.raw.is_object() ? record.raw : Json::object();
  if (!out.contains("id")) out["id"] = record.id;
  if (out.contains("prompt") || !record.prompt.empty()) out["prompt"] = record.prompt;
  bool positional = out.contains("references") && out["references"].is_array();
  for (std::size_t i = 0; positional && i < record.references.size(); ++i)
    positional = record.references[i].tag == std::to_string(i);
  Json refs = positional ? Json::array() : Json::object();
  for (const auto& r : record.references) {
    if (positional) {
      refs.push_back(r.text);
    } else {
      refs[r.tag] = r.text;
    }
  }
  out["references"] = std::move(refs);
  if (record.base_output) out["base_output"] = *record.base_output;
  if (!record.scores.empty()) {
    Json scores = Json::object();
    for (const auto& [metric, v] : record.scores) scores[metric] = v;
    out["scores"] = std::move(scores);
  }
  if (record.source) out["source"] = *record.source;
  if (record.language) out["language"] = *record.language;
  return out;
}

std::vector<PreferenceRecord> parse_preferences(std::string_view jsonl) {
  std::vector<PreferenceRecord> out;
  std::unordered_set<std::string> seen;
  for (const auto& row : parse_jsonl(jsonl)) {
    out.push_back(parse_preference(row));
    if (!seen.insert(out.back().id).second)
      fail(ErrorCode::kInvalidArgument, "duplicate record id: " + out.back().id);
  }
  return out;
}

std::vector<CorpusRecord> parse_corpus(std::string_view jsonl) {
  std::vector<CorpusRecord> out;
  std::unordered_set<std::string> seen;
  for (const auto& row : parse_jsonl(jsonl)) {
    out.push_back(parse_corpus_record(row));
    if (!seen.insert(out.back().id).second)
      fail(ErrorCode::kInvalidArgument, "duplicate record id: " + out.back().id);
  }
  return out;
}

std::string corpus_to_jsonl(const std::vector<CorpusRecord>& records) {
  std::string out;
  for (const auto& r : records) {
    out += to_json(r).dump();
    out.push_back('\n');
  }
  return out;
}

std::string read_file(const std::string& path) {
  if (path == "-") {
    std::stringstream buf;
    buf << std::cin.rdbuf();
    return buf.str();
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace lexreward
