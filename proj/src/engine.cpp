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

#include "lexreward/engine.hpp"

#include <cctype>
#include <cstdlib>
#include <sstream>

#include "lexreward/error.hpp"
#include "lexreward/text_stats.hpp"

namespace lexreward {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t next = s.find(sep, pos);
    const std::string_view part = trim(s.substr(pos, next == std::string_view::npos ? s.npos : next - pos));
    if (!part.empty()) out.emplace_back(part);
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return out;
}

double parse_double(std::string_view key, std::string_view value) {
  const std::string s(value);
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size())
    fail(ErrorCode::kInvalidArgument, std::string(key) + ": not a number: '" + s + "'");
  return v;
}

int parse_int(std::string_view key, std::string_view value) {
  const double v = parse_double(key, value);
  if (v != static_cast<double>(static_cast<int>(v)))
    fail(ErrorCode::kInvalidArgument, std::string(key) + ": not an integer: '" + std::string(value) + "'");
  return static_cast<int>(v);
}

bool parse_bool(std::string_view key, std::string_view value) {
  if (value == "true" || value == "1" || value == "on" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "off" || value == "no") return false;
  fail(ErrorCode::kInvalidArgument, std::string(key) + ": not a boolean: '" + std::string(value) + "'");
}

RefLengthRule parse_rule(std::string_view value) {
  if (value == "closest") return RefLengthRule::kClosest;
  if (value == "shortest") return RefLengthRule::kShortest;
  fail(ErrorCode::kInvalidArgument, "ref_length_rule must be closest or shortest");
}

constexpr const char* kKeys[] = {"max_order", "weights", "smoothing", "ref_length_rule",
                                 "workers", "bind", "port", "epsilon", "group_size",
                                 "refusal_phrases", "openers"};

}  // namespace

EngineConfig::EngineConfig()
    : refusal_phrases(default_refusal_phrases()), openers(default_openers()) {}

void EngineConfig::set(std::string_view key, std::string_view value) {
  value = trim(value);
  if (key == "max_order") {
    const int n = parse_int(key, value);
    const bool uniform = score.weights == ScoreConfig::with_order(score.max_order).weights;
    score.max_order = n;
    if (uniform) score.weights = ScoreConfig::with_order(n).weights;
  } else if (key == "weights") {
    score.weights.clear();
    for (const auto& w : split(value, ',')) score.weights.push_back(parse_double(key, w));
  } else if (key == "smoothing") {
    score.smoothing = parse_bool(key, value);
  } else if (key == "ref_length_rule") {
    score.ref_length_rule = parse_rule(value);
  } else if (key == "workers") {
    workers = parse_int(key, value);
  } else if (key == "bind") {
    bind = std::string(value);
  } else if (key == "port") {
    port = parse_int(key, value);
  } else if (key == "epsilon") {
    epsilon = parse_double(key, value);
  } else if (key == "group_size") {
    group_size = parse_int(key, value);
  } else if (key == "refusal_phrases") {
    refusal_phrases = split(value, '|');
  } else if (key == "openers") {
    openers = split(value, '|');
  } else {
    fail(ErrorCode::kInvalidArgument, "unknown config key '" + std::string(key) + "'");
  }
}

void EngineConfig::load_key_values(std::string_view text) {
  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = line;
    if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = trim(view);
    if (view.empty()) continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos)
      fail(ErrorCode::kParse, "config line " + std::to_string(line_no) + ": expected key = value");
    try {
      set(trim(view.substr(0, eq)), view.substr(eq + 1));
    } catch (const Error& e) {
      fail(e.code(), "config line " + std::to_string(line_no) + ": " + e.what());
    }
  }
}

void EngineConfig::apply_environment() {
  for (const char* key : kKeys) {
    std::string env = "LEXREWARD_";
    for (const char* c = key; *c; ++c) env.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(*c))));
    if (const char* value = std::getenv(env.c_str())) set(key, value);
  }
}

void EngineConfig::validate() const {
  score.validate();
  if (workers < 1) fail(ErrorCode::kInvalidArgument, "workers must be >= 1");
  if (port < 0 || port > 65535) fail(ErrorCode::kInvalidArgument, "port out of range");
  if (!(epsilon >= 0.0)) fail(ErrorCode::kInvalidArgument, "epsilon must be non-negative");
  if (group_size < 2) fail(ErrorCode::kInvalidArgument, "group_size must be >= 2");
}

Json EngineConfig::to_json() const {
  Json j = Json::object();
  j["max_order"] = score.max_order;
  j["weights"] = score.weights;
  j["smoothing"] = score.smoothing;
  j["ref_length_rule"] = score.ref_length_rule == RefLengthRule::kClosest ? "closest" : "shortest";
  j["workers"] = workers;
  j["bind"] = bind;
  j["port"] = port;
  j["epsilon"] = epsilon;
  j["group_size"] = group_size;
  j["refusal_phrases"] = refusal_phrases;
  j["openers"] = openers;
  return j;
}

ScoreConfig score_config_with_overrides(const ScoreConfig& base, const Json& overrides) {
  ScoreConfig out = base;
  if (overrides.is_null()) return out;
  if (!overrides.is_object()) fail(ErrorCode::kInvalidArgument, "config overrides must be an object");
  bool weights_given = false;
  for (const auto& [key, value] : overrides.items()) {
    if (key == "max_order") {
      if (!value.is_number_integer()) fail(ErrorCode::kInvalidArgument, "max_order must be an integer");
      out.max_order = value.get<int>();
    } else if (key == "weights") {
      if (!value.is_array()) fail(ErrorCode::kInvalidArgument, "weights must be a list");
      out.weights.clear();
      for (const auto& w : value) {
        if (!w.is_number()) fail(ErrorCode::kInvalidArgument, "weights must be numbers");
        out.weights.push_back(w.get<double>());
      }
      weights_given = true;
    } else if (key == "smoothing") {
      if (!value.is_boolean()) fail(ErrorCode::kInvalidArgument, "smoothing must be a boolean");
      out.smoothing = value.get<bool>();
    } else if (key == "ref_length_rule") {
      if (!value.is_string()) fail(ErrorCode::kInvalidArgument, "ref_length_rule must be a string");
      out.ref_length_rule = parse_rule(value.get<std::string>());
    } else if (key != "format_weight") {
      fail(ErrorCode::kInvalidArgument, "unknown config override '" + key + "'");
    }
  }
  if (!weights_given && out.max_order != base.max_order && out.max_order >= 1)
    out.weights = ScoreConfig::with_order(out.max_order).weights;
  out.validate();
  return out;
}

}  // namespace lexreward
