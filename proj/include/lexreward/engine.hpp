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

#include <string>
#include <string_view>
#include <vector>

#include "lexreward/metrics.hpp"
#include "lexreward/records.hpp"

namespace lexreward {

/// Read-only settings shared by the CLI, the C API and the service.
///
/// Config files hold one `key = value` per line; `#` starts a comment.
/// Recognised keys: max_order, weights (comma list), smoothing,
/// ref_length_rule (closest|shortest), workers, bind, port, epsilon,
/// group_size, refusal_phrases and openers (both `|`-separated).
/// Environment variables LEXREWARD_<KEY> (upper case) override file values.
struct EngineConfig {
  ScoreConfig score;
  int workers = 1;
  std::string bind = "127.0.0.1";
  int port = 8080;
  double epsilon = 1e-8;
  int group_size = 8;
  std::vector<std::string> refusal_phrases;
  std::vector<std::string> openers;

  EngineConfig();

  /// Throws kInvalidArgument for unknown keys or malformed values.
  void set(std::string_view key, std::string_view value);
  void load_key_values(std::string_view text);
  void apply_environment();
  void validate() const;

  Json to_json() const;
};

/// Applies request-level overrides ({"max_order", "weights", "smoothing",
/// "ref_length_rule"}) on top of `base`. "format_weight" is accepted and left
/// to the caller; any other key is kInvalidArgument.
ScoreConfig score_config_with_overrides(const ScoreConfig& base, const Json& overrides);

}  // namespace lexreward
