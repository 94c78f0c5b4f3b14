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

// Whole-file operations behind the CLI subcommands. Inputs are JSONL text,
// options are JSON objects, outputs are the exact bytes the CLI prints.

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "lexreward/engine.hpp"
#include "lexreward/judging.hpp"

namespace lexreward::batch {

struct Output {
  std::string text;
  std::string side;  // secondary stream (dropped records, failures); may be empty
  std::size_t n_failed = 0;
};

/// Items {"id", "candidate", "references", "external_score"?, "prompt_id"?}
/// are echoed with "score" (or "error") added. options: reward_spec,
/// format_weight, advantages (bool; adds "advantage" per prompt_id group).
Output score(const EngineConfig& config, std::string_view items_jsonl, const Json& options);

/// Corpus records get scores.bleu from base_output. options: tags.
Output score_pool(const EngineConfig& config, std::string_view corpus_jsonl, const Json& options);

/// Reference sets merged into preference records before judging. Each entry
/// is {"jsonl": text, "tag"?: name}. With a tag, rows are {"id", "text"} (or
/// "output"/"response"); without, rows are {"id", "references": {tag: text}}.
/// Returns warnings about rows whose id is not in the dataset.
std::vector<std::string> merge_reference_sets(std::vector<PreferenceRecord>& records,
                                              const Json& reference_sets);

/// options: judge, tie_policy, by_domain, ref_tags, reference_sets.
Output judge(const EngineConfig& config, std::string_view preferences_jsonl, const Json& options);

/// options: order (required), judge, tie_policy, reference_sets, csv,
/// length_groups.
Output sweep(const EngineConfig& config, std::string_view preferences_jsonl, const Json& options);

/// options: k (required), mode, seed, metric. side holds the selected
/// records as corpus JSONL in selection order.
Output select(std::string_view corpus_jsonl, const Json& options);

/// options: min_tokens, max_tokens, languages, source_quota. text holds the
/// kept records, side the dropped ones with their reason.
Output filter(std::string_view corpus_jsonl, const Json& options);

/// Groups {"prompt_id", "rewards", ...} → {"prompt_id", "advantages"}.
/// options: epsilon.
Output advantage(const EngineConfig& config, std::string_view groups_jsonl, const Json& options);

/// Lines are JSON strings or objects with "text", "output" or "response".
/// options: csv, name.
Output stats(const EngineConfig& config, std::string_view texts_jsonl, const Json& options);

/// Synthetic single-example BLEU timing. options: n, tokens, seed.
Output bench(const EngineConfig& config, const Json& options);

}  // namespace lexreward::batch
