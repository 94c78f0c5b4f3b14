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

// Training-pool filtering, base-output scoring and difficulty-ranked selection.

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "lexreward/metrics.hpp"
#include "lexreward/records.hpp"

namespace lexreward {

struct FilterOptions {
  std::size_t min_tokens = 10;
  std::size_t max_tokens = 512;
  std::optional<std::set<std::string>> language_allowlist;
  /// Optional cap on kept records per `source`; records beyond the cap are
  /// dropped in input order. Records without a source are not capped.
  std::map<std::string, std::size_t> source_quota;
};

struct DroppedRecord {
  CorpusRecord record;
  std::string reason;  // min_tokens | max_tokens | language | source_quota
  std::string field;   // "prompt", "references.<tag>", "language" or "source"
};

struct FilterResult {
  std::vector<CorpusRecord> kept;
  std::vector<DroppedRecord> dropped;
};

/// Drops records whose prompt or any reference falls outside the 13a token
/// bounds, whose language tag is not allowed, or that exceed a source quota.
FilterResult filter_pool(std::span<const CorpusRecord> records, const FilterOptions& options = {});

struct ScoreFailure {
  std::string id;
  std::string reason;
};

struct ScorePoolResult {
  std::vector<CorpusRecord> records;  // input order; failed records unchanged
  std::vector<ScoreFailure> failures;
};

/// Sets scores["bleu"] = BLEU(base_output, references with the given tags).
/// An empty tag list uses every reference on the record.
ScorePoolResult score_pool(std::span<const CorpusRecord> records,
                           std::span<const std::string> reference_tags,
                           const ScoreConfig& config = {}, int workers = 1);

enum class SelectionMode { kHardest, kEasy, kMedium, kRandom };
const char* to_string(SelectionMode mode) noexcept;
SelectionMode parse_selection_mode(std::string_view text);

struct SelectionReport {
  std::vector<std::string> selected_ids;
  std::string metric;
  SelectionMode mode = SelectionMode::kHardest;
  double threshold_score = 0.0;  // score of the last selected record
  std::size_t pool_size = 0;
  std::size_t k = 0;
  std::uint64_t seed = 0;
  std::vector<std::string> warnings;
};

/// Orders the pool by (score, id) ascending. kHardest takes the first k,
/// kEasy the last k (highest first), kMedium the k centred in the ordering,
/// kRandom a seeded uniform sample. Throws kInvalidArgument for k == 0 and
/// when a record lacks the metric.
SelectionReport select_hardest(std::span<const CorpusRecord> records, std::size_t k,
                               const std::string& metric = "bleu",
                               SelectionMode mode = SelectionMode::kHardest,
                               std::uint64_t seed = 0);

struct ReferenceConfiguration {
  std::string name;
  std::vector<std::string> tags;
};

struct MissingTags {
  std::string id;
  std::vector<std::string> tags;
};

struct ReferenceSetView {
  std::vector<CorpusRecord> records;  // references restricted to the tags, in order
  std::vector<MissingTags> missing;   // records left out of the view
};

/// Throws kNotFound when a configured tag appears on no record at all.
ReferenceSetView build_reference_sets(std::span<const CorpusRecord> records,
                                      const ReferenceConfiguration& configuration);

Json to_json(const SelectionReport& report);
Json to_json(const DroppedRecord& dropped);

/// Deterministic across platforms: mt19937_64 output with rejection sampling.
std::vector<std::size_t> seeded_permutation(std::size_t n, std::uint64_t seed);

}  // namespace lexreward
