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

// Reward functions over candidate completions and group-normalized advantages
// for an external GRPO trainer.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "lexreward/combine.hpp"
#include "lexreward/metrics.hpp"
#include "lexreward/records.hpp"

namespace lexreward {

/// BLEU of the candidate against the references, both tokenized with 13a.
double reward_bleu(std::string_view candidate, std::span<const std::string> references,
                   const ScoreConfig& config = {});

double reward_rouge_l(std::string_view candidate, std::span<const std::string> references);

/// Harmonic mean of BLEU and ROUGE-L.
double reward_brf1(std::string_view candidate, std::span<const std::string> references,
                   const ScoreConfig& config = {});

using ScoreTable = std::unordered_map<std::string, double>;

/// Looks up a precomputed reward. Throws kNotFound for unknown ids.
double reward_external(const std::string& candidate_id, const ScoreTable& table);

/// One {"id": ..., "score": ...} object per line.
ScoreTable parse_score_table(std::string_view jsonl);
std::string score_table_to_jsonl(const ScoreTable& table);

/// Statistics of a batch used to z-score single candidates consistently
/// with combine_mean over the whole batch.
struct BatchStats {
  MeanStd bleu;
  MeanStd external;
};

BatchStats batch_stats(std::span<const double> bleu_scores, std::span<const double> external_scores);

/// Mean of the batch z-scores of BLEU and the external score. Throws
/// kInvalidArgument when no batch statistics are supplied.
double reward_bleu_plus_rm(double bleu_score, double external_score,
                           const std::optional<BatchStats>& stats);
std::vector<double> reward_bleu_plus_rm(std::span<const double> bleu_scores,
                                        std::span<const double> external_scores);

struct ThinkAnswer {
  bool well_formed = false;
  std::string think;
  std::string answer;
};

/// Strict parse: optional whitespace, one <think>...</think> block, optional
/// whitespace, one <answer>...</answer> block, optional whitespace. Block
/// bodies may not contain any of the four tags.
ThinkAnswer parse_think_answer(std::string_view text);

double format_reward(std::string_view text);
std::optional<std::string> extract_answer(std::string_view text);

/// BLEU computed on the extracted answer; 0 for malformed candidates.
double reward_answer_bleu(std::string_view candidate, std::span<const std::string> references,
                          const ScoreConfig& config = {});

/// format_weight * format_reward + (1 - format_weight) * reward_answer_bleu.
double reward_format_answer(std::string_view candidate, std::span<const std::string> references,
                            double format_weight, const ScoreConfig& config = {});

struct AdvantageVector {
  std::vector<double> values;
  double epsilon = 1e-8;
};

/// (r - mean) / (std + epsilon) with population std; zeros for a constant
/// group. Throws kInvalidArgument for fewer than 2 rewards.
AdvantageVector group_advantage(std::span<const double> rewards, double epsilon = 1e-8);

struct RewardGroup {
  std::string prompt_id;
  std::vector<std::string> candidates;
  std::vector<double> rewards;
  std::string reward_spec;
};

RewardGroup parse_reward_group(const Json& obj);

enum class RewardKind {
  kBleu,
  kRougeL,
  kBrf1,
  kFormat,
  kAnswerBleu,
  kFormatAnswer,
  kBleuPlusRm,
  kExternal,
};

struct RewardSpec {
  RewardKind kind = RewardKind::kBleu;
  std::optional<double> format_weight;  // required by kFormatAnswer

  /// bleu | rouge_l | brf1 | format | answer_bleu | format_answer | bleu_plus_rm | external
  static RewardSpec parse(std::string_view text);
  std::string name() const;
  bool needs_references() const;
  bool needs_external() const;
};

struct ScoreItem {
  std::string id;
  std::string candidate;
  std::vector<std::string> references;
  std::optional<double> external_score;
  std::optional<std::string> prompt_id;
};

/// String or integer id of a request item; throws kParse otherwise.
std::string item_id(const Json& obj);

/// {"id", "candidate", "references"?, "external_score"?, "prompt_id"?}.
/// Throws kParse naming the offending field.
ScoreItem parse_score_item(const Json& obj);

struct ItemResult {
  std::optional<double> score;
  std::string error;
};

/// Scores every item independently; failures are reported per item.
/// bleu_plus_rm z-scores over the items that could be scored.
std::vector<ItemResult> score_items(std::span<const ScoreItem> items, const RewardSpec& spec,
                                    const ScoreConfig& config = {}, int workers = 1);

}  // namespace lexreward
