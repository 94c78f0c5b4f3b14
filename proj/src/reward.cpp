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

#include "lexreward/reward.hpp"

#include <algorithm>

#include "lexreward/error.hpp"
#include "lexreward/parallel.hpp"

namespace lexreward {

namespace {

std::vector<TokenSequence> tokenize_all(std::span<const std::string> texts) {
  std::vector<TokenSequence> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(tokenize_13a(t));
  return out;
}

bool is_blank(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_blank(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_blank(s.back())) s.remove_suffix(1);
  return s;
}

bool contains_tag(std::string_view body) {
  for (std::string_view tag : {"<think>", "</think>", "<answer>", "</answer>"})
    if (body.find(tag) != std::string_view::npos) return true;
  return false;
}

// Consumes "<open>body<close>" from the front of s.
std::optional<std::string_view> take_block(std::string_view& s, std::string_view open,
                                           std::string_view close) {
  if (!s.starts_with(open)) return std::nullopt;
  const std::size_t end = s.find(close, open.size());
  if (end == std::string_view::npos) return std::nullopt;
  std::string_view body = s.substr(open.size(), end - open.size());
  if (contains_tag(body)) return std::nullopt;
  s.remove_prefix(end + close.size());
  return body;
}

double z(double v, const MeanStd& ms) { return ms.stddev == 0.0 ? 0.0 : (v - ms.mean) / ms.stddev; }

}  // namespace

double reward_bleu(std::string_view candidate, std::span<const std::string> references,
                   const ScoreConfig& config) {
  return bleu(tokenize_13a(candidate), tokenize_all(references), config).score;
}

double reward_rouge_l(std::string_view candidate, std::span<const std::string> references) {
  return rouge_l(tokenize_13a(candidate), tokenize_all(references));
}

double reward_brf1(std::string_view candidate, std::span<const std::string> references,
                   const ScoreConfig& config) {
  const TokenSequence cand = tokenize_13a(candidate);
  const std::vector<TokenSequence> refs = tokenize_all(references);
  return bleu_rouge_harmonic(bleu(cand, refs, config).score, rouge_l(cand, refs));
}

double reward_external(const std::string& candidate_id, const ScoreTable& table) {
  const auto it = table.find(candidate_id);
  if (it == table.end()) fail(ErrorCode::kNotFound, "no external score for id " + candidate_id);
  return it->second;
}

ScoreTable parse_score_table(std::string_view jsonl) {
  ScoreTable table;
  for (const Json& row : parse_jsonl(jsonl)) {
    if (!row.is_object() || !row.contains("id") || !row.contains("score") ||
        !row["score"].is_number())
      fail(ErrorCode::kParse, "score table rows must be {\"id\": ..., \"score\": number}");
    const Json& id = row["id"];
    const std::string key = id.is_string() ? id.get<std::string>() : id.dump();
    if (!table.emplace(key, row["score"].get<double>()).second)
      fail(ErrorCode::kInvalidArgument, "duplicate id in score table: " + key);
  }
  return table;
}

std::string score_table_to_jsonl(const ScoreTable& table) {
  std::vector<std::pair<std::string, double>> rows(table.begin(), table.end());
  std::sort(rows.begin(), rows.end());
  std::string out;
  for (const auto& [id, score] : rows) {
    out += Json{{"id", id}, {"score", score}}.dump();
    out.push_back('\n');
  }
  return out;
}

BatchStats batch_stats(std::span<const double> bleu_scores, std::span<const double> external_scores) {
  if (bleu_scores.size() != external_scores.size())
    fail(ErrorCode::kAlignment, "BLEU and external score batches differ in length");
  if (bleu_scores.size() < 2) fail(ErrorCode::kInvalidArgument, "batch statistics need at least 2 items");
  return {mean_std(bleu_scores), mean_std(external_scores)};
}

double reward_bleu_plus_rm(double bleu_score, double external_score,
                           const std::optional<BatchStats>& stats) {
  if (!stats)
    fail(ErrorCode::kInvalidArgument, "bleu_plus_rm needs batch statistics for z-scoring");
  return 0.5 * (z(bleu_score, stats->bleu) + z(external_score, stats->external));
}

std::vector<double> reward_bleu_plus_rm(std::span<const double> bleu_scores,
                                        std::span<const double> external_scores) {
  const BatchStats stats = batch_stats(bleu_scores, external_scores);
  std::vector<double> out(bleu_scores.size());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = reward_bleu_plus_rm(bleu_scores[i], external_scores[i], stats);
  return out;
}

ThinkAnswer parse_think_answer(std::string_view text) {
  ThinkAnswer out;
  std::string_view rest = trim(text);
  const auto think = take_block(rest, "<think>", "</think>");
  if (!think) return out;
  rest = trim(rest);
  const auto answer = take_block(rest, "<answer>", "</answer>");
  if (!answer || !trim(rest).empty()) return out;
  out.well_formed = true;
  out.think = std::string(*think);
  out.answer = std::string(*answer);
  return out;
}

double format_reward(std::string_view text) { return parse_think_answer(text).well_formed ? 1.0 : 0.0; }

std::optional<std::string> extract_answer(std::string_view text) {
  ThinkAnswer parsed = parse_think_answer(text);
  if (!parsed.well_formed) return std::nullopt;
  return std::move(parsed.answer);
}

double reward_answer_bleu(std::string_view candidate, std::span<const std::string> references,
                          const ScoreConfig& config) {
  const auto answer = extract_answer(candidate);
  if (!answer) return 0.0;
  return reward_bleu(*answer, references, config);
}

double reward_format_answer(std::string_view candidate, std::span<const std::string> references,
                            double format_weight, const ScoreConfig& config) {
  if (!(format_weight >= 0.0 && format_weight <= 1.0))
    fail(ErrorCode::kInvalidArgument, "format_weight must be in [0, 1]");
  return format_weight * format_reward(candidate) +
         (1.0 - format_weight) * reward_answer_bleu(candidate, references, config);
}

AdvantageVector group_advantage(std::span<const double> rewards, double epsilon) {
  if (rewards.size() < 2) fail(ErrorCode::kInvalidArgument, "advantage needs a group of at least 2");
  if (!(epsilon >= 0.0)) fail(ErrorCode::kInvalidArgument, "epsilon must be non-negative");
  AdvantageVector out;
  out.epsilon = epsilon;
  out.values.assign(rewards.size(), 0.0);
  const MeanStd ms = mean_std(rewards);
  if (ms.stddev == 0.0) return out;
  const double denom = ms.stddev + epsilon;
  for (std::size_t i = 0; i < rewards.size(); ++i) out.values[i] = (rewards[i] - ms.mean) / denom;
  return out;
}

RewardGroup parse_reward_group(const Json& obj) {
  if (!obj.is_object()) fail(ErrorCode::kParse, "reward group must be a JSON object");
  RewardGroup g;
  const auto pid = obj.find("prompt_id");
  if (pid == obj.end()) fail(ErrorCode::kParse, "reward group is missing 'prompt_id'");
  g.prompt_id = pid->is_string() ? pid->get<std::string>() : pid->dump();
  if (const auto it = obj.find("candidates"); it != obj.end()) {
    if (!it->is_array()) fail(ErrorCode::kParse, "group " + g.prompt_id + ": candidates must be a list");
    for (const auto& c : *it) {
      if (!c.is_string()) fail(ErrorCode::kParse, "group " + g.prompt_id + ": candidates must be strings");
      g.candidates.push_back(c.get<std::string>());
    }
  }
  if (const auto it = obj.find("rewards"); it != obj.end()) {
    if (!it->is_array()) fail(ErrorCode::kParse, "group " + g.prompt_id + ": rewards must be a list");
    for (const auto& r : *it) {
      if (!r.is_number()) fail(ErrorCode::kParse, "group " + g.prompt_id + ": rewards must be numbers");
      g.rewards.push_back(r.get<double>());
    }
  }
  if (!g.candidates.empty() && !g.rewards.empty() && g.candidates.size() != g.rewards.size())
    fail(ErrorCode::kParse, "group " + g.prompt_id + ": rewards are not aligned to candidates");
  if (const auto it = obj.find("reward_spec"); it != obj.end() && it->is_string())
    g.reward_spec = it->get<std::string>();
  return g;
}

RewardSpec RewardSpec::parse(std::string_view text) {
  RewardSpec spec;
  if (text == "bleu") {
    spec.kind = RewardKind::kBleu;
  } else if (text == "rouge_l") {
    spec.kind = RewardKind::kRougeL;
  } else if (text == "brf1" || text == "harmonic") {
    spec.kind = RewardKind::kBrf1;
  } else if (text == "format") {
    spec.kind = RewardKind::kFormat;
  } else if (text == "answer_bleu") {
    spec.kind = RewardKind::kAnswerBleu;
  } else if (text == "format_answer") {
    spec.kind = RewardKind::kFormatAnswer;
  } else if (text == "bleu_plus_rm") {
    spec.kind = RewardKind::kBleuPlusRm;
  } else if (text == "external") {
    spec.kind = RewardKind::kExternal;
  } else {
    fail(ErrorCode::kInvalidArgument, "unknown reward spec '" + std::string(text) + "'");
  }
  return spec;
}

std::string RewardSpec::name() const {
  switch (kind) {
    case RewardKind::kBleu: return "bleu";
    case RewardKind::kRougeL: return "rouge_l";
    case RewardKind::kBrf1: return "brf1";
    case RewardKind::kFormat: return "format";
    case RewardKind::kAnswerBleu: return "answer_bleu";
    case RewardKind::kFormatAnswer: return "format_answer";
    case RewardKind::kBleuPlusRm: return "bleu_plus_rm";
    case RewardKind::kExternal: return "external";
  }
  return "bleu";
}

bool RewardSpec::needs_references() const {
  return kind != RewardKind::kFormat && kind != RewardKind::kExternal;
}

bool RewardSpec::needs_external() const {
  return kind == RewardKind::kBleuPlusRm || kind == RewardKind::kExternal;
}

std::string item_id(const Json& obj) {
  const auto id = obj.find("id");
  if (!obj.is_object() || id == obj.end()) fail(ErrorCode::kParse, "item has no id");
  if (id->is_string()) return id->get<std::string>();
  if (id->is_number_integer()) return std::to_string(id->get<long long>());
  fail(ErrorCode::kParse, "item ids must be strings or integers");
}

ScoreItem parse_score_item(const Json& obj) {
  ScoreItem item;
  item.id = item_id(obj);
  const auto cand = obj.find("candidate");
  if (cand == obj.end() || !cand->is_string()) fail(ErrorCode::kParse, "candidate must be a string");
  item.candidate = cand->get<std::string>();
  if (const auto refs = obj.find("references"); refs != obj.end() && !refs->is_null()) {
    for (auto& r : parse_references(*refs)) item.references.push_back(std::move(r.text));
  }
  if (const auto ext = obj.find("external_score"); ext != obj.end() && !ext->is_null()) {
    if (!ext->is_number()) fail(ErrorCode::kParse, "external_score must be a number");
    item.external_score = ext->get<double>();
  }
  if (const auto pid = obj.find("prompt_id"); pid != obj.end() && !pid->is_null())
    item.prompt_id = pid->is_string() ? pid->get<std::string>() : pid->dump();
  return item;
}

std::vector<ItemResult> score_items(std::span<const ScoreItem> items, const RewardSpec& spec,
                                    const ScoreConfig& config, int workers) {
  config.validate();
  if (spec.kind == RewardKind::kFormatAnswer && !spec.format_weight)
    fail(ErrorCode::kInvalidArgument, "format_answer needs an explicit format_weight");

  std::vector<ItemResult> out(items.size());
  parallel_for(items.size(), workers, [&](std::size_t i) {
    const ScoreItem& item = items[i];
    if (spec.needs_references() && item.references.empty()) {
      out[i].error = "missing references";
      return;
    }
    if (spec.needs_external() && !item.external_score) {
      out[i].error = "missing external_score";
      return;
    }
    switch (spec.kind) {
      case RewardKind::kBleu:
      case RewardKind::kBleuPlusRm:
        out[i].score = reward_bleu(item.candidate, item.references, config);
        break;
      case RewardKind::kRougeL: out[i].score = reward_rouge_l(item.candidate, item.references); break;
      case RewardKind::kBrf1: out[i].score = reward_brf1(item.candidate, item.references, config); break;
      case RewardKind::kFormat: out[i].score = format_reward(item.candidate); break;
      case RewardKind::kAnswerBleu:
        out[i].score = reward_answer_bleu(item.candidate, item.references, config);
        break;
      case RewardKind::kFormatAnswer:
        out[i].score = reward_format_answer(item.candidate, item.references, *spec.format_weight, config);
        break;
      case RewardKind::kExternal: out[i].score = *item.external_score; break;
    }
  });

  if (spec.kind == RewardKind::kBleuPlusRm) {
    std::vector<std::size_t> ok;
    std::vector<double> b, e;
    for (std::size_t i = 0; i < items.size(); ++i) {
      if (!out[i].score) continue;
      ok.push_back(i);
      b.push_back(*out[i].score);
      e.push_back(*items[i].external_score);
    }
    if (ok.size() < 2) {
      for (std::size_t i : ok) {
        out[i].score.reset();
        out[i].error = "bleu_plus_rm needs at least 2 scorable items in the batch";
      }
    } else {
      const std::vector<double> combined = reward_bleu_plus_rm(b, e);
      for (std::size_t j = 0; j < ok.size(); ++j) out[ok[j]].score = combined[j];
    }
  }
  return out;
}

}  // namespace lexreward
