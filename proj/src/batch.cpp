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

#include "lexreward/batch.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <random>
#include <unordered_map>
#include <unordered_set>

#include "lexreward/dataset.hpp"
#include "lexreward/error.hpp"
#include "lexreward/reward.hpp"
#include "lexreward/text_stats.hpp"
#include "lexreward/tokenize.hpp"

namespace lexreward::batch {

namespace {

template <typename T>
T option(const Json& options, const char* key, T fallback) {
  if (!options.is_object()) return fallback;
  const auto it = options.find(key);
  if (it == options.end() || it->is_null()) return fallback;
  try {
    return it->get<T>();
  } catch (const Json::exception&) {
    fail(ErrorCode::kInvalidArgument, std::string("option '") + key + "' has the wrong type");
  }
}

std::vector<std::string> string_list(const Json& options, const char* key) {
  return option<std::vector<std::string>>(options, key, {});
}

std::string line_of(const Json& row) { return row.dump() + "\n"; }

JudgeSpec judge_spec(const EngineConfig& config, const Json& options) {
  JudgeSpec spec = JudgeSpec::parse(option<std::string>(options, "judge", "bleu"));
  spec.config = config.score;
  for (auto& part : spec.parts) part.config = config.score;
  spec.reference_tags = string_list(options, "ref_tags");
  return spec;
}

std::vector<PreferenceRecord> load_preferences(std::string_view jsonl, const Json& options,
                                               std::vector<std::string>& warnings) {
  std::vector<PreferenceRecord> records = parse_preferences(jsonl);
  if (options.is_object() && options.contains("reference_sets")) {
    auto more = merge_reference_sets(records, options["reference_sets"]);
    warnings.insert(warnings.end(), more.begin(), more.end());
  }
  return records;
}

std::string text_field(const Json& row) {
  if (row.is_string()) return row.get<std::string>();
  if (row.is_object()) {
    for (const char* key : {"text", "output", "response"}) {
      const auto it = row.find(key);
      if (it != row.end() && it->is_string()) return it->get<std::string>();
    }
  }
  fail(ErrorCode::kParse, "expected a string or an object with a text field");
}

double percentile(std::vector<double> sorted, double q) {
  if (sorted.empty()) return 0.0;
  std::sort(sorted.begin(), sorted.end());
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace

Output score(const EngineConfig& config, std::string_view items_jsonl, const Json& options) {
  RewardSpec spec = RewardSpec::parse(option<std::string>(options, "reward_spec", "bleu"));
  if (options.is_object() && options.contains("format_weight"))
    spec.format_weight = option<double>(options, "format_weight", 0.0);
  const bool with_advantages = option<bool>(options, "advantages", false);

  std::vector<Json> rows = parse_jsonl(items_jsonl);
  std::vector<ScoreItem> items;
  std::vector<std::size_t> origin;
  std::vector<std::string> errors(rows.size());
  std::unordered_set<std::string> seen;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const std::string id = item_id(rows[i]);
    if (!seen.insert(id).second) fail(ErrorCode::kInvalidArgument, "duplicate item id: " + id);
    try {
      items.push_back(parse_score_item(rows[i]));
      origin.push_back(i);
    } catch (const Error& e) {
      errors[i] = e.what();
    }
  }

  const std::vector<ItemResult> results = score_items(items, spec, config.score, config.workers);
  std::vector<std::optional<double>> scores(rows.size());
  for (std::size_t j = 0; j < results.size(); ++j) {
    scores[origin[j]] = results[j].score;
    if (!results[j].score) errors[origin[j]] = results[j].error;
  }

  if (with_advantages) {
    std::vector<std::string> order;
    std::unordered_map<std::string, std::vector<std::size_t>> groups;
    for (std::size_t j = 0; j < items.size(); ++j) {
      if (!items[j].prompt_id) continue;
      auto [it, inserted] = groups.try_emplace(*items[j].prompt_id);
      if (inserted) order.push_back(it->first);
      it->second.push_back(origin[j]);
    }
    for (const auto& pid : order) {
      const auto& members = groups[pid];
      std::vector<double> rewards;
      for (std::size_t i : members)
        if (scores[i]) rewards.push_back(*scores[i]);
      if (rewards.size() != members.size() || rewards.size() < 2) continue;
      const AdvantageVector adv = group_advantage(rewards, config.epsilon);
      for (std::size_t m = 0; m < members.size(); ++m) rows[members[m]]["advantage"] = adv.values[m];
    }
  }

  Output out;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (scores[i]) {
      rows[i]["score"] = *scores[i];
    } else {
      rows[i]["score"] = nullptr;
      rows[i]["error"] = errors[i];
      ++out.n_failed;
    }
    out.text += line_of(rows[i]);
  }
  return out;
}

Output score_pool(const EngineConfig& config, std::string_view corpus_jsonl, const Json& options) {
  const std::vector<CorpusRecord> records = parse_corpus(corpus_jsonl);
  const std::vector<std::string> tags = string_list(options, "tags");
  const ScorePoolResult result = score_pool(records, tags, config.score, config.workers);
  Output out;
  out.text = corpus_to_jsonl(result.records);
  for (const auto& f : result.failures) out.side += line_of(Json{{"id", f.id}, {"error", f.reason}});
  out.n_failed = result.failures.size();
  return out;
}

std::vector<std::string> merge_reference_sets(std::vector<PreferenceRecord>& records,
                                              const Json& reference_sets) {
  if (!reference_sets.is_array()) fail(ErrorCode::kInvalidArgument, "reference_sets must be a list");
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < records.size(); ++i) index.emplace(records[i].id, i);

  auto put = [&](PreferenceRecord& record, const std::string& tag, std::string text) {
    for (auto& r : record.references) {
      if (r.tag == tag) {
        r.text = std::move(text);
        return;
      }
    }
    record.references.push_back({tag, std::move(text)});
  };

  std::vector<std::string> warnings;
  for (const Json& set : reference_sets) {
    if (!set.is_object() || !set.contains("jsonl") || !set["jsonl"].is_string())
      fail(ErrorCode::kInvalidArgument, "each reference set needs a 'jsonl' text");
    const std::string tag = option<std::string>(set, "tag", "");
    std::size_t unknown = 0;
    for (const Json& row : parse_jsonl(set["jsonl"].get<std::string>())) {
      const std::string id = item_id(row);
      const auto hit = index.find(id);
      if (hit == index.end()) {
        ++unknown;
        continue;
      }
      PreferenceRecord& record = records[hit->second];
      if (!tag.empty()) {
        put(record, tag, text_field(row));
      } else {
        const auto refs = row.find("references");
        if (refs == row.end()) fail(ErrorCode::kParse, "reference row " + id + " has no 'references'");
        for (auto& r : parse_references(*refs)) put(record, r.tag, std::move(r.text));
      }
    }
    if (unknown > 0)
      warnings.push_back(std::to_string(unknown) + " reference rows" +
                         (tag.empty() ? "" : " for " + tag) + " match no record id");
  }
  return warnings;
}

Output judge(const EngineConfig& config, std::string_view preferences_jsonl, const Json& options) {
  std::vector<std::string> warnings;
  const auto records = load_preferences(preferences_jsonl, options, warnings);
  const JudgeSpec spec = judge_spec(config, options);
  const TiePolicy policy = parse_tie_policy(option<std::string>(options, "tie_policy", "count_as_disagree"));
  AgreementReport report = judge_dataset(records, spec, policy, config.workers);
  report.warnings.insert(report.warnings.begin(), warnings.begin(), warnings.end());
  Json j = to_json(report);
  if (!option<bool>(options, "by_domain", false)) j.erase("per_domain");
  return {j.dump(2) + "\n", "", report.skipped.size()};
}

Output sweep(const EngineConfig& config, std::string_view preferences_jsonl, const Json& options) {
  std::vector<std::string> warnings;
  const auto records = load_preferences(preferences_jsonl, options, warnings);
  const std::vector<std::string> order = string_list(options, "order");
  if (order.empty()) fail(ErrorCode::kInvalidArgument, "sweep needs a reference order");
  const JudgeSpec spec = judge_spec(config, options);
  const TiePolicy policy = parse_tie_policy(option<std::string>(options, "tie_policy", "count_as_disagree"));
  const auto rows = multi_reference_sweep(records, order, spec, policy, config.workers);

  const bool csv = option<bool>(options, "csv", false);
  const bool with_lengths = option<bool>(options, "length_groups", false);
  Output out;
  if (csv && !with_lengths) {
    out.text = sweep_to_csv(rows);
    return out;
  }
  Json j = Json::object();
  j["judge"] = spec.name();
  j["tie_policy"] = to_string(policy);
  j["warnings"] = warnings;
  Json table = Json::array();
  for (const auto& row : rows) {
    Json r = Json::object();
    r["k"] = row.k;
    r["references"] = row.reference_tags;
    const Json overall = to_json(row.report.overall);
    for (const auto& [key, value] : overall.items()) r[key] = value;
    table.push_back(std::move(r));
  }
  j["rows"] = std::move(table);
  if (with_lengths) {
    const auto groups = length_groups(records, order, spec, policy, config.workers);
    Json g = Json::array();
    for (const auto& group : groups)
      g.push_back({{"reference", group.name},
                   {"mean_abs_length_diff", group.mean_abs_length_diff},
                   {"agreement_rate", group.agreement_rate}});
    j["length_groups"] = std::move(g);
    if (groups.size() >= 2) {
      try {
        j["length_correlation"] = length_correlation(groups);
      } catch (const Error& e) {
        j["length_correlation"] = nullptr;
        j["warnings"].push_back(std::string("length correlation: ") + e.what());
      }
    }
  }
  out.text = j.dump(2) + "\n";
  return out;
}

Output select(std::string_view corpus_jsonl, const Json& options) {
  const auto records = parse_corpus(corpus_jsonl);
  const long long k = option<long long>(options, "k", 0);
  if (k <= 0) fail(ErrorCode::kInvalidArgument, "k must be a positive integer");
  const SelectionReport report =
      select_hardest(records, static_cast<std::size_t>(k), option<std::string>(options, "metric", "bleu"),
                     parse_selection_mode(option<std::string>(options, "mode", "hardest")),
                     option<std::uint64_t>(options, "seed", 0));
  std::unordered_map<std::string, const CorpusRecord*> by_id;
  for (const auto& r : records) by_id.emplace(r.id, &r);
  std::vector<CorpusRecord> subset;
  for (const auto& id : report.selected_ids) subset.push_back(*by_id.at(id));
  return {to_json(report).dump(2) + "\n", corpus_to_jsonl(subset), 0};
}

Output filter(std::string_view corpus_jsonl, const Json& options) {
  const auto records = parse_corpus(corpus_jsonl);
  FilterOptions opts;
  opts.min_tokens = option<std::size_t>(options, "min_tokens", opts.min_tokens);
  opts.max_tokens = option<std::size_t>(options, "max_tokens", opts.max_tokens);
  if (const auto langs = string_list(options, "languages"); !langs.empty())
    opts.language_allowlist = std::set<std::string>(langs.begin(), langs.end());
  opts.source_quota = option<std::map<std::string, std::size_t>>(options, "source_quota", {});
  const FilterResult result = filter_pool(records, opts);
  Output out;
  out.text = corpus_to_jsonl(result.kept);
  for (const auto& d : result.dropped) out.side += line_of(to_json(d));
  out.n_failed = 0;
  return out;
}

Output advantage(const EngineConfig& config, std::string_view groups_jsonl, const Json& options) {
  const double epsilon = option<double>(options, "epsilon", config.epsilon);
  if (epsilon < 0.0) fail(ErrorCode::kInvalidArgument, "epsilon must be non-negative");
  Output out;
  std::unordered_set<std::string> seen;
  for (const Json& row : parse_jsonl(groups_jsonl)) {
    const RewardGroup group = parse_reward_group(row);
    if (!seen.insert(group.prompt_id).second)
      fail(ErrorCode::kInvalidArgument, "duplicate prompt_id: " + group.prompt_id);
    Json line = Json::object();
    line["prompt_id"] = row["prompt_id"];
    try {
      line["advantages"] = group_advantage(group.rewards, epsilon).values;
    } catch (const Error& e) {
      line["advantages"] = nullptr;
      line["error"] = e.what();
      ++out.n_failed;
    }
    out.text += line_of(line);
  }
  return out;
}

Output stats(const EngineConfig& config, std::string_view texts_jsonl, const Json& options) {
  std::vector<std::string> texts;
  for (const Json& row : parse_jsonl(texts_jsonl)) texts.push_back(text_field(row));
  const TextStatsReport report =
      stats_report(texts, config.refusal_phrases, config.openers, config.workers);
  Output out;
  if (option<bool>(options, "csv", false)) {
    out.text = stats_csv_header(config.openers) +
               stats_csv_row(option<std::string>(options, "name", "corpus"), report);
  } else {
    out.text = to_json(report).dump(2) + "\n";
  }
  return out;
}

Output bench(const EngineConfig& config, const Json& options) {
  const long long n = option<long long>(options, "n", 1000);
  const long long length = option<long long>(options, "tokens", 512);
  if (n <= 0 || length <= 0) fail(ErrorCode::kInvalidArgument, "n and tokens must be positive");
  std::mt19937_64 rng(option<std::uint64_t>(options, "seed", 13));

  // Punctuation-free words so each word is one 13a token; the candidate
  // shares most of its words with the reference.
  const auto word = [&rng] { return "w" + std::to_string(rng() % 2000); };
  std::vector<std::string> candidates(static_cast<std::size_t>(n));
  std::vector<std::string> references(static_cast<std::size_t>(n));
  for (long long i = 0; i < n; ++i) {
    std::string ref, cand;
    for (long long t = 0; t < length; ++t) {
      const std::string w = word();
      ref += (t ? " " : "") + w;
      cand += (t ? " " : "") + (rng() % 10 == 0 ? word() : w);
    }
    references[static_cast<std::size_t>(i)] = std::move(ref);
    candidates[static_cast<std::size_t>(i)] = std::move(cand);
  }

  using Clock = std::chrono::steady_clock;
  std::vector<double> latency_ms;
  latency_ms.reserve(candidates.size());
  double checksum = 0.0;
  const auto start = Clock::now();
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const auto t0 = Clock::now();
    checksum += reward_bleu(candidates[i], std::span<const std::string>(&references[i], 1), config.score);
    latency_ms.push_back(std::chrono::duration<double, std::milli>(Clock::now() - t0).count());
  }
  const double serial_s = std::chrono::duration<double>(Clock::now() - start).count();

  std::vector<ScoreItem> items(candidates.size());
  for (std::size_t i = 0; i < items.size(); ++i) {
    items[i].id = std::to_string(i);
    items[i].candidate = candidates[i];
    items[i].references = {references[i]};
  }
  const auto batch_start = Clock::now();
  score_items(items, RewardSpec{}, config.score, config.workers);
  const double batch_s = std::chrono::duration<double>(Clock::now() - batch_start).count();

  double mean = 0.0;
  for (double v : latency_ms) mean += v;
  mean /= static_cast<double>(latency_ms.size());

  Json j = Json::object();
  j["n"] = n;
  j["tokens"] = length;
  j["workers"] = config.workers;
  j["median_ms"] = percentile(latency_ms, 0.5);
  j["p90_ms"] = percentile(latency_ms, 0.9);
  j["p99_ms"] = percentile(latency_ms, 0.99);
  j["mean_ms"] = mean;
  j["candidates_per_sec"] = static_cast<double>(n) / serial_s;
  j["batch_candidates_per_sec"] = static_cast<double>(n) / batch_s;
  j["mean_bleu"] = checksum / static_cast<double>(n);
  return {j.dump(2) + "\n", "", 0};
}

}  // namespace lexreward::batch
