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

#include "lexreward/dataset.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <random>
#include <unordered_set>

#include "lexreward/error.hpp"
#include "lexreward/parallel.hpp"

namespace lexreward {

namespace {

// Returns the violated bound name, or nullptr if within bounds.
const char* token_bound_violation(const std::string& text, const FilterOptions& options) {
  const std::size_t n = count_tokens_13a(text);
  if (n < options.min_tokens) return "min_tokens";
  if (n > options.max_tokens) return "max_tokens";
  return nullptr;
}

std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t r;
  do {
    r = rng();
  } while (r >= limit);
  return r % bound;
}

}  // namespace

FilterResult filter_pool(std::span<const CorpusRecord> records, const FilterOptions& options) {
  FilterResult result;
  std::map<std::string, std::size_t> per_source;
  for (const auto& r : records) {
    auto drop = [&](std::string reason, std::string field) {
      result.dropped.push_back({r, std::move(reason), std::move(field)});
    };
    if (const char* why = token_bound_violation(r.prompt, options)) {
      drop(why, "prompt");
      continue;
    }
    bool dropped = false;
    for (const auto& ref : r.references) {
      if (const char* why = token_bound_violation(ref.text, options)) {
        drop(why, "references." + ref.tag);
        dropped = true;
        break;
      }
    }
    if (dropped) continue;
    if (options.language_allowlist &&
        (!r.language || options.language_allowlist->count(*r.language) == 0)) {
      drop("language", "language");
      continue;
    }
    if (r.source) {
      const auto quota = options.source_quota.find(*r.source);
      if (quota != options.source_quota.end() && per_source[*r.source] >= quota->second) {
        drop("source_quota", "source");
        continue;
      }
      ++per_source[*r.source];
    }
    result.kept.push_back(r);
  }
  return result;
}

ScorePoolResult score_pool(std::span<const CorpusRecord> records,
                           std::span<const std::string> reference_tags, const ScoreConfig& config,
                           int workers) {
  config.validate();
  ScorePoolResult result;
  result.records.assign(records.begin(), records.end());
  std::vector<std::string> errors(records.size());
  parallel_for(records.size(), workers, [&](std::size_t i) {
    CorpusRecord& r = result.records[i];
    if (!r.base_output) {
      errors[i] = "missing base_output";
      return;
    }
    std::vector<TokenSequence> refs;
    if (reference_tags.empty()) {
      for (const auto& ref : r.references) refs.push_back(tokenize_13a(ref.text));
    } else {
      for (const auto& tag : reference_tags) {
        const TaggedText* ref = r.find_reference(tag);
        if (ref == nullptr) {
          errors[i] = "missing reference '" + tag + "'";
          return;
        }
        refs.push_back(tokenize_13a(ref->text));
      }
    }
    if (refs.empty()) {
      errors[i] = "no references";
      return;
    }
    r.set_score("bleu", bleu(tokenize_13a(*r.base_output), refs, config).score);
  });
  for (std::size_t i = 0; i < records.size(); ++i)
    if (!errors[i].empty()) result.failures.push_back({records[i].id, errors[i]});
  return result;
}

const char* to_string(SelectionMode mode) noexcept {
  switch (mode) {
    case SelectionMode::kHardest: return "hardest";
    case SelectionMode::kEasy: return "easy";
    case SelectionMode::kMedium: return "medium";
    case SelectionMode::kRandom: return "random";
  }
  return "hardest";
}

SelectionMode parse_selection_mode(std::string_view text) {
  if (text == "hardest" || text == "hard") return SelectionMode::kHardest;
  if (text == "easy" || text == "easiest") return SelectionMode::kEasy;
  if (text == "medium") return SelectionMode::kMedium;
  if (text == "random") return SelectionMode::kRandom;
  fail(ErrorCode::kInvalidArgument, "unknown selection mode '" + std::string(text) + "'");
}

std::vector<std::size_t> seeded_permutation(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  for (std::size_t i = n; i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(uniform_below(rng, i));
    std::swap(perm[i - 1], perm[j]);
  }
  return perm;
}

SelectionReport select_hardest(std::span<const CorpusRecord> records, std::size_t k,
                               const std::string& metric, SelectionMode mode, std::uint64_t seed) {
  if (k == 0) fail(ErrorCode::kInvalidArgument, "k must be positive");
  struct Entry {
    double score;
    const std::string* id;
  };
  std::vector<Entry> pool;
  pool.reserve(records.size());
  for (const auto& r : records) {
    const auto s = r.score(metric);
    if (!s) fail(ErrorCode::kInvalidArgument, "record " + r.id + " has no '" + metric + "' score");
    pool.push_back({*s, &r.id});
  }
  std::sort(pool.begin(), pool.end(), [](const Entry& a, const Entry& b) {
    if (a.score != b.score) return a.score < b.score;
    return *a.id < *b.id;
  });

  SelectionReport report;
  report.metric = metric;
  report.mode = mode;
  report.pool_size = pool.size();
  report.k = k;
  report.seed = seed;
  if (k > pool.size()) {
    report.warnings.push_back("k=" + std::to_string(k) + " exceeds pool size " +
                              std::to_string(pool.size()) + "; selecting all");
  }
  const std::size_t take = std::min(k, pool.size());

  std::vector<const Entry*> chosen;
  chosen.reserve(take);
  switch (mode) {
    case SelectionMode::kHardest:
      for (std::size_t i = 0; i < take; ++i) chosen.push_back(&pool[i]);
      break;
    case SelectionMode::kEasy:
      for (std::size_t i = 0; i < take; ++i) chosen.push_back(&pool[pool.size() - 1 - i]);
      break;
    case SelectionMode::kMedium: {
      const std::size_t start = (pool.size() - take) / 2;
      for (std::size_t i = 0; i < take; ++i) chosen.push_back(&pool[start + i]);
      break;
    }
    case SelectionMode::kRandom: {
      const std::vector<std::size_t> perm = seeded_permutation(pool.size(), seed);
      for (std::size_t i = 0; i < take; ++i) chosen.push_back(&pool[perm[i]]);
      break;
    }
  }
  for (const Entry* e : chosen) report.selected_ids.push_back(*e->id);
  if (!chosen.empty()) report.threshold_score = chosen.back()->score;
  return report;
}

ReferenceSetView build_reference_sets(std::span<const CorpusRecord> records,
                                      const ReferenceConfiguration& configuration) {
  if (configuration.tags.empty())
    fail(ErrorCode::kInvalidArgument, "configuration '" + configuration.name + "' has no tags");
  std::unordered_set<std::string> known;
  for (const auto& r : records)
    for (const auto& ref : r.references) known.insert(ref.tag);
  for (const auto& tag : configuration.tags)
    if (known.count(tag) == 0)
      fail(ErrorCode::kNotFound, "configuration '" + configuration.name +
                                     "' references unknown tag '" + tag + "'");

  ReferenceSetView view;
  for (const auto& r : records) {
    MissingTags missing{r.id, {}};
    std::vector<TaggedText> refs;
    for (const auto& tag : configuration.tags) {
      if (const TaggedText* ref = r.find_reference(tag)) {
        refs.push_back(*ref);
      } else {
        missing.tags.push_back(tag);
      }
    }
    if (!missing.tags.empty()) {
      view.missing.push_back(std::move(missing));
      continue;
    }
    CorpusRecord restricted = r;
    restricted.references = std::move(refs);
    view.records.push_back(std::move(restricted));
  }
  return view;
}

Json to_json(const SelectionReport& report) {
  Json j = Json::object();
  j["selected_ids"] = report.selected_ids;
  j["metric"] = report.metric;
  j["mode"] = to_string(report.mode);
  j["threshold_score"] = report.threshold_score;
  j["pool_size"] = report.pool_size;
  j["k"] = report.k;
  if (report.mode == SelectionMode::kRandom) j["seed"] = report.seed;
  j["warnings"] = report.warnings;
  return j;
}

Json to_json(const DroppedRecord& dropped) {
  return Json{{"id", dropped.record.id}, {"reason", dropped.reason}, {"field", dropped.field}};
}

}  // namespace lexreward
