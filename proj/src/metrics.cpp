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

#include "lexreward/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string_view>
#include <unordered_map>

#include "lexreward/error.hpp"

namespace lexreward {

namespace {

constexpr std::uint32_t kAbsent = std::numeric_limits<std::uint32_t>::max();

// Assigns dense ids to every distinct candidate n-gram up to max_order. An
// n-gram id is interned from (id of its (n-1)-prefix, id of its last token),
// so equal n-grams share an id without hashing whole token tuples.
// References are looked up only; n-grams absent from the candidate map to
// kAbsent since they can never produce a match.
class NgramTable {
 public:
  NgramTable(const TokenSequence& candidate, int max_order)
      : max_order_(max_order), intern_(static_cast<std::size_t>(max_order)),
        candidate_counts_(static_cast<std::size_t>(max_order)),
        first_position_(static_cast<std::size_t>(max_order)) {
    vocab_.reserve(candidate.size() * 2);
    std::vector<std::uint32_t> tokens(candidate.size());
    for (std::size_t i = 0; i < candidate.size(); ++i)
      tokens[i] = vocab_.try_emplace(std::string_view(candidate[i]),
                                     static_cast<std::uint32_t>(vocab_.size())).first->second;
    std::vector<std::uint32_t> prev;
    std::vector<std::uint32_t> cur;
    for (int n = 1; n <= max_order_; ++n) {
      const std::size_t idx = static_cast<std::size_t>(n - 1);
      if (candidate.size() < static_cast<std::size_t>(n)) break;
      const std::size_t count = candidate.size() - static_cast<std::size_t>(n) + 1;
      cur.assign(count, 0);
      auto& table = intern_[idx];
      table.reserve(count * 2);
      for (std::size_t i = 0; i < count; ++i) {
        const std::uint64_t key =
            n == 1 ? tokens[i]
                   : (static_cast<std::uint64_t>(prev[i]) << 32) | tokens[i + static_cast<std::size_t>(n) - 1];
        auto [it, inserted] =
            table.try_emplace(key, static_cast<std::uint32_t>(table.size()));
        if (inserted) {
          candidate_counts_[idx].push_back(0);
          first_position_[idx].push_back(i);
        }
        ++candidate_counts_[idx][it->second];
        cur[i] = it->second;
      }
      prev.swap(cur);
    }
  }

  int max_order() const { return max_order_; }

  std::size_t distinct(int n) const {
    return candidate_counts_[static_cast<std::size_t>(n - 1)].size();
  }
  std::int64_t candidate_count(int n, std::uint32_t id) const {
    return candidate_counts_[static_cast<std::size_t>(n - 1)][id];
  }
  std::size_t first_position(int n, std::uint32_t id) const {
    return first_position_[static_cast<std::size_t>(n - 1)][id];
  }

  // Accumulates, for every candidate n-gram, the max count over references.
  void accumulate_reference(const TokenSequence& ref,
                            std::vector<std::vector<std::int64_t>>& max_counts) const {
    std::vector<std::uint32_t> tokens(ref.size());
    for (std::size_t i = 0; i < ref.size(); ++i) tokens[i] = lookup_token(ref[i]);
    std::vector<std::uint32_t> prev = tokens;
    std::vector<std::int64_t> counts;
    for (int n = 1; n <= max_order_; ++n) {
      const std::size_t idx = static_cast<std::size_t>(n - 1);
      if (ref.size() < static_cast<std::size_t>(n) || distinct(n) == 0) break;
      const std::size_t count = ref.size() - static_cast<std::size_t>(n) + 1;
      const auto& table = intern_[idx];
      counts.assign(distinct(n), 0);
      std::vector<std::uint32_t> cur(count, kAbsent);
      for (std::size_t i = 0; i < count; ++i) {
        if (n == 1) {
          cur[i] = prev[i] == kAbsent ? kAbsent : lookup(table, prev[i]);
        } else {
          const std::uint32_t last = tokens[i + static_cast<std::size_t>(n) - 1];
          if (prev[i] == kAbsent || last == kAbsent) continue;
          cur[i] = lookup(table, (static_cast<std::uint64_t>(prev[i]) << 32) | last);
        }
        if (cur[i] != kAbsent) ++counts[cur[i]];
      }
      auto& best = max_counts[idx];
      for (std::size_t id = 0; id < counts.size(); ++id) best[id] = std::max(best[id], counts[id]);
      prev.swap(cur);
    }
  }

 private:
  static std::uint32_t lookup(const std::unordered_map<std::uint64_t, std::uint32_t>& table,
                              std::uint64_t key) {
    const auto it = table.find(key);
    return it == table.end() ? kAbsent : it->second;
  }
  std::uint32_t lookup_token(const std::string& tok) const {
    const auto it = vocab_.find(tok);
    return it == vocab_.end() ? kAbsent : it->second;
  }

  int max_order_;
  std::unordered_map<std::string_view, std::uint32_t> vocab_;
  std::vector<std::unordered_map<std::uint64_t, std::uint32_t>> intern_;
  std::vector<std::vector<std::int64_t>> candidate_counts_;
  std::vector<std::vector<std::size_t>> first_position_;
};

// Per-order clipped counts against all references.
struct ClippedTable {
  std::vector<std::vector<std::int64_t>> max_ref_counts;
};

ClippedTable clip_against(const NgramTable& table, std::span<const TokenSequence> references) {
  ClippedTable out;
  out.max_ref_counts.resize(static_cast<std::size_t>(table.max_order()));
  for (int n = 1; n <= table.max_order(); ++n)
    out.max_ref_counts[static_cast<std::size_t>(n - 1)].assign(table.distinct(n), 0);
  for (const auto& ref : references) table.accumulate_reference(ref, out.max_ref_counts);
  return out;
}

std::int64_t total_ngrams(std::size_t length, int order) {
  const auto n = static_cast<std::size_t>(order);
  return length >= n ? static_cast<std::int64_t>(length - n + 1) : 0;
}

void require_references(std::span<const TokenSequence> references) {
  if (references.empty()) fail(ErrorCode::kInvalidArgument, "at least one reference is required");
}

}  // namespace

ScoreConfig ScoreConfig::with_order(int max_order) {
  ScoreConfig c;
  c.max_order = max_order;
  c.weights.assign(max_order > 0 ? static_cast<std::size_t>(max_order) : 0,
                   max_order > 0 ? 1.0 / max_order : 0.0);
  return c;
}

void ScoreConfig::validate() const {
  if (max_order < 1) fail(ErrorCode::kInvalidArgument, "max_order must be >= 1");
  if (weights.size() != static_cast<std::size_t>(max_order))
    fail(ErrorCode::kInvalidArgument, "weights length must equal max_order");
  double sum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) fail(ErrorCode::kInvalidArgument, "weights must be non-negative");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-9) fail(ErrorCode::kInvalidArgument, "weights must sum to 1");
}

double BleuReport::precision_score(const ScoreConfig& config) const {
  return bleu_from_components(precisions, config.weights, 1.0);
}

std::int64_t NgramAttribution::matched_at(std::size_t order_index) const {
  if (order_index >= orders.size()) return 0;
  std::int64_t sum = 0;
  for (const auto& [gram, count] : orders[order_index]) sum += count;
  return sum;
}

ClippedCount clipped_precision(const TokenSequence& candidate,
                               std::span<const TokenSequence> references, int order) {
  if (order < 1) fail(ErrorCode::kInvalidArgument, "order must be >= 1");
  require_references(references);
  ClippedCount out;
  out.total = total_ngrams(candidate.size(), order);
  if (out.total == 0) return out;
  const NgramTable table(candidate, order);
  const ClippedTable clipped = clip_against(table, references);
  const auto& best = clipped.max_ref_counts[static_cast<std::size_t>(order - 1)];
  for (std::uint32_t id = 0; id < table.distinct(order); ++id)
    out.matches += std::min(table.candidate_count(order, id), best[id]);
  return out;
}

double brevity_penalty(std::size_t candidate_length, std::size_t effective_ref_length) {
  if (candidate_length == 0) return 0.0;
  if (candidate_length > effective_ref_length) return 1.0;
  return std::exp(1.0 - static_cast<double>(effective_ref_length) /
                            static_cast<double>(candidate_length));
}

std::size_t effective_reference_length(std::size_t candidate_length,
                                       std::span<const std::size_t> reference_lengths,
                                       RefLengthRule rule) {
  if (reference_lengths.empty())
    fail(ErrorCode::kInvalidArgument, "at least one reference length is required");
  if (rule == RefLengthRule::kShortest)
    return *std::min_element(reference_lengths.begin(), reference_lengths.end());
  auto distance = [&](std::size_t len) {
    return len > candidate_length ? len - candidate_length : candidate_length - len;
  };
  std::size_t best = reference_lengths.front();
  for (std::size_t len : reference_lengths) {
    const std::size_t d = distance(len), bd = distance(best);
    if (d < bd || (d == bd && len < best)) best = len;
  }
  return best;
}

double bleu_from_components(std::span<const double> precisions, std::span<const double> weights,
                            double brevity_penalty) {
  double log_sum = 0.0;
  for (std::size_t n = 0; n < precisions.size(); ++n) {
    const double w = n < weights.size() ? weights[n] : 0.0;
    if (w == 0.0) continue;
    if (precisions[n] <= 0.0) return 0.0;
    log_sum += w * std::log(precisions[n]);
  }
  return brevity_penalty * std::exp(log_sum);
}

BleuReport bleu(const TokenSequence& candidate, std::span<const TokenSequence> references,
                const ScoreConfig& config) {
  config.validate();
  require_references(references);

  BleuReport report;
  const int order = config.max_order;
  report.candidate_length = candidate.size();
  std::vector<std::size_t> ref_lengths;
  ref_lengths.reserve(references.size());
  for (const auto& r : references) ref_lengths.push_back(r.size());
  report.effective_reference_length =
      effective_reference_length(candidate.size(), ref_lengths, config.ref_length_rule);
  report.brevity_penalty =
      brevity_penalty(report.candidate_length, report.effective_reference_length);

  report.match_counts.assign(static_cast<std::size_t>(order), 0);
  report.total_counts.assign(static_cast<std::size_t>(order), 0);
  report.precisions.assign(static_cast<std::size_t>(order), 0.0);

  const NgramTable table(candidate, order);
  const ClippedTable clipped = clip_against(table, references);
  for (int n = 1; n <= order; ++n) {
    const auto idx = static_cast<std::size_t>(n - 1);
    std::int64_t matches = 0;
    for (std::uint32_t id = 0; id < table.distinct(n); ++id)
      matches += std::min(table.candidate_count(n, id), clipped.max_ref_counts[idx][id]);
    const std::int64_t total = total_ngrams(candidate.size(), n);
    report.match_counts[idx] = matches;
    report.total_counts[idx] = total;
    if (config.smoothing && (matches == 0 || total == 0)) {
      report.precisions[idx] = static_cast<double>(matches + 1) / static_cast<double>(total + 1);
    } else if (total == 0) {
      report.precisions[idx] = 0.0;
    } else {
      report.precisions[idx] = static_cast<double>(matches) / static_cast<double>(total);
    }
  }

  report.score = candidate.empty()
                     ? 0.0
                     : bleu_from_components(report.precisions, config.weights,
                                            report.brevity_penalty);
  return report;
}

std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b) {
  if (a.empty() || b.empty()) return 0;
  std::unordered_map<std::string_view, std::uint32_t> vocab;
  auto ids = [&](std::span<const std::string> s) {
    std::vector<std::uint32_t> out;
    out.reserve(s.size());
    for (const auto& t : s)
      out.push_back(vocab.try_emplace(t, static_cast<std::uint32_t>(vocab.size())).first->second);
    return out;
  };
  const auto x = ids(a);
  const auto y = ids(b);
  std::vector<std::uint32_t> prev(y.size() + 1, 0), cur(y.size() + 1, 0);
  for (std::size_t i = 1; i <= x.size(); ++i) {
    for (std::size_t j = 1; j <= y.size(); ++j) {
      cur[j] = x[i - 1] == y[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    prev.swap(cur);
  }
  return prev[y.size()];
}

double rouge_l(const TokenSequence& candidate, const TokenSequence& reference) {
  const std::size_t lcs = lcs_length(candidate.tokens, reference.tokens);
  if (lcs == 0) return 0.0;
  const double precision = static_cast<double>(lcs) / static_cast<double>(candidate.size());
  const double recall = static_cast<double>(lcs) / static_cast<double>(reference.size());
  return 2.0 * precision * recall / (precision + recall);
}

double rouge_l(const TokenSequence& candidate, std::span<const TokenSequence> references) {
  double best = 0.0;
  for (const auto& ref : references) best = std::max(best, rouge_l(candidate, ref));
  return best;
}

double bleu_rouge_harmonic(double bleu_score, double rouge_score) {
  if (bleu_score <= 0.0 || rouge_score <= 0.0) return 0.0;
  return 2.0 * bleu_score * rouge_score / (bleu_score + rouge_score);
}

NgramAttribution attribute_matches(const TokenSequence& candidate,
                                   std::span<const TokenSequence> references,
                                   const ScoreConfig& config) {
  config.validate();
  require_references(references);
  NgramAttribution out;
  out.orders.resize(static_cast<std::size_t>(config.max_order));
  const NgramTable table(candidate, config.max_order);
  const ClippedTable clipped = clip_against(table, references);
  for (int n = 1; n <= config.max_order; ++n) {
    const auto idx = static_cast<std::size_t>(n - 1);
    for (std::uint32_t id = 0; id < table.distinct(n); ++id) {
      const std::int64_t m = std::min(table.candidate_count(n, id), clipped.max_ref_counts[idx][id]);
      if (m == 0) continue;
      const std::size_t pos = table.first_position(n, id);
      Ngram gram(candidate.tokens.begin() + static_cast<std::ptrdiff_t>(pos),
                 candidate.tokens.begin() + static_cast<std::ptrdiff_t>(pos) + n);
      out.orders[idx].emplace(std::move(gram), m);
    }
  }
  return out;
}

}  // namespace lexreward
