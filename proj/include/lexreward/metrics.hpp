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

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "lexreward/tokenize.hpp"

namespace lexreward {

enum class RefLengthRule { kClosest, kShortest };

/// BLEU parameters. Defaults give standard 4-gram BLEU with add-one smoothing
/// on orders that have no matches.
struct ScoreConfig {
  int max_order = 4;
  std::vector<double> weights = {0.25, 0.25, 0.25, 0.25};
  bool smoothing = true;
  RefLengthRule ref_length_rule = RefLengthRule::kClosest;

  /// Uniform weights 1/N.
  static ScoreConfig with_order(int max_order);

  /// Throws Error(kInvalidArgument) if max_order < 1, the weight count does
  /// not match, any weight is negative, or the weights do not sum to 1.
  void validate() const;
};

struct BleuReport {
  double score = 0.0;
  std::vector<double> precisions;  // per order, after smoothing
  double brevity_penalty = 0.0;
  std::size_t candidate_length = 0;
  std::size_t effective_reference_length = 0;
  std::vector<std::int64_t> match_counts;  // clipped, before smoothing
  std::vector<std::int64_t> total_counts;

  /// Geometric mean of the precisions with BP forced to 1.
  double precision_score(const ScoreConfig& config) const;
};

struct ClippedCount {
  std::int64_t matches = 0;
  std::int64_t total = 0;
};

using Ngram = std::vector<std::string>;

/// Matched n-grams per order (index 0 holds unigrams) with clipped counts.
struct NgramAttribution {
  std::vector<std::map<Ngram, std::int64_t>> orders;

  std::int64_t matched_at(std::size_t order_index) const;
};

ClippedCount clipped_precision(const TokenSequence& candidate,
                               std::span<const TokenSequence> references, int order);

double brevity_penalty(std::size_t candidate_length, std::size_t effective_ref_length);

std::size_t effective_reference_length(std::size_t candidate_length,
                                       std::span<const std::size_t> reference_lengths,
                                       RefLengthRule rule);

BleuReport bleu(const TokenSequence& candidate, std::span<const TokenSequence> references,
                const ScoreConfig& config = {});

/// Recombines a report's components: BP * exp(sum w_n log p_n), or 0 when any
/// p_n is 0.
double bleu_from_components(std::span<const double> precisions, std::span<const double> weights,
                            double brevity_penalty);

/// ROUGE-L F1 over the longest common subsequence.
double rouge_l(const TokenSequence& candidate, const TokenSequence& reference);

/// Max ROUGE-L F1 over the references; 0 when there are none.
double rouge_l(const TokenSequence& candidate, std::span<const TokenSequence> references);

std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b);

double bleu_rouge_harmonic(double bleu_score, double rouge_score);

NgramAttribution attribute_matches(const TokenSequence& candidate,
                                   std::span<const TokenSequence> references,
                                   const ScoreConfig& config = {});

}  // namespace lexreward
