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

// Pairwise winner selection under a metric and agreement with human labels.

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lexreward/metrics.hpp"
#include "lexreward/records.hpp"

namespace lexreward {

enum class JudgeKind {
  kBleu,
  kRougeL,
  kHarmonic,       // BLEU / ROUGE-L harmonic mean
  kPrecisionOnly,  // BLEU geometric mean with BP fixed at 1
  kBpOnly,
  kLength,         // longer output (13a tokens) wins
  kExternal,       // precomputed score pair
  kCombined,       // mean of dataset-level z-scores of two judges
};

struct JudgeSpec {
  JudgeKind kind = JudgeKind::kBleu;
  ScoreConfig config;
  std::vector<std::string> reference_tags;  // empty: all references, in record order
  std::string metric;                       // kExternal only
  std::vector<JudgeSpec> parts;             // kCombined only: exactly two

  /// Accepts "bleu", "rouge_l", "harmonic" (alias "brf1"), "precision_only",
  /// "bp_only", "length", "external:<metric>" and "combined:<a>+<b>".
  static JudgeSpec parse(std::string_view text);

  std::string name() const;
  bool needs_references() const;
  bool needs_dataset() const { return kind == JudgeKind::kCombined; }
};

enum class Winner { kX, kY, kTie };
const char* to_string(Winner w) noexcept;

struct Verdict {
  Winner winner = Winner::kTie;
  double score_x = 0.0;
  double score_y = 0.0;
  std::string judge_name;
};

/// Strict comparison; exact equality is a tie.
Verdict verdict_from_scores(double score_x, double score_y, std::string judge_name);

/// Raw per-output scores for a non-combined judge. Throws kInvalidArgument
/// when the record lacks references or the external metric.
ScorePair score_outputs(const PreferenceRecord& record, const JudgeSpec& spec);

/// Judges a single record. Combined judges need dataset context and throw
/// kInvalidArgument here; use judge_records instead.
Verdict judge(const PreferenceRecord& record, const JudgeSpec& spec);

struct RecordVerdict {
  std::string id;
  std::optional<Verdict> verdict;  // empty when the record was skipped
  std::string skip_reason;
};

/// Verdicts for every record in input order. Combined judges z-score each
/// component over all outputs (X and Y pooled) of the evaluable records.
std::vector<RecordVerdict> judge_records(std::span<const PreferenceRecord> records,
                                         const JudgeSpec& spec, int workers = 1);

enum class TiePolicy { kExclude, kHalfCredit, kCountAsDisagree };
const char* to_string(TiePolicy p) noexcept;
TiePolicy parse_tie_policy(std::string_view text);

struct AgreementCounts {
  std::size_t n_total = 0;        // judged records, human ties excluded
  std::size_t n_agree = 0;        // strict verdict equals human label
  std::size_t n_metric_ties = 0;
  std::optional<double> agreement_rate;  // empty when the denominator is 0
};

struct SkippedRecord {
  std::string id;
  std::string reason;
};

struct AgreementReport {
  std::string judge_name;
  TiePolicy tie_policy = TiePolicy::kCountAsDisagree;
  AgreementCounts overall;
  std::map<std::string, AgreementCounts> per_domain;
  std::vector<SkippedRecord> skipped;
  std::size_t human_ties_skipped = 0;
  std::vector<std::string> warnings;

  double agreement_rate() const { return overall.agreement_rate.value_or(0.0); }
};

double agreement_rate(const AgreementCounts& counts, TiePolicy policy);

/// Throws kInvalidArgument when no record can be judged.
AgreementReport judge_dataset(std::span<const PreferenceRecord> records, const JudgeSpec& spec,
                              TiePolicy tie_policy = TiePolicy::kCountAsDisagree,
                              int workers = 1);

struct SweepRow {
  std::size_t k = 0;
  std::vector<std::string> reference_tags;
  AgreementReport report;
};

/// Agreement using the first k references of `reference_order`, k = 1..len.
/// Every non-tie record must carry every tag; the error names the first
/// offending record and tag.
std::vector<SweepRow> multi_reference_sweep(std::span<const PreferenceRecord> records,
                                            std::span<const std::string> reference_order,
                                            const JudgeSpec& base, TiePolicy tie_policy,
                                            int workers = 1);

struct LengthGroup {
  std::string name;
  double mean_abs_length_diff = 0.0;
  double agreement_rate = 0.0;
};

/// Per reference tag: mean |len(reference) - len(output)| in 13a tokens over
/// both outputs of every judged record, and single-reference agreement of
/// `base` restricted to that tag.
std::vector<LengthGroup> length_groups(std::span<const PreferenceRecord> records,
                                       std::span<const std::string> tags, const JudgeSpec& base,
                                       TiePolicy tie_policy, int workers = 1);

/// Pearson correlation between length difference and agreement across groups.
double length_correlation(std::span<const LengthGroup> groups);

enum class AnnotatorLabel { kBWins, kRWins, kTie };
AnnotatorLabel parse_annotator_label(std::string_view text);

struct AnnotatorStats {
  double soft_pref_a = 0.0;
  double soft_pref_b = 0.0;
  std::size_t n_both_clear = 0;
  std::optional<double> kappa;  // empty when undefined
};

/// Soft preference (B wins + ties) / n for each annotator, and Cohen's kappa
/// over the records where both gave a non-tie label.
AnnotatorStats annotator_stats(std::span<const AnnotatorLabel> labels_a,
                               std::span<const AnnotatorLabel> labels_b);

Json to_json(const AgreementReport& report);
Json to_json(const AgreementCounts& counts);
std::string sweep_to_csv(std::span<const SweepRow> rows);

}  // namespace lexreward
