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

#include "lexreward/judging.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "lexreward/combine.hpp"
#include "lexreward/error.hpp"
#include "lexreward/parallel.hpp"

namespace lexreward {

namespace {

JudgeSpec parse_simple(std::string_view text) {
  JudgeSpec spec;
  if (text == "bleu") {
    spec.kind = JudgeKind::kBleu;
  } else if (text == "rouge_l" || text == "rouge-l" || text == "rougel") {
    spec.kind = JudgeKind::kRougeL;
  } else if (text == "harmonic" || text == "brf1") {
    spec.kind = JudgeKind::kHarmonic;
  } else if (text == "precision_only" || text == "precision") {
    spec.kind = JudgeKind::kPrecisionOnly;
  } else if (text == "bp_only" || text == "bp") {
    spec.kind = JudgeKind::kBpOnly;
  } else if (text == "length") {
    spec.kind = JudgeKind::kLength;
  } else if (text.starts_with("external:") && text.size() > 9) {
    spec.kind = JudgeKind::kExternal;
    spec.metric = std::string(text.substr(9));
  } else {
    fail(ErrorCode::kInvalidArgument, "unknown judge '" + std::string(text) + "'");
  }
  return spec;
}

std::vector<TokenSequence> selected_references(const PreferenceRecord& record,
                                               const JudgeSpec& spec) {
  std::vector<TokenSequence> refs;
  if (spec.reference_tags.empty()) {
    for (const auto& r : record.references) refs.push_back(tokenize_13a(r.text));
  } else {
    for (const auto& tag : spec.reference_tags) {
      const TaggedText* r = record.find_reference(tag);
      if (r == nullptr)
        fail(ErrorCode::kInvalidArgument,
             "record " + record.id + ": missing reference '" + tag + "'");
      refs.push_back(tokenize_13a(r->text));
    }
  }
  if (refs.empty())
    fail(ErrorCode::kInvalidArgument, "record " + record.id + ": no references");
  return refs;
}

void count_verdict(AgreementCounts& c, Winner verdict, HumanLabel human) {
  ++c.n_total;
  if (verdict == Winner::kTie) {
    ++c.n_metric_ties;
  } else if ((verdict == Winner::kX) == (human == HumanLabel::kX)) {
    ++c.n_agree;
  }
}

void finalize(AgreementCounts& c, TiePolicy policy) {
  const bool empty = c.n_total == 0 || (policy == TiePolicy::kExclude && c.n_total == c.n_metric_ties);
  c.agreement_rate = empty ? std::nullopt : std::optional<double>(agreement_rate(c, policy));
}

std::size_t abs_diff(std::size_t a, std::size_t b) { return a > b ? a - b : b - a; }

}  // namespace

JudgeSpec JudgeSpec::parse(std::string_view text) {
  if (text.starts_with("combined:")) {
    const std::string_view body = text.substr(9);
    const std::size_t plus = body.find('+');
    if (plus == std::string_view::npos || plus == 0 || plus + 1 == body.size())
      fail(ErrorCode::kInvalidArgument, "combined judge must be 'combined:<a>+<b>'");
    JudgeSpec spec;
    spec.kind = JudgeKind::kCombined;
    spec.parts.push_back(parse_simple(body.substr(0, plus)));
    spec.parts.push_back(parse_simple(body.substr(plus + 1)));
    return spec;
  }
  return parse_simple(text);
}

std::string JudgeSpec::name() const {
  switch (kind) {
    case JudgeKind::kBleu: return "bleu";
    case JudgeKind::kRougeL: return "rouge_l";
    case JudgeKind::kHarmonic: return "harmonic";
    case JudgeKind::kPrecisionOnly: return "precision_only";
    case JudgeKind::kBpOnly: return "bp_only";
    case JudgeKind::kLength: return "length";
    case JudgeKind::kExternal: return "external:" + metric;
    case JudgeKind::kCombined:
      return "combined:" + (parts.size() == 2 ? parts[0].name() + "+" + parts[1].name() : "?");
  }
  return "unknown";
}

bool JudgeSpec::needs_references() const {
  switch (kind) {
    case JudgeKind::kLength:
    case JudgeKind::kExternal: return false;
    case JudgeKind::kCombined:
      return parts.size() == 2 && (parts[0].needs_references() || parts[1].needs_references());
    default: return true;
  }
}

const char* to_string(Winner w) noexcept {
  switch (w) {
    case Winner::kX: return "X";
    case Winner::kY: return "Y";
    case Winner::kTie: return "tie";
  }
  return "tie";
}

const char* to_string(TiePolicy p) noexcept {
  switch (p) {
    case TiePolicy::kExclude: return "exclude";
    case TiePolicy::kHalfCredit: return "half_credit";
    case TiePolicy::kCountAsDisagree: return "count_as_disagree";
  }
  return "count_as_disagree";
}

TiePolicy parse_tie_policy(std::string_view text) {
  if (text == "exclude") return TiePolicy::kExclude;
  if (text == "half_credit" || text == "half") return TiePolicy::kHalfCredit;
  if (text == "count_as_disagree" || text == "disagree") return TiePolicy::kCountAsDisagree;
  fail(ErrorCode::kInvalidArgument, "unknown tie policy '" + std::string(text) + "'");
}

Verdict verdict_from_scores(double score_x, double score_y, std::string judge_name) {
  Verdict v;
  v.score_x = score_x;
  v.score_y = score_y;
  v.judge_name = std::move(judge_name);
  if (score_x > score_y) {
    v.winner = Winner::kX;
  } else if (score_y > score_x) {
    v.winner = Winner::kY;
  } else {
    v.winner = Winner::kTie;
  }
  return v;
}

ScorePair score_outputs(const PreferenceRecord& record, const JudgeSpec& spec) {
  switch (spec.kind) {
    case JudgeKind::kLength:
      return {static_cast<double>(count_tokens_13a(record.output_x)),
              static_cast<double>(count_tokens_13a(record.output_y))};
    case JudgeKind::kExternal: {
      const auto it = record.external_scores.find(spec.metric);
      if (it == record.external_scores.end())
        fail(ErrorCode::kInvalidArgument,
             "record " + record.id + ": missing external score '" + spec.metric + "'");
      return it->second;
    }
    case JudgeKind::kCombined:
      fail(ErrorCode::kInvalidArgument, "combined judges need dataset context");
    default:
      break;
  }

  const std::vector<TokenSequence> refs = selected_references(record, spec);
  const TokenSequence x = tokenize_13a(record.output_x);
  const TokenSequence y = tokenize_13a(record.output_y);
  auto score_one = [&](const TokenSequence& out) -> double {
    switch (spec.kind) {
      case JudgeKind::kRougeL: return rouge_l(out, refs);
      case JudgeKind::kHarmonic:
        return bleu_rouge_harmonic(bleu(out, refs, spec.config).score, rouge_l(out, refs));
      case JudgeKind::kPrecisionOnly: return bleu(out, refs, spec.config).precision_score(spec.config);
      case JudgeKind::kBpOnly: return bleu(out, refs, spec.config).brevity_penalty;
      default: return bleu(out, refs, spec.config).score;
    }
  };
  return {score_one(x), score_one(y)};
}

Verdict judge(const PreferenceRecord& record, const JudgeSpec& spec) {
  const ScorePair s = score_outputs(record, spec);
  return verdict_from_scores(s.x, s.y, spec.name());
}

std::vector<RecordVerdict> judge_records(std::span<const PreferenceRecord> records,
                                         const JudgeSpec& spec, int workers) {
  std::vector<RecordVerdict> out(records.size());
  if (spec.kind != JudgeKind::kCombined) {
    parallel_for(records.size(), workers, [&](std::size_t i) {
      out[i].id = records[i].id;
      try {
        out[i].verdict = judge(records[i], spec);
      } catch (const Error& e) {
        out[i].skip_reason = e.what();
      }
    });
    return out;
  }

  if (spec.parts.size() != 2 || spec.parts[0].needs_dataset() || spec.parts[1].needs_dataset())
    fail(ErrorCode::kInvalidArgument, "combined judge needs exactly two simple components");

  std::vector<ScorePair> a(records.size()), b(records.size());
  parallel_for(records.size(), workers, [&](std::size_t i) {
    out[i].id = records[i].id;
    try {
      a[i] = score_outputs(records[i], spec.parts[0]);
      b[i] = score_outputs(records[i], spec.parts[1]);
    } catch (const Error& e) {
      out[i].skip_reason = e.what();
    }
  });

  std::vector<std::size_t> ok;
  for (std::size_t i = 0; i < records.size(); ++i)
    if (out[i].skip_reason.empty()) ok.push_back(i);
  if (ok.empty()) return out;

  // Pool X and Y outputs: positions [0, m) hold X, [m, 2m) hold Y.
  const std::size_t m = ok.size();
  std::vector<double> pooled_a(2 * m), pooled_b(2 * m);
  for (std::size_t j = 0; j < m; ++j) {
    pooled_a[j] = a[ok[j]].x;
    pooled_a[m + j] = a[ok[j]].y;
    pooled_b[j] = b[ok[j]].x;
    pooled_b[m + j] = b[ok[j]].y;
  }
  const std::vector<double> za = zscore(pooled_a);
  const std::vector<double> zb = zscore(pooled_b);
  const std::string name = spec.name();
  for (std::size_t j = 0; j < m; ++j) {
    out[ok[j]].verdict = verdict_from_scores(0.5 * (za[j] + zb[j]),
                                             0.5 * (za[m + j] + zb[m + j]), name);
  }
  return out;
}

double agreement_rate(const AgreementCounts& c, TiePolicy policy) {
  switch (policy) {
    case TiePolicy::kExclude: {
      const std::size_t denom = c.n_total - c.n_metric_ties;
      return denom == 0 ? 0.0 : static_cast<double>(c.n_agree) / static_cast<double>(denom);
    }
    case TiePolicy::kHalfCredit:
      return c.n_total == 0 ? 0.0
                            : (static_cast<double>(c.n_agree) + 0.5 * static_cast<double>(c.n_metric_ties)) /
                                  static_cast<double>(c.n_total);
    case TiePolicy::kCountAsDisagree:
      return c.n_total == 0 ? 0.0 : static_cast<double>(c.n_agree) / static_cast<double>(c.n_total);
  }
  return 0.0;
}

AgreementReport judge_dataset(std::span<const PreferenceRecord> records, const JudgeSpec& spec,
                              TiePolicy tie_policy, int workers) {
  AgreementReport report;
  report.judge_name = spec.name();
  report.tie_policy = tie_policy;

  std::vector<PreferenceRecord> judged;
  judged.reserve(records.size());
  for (const auto& r : records) {
    if (r.human_label == HumanLabel::kTie) {
      ++report.human_ties_skipped;
      continue;
    }
    if (r.output_x == r.output_y)
      report.warnings.push_back("record " + r.id + ": identical outputs with a non-tie human label");
    judged.push_back(r);
  }
  if (report.human_ties_skipped > 0)
    report.warnings.push_back("skipped " + std::to_string(report.human_ties_skipped) +
                              " record(s) with a human tie label");

  const std::vector<RecordVerdict> verdicts = judge_records(judged, spec, workers);
  for (std::size_t i = 0; i < judged.size(); ++i) {
    const RecordVerdict& rv = verdicts[i];
    if (!rv.verdict) {
      report.skipped.push_back({rv.id, rv.skip_reason});
      continue;
    }
    count_verdict(report.overall, rv.verdict->winner, judged[i].human_label);
    if (judged[i].domain)
      count_verdict(report.per_domain[to_string(*judged[i].domain)], rv.verdict->winner,
                    judged[i].human_label);
  }

  finalize(report.overall, tie_policy);
  for (auto& [domain, counts] : report.per_domain) finalize(counts, tie_policy);
  if (!report.overall.agreement_rate)
    fail(ErrorCode::kInvalidArgument,
         "no records left to judge (" + std::to_string(report.skipped.size()) + " skipped, " +
             std::to_string(report.human_ties_skipped) + " human ties, " +
             std::to_string(report.overall.n_metric_ties) + " metric ties)");
  return report;
}

std::vector<SweepRow> multi_reference_sweep(std::span<const PreferenceRecord> records,
                                            std::span<const std::string> reference_order,
                                            const JudgeSpec& base, TiePolicy tie_policy,
                                            int workers) {
  if (reference_order.empty())
    fail(ErrorCode::kInvalidArgument, "reference order must name at least one model");
  for (const auto& r : records) {
    if (r.human_label == HumanLabel::kTie) continue;
    for (const auto& tag : reference_order)
      if (r.find_reference(tag) == nullptr)
        fail(ErrorCode::kNotFound,
             "record " + r.id + " is missing the reference from model '" + tag + "'");
  }
  std::vector<SweepRow> rows;
  for (std::size_t k = 1; k <= reference_order.size(); ++k) {
    JudgeSpec spec = base;
    spec.reference_tags.assign(reference_order.begin(),
                               reference_order.begin() + static_cast<std::ptrdiff_t>(k));
    for (auto& part : spec.parts) part.reference_tags = spec.reference_tags;
    SweepRow row;
    row.k = k;
    row.reference_tags = spec.reference_tags;
    row.report = judge_dataset(records, spec, tie_policy, workers);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<LengthGroup> length_groups(std::span<const PreferenceRecord> records,
                                       std::span<const std::string> tags, const JudgeSpec& base,
                                       TiePolicy tie_policy, int workers) {
  std::vector<LengthGroup> groups;
  for (const auto& tag : tags) {
    double diff_sum = 0.0;
    std::size_t n = 0;
    for (const auto& r : records) {
      if (r.human_label == HumanLabel::kTie) continue;
      const TaggedText* ref = r.find_reference(tag);
      if (ref == nullptr)
        fail(ErrorCode::kNotFound,
             "record " + r.id + " is missing the reference from model '" + tag + "'");
      const std::size_t lr = count_tokens_13a(ref->text);
      diff_sum += 0.5 * static_cast<double>(abs_diff(lr, count_tokens_13a(r.output_x)) +
                                            abs_diff(lr, count_tokens_13a(r.output_y)));
      ++n;
    }
    JudgeSpec spec = base;
    spec.reference_tags = {tag};
    const AgreementReport report = judge_dataset(records, spec, tie_policy, workers);
    groups.push_back({tag, n == 0 ? 0.0 : diff_sum / static_cast<double>(n), report.agreement_rate()});
  }
  return groups;
}

double length_correlation(std::span<const LengthGroup> groups) {
  if (groups.size() < 2)
    fail(ErrorCode::kInvalidArgument, "length correlation needs at least 2 reference groups");
  std::vector<double> diff, rate;
  for (const auto& g : groups) {
    diff.push_back(g.mean_abs_length_diff);
    rate.push_back(g.agreement_rate);
  }
  return pearson(diff, rate);
}

AnnotatorLabel parse_annotator_label(std::string_view text) {
  if (text == "B" || text == "B_wins" || text == "b") return AnnotatorLabel::kBWins;
  if (text == "R" || text == "R_wins" || text == "r") return AnnotatorLabel::kRWins;
  if (text == "tie") return AnnotatorLabel::kTie;
  fail(ErrorCode::kParse, "unknown annotator label '" + std::string(text) + "'");
}

AnnotatorStats annotator_stats(std::span<const AnnotatorLabel> labels_a,
                               std::span<const AnnotatorLabel> labels_b) {
  if (labels_a.size() != labels_b.size())
    fail(ErrorCode::kInvalidArgument, "annotator label lists differ in length");
  if (labels_a.empty()) fail(ErrorCode::kInvalidArgument, "annotator label lists are empty");

  AnnotatorStats stats;
  auto soft = [](std::span<const AnnotatorLabel> labels) {
    std::size_t at_least_as_good = 0;
    for (auto l : labels)
      if (l != AnnotatorLabel::kRWins) ++at_least_as_good;
    return static_cast<double>(at_least_as_good) / static_cast<double>(labels.size());
  };
  stats.soft_pref_a = soft(labels_a);
  stats.soft_pref_b = soft(labels_b);

  std::size_t agree = 0, a_b = 0, b_b = 0;
  for (std::size_t i = 0; i < labels_a.size(); ++i) {
    if (labels_a[i] == AnnotatorLabel::kTie || labels_b[i] == AnnotatorLabel::kTie) continue;
    ++stats.n_both_clear;
    if (labels_a[i] == labels_b[i]) ++agree;
    if (labels_a[i] == AnnotatorLabel::kBWins) ++a_b;
    if (labels_b[i] == AnnotatorLabel::kBWins) ++b_b;
  }
  if (stats.n_both_clear == 0) return stats;
  const double n = static_cast<double>(stats.n_both_clear);
  const double observed = static_cast<double>(agree) / n;
  const double pa = static_cast<double>(a_b) / n, pb = static_cast<double>(b_b) / n;
  const double chance = pa * pb + (1.0 - pa) * (1.0 - pb);
  if (chance >= 1.0) return stats;
  stats.kappa = (observed - chance) / (1.0 - chance);
  return stats;
}

Json to_json(const AgreementCounts& c) {
  Json j = Json::object();
  j["n_total"] = c.n_total;
  j["n_agree"] = c.n_agree;
  j["n_metric_ties"] = c.n_metric_ties;
  j["agreement_rate"] = c.agreement_rate ? Json(*c.agreement_rate) : Json(nullptr);
  return j;
}

Json to_json(const AgreementReport& report) {
  Json j = Json::object();
  j["judge"] = report.judge_name;
  j["tie_policy"] = to_string(report.tie_policy);
  const Json overall = to_json(report.overall);
  for (const auto& [k, v] : overall.items()) j[k] = v;
  Json domains = Json::object();
  for (const auto& [domain, counts] : report.per_domain) domains[domain] = to_json(counts);
  j["per_domain"] = std::move(domains);
  Json skipped = Json::array();
  for (const auto& s : report.skipped) skipped.push_back({{"id", s.id}, {"reason", s.reason}});
  j["skipped"] = std::move(skipped);
  j["human_ties_skipped"] = report.human_ties_skipped;
  j["warnings"] = report.warnings;
  return j;
}

std::string sweep_to_csv(std::span<const SweepRow> rows) {
  std::ostringstream out;
  out << "k,references,n_total,n_agree,n_metric_ties,agreement_rate\n";
  for (const auto& row : rows) {
    std::string tags;
    for (std::size_t i = 0; i < row.reference_tags.size(); ++i) {
      if (i) tags += '|';
      tags += row.reference_tags[i];
    }
    char rate[32];
    std::snprintf(rate, sizeof(rate), "%.6f", row.report.agreement_rate());
    out << row.k << ',' << tags << ',' << row.report.overall.n_total << ','
        << row.report.overall.n_agree << ',' << row.report.overall.n_metric_ties << ',' << rate
        << '\n';
  }
  return out.str();
}

}  // namespace lexreward
