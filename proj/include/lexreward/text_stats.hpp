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

#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lexreward/records.hpp"

namespace lexreward {

struct TextStatsReport {
  std::size_t n_texts = 0;
  double avg_tokens = 0.0;       // 13a tokens
  double repetition_rate = 0.0;  // mean over texts
  double refusal_rate = 0.0;
  double markdown_rate = 0.0;
  std::vector<std::pair<std::string, double>> opener_frequencies;
};

/// Mean over n = 1..4 of (1 - distinct n-grams / total n-grams) on lowercased
/// whitespace tokens; orders with no n-grams contribute 0.
double repetition_rate(std::string_view text);

const std::vector<std::string>& default_refusal_phrases();
const std::vector<std::string>& default_openers();

/// Case-insensitive substring match after folding curly apostrophes/quotes
/// to ASCII.
bool is_refusal(std::string_view text,
                std::span<const std::string> phrases = default_refusal_phrases());

/// Headings, bold, italics, fenced or inline code, and list markers.
bool uses_markdown(std::string_view text);

/// Fraction of texts whose first non-whitespace characters are exactly the
/// phrase. Empty corpus gives 0 for every phrase.
std::vector<std::pair<std::string, double>> opener_frequency(
    std::span<const std::string> texts, std::span<const std::string> phrases = default_openers());

TextStatsReport stats_report(std::span<const std::string> texts,
                             std::span<const std::string> refusal_phrases = default_refusal_phrases(),
                             std::span<const std::string> openers = default_openers(),
                             int workers = 1);

Json to_json(const TextStatsReport& report);
std::string stats_csv_header(std::span<const std::string> openers = default_openers());
std::string stats_csv_row(const std::string& corpus_name, const TextStatsReport& report);

}  // namespace lexreward
