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

#include "lexreward/text_stats.hpp"

#include <cctype>
#include <cstdio>
#include <unordered_map>
#include <unordered_set>

#include "lexreward/parallel.hpp"
#include "lexreward/tokenize.hpp"
#include "unicode.hpp"

namespace lexreward {

namespace {

bool is_ascii_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\f' || c == '\v'; }
bool is_word_char(char c) {
  const auto u = static_cast<unsigned char>(c);
  return std::isalnum(u) != 0 || u >= 0x80;
}

std::string fold_for_refusal(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size();) {
    const unicode::Decoded d = unicode::decode(text, i);
    char32_t cp = d.code_point;
    if (cp == 0x2018 || cp == 0x2019 || cp == 0x02BC || cp == 0x2032) cp = '\'';
    if (cp == 0x201C || cp == 0x201D) cp = '"';
    if (cp == 0xFFFD && d.length == 1) {
      out.push_back(text[i]);
    } else {
      unicode::encode(unicode::lower(cp), out);
    }
    i += d.length;
  }
  return out;
}

std::string_view strip_leading_space(std::string_view s) {
  std::size_t i = 0;
  while (i < s.size()) {
    const unicode::Decoded d = unicode::decode(s, i);
    if (!unicode::is_space(d.code_point)) break;
    i += d.length;
  }
  return s.substr(i);
}

// Leading indentation of up to three spaces, as in CommonMark.
std::string_view block_start(std::string_view line) {
  std::size_t i = 0;
  while (i < line.size() && i < 3 && line[i] == ' ') ++i;
  return line.substr(i);
}

bool is_heading(std::string_view line) {
  line = block_start(line);
  std::size_t hashes = 0;
  while (hashes < line.size() && line[hashes] == '#') ++hashes;
  if (hashes == 0 || hashes > 6) return false;
  return hashes == line.size() || is_ascii_space(line[hashes]);
}

bool is_fence(std::string_view line) {
  line = block_start(line);
  return line.starts_with("```") || line.starts_with("~~~");
}

bool is_list_item(std::string_view line) {
  std::size_t i = 0;
  while (i < line.size() && is_ascii_space(line[i])) ++i;
  line = line.substr(i);
  if (line.size() >= 2 && (line[0] == '-' || line[0] == '*' || line[0] == '+') &&
      is_ascii_space(line[1]))
    return true;
  std::size_t digits = 0;
  while (digits < line.size() && digits < 9 && line[digits] >= '0' && line[digits] <= '9') ++digits;
  return digits > 0 && digits + 1 < line.size() && (line[digits] == '.' || line[digits] == ')') &&
         is_ascii_space(line[digits + 1]);
}

// Paired delimiter run `delim` (e.g. "**", "*", "_", "`") on a single line with
// a non-space character just inside each delimiter.
bool has_paired(std::string_view line, std::string_view delim, bool word_boundary) {
  const char d = delim.front();
  std::size_t pos = 0;
  while (true) {
    const std::size_t open = line.find(delim, pos);
    if (open == std::string_view::npos) return false;
    pos = open + 1;
    const std::size_t inner = open + delim.size();
    // The run must be exactly `delim` long.
    if (open > 0 && line[open - 1] == d) continue;
    if (inner >= line.size() || line[inner] == d || is_ascii_space(line[inner])) continue;
    if (word_boundary && open > 0 && is_word_char(line[open - 1])) continue;
    std::size_t search = inner + 1;
    while (true) {
      const std::size_t close = line.find(delim, search);
      if (close == std::string_view::npos) break;
      const std::size_t after = close + delim.size();
      const bool exact = (after >= line.size() || line[after] != d) && line[close - 1] != d;
      const bool tight = !is_ascii_space(line[close - 1]);
      const bool boundary = !word_boundary || after >= line.size() || !is_word_char(line[after]);
      if (exact && tight && boundary) return true;
      search = close + 1;
    }
  }
}

bool has_inline_code(std::string_view line) {
  const std::size_t open = line.find('`');
  if (open == std::string_view::npos) return false;
  const std::size_t close = line.find('`', open + 1);
  return close != std::string_view::npos && close > open + 1;
}

}  // namespace

double repetition_rate(std::string_view text) {
  const TokenSequence words = whitespace_tokenize(text);
  std::unordered_map<std::string_view, std::uint32_t> vocab;
  std::vector<std::uint32_t> ids;
  ids.reserve(words.size());
  for (const auto& w : words.tokens)
    ids.push_back(vocab.try_emplace(w, static_cast<std::uint32_t>(vocab.size())).first->second);

  double sum = 0.0;
  for (std::size_t n = 1; n <= 4; ++n) {
    if (ids.size() < n) continue;
    const std::size_t total = ids.size() - n + 1;
    std::unordered_set<std::string> distinct;
    distinct.reserve(total);
    for (std::size_t i = 0; i < total; ++i) {
      std::string key(reinterpret_cast<const char*>(&ids[i]), n * sizeof(std::uint32_t));
      distinct.insert(std::move(key));
    }
    sum += 1.0 - static_cast<double>(distinct.size()) / static_cast<double>(total);
  }
  return sum / 4.0;
}

const std::vector<std::string>& default_refusal_phrases() {
  static const std::vector<std::string> phrases = {"I'm sorry, but", "As an AI"};
  return phrases;
}

const std::vector<std::string>& default_openers() {
  static const std::vector<std::string> openers = {"Certainly!", "Sure!", "To"};
  return openers;
}

bool is_refusal(std::string_view text, std::span<const std::string> phrases) {
  const std::string folded = fold_for_refusal(text);
  for (const auto& p : phrases) {
    const std::string needle = fold_for_refusal(p);
    if (!needle.empty() && folded.find(needle) != std::string::npos) return true;
  }
  return false;
}

bool uses_markdown(std::string_view text) {
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    while (!line.empty() && is_ascii_space(line.back())) line.remove_suffix(1);
    if (is_heading(line) || is_fence(line) || is_list_item(line)) return true;
    if (has_paired(line, "**", false) || has_paired(line, "__", true) ||
        has_paired(line, "*", false) || has_paired(line, "_", true) || has_inline_code(line))
      return true;
    if (end == text.size()) break;
    pos = end + 1;
  }
  return false;
}

std::vector<std::pair<std::string, double>> opener_frequency(std::span<const std::string> texts,
                                                             std::span<const std::string> phrases) {
  std::vector<std::pair<std::string, double>> out;
  for (const auto& phrase : phrases) {
    std::size_t hits = 0;
    for (const auto& t : texts)
      if (strip_leading_space(t).starts_with(phrase)) ++hits;
    out.emplace_back(phrase, texts.empty() ? 0.0
                                           : static_cast<double>(hits) / static_cast<double>(texts.size()));
  }
  return out;
}

TextStatsReport stats_report(std::span<const std::string> texts,
                             std::span<const std::string> refusal_phrases,
                             std::span<const std::string> openers, int workers) {
  struct PerText {
    std::size_t tokens = 0;
    double repetition = 0.0;
    bool refusal = false;
    bool markdown = false;
  };
  std::vector<PerText> per(texts.size());
  parallel_for(texts.size(), workers, [&](std::size_t i) {
    per[i].tokens = count_tokens_13a(texts[i]);
    per[i].repetition = repetition_rate(texts[i]);
    per[i].refusal = is_refusal(texts[i], refusal_phrases);
    per[i].markdown = uses_markdown(texts[i]);
  });

  TextStatsReport report;
  report.n_texts = texts.size();
  report.opener_frequencies = opener_frequency(texts, openers);
  if (texts.empty()) return report;
  double tokens = 0.0, repetition = 0.0, refusals = 0.0, markdown = 0.0;
  for (const auto& p : per) {
    tokens += static_cast<double>(p.tokens);
    repetition += p.repetition;
    refusals += p.refusal ? 1.0 : 0.0;
    markdown += p.markdown ? 1.0 : 0.0;
  }
  const double n = static_cast<double>(texts.size());
  report.avg_tokens = tokens / n;
  report.repetition_rate = repetition / n;
  report.refusal_rate = refusals / n;
  report.markdown_rate = markdown / n;
  return report;
}

Json to_json(const TextStatsReport& report) {
  Json j = Json::object();
  j["n_texts"] = report.n_texts;
  j["avg_tokens"] = report.avg_tokens;
  j["repetition_rate"] = report.repetition_rate;
  j["refusal_rate"] = report.refusal_rate;
  j["markdown_rate"] = report.markdown_rate;
  Json openers = Json::object();
  for (const auto& [phrase, freq] : report.opener_frequencies) openers[phrase] = freq;
  j["opener_frequencies"] = std::move(openers);
  return j;
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string fixed6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

}  // namespace

std::string stats_csv_header(std::span<const std::string> openers) {
  std::string out = "corpus,n_texts,avg_tokens,repetition_rate,refusal_rate,markdown_rate";
  for (const auto& o : openers) out += "," + csv_field("opener:" + o);
  return out + "\n";
}

std::string stats_csv_row(const std::string& corpus_name, const TextStatsReport& report) {
  std::string out = csv_field(corpus_name) + "," + std::to_string(report.n_texts) + "," +
                    fixed6(report.avg_tokens) + "," + fixed6(report.repetition_rate) + "," +
                    fixed6(report.refusal_rate) + "," + fixed6(report.markdown_rate);
  for (const auto& [phrase, freq] : report.opener_frequencies) out += "," + fixed6(freq);
  return out + "\n";
}

}  // namespace lexreward
