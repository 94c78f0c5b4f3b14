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
#include <string>
#include <string_view>
#include <vector>

namespace lexreward {

/// Token list produced by one of the tokenizers below. Tokens are never
/// empty and never contain whitespace.
struct TokenSequence {
  std::vector<std::string> tokens;
  std::size_t source_length_chars = 0;  // code points in the raw input

  std::size_t size() const noexcept { return tokens.size(); }
  bool empty() const noexcept { return tokens.empty(); }
  const std::string& operator[](std::size_t i) const { return tokens[i]; }

  friend bool operator==(const TokenSequence&, const TokenSequence&) = default;
};

/// mteval-v13a tokenization, byte-compatible with sacrebleu's "13a":
/// strips "<skipped>", joins "-\n" splits, maps newlines to spaces, decodes
/// &quot; &amp; &lt; &gt;, pads ASCII punctuation, then splits on whitespace.
/// Case is preserved. Non-ASCII code points are never split off.
TokenSequence tokenize_13a(std::string_view text);

/// Lowercased whitespace split used by the repetition statistic.
TokenSequence whitespace_tokenize(std::string_view text);

/// Token count under tokenize_13a without materializing the tokens.
std::size_t count_tokens_13a(std::string_view text);

/// Number of UTF-8 code points (invalid bytes count as one each).
std::size_t utf8_length(std::string_view text) noexcept;

std::string join_tokens(const TokenSequence& seq, char sep = ' ');

}  // namespace lexreward
