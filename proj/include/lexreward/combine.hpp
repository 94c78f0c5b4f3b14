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
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace lexreward {

/// Scores aligned to record ids. Ids are unique.
class ScoreVector {
 public:
  ScoreVector() = default;
  ScoreVector(std::vector<std::string> ids, std::vector<double> values);

  /// Ids "0", "1", ... for positional data.
  static ScoreVector positional(std::vector<double> values);

  const std::vector<std::string>& ids() const noexcept { return ids_; }
  const std::vector<double>& values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  bool contains(const std::string& id) const { return index_.count(id) != 0; }
  double at(const std::string& id) const;

 private:
  std::vector<std::string> ids_;
  std::vector<double> values_;
  std::unordered_map<std::string, std::size_t> index_;
};

struct MeanStd {
  double mean = 0.0;
  double stddev = 0.0;  // population; exactly 0 for constant input
};

MeanStd mean_std(std::span<const double> values);

/// (v - mean) / std with population std; all zeros when std is 0.
/// Throws kInvalidArgument for fewer than 2 values.
std::vector<double> zscore(std::span<const double> values);
ScoreVector zscore(const ScoreVector& values);

/// Element-wise mean of the two z-scored vectors, in the order of `a`.
/// Throws kAlignment naming the ids present in only one of the inputs.
ScoreVector combine_mean(const ScoreVector& a, const ScoreVector& b);

/// Pearson product-moment correlation. Throws kInvalidArgument on length
/// mismatch or n < 2, kUndefined when either input is constant.
double pearson(std::span<const double> x, std::span<const double> y);

}  // namespace lexreward
