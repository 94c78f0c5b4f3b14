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

#include "lexreward/combine.hpp"

#include <algorithm>
#include <cmath>

#include "lexreward/error.hpp"

namespace lexreward {

ScoreVector::ScoreVector(std::vector<std::string> ids, std::vector<double> values)
    : ids_(std::move(ids)), values_(std::move(values)) {
  if (ids_.size() != values_.size())
    fail(ErrorCode::kInvalidArgument, "ids and values differ in length");
  index_.reserve(ids_.size());
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    if (!index_.emplace(ids_[i], i).second)
      fail(ErrorCode::kInvalidArgument, "duplicate id: " + ids_[i]);
  }
}

ScoreVector ScoreVector::positional(std::vector<double> values) {
  std::vector<std::string> ids;
  ids.reserve(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) ids.push_back(std::to_string(i));
  return ScoreVector(std::move(ids), std::move(values));
}

double ScoreVector::at(const std::string& id) const {
  const auto it = index_.find(id);
  if (it == index_.end()) fail(ErrorCode::kNotFound, "unknown id: " + id);
  return values_[it->second];
}

MeanStd mean_std(std::span<const double> values) {
  MeanStd out;
  if (values.empty()) return out;
  if (std::all_of(values.begin(), values.end(), [&](double v) { return v == values.front(); })) {
    out.mean = values.front();
    return out;
  }
  const double n = static_cast<double>(values.size());
  double sum = 0.0;
  for (double v : values) sum += v;
  out.mean = sum / n;
  double sq = 0.0;
  for (double v : values) sq += (v - out.mean) * (v - out.mean);
  out.stddev = std::sqrt(sq / n);
  return out;
}

std::vector<double> zscore(std::span<const double> values) {
  if (values.size() < 2) fail(ErrorCode::kInvalidArgument, "z-score needs at least 2 values");
  std::vector<double> out(values.size(), 0.0);
  const MeanStd ms = mean_std(values);
  if (ms.stddev == 0.0) return out;
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = (values[i] - ms.mean) / ms.stddev;
  return out;
}

ScoreVector zscore(const ScoreVector& values) {
  return ScoreVector(values.ids(), zscore(values.values()));
}

ScoreVector combine_mean(const ScoreVector& a, const ScoreVector& b) {
  std::vector<std::string> only_a, only_b;
  for (const auto& id : a.ids())
    if (!b.contains(id)) only_a.push_back(id);
  for (const auto& id : b.ids())
    if (!a.contains(id)) only_b.push_back(id);
  if (!only_a.empty() || !only_b.empty()) {
    std::string msg = "score vectors are not aligned;";
    auto list = [&](const char* label, const std::vector<std::string>& ids) {
      if (ids.empty()) return;
      msg += std::string(" ") + label + ":";
      for (const auto& id : ids) msg += " " + id;
    };
    list("only in first", only_a);
    list("only in second", only_b);
    fail(ErrorCode::kAlignment, msg);
  }
  const ScoreVector za = zscore(a);
  const ScoreVector zb = zscore(b);
  std::vector<double> combined(a.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    combined[i] = 0.5 * (za.values()[i] + zb.at(a.ids()[i]));
  return ScoreVector(a.ids(), std::move(combined));
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) fail(ErrorCode::kInvalidArgument, "pearson inputs differ in length");
  if (x.size() < 2) fail(ErrorCode::kInvalidArgument, "pearson needs at least 2 points");
  const MeanStd mx = mean_std(x), my = mean_std(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx.mean, dy = y[i] - my.mean;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0)
    fail(ErrorCode::kUndefined, "correlation is undefined for a constant input");
  const double r = sxy / std::sqrt(sxx * syy);
  return std::clamp(r, -1.0, 1.0);
}

}  // namespace lexreward
