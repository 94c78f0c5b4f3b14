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

#include <algorithm>
#include <random>
#include <set>

#include "doctest.h"
#include "fixtures/synthetic.hpp"
#include "lexreward/batch.hpp"
#include "lexreward/dataset.hpp"
#include "lexreward/error.hpp"
#include "lexreward/tokenize.hpp"
#include "oracle/bleu_oracle.hpp"

using namespace lexreward;

namespace {

std::string words(std::size_t n, const std::string& w = "w") {
  std::string out;
  for (std::size_t i = 0; i < n; ++i) out += (i ? " " : "") + w + std::to_string(i);
  return out;
}

CorpusRecord corpus(std::string id, std::string prompt, std::vector<TaggedText> refs,
                    std::optional<std::string> base = std::nullopt) {
  CorpusRecord r;
  r.id = std::move(id);
  r.prompt = std::move(prompt);
  r.references = std::move(refs);
  r.base_output = std::move(base);
  return r;
}

std::vector<std::string> ids(const std::vector<CorpusRecord>& rs) {
  std::vector<std::string> out;
  for (const auto& r : rs) out.push_back(r.id);
  return out;
}

}  // namespace

TEST_CASE("filter_pool examples") {
  const std::vector<CorpusRecord> rs = {
      corpus("short", words(3), {{"ref", words(100)}}),
      corpus("ok", words(100), {{"ref", words(100)}}),
      corpus("long", words(100), {{"ref", words(100)}, {"big", words(600)}}),
  };
  const FilterResult f = filter_pool(rs);
  CHECK(ids(f.kept) == std::vector<std::string>{"ok"});
  REQUIRE(f.dropped.size() == 2);
  CHECK(f.dropped[0].record.id == "short");
  CHECK(f.dropped[0].reason == "min_tokens");
  CHECK(f.dropped[0].field == "prompt");
  CHECK(f.dropped[1].reason == "max_tokens");
  CHECK(f.dropped[1].field == "references.big");
}

TEST_CASE("filter_pool languages and source quotas") {
  std::vector<CorpusRecord> rs;
  for (int i = 0; i < 6; ++i) {
    auto r = corpus("r" + std::to_string(i), words(20), {{"ref", words(20)}});
    r.language = i % 3 == 0 ? "de" : "en";
    r.source = i % 2 ? "flan" : "oasst";
    rs.push_back(r);
  }
  FilterOptions opts;
  opts.language_allowlist = std::set<std::string>{"en"};
  opts.source_quota = {{"flan", 1}};
  const FilterResult f = filter_pool(rs, opts);
  // r0,r3 are de; r1 is the first flan; r5 exceeds the flan quota.
  CHECK(ids(f.kept) == std::vector<std::string>{"r1", "r2", "r4"});
  std::set<std::string> reasons;
  for (const auto& d : f.dropped) reasons.insert(d.reason);
  CHECK(reasons == std::set<std::string>{"language", "source_quota"});
}

TEST_CASE("filter_pool partitions its input") {
  std::mt19937_64 rng(31);
  std::vector<CorpusRecord> rs;
  for (int i = 0; i < 300; ++i) {
    auto r = corpus("r" + std::to_string(i), words(rng() % 30), {{"ref", words(rng() % 40)}});
    if (rng() % 4 == 0) r.language = rng() % 2 ? "en" : "fr";
    rs.push_back(r);
  }
  FilterOptions opts;
  opts.min_tokens = 5;
  opts.max_tokens = 30;
  opts.language_allowlist = std::set<std::string>{"en"};
  const FilterResult f = filter_pool(rs, opts);
  CHECK(f.kept.size() + f.dropped.size() == rs.size());
  std::multiset<std::string> seen;
  for (const auto& r : f.kept) seen.insert(r.id);
  for (const auto& d : f.dropped) seen.insert(d.record.id);
  std::multiset<std::string> all;
  for (const auto& r : rs) all.insert(r.id);
  CHECK(seen == all);
  for (const auto& r : f.kept) {
    const std::size_t n = count_tokens_13a(r.prompt);
    CHECK(n >= 5);
    CHECK(n <= 30);
  }
}

TEST_CASE("score_pool") {
  const std::vector<CorpusRecord> rs = {
      corpus("same", "p", {{"ref", "the cat sat on the mat"}}, "the cat sat on the mat"),
      corpus("disjoint", "p", {{"ref", "a b c d e"}}, "v w x y z q"),
      corpus("empty", "p", {{"ref", "a b"}}, ""),
      corpus("nobase", "p", {{"ref", "a b"}}),
      corpus("notag", "p", {{"other", "a b"}}, "a b"),
  };
  const std::vector<std::string> tags = {"ref"};
  const ScorePoolResult r = score_pool(rs, tags, ScoreConfig{}, 2);
  REQUIRE(r.records.size() == 5);
  CHECK(ids(r.records) == ids(rs));
  CHECK(*r.records[0].score("bleu") == doctest::Approx(1.0).epsilon(1e-12));
  const auto want = oracle::bleu({"v", "w", "x", "y", "z", "q"}, {{"a", "b", "c", "d", "e"}}, 4, true);
  CHECK(*r.records[1].score("bleu") == doctest::Approx(want.score).epsilon(1e-12));
  CHECK(*r.records[2].score("bleu") == 0.0);
  CHECK_FALSE(r.records[3].score("bleu"));
  REQUIRE(r.failures.size() == 2);
  CHECK(r.failures[0].id == "nobase");
  CHECK(r.failures[1].id == "notag");

  const ScorePoolResult again = score_pool(r.records, tags, ScoreConfig{}, 3);
  for (std::size_t i = 0; i < 3; ++i) CHECK(*again.records[i].score("bleu") == *r.records[i].score("bleu"));

  const ScorePoolResult all_tags = score_pool(rs, std::vector<std::string>{}, ScoreConfig{}, 1);
  CHECK(*all_tags.records[4].score("bleu") == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("select_hardest examples") {
  const auto rs = parse_corpus(fixtures::scored_corpus());
  SelectionReport r = select_hardest(rs, 2);
  CHECK(r.selected_ids == std::vector<std::string>{"b", "d"});
  CHECK(r.threshold_score == 0.1);
  CHECK(r.pool_size == 5);

  r = select_hardest(rs, 5);
  CHECK(r.selected_ids == std::vector<std::string>{"b", "d", "c", "e", "a"});
  CHECK(r.warnings.empty());

  r = select_hardest(rs, 9);
  CHECK(r.selected_ids.size() == 5);
  CHECK(r.warnings.size() == 1);

  CHECK(select_hardest(rs, 2, "bleu", SelectionMode::kEasy).selected_ids == std::vector<std::string>{"a", "e"});
  CHECK(select_hardest(rs, 1, "bleu", SelectionMode::kMedium).selected_ids == std::vector<std::string>{"c"});

  const auto a = select_hardest(rs, 3, "bleu", SelectionMode::kRandom, 77);
  const auto b = select_hardest(rs, 3, "bleu", SelectionMode::kRandom, 77);
  CHECK(a.selected_ids == b.selected_ids);
  CHECK(std::set<std::string>(a.selected_ids.begin(), a.selected_ids.end()).size() == 3);

  CHECK_THROWS_AS(select_hardest(rs, 0), Error);
  CHECK_THROWS_AS(select_hardest(rs, 2, "rm"), Error);
}

TEST_CASE("selection properties") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<CorpusRecord> rs;
    const std::size_t n = 1 + rng() % 40;
    for (std::size_t i = 0; i < n; ++i) {
      auto r = corpus("id" + std::to_string(rng() % 1000) + "_" + std::to_string(i), "p", {{"ref", "x"}});
      r.set_score("bleu", static_cast<double>(rng() % 5) / 4.0);
      rs.push_back(r);
    }
    const std::size_t k = 1 + rng() % n;
    for (SelectionMode mode : {SelectionMode::kHardest, SelectionMode::kEasy}) {
      const auto rep = select_hardest(rs, k, "bleu", mode);
      CHECK(rep.selected_ids.size() == k);
      std::set<std::string> chosen(rep.selected_ids.begin(), rep.selected_ids.end());
      double lo = 2, hi = -1;
      for (const auto& r : rs) {
        const double s = *r.score("bleu");
        if (chosen.count(r.id)) {
          lo = std::min(lo, s);
          hi = std::max(hi, s);
        }
      }
      for (const auto& r : rs) {
        if (chosen.count(r.id)) continue;
        if (mode == SelectionMode::kHardest) CHECK(hi <= *r.score("bleu"));
        else CHECK(lo >= *r.score("bleu"));
      }
      auto shuffled = rs;
      std::shuffle(shuffled.begin(), shuffled.end(), rng);
      CHECK(select_hardest(shuffled, k, "bleu", mode).selected_ids == rep.selected_ids);
    }
  }
}

TEST_CASE("seeded permutation is a permutation") {
  const auto p = seeded_permutation(50, 3);
  std::vector<std::size_t> sorted = p;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < 50; ++i) CHECK(sorted[i] == i);
  CHECK(seeded_permutation(50, 3) == p);
  CHECK(seeded_permutation(50, 4) != p);
}

TEST_CASE("build_reference_sets") {
  const std::vector<std::string> five = {"tulu", "gpt", "claude", "deepseek", "gemini"};
  std::vector<TaggedText> all;
  for (auto it = five.rbegin(); it != five.rend(); ++it) all.push_back({*it, *it + " text"});
  const std::vector<CorpusRecord> rs = {
      corpus("full", "p", all),
      corpus("partial", "p", {{"tulu", "t"}, {"gpt", "g"}}),
  };
  auto view = build_reference_sets(rs, {"one", {"tulu"}});
  REQUIRE(view.records.size() == 2);
  CHECK(view.records[0].references == std::vector<TaggedText>{{"tulu", "tulu text"}});

  view = build_reference_sets(rs, {"five", five});
  REQUIRE(view.records.size() == 1);
  std::vector<std::string> order;
  for (const auto& t : view.records[0].references) order.push_back(t.tag);
  CHECK(order == five);
  REQUIRE(view.missing.size() == 1);
  CHECK(view.missing[0].id == "partial");
  CHECK(view.missing[0].tags == std::vector<std::string>{"claude", "deepseek", "gemini"});

  try {
    build_reference_sets(rs, {"bad", {"tulu", "llama"}});
    FAIL("expected not_found");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kNotFound);
  }
}

TEST_CASE("batch select emits the report and the subset") {
  const auto out = batch::select(fixtures::scored_corpus(), Json{{"k", 2}});
  const Json report = Json::parse(out.text);
  CHECK(report["selected_ids"] == Json::parse(R"(["b","d"])"));
  const auto subset = parse_corpus(out.side);
  CHECK(ids(subset) == std::vector<std::string>{"b", "d"});
  CHECK(subset[0].prompt == "prompt b");
  CHECK_THROWS_AS(batch::select(fixtures::scored_corpus(), Json{{"k", 0}}), Error);
}

TEST_CASE("batch filter splits kept and dropped") {
  const std::string in = Json{{"id", "a"}, {"prompt", words(12)}, {"references", {{"r", words(12)}}}}.dump() +
                         "\n" + Json{{"id", "b"}, {"prompt", "hi"}, {"references", {{"r", words(12)}}}}.dump() + "\n";
  const auto out = batch::filter(in, Json::object());
  CHECK(ids(parse_corpus(out.text)) == std::vector<std::string>{"a"});
  const auto dropped = parse_jsonl(out.side);
  REQUIRE(dropped.size() == 1);
  CHECK(dropped[0]["reason"] == "min_tokens");
}
