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

#include "doctest.h"
#include "lexreward/error.hpp"
#include "lexreward/records.hpp"

using namespace lexreward;

TEST_CASE("preference records") {
  const auto r = parse_preference(Json::parse(R"({
    "id": "p1", "prompt": "q", "output_x": "a", "output_y": "b", "human_label": "model_a",
    "domain": "math", "external_scores": {"rm": [0.2, 0.7], "rm2": {"x": 1, "y": 0}},
    "references": ["r0", "r1"], "extra": 5})"));
  CHECK(r.id == "p1");
  CHECK(r.human_label == HumanLabel::kX);
  CHECK(r.domain == Domain::kMathReasoning);
  CHECK(r.external_scores.at("rm").y == 0.7);
  CHECK(r.external_scores.at("rm2").x == 1.0);
  REQUIRE(r.references.size() == 2);
  CHECK(r.references[1] == TaggedText{"1", "r1"});
  CHECK(r.raw["extra"] == 5);

  const auto tagged = parse_preference(Json::parse(
      R"({"id": "p2", "output_x": "a", "output_y": "b", "human_label": "tie", "references": {"gpt": "g", "claude": "c"}})"));
  CHECK(tagged.human_label == HumanLabel::kTie);
  REQUIRE(tagged.find_reference("claude") != nullptr);
  CHECK(tagged.find_reference("claude")->text == "c");
  CHECK(tagged.find_reference("gemini") == nullptr);

  CHECK_THROWS_AS(parse_preference(Json::parse(R"({"id": "p", "output_x": "a", "human_label": "X"})")), Error);
  CHECK_THROWS_AS(parse_preference(Json::parse(R"({"id": "p", "output_x": "a", "output_y": "b", "human_label": "maybe"})")), Error);
  CHECK_THROWS_AS(parse_preference(Json::parse(R"({"id": "p", "output_x": "a", "output_y": "b", "human_label": "X", "domain": "Sports"})")), Error);
}

TEST_CASE("jsonl parsing reports line numbers and duplicate ids") {
  try {
    parse_jsonl("{\"a\": 1}\n\n{broken\n");
    FAIL("expected a parse error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kParse);
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
  CHECK(parse_jsonl("{\"a\": 1}\n\n  \n{\"b\": 2}").size() == 2);
  const std::string dup =
      R"({"id": "a", "output_x": "1", "output_y": "2", "human_label": "X"})"
      "\n"
      R"({"id": "a", "output_x": "1", "output_y": "2", "human_label": "Y"})";
  CHECK_THROWS_AS(parse_preferences(dup), Error);
}

TEST_CASE("corpus records round-trip unknown fields") {
  const std::string line =
      R"({"id":"c1","prompt":"p","references":{"tulu":"t","gpt":"g"},"base_output":"b","scores":{"rm":0.5},"source":"flan","language":"en","meta":{"k":[1,2]}})";
  auto records = parse_corpus(line);
  REQUIRE(records.size() == 1);
  CHECK(records[0].score("rm") == 0.5);
  CHECK_FALSE(records[0].score("bleu").has_value());
  records[0].set_score("bleu", 0.25);
  const Json out = Json::parse(corpus_to_jsonl(records));
  CHECK(out["meta"] == Json::parse(R"({"k":[1,2]})"));
  CHECK(out["references"] == Json::parse(R"({"tulu":"t","gpt":"g"})"));
  CHECK(out["scores"]["bleu"] == 0.25);
  CHECK(out["scores"]["rm"] == 0.5);
  CHECK(out["language"] == "en");

  const auto list_form = parse_corpus(R"({"id":"c2","references":["x","y"]})");
  CHECK(Json::parse(corpus_to_jsonl(list_form))["references"] == Json::parse(R"(["x","y"])"));
  CHECK(parse_corpus(corpus_to_jsonl(records))[0].references == records[0].references);
}

TEST_CASE("labels and domains print canonically") {
  CHECK(std::string(to_string(parse_human_label("B"))) == "Y");
  CHECK(std::string(to_string(parse_domain("multilinguality"))) == "Multilingual");
  for (Domain d : {Domain::kQA, Domain::kCode, Domain::kWriting, Domain::kMathReasoning,
                   Domain::kMultilingual, Domain::kPlanning})
    CHECK(parse_domain(to_string(d)) == d);
}

TEST_CASE("read_file reports io errors") {
  try {
    read_file("/nonexistent/definitely/missing.jsonl");
    FAIL("expected an io error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kIo);
  }
}
