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

#include <cstdlib>

#include "doctest.h"
#include "lexreward/engine.hpp"
#include "lexreward/error.hpp"

using namespace lexreward;

TEST_CASE("defaults") {
  const EngineConfig c;
  CHECK(c.score.max_order == 4);
  CHECK(c.score.smoothing);
  CHECK(c.workers == 1);
  CHECK(c.group_size == 8);
  CHECK(c.epsilon == 1e-8);
  CHECK(c.refusal_phrases == std::vector<std::string>{"I'm sorry, but", "As an AI"});
  CHECK_NOTHROW(c.validate());
}

TEST_CASE("key = value files") {
  EngineConfig c;
  c.load_key_values(
      "# comment\n"
      "max_order = 2\n"
      "smoothing = off   # trailing comment\n"
      "\n"
      "ref_length_rule = shortest\n"
      "workers=4\n"
      "refusal_phrases = I cannot | As an AI\n");
  CHECK(c.score.max_order == 2);
  CHECK(c.score.weights == std::vector<double>{0.5, 0.5});
  CHECK_FALSE(c.score.smoothing);
  CHECK(c.score.ref_length_rule == RefLengthRule::kShortest);
  CHECK(c.workers == 4);
  CHECK(c.refusal_phrases == std::vector<std::string>{"I cannot", "As an AI"});
  CHECK_NOTHROW(c.validate());

  try {
    c.load_key_values("max_order = 4\ncolour = blue\n");
    FAIL("expected an unknown key error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kInvalidArgument);
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  CHECK_THROWS_AS(c.load_key_values("max_order\n"), Error);
  CHECK_THROWS_AS(c.set("port", "80x"), Error);
  CHECK_THROWS_AS(c.set("max_order", "2.5"), Error);
  CHECK_THROWS_AS(c.set("smoothing", "maybe"), Error);
}

TEST_CASE("explicit weights survive order changes") {
  EngineConfig c;
  c.set("weights", "0.7, 0.1, 0.1, 0.1");
  c.set("max_order", "4");
  CHECK(c.score.weights == std::vector<double>{0.7, 0.1, 0.1, 0.1});
  c.set("max_order", "3");
  CHECK_THROWS_AS(c.validate(), Error);
}

TEST_CASE("validation") {
  EngineConfig c;
  c.workers = 0;
  CHECK_THROWS_AS(c.validate(), Error);
  c = EngineConfig{};
  c.port = 70000;
  CHECK_THROWS_AS(c.validate(), Error);
  c = EngineConfig{};
  c.group_size = 1;
  CHECK_THROWS_AS(c.validate(), Error);
  c = EngineConfig{};
  c.epsilon = -1;
  CHECK_THROWS_AS(c.validate(), Error);
}

TEST_CASE("environment overrides") {
  ::setenv("LEXREWARD_WORKERS", "3", 1);
  ::setenv("LEXREWARD_BIND", "0.0.0.0", 1);
  EngineConfig c;
  c.load_key_values("workers = 2\n");
  c.apply_environment();
  CHECK(c.workers == 3);
  CHECK(c.bind == "0.0.0.0");
  ::unsetenv("LEXREWARD_WORKERS");
  ::unsetenv("LEXREWARD_BIND");
  ::setenv("LEXREWARD_PORT", "nope", 1);
  CHECK_THROWS_AS(EngineConfig{}.apply_environment(), Error);
  ::unsetenv("LEXREWARD_PORT");
}

TEST_CASE("json view") {
  EngineConfig c;
  c.set("openers", "Sure!|Of course");
  const Json j = c.to_json();
  CHECK(j["max_order"] == 4);
  CHECK(j["openers"] == Json::parse(R"(["Sure!", "Of course"])"));
  CHECK(j["ref_length_rule"] == "closest");
}

TEST_CASE("request overrides") {
  const ScoreConfig base;
  const ScoreConfig two = score_config_with_overrides(base, Json{{"max_order", 2}});
  CHECK(two.weights == std::vector<double>{0.5, 0.5});
  CHECK(score_config_with_overrides(base, Json{{"smoothing", false}}).smoothing == false);
  CHECK(score_config_with_overrides(base, Json{{"format_weight", 0.3}}).max_order == 4);
  CHECK(score_config_with_overrides(base, Json()).max_order == 4);
  CHECK_THROWS_AS(score_config_with_overrides(base, Json{{"smoothing", "no"}}), Error);
  CHECK_THROWS_AS(score_config_with_overrides(base, Json{{"max_ordr", 2}}), Error);
  CHECK_THROWS_AS(score_config_with_overrides(base, Json{{"weights", {1, 1}}}), Error);
  CHECK_THROWS_AS(score_config_with_overrides(base, Json::array()), Error);
}
