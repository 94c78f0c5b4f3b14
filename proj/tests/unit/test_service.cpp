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

#include <atomic>
#include <chrono>
#include <set>
#include <thread>

#include "doctest.h"
#include "httplib.h"
#include "lexreward/error.hpp"
#include "lexreward/service.hpp"

using namespace lexreward;

namespace {

// Service running on an ephemeral loopback port for the lifetime of the object.
class LiveService {
 public:
  explicit LiveService(EngineConfig config = {}) : service_(std::move(config)) {
    service_.bind("127.0.0.1", 0);
    thread_ = std::thread([this] { service_.run(); });
  }
  ~LiveService() {
    service_.stop();
    thread_.join();
  }
  int port() const { return service_.port(); }
  httplib::Client client() const {
    httplib::Client c("127.0.0.1", port());
    c.set_read_timeout(60, 0);
    return c;
  }

 private:
  ScoringService service_;
  std::thread thread_;
};

Json post(const LiveService& s, const std::string& path, const std::string& body, int want_status) {
  auto c = s.client();
  auto res = c.Post(path, body, "application/json");
  REQUIRE(res);
  CHECK(res->status == want_status);
  CHECK(res->get_header_value("Content-Type") == "application/json");
  return Json::parse(res->body);
}

Json items_request(std::size_t n, std::size_t tokens) {
  Json items = Json::array();
  for (std::size_t i = 0; i < n; ++i) {
    std::string ref, cand;
    for (std::size_t t = 0; t < tokens; ++t) {
      ref += "w" + std::to_string((i * 7 + t * 13) % 997) + " ";
      cand += "w" + std::to_string((i * 7 + t * 13 + (t % 10 == 0)) % 997) + " ";
    }
    items.push_back({{"id", "i" + std::to_string(i)}, {"candidate", cand}, {"references", {ref}}});
  }
  return Json{{"items", items}};
}

}  // namespace

TEST_CASE("handlers without sockets") {
  ScoringService svc{EngineConfig{}};
  auto r = svc.score(R"({"items": [{"id": "a", "candidate": "the cat sat", "references": ["the cat sat"]}]})");
  CHECK(r.status == 200);
  CHECK(r.body["scores"]["a"] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.body["reward_spec"] == "bleu");
  CHECK(svc.health().body["status"] == "ok");

  for (const char* bad : {"not json", "[]", R"({"items": 3})", R"({"items": [{"candidate": "x"}]})",
                          R"({"items": [{"id": "a", "candidate": "x"}, {"id": "a", "candidate": "y"}]})",
                          R"({"items": [], "reward_spec": "meteor"})",
                          R"({"items": [], "reward_spec": "format_answer"})",
                          R"({"items": [], "config": {"max_order": "four"}})"}) {
    INFO(bad);
    const auto res = svc.score(bad);
    CHECK(res.status == 400);
    CHECK(res.body["error"].contains("code"));
    CHECK(res.body["error"].contains("message"));
  }
}

TEST_CASE("score endpoint") {
  LiveService s;
  Json body = post(s, "/score", R"({"items": [{"id": "x", "candidate": "a b c d", "references": ["a b c d"]}]})", 200);
  CHECK(body["scores"] == Json{{"x", 1.0}});
  CHECK(body["errors"].empty());
  CHECK(body["timing"]["wall_ms"].is_number());

  body = post(s, "/score",
              R"({"items": [{"id": "ok", "candidate": "a b", "references": ["a b"]},
                            {"id": "norefs", "candidate": "a b"},
                            {"id": 7, "candidate": 12, "references": ["x"]}]})",
              200);
  CHECK(body["scores"].size() == 1);
  CHECK(body["errors"]["norefs"]["code"] == "invalid_item");
  CHECK(body["errors"]["7"]["message"].get<std::string>().find("candidate") != std::string::npos);

  body = post(s, "/score",
              R"({"reward_spec": "format_answer", "config": {"format_weight": 0.5, "max_order": 2},
                  "items": [{"id": "f", "candidate": "<think>t</think><answer>a b</answer>", "references": ["a b"]}]})",
              200);
  CHECK(body["scores"]["f"] == doctest::Approx(1.0).epsilon(1e-12));

  body = post(s, "/score", "{\"items\": []}", 200);
  CHECK(body["scores"].empty());
  post(s, "/score", "{broken", 400);

  auto c = s.client();
  auto res = c.Get("/nope");
  REQUIRE(res);
  CHECK(res->status == 404);
  CHECK(Json::parse(res->body)["error"]["code"] == "not_found");
  res = c.Get("/healthz");
  REQUIRE(res);
  CHECK(Json::parse(res->body) == Json{{"status", "ok"}});
}

TEST_CASE("score with prompt groups returns advantages") {
  LiveService s;
  const Json body = post(s, "/score", R"({"items": [
      {"id": "a1", "prompt_id": "p", "candidate": "a b c", "references": ["a b c"]},
      {"id": "a2", "prompt_id": "p", "candidate": "", "references": ["a b c"]},
      {"id": "b1", "prompt_id": "q", "candidate": "z", "references": ["a"]},
      {"id": "b2", "prompt_id": "q", "candidate": "z"}]})", 200);
  const auto adv = body["advantages"]["p"].get<std::vector<double>>();
  REQUIRE(adv.size() == 2);
  CHECK(adv[0] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(adv[1] == doctest::Approx(-1.0).epsilon(1e-6));
  CHECK(body["groups"]["q"] == Json::parse(R"(["b1", "b2"])"));
  CHECK(body["advantage_errors"].contains("q"));
}

TEST_CASE("advantage endpoint") {
  LiveService s;
  Json body = post(s, "/advantage", R"([{"prompt_id": "g", "rewards": [1, 1]}])", 200);
  CHECK(body["advantages"]["g"] == Json::parse("[0.0, 0.0]"));

  body = post(s, "/advantage",
              R"({"epsilon": 0, "groups": [{"prompt_id": "a", "rewards": [0, 2]}, {"prompt_id": "b", "rewards": [3]}]})",
              200);
  CHECK(body["advantages"]["a"] == Json::parse("[-1.0, 1.0]"));
  CHECK(body["errors"]["b"]["code"] == "invalid_item");

  post(s, "/advantage", R"([{"prompt_id": "a", "rewards": [1, 2]}, {"prompt_id": "a", "rewards": [1, 2]}])", 400);
  post(s, "/advantage", R"({"groups": [], "epsilon": -1})", 400);
  post(s, "/advantage", R"([{"rewards": [1, 2]}])", 400);
  post(s, "/advantage", R"(5)", 400);
}

TEST_CASE("large batch answers every id exactly once") {
  EngineConfig config;
  config.workers = 3;
  LiveService s(config);
  Json req = items_request(1000, 20);
  std::set<std::string> malformed;
  for (std::size_t i = 0; i < 1000; i += 37) {
    auto& item = req["items"][i];
    if (i % 2) item.erase("references");
    else item["candidate"] = nullptr;
    malformed.insert(item["id"].get<std::string>());
  }
  const Json body = post(s, "/score", req.dump(), 200);
  std::set<std::string> answered;
  for (const auto& [id, v] : body["scores"].items()) CHECK(answered.insert(id).second);
  for (const auto& [id, v] : body["errors"].items()) {
    CHECK(answered.insert(id).second);
    CHECK(malformed.count(id) == 1);
  }
  CHECK(answered.size() == 1000);
  CHECK(body["errors"].size() == malformed.size());
}

TEST_CASE("concurrent requests pair with their responses") {
  EngineConfig config;
  config.workers = 2;
  LiveService s(config);
  std::vector<std::thread> threads;
  std::atomic<int> mismatches{0};
  for (int t = 0; t < 8; ++t) {
    threads.emplace_back([&, t] {
      for (int r = 0; r < 10; ++r) {
        const std::string pid = "t" + std::to_string(t) + "_" + std::to_string(r);
        const Json req = Json::array({{{"prompt_id", pid}, {"rewards", {t, r, t + r}}}});
        auto c = s.client();
        auto res = c.Post("/advantage", req.dump(), "application/json");
        if (!res || !Json::parse(res->body)["advantages"].contains(pid)) ++mismatches;
      }
    });
  }
  for (auto& th : threads) th.join();
  CHECK(mismatches == 0);
}

TEST_CASE("binding an occupied port fails") {
  LiveService s;
  ScoringService other{EngineConfig{}};
  try {
    other.bind("127.0.0.1", s.port());
    FAIL("expected a bind error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kBind);
  }
  CHECK_THROWS_AS(ScoringService{EngineConfig{}}.run(), Error);
}

TEST_CASE("stop before run returns promptly") {
  ScoringService svc{EngineConfig{}};
  svc.bind("127.0.0.1", 0);
  svc.stop();
  svc.run();
}

TEST_CASE("throughput scales with workers") {
  const unsigned cores = std::thread::hardware_concurrency();
  if (cores < 4) {
    MESSAGE("skipped: needs >= 4 hardware threads, have " << cores);
    return;
  }
  const std::string req = items_request(256, 512).dump();
  auto timed = [&](int workers) {
    EngineConfig config;
    config.workers = workers;
    LiveService s(config);
    post(s, "/score", req, 200);  // warm-up
    double best = 1e300;
    for (int i = 0; i < 3; ++i) {
      const auto start = std::chrono::steady_clock::now();
      post(s, "/score", req, 200);
      best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
    }
    return best;
  };
  const double one = timed(1), four = timed(4);
  MESSAGE("1 worker " << one << " s, 4 workers " << four << " s");
  CHECK(one / four >= 1.5);
}
