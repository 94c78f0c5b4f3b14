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

// JSON-over-HTTP batch scoring service.
//
//   POST /score      {"items": [{"id", "candidate", "references", "external_score"?,
//                     "prompt_id"?}], "reward_spec": "bleu", "config": {...}?}
//                 -> {"reward_spec", "scores": {id: x}, "errors": {id: {code, message}},
//                     "advantages"?: {prompt_id: [...]}, "groups"?: {prompt_id: [ids]},
//                     "timing": {"wall_ms"}}
//   POST /advantage  [RewardGroup...] or {"groups": [...], "epsilon"?}
//                 -> {"advantages": {prompt_id: [...]}, "errors": {...}, "timing"}
//   GET  /healthz    {"status": "ok"}
//
// Malformed requests get 400 with {"error": {"code", "message"}}; per-item
// problems are reported under "errors" and the batch still returns 200.

#include <memory>
#include <string>

#include "lexreward/engine.hpp"
#include "lexreward/reward.hpp"

namespace lexreward {

struct HttpResult {
  int status = 200;
  Json body;
};

class ScoringService {
 public:
  explicit ScoringService(EngineConfig config);
  ~ScoringService();
  ScoringService(const ScoringService&) = delete;
  ScoringService& operator=(const ScoringService&) = delete;

  HttpResult score(const std::string& body) const;
  HttpResult advantage(const std::string& body) const;
  HttpResult health() const;

  /// Binds the listening socket; port 0 picks an ephemeral port. Throws
  /// Error(kBind) when the address is unavailable.
  void bind(const std::string& host, int port);
  int port() const;
  /// Serves until stop(); requires bind(). stop() may come from any thread,
  /// before or during run().
  void run();
  void stop();

  const EngineConfig& config() const { return config_; }

 private:
  struct Server;
  EngineConfig config_;
  std::unique_ptr<Server> server_;
};

Json error_body(const std::string& code, const std::string& message);

}  // namespace lexreward
