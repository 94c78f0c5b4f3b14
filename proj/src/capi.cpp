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

#include "lexreward/lexreward.h"

#include <algorithm>
#include <cstdlib>
#include <cstring>
#include <memory>
#include <new>
#include <span>
#include <string>
#include <vector>

#include "lexreward/batch.hpp"
#include "lexreward/engine.hpp"
#include "lexreward/error.hpp"
#include "lexreward/metrics.hpp"
#include "lexreward/reward.hpp"
#include "lexreward/service.hpp"
#include "lexreward/tokenize.hpp"

struct lxr_engine {
  lexreward::EngineConfig config;
};

struct lxr_server {
  lexreward::ScoringService service;
  explicit lxr_server(lexreward::EngineConfig config) : service(std::move(config)) {}
};

namespace {

thread_local std::string last_error;

lxr_status record(lxr_status status, const char* message) {
  last_error = message;
  return status;
}

template <typename Fn>
lxr_status guarded(Fn&& fn) noexcept {
  try {
    last_error.clear();
    fn();
    return LXR_OK;
  } catch (const lexreward::Error& e) {
    return record(static_cast<lxr_status>(static_cast<int>(e.code())), e.what());
  } catch (const std::bad_alloc&) {
    return record(LXR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return record(LXR_INTERNAL, e.what());
  } catch (...) {
    return record(LXR_INTERNAL, "unknown error");
  }
}

void require(const void* p, const char* what) {
  if (p == nullptr) lexreward::fail(lexreward::ErrorCode::kInvalidArgument, std::string(what) + " is NULL");
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.data(), s.size());
  out[s.size()] = '\0';
  return out;
}

lexreward::Json parse_options(const char* options_json) {
  if (options_json == nullptr || *options_json == '\0') return lexreward::Json::object();
  lexreward::Json j;
  try {
    j = lexreward::Json::parse(options_json);
  } catch (const lexreward::Json::parse_error& e) {
    lexreward::fail(lexreward::ErrorCode::kParse, std::string("options: ") + e.what());
  }
  if (!j.is_object()) lexreward::fail(lexreward::ErrorCode::kInvalidArgument, "options must be a JSON object");
  return j;
}

std::vector<std::string> string_array(const char* const* items, std::size_t n, const char* what) {
  if (n > 0) require(items, what);
  std::vector<std::string> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    require(items[i], what);
    out.emplace_back(items[i]);
  }
  return out;
}

const lexreward::EngineConfig& config_of(const lxr_engine* engine) {
  require(engine, "engine");
  return engine->config;
}

void emit(const lexreward::batch::Output& result, char** out_text, char** out_side, size_t* n_failed) {
  char* text = dup_string(result.text);
  char* side = nullptr;
  if (out_side != nullptr) {
    try {
      side = dup_string(result.side);
    } catch (...) {
      std::free(text);
      throw;
    }
    *out_side = side;
  }
  *out_text = text;
  if (n_failed != nullptr) *n_failed = result.n_failed;
}

}  // namespace

extern "C" {

const char* lxr_version(void) { return "0.1.0"; }

const char* lxr_status_string(lxr_status status) {
  if (status == LXR_OK) return "ok";
  if (status < LXR_INVALID_ARGUMENT || status > LXR_INTERNAL) return "unknown";
  return lexreward::to_string(static_cast<lexreward::ErrorCode>(status));
}

const char* lxr_last_error(void) { return last_error.c_str(); }

void lxr_string_free(char* s) { std::free(s); }

lxr_status lxr_engine_create(const char* config_text, lxr_engine** out) {
  return guarded([&] {
    require(out, "out");
    *out = nullptr;
    auto engine = std::make_unique<lxr_engine>();
    if (config_text != nullptr) engine->config.load_key_values(config_text);
    engine->config.apply_environment();
    engine->config.validate();
    *out = engine.release();
  });
}

lxr_status lxr_engine_set(lxr_engine* engine, const char* key, const char* value) {
  return guarded([&] {
    require(engine, "engine");
    require(key, "key");
    require(value, "value");
    lexreward::EngineConfig next = engine->config;
    next.set(key, value);
    next.validate();
    engine->config = std::move(next);
  });
}

lxr_status lxr_engine_config_json(const lxr_engine* engine, char** out_json) {
  return guarded([&] {
    require(out_json, "out_json");
    *out_json = dup_string(config_of(engine).to_json().dump(2) + "\n");
  });
}

void lxr_engine_destroy(lxr_engine* engine) { delete engine; }

lxr_status lxr_tokenize_13a(const char* text, char** out_json) {
  return guarded([&] {
    require(text, "text");
    require(out_json, "out_json");
    *out_json = dup_string(lexreward::Json(lexreward::tokenize_13a(text).tokens).dump());
  });
}

lxr_status lxr_bleu(const lxr_engine* engine, const char* candidate, const char* const* references,
                    size_t n_references, double* out) {
  return guarded([&] {
    require(candidate, "candidate");
    require(out, "out");
    const auto refs = string_array(references, n_references, "references");
    *out = lexreward::reward_bleu(candidate, refs, config_of(engine).score);
  });
}

lxr_status lxr_bleu_report(const lxr_engine* engine, const char* candidate,
                           const char* const* references, size_t n_references, char** out_json) {
  return guarded([&] {
    require(candidate, "candidate");
    require(out_json, "out_json");
    const auto& config = config_of(engine).score;
    std::vector<lexreward::TokenSequence> refs;
    for (const auto& r : string_array(references, n_references, "references"))
      refs.push_back(lexreward::tokenize_13a(r));
    const lexreward::BleuReport report = lexreward::bleu(lexreward::tokenize_13a(candidate), refs, config);
    lexreward::Json j = lexreward::Json::object();
    j["score"] = report.score;
    j["precisions"] = report.precisions;
    j["weights"] = config.weights;
    j["brevity_penalty"] = report.brevity_penalty;
    j["candidate_length"] = report.candidate_length;
    j["effective_reference_length"] = report.effective_reference_length;
    j["match_counts"] = report.match_counts;
    j["total_counts"] = report.total_counts;
    *out_json = dup_string(j.dump());
  });
}

lxr_status lxr_rouge_l(const char* candidate, const char* const* references, size_t n_references,
                       double* out) {
  return guarded([&] {
    require(candidate, "candidate");
    require(out, "out");
    const auto refs = string_array(references, n_references, "references");
    *out = lexreward::reward_rouge_l(candidate, refs);
  });
}

lxr_status lxr_format_reward(const char* text, double* out) {
  return guarded([&] {
    require(text, "text");
    require(out, "out");
    *out = lexreward::format_reward(text);
  });
}

lxr_status lxr_group_advantage(const double* rewards, size_t n, double epsilon, double* out) {
  return guarded([&] {
    if (n > 0) {
      require(rewards, "rewards");
      require(out, "out");
    }
    const auto adv = lexreward::group_advantage(std::span<const double>(rewards, n), epsilon);
    std::copy(adv.values.begin(), adv.values.end(), out);
  });
}

lxr_status lxr_score_jsonl(const lxr_engine* engine, const char* items_jsonl,
                           const char* options_json, char** out_text, size_t* n_failed) {
  return guarded([&] {
    require(items_jsonl, "items_jsonl");
    require(out_text, "out_text");
    emit(lexreward::batch::score(config_of(engine), items_jsonl, parse_options(options_json)),
         out_text, nullptr, n_failed);
  });
}

lxr_status lxr_score_pool_jsonl(const lxr_engine* engine, const char* corpus_jsonl,
                                const char* options_json, char** out_text, char** out_side,
                                size_t* n_failed) {
  return guarded([&] {
    require(corpus_jsonl, "corpus_jsonl");
    require(out_text, "out_text");
    emit(lexreward::batch::score_pool(config_of(engine), corpus_jsonl, parse_options(options_json)),
         out_text, out_side, n_failed);
  });
}

lxr_status lxr_judge(const lxr_engine* engine, const char* preferences_jsonl,
                     const char* options_json, char** out_text) {
  return guarded([&] {
    require(preferences_jsonl, "preferences_jsonl");
    require(out_text, "out_text");
    emit(lexreward::batch::judge(config_of(engine), preferences_jsonl, parse_options(options_json)),
         out_text, nullptr, nullptr);
  });
}

lxr_status lxr_sweep(const lxr_engine* engine, const char* preferences_jsonl,
                     const char* options_json, char** out_text) {
  return guarded([&] {
    require(preferences_jsonl, "preferences_jsonl");
    require(out_text, "out_text");
    emit(lexreward::batch::sweep(config_of(engine), preferences_jsonl, parse_options(options_json)),
         out_text, nullptr, nullptr);
  });
}

lxr_status lxr_select(const char* corpus_jsonl, const char* options_json, char** out_text,
                      char** out_side) {
  return guarded([&] {
    require(corpus_jsonl, "corpus_jsonl");
    require(out_text, "out_text");
    emit(lexreward::batch::select(corpus_jsonl, parse_options(options_json)), out_text, out_side,
         nullptr);
  });
}

lxr_status lxr_filter(const char* corpus_jsonl, const char* options_json, char** out_text,
                      char** out_side) {
  return guarded([&] {
    require(corpus_jsonl, "corpus_jsonl");
    require(out_text, "out_text");
    emit(lexreward::batch::filter(corpus_jsonl, parse_options(options_json)), out_text, out_side,
         nullptr);
  });
}

lxr_status lxr_advantage_jsonl(const lxr_engine* engine, const char* groups_jsonl,
                               const char* options_json, char** out_text, size_t* n_failed) {
  return guarded([&] {
    require(groups_jsonl, "groups_jsonl");
    require(out_text, "out_text");
    emit(lexreward::batch::advantage(config_of(engine), groups_jsonl, parse_options(options_json)),
         out_text, nullptr, n_failed);
  });
}

lxr_status lxr_stats(const lxr_engine* engine, const char* texts_jsonl, const char* options_json,
                     char** out_text) {
  return guarded([&] {
    require(texts_jsonl, "texts_jsonl");
    require(out_text, "out_text");
    emit(lexreward::batch::stats(config_of(engine), texts_jsonl, parse_options(options_json)),
         out_text, nullptr, nullptr);
  });
}

lxr_status lxr_bench(const lxr_engine* engine, const char* options_json, char** out_text) {
  return guarded([&] {
    require(out_text, "out_text");
    emit(lexreward::batch::bench(config_of(engine), parse_options(options_json)), out_text,
         nullptr, nullptr);
  });
}

lxr_status lxr_server_create(const lxr_engine* engine, const char* host, int port, lxr_server** out) {
  return guarded([&] {
    require(host, "host");
    require(out, "out");
    *out = nullptr;
    if (port < 0 || port > 65535)
      lexreward::fail(lexreward::ErrorCode::kInvalidArgument, "port must be in [0, 65535]");
    auto server = std::make_unique<lxr_server>(config_of(engine));
    server->service.bind(host, port);
    *out = server.release();
  });
}

int lxr_server_port(const lxr_server* server) { return server ? server->service.port() : -1; }

lxr_status lxr_server_run(lxr_server* server) {
  return guarded([&] {
    require(server, "server");
    server->service.run();
  });
}

void lxr_server_stop(lxr_server* server) {
  if (server) server->service.stop();
}

void lxr_server_destroy(lxr_server* server) { delete server; }

}  // extern "C"
