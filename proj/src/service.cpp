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

#include "lexreward/service.hpp"

#include <atomic>
#include <chrono>
#include <thread>
#include <unordered_set>

#include "httplib.h"
#include "lexreward/error.hpp"
#include "lexreward/parallel.hpp"

namespace lexreward {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

std::string code_name(ErrorCode code) { return to_string(code); }

HttpResult bad_request(const std::string& code, const std::string& message) {
  return {400, error_body(code, message)};
}

struct ParsedItem {
  ScoreItem item;
  std::string error;
};

Json item_error(const std::string& message) {
  return Json{{"code", "invalid_item"}, {"message", message}};
}

}  // namespace

Json error_body(const std::string& code, const std::string& message) {
  return Json{{"error", Json{{"code", code}, {"message", message}}}};
}

struct ScoringService::Server {
  httplib::Server http;
  int port = -1;
  std::atomic<bool> in_run{false};
  std::atomic<bool> stop_requested{false};
};

ScoringService::ScoringService(EngineConfig config) : config_(std::move(config)) {
  config_.validate();
}

ScoringService::~ScoringService() { stop(); }

HttpResult ScoringService::health() const { return {200, Json{{"status", "ok"}}}; }

HttpResult ScoringService::score(const std::string& body) const {
  const auto start = Clock::now();
  Json req;
  try {
    req = Json::parse(body);
  } catch (const Json::parse_error& e) {
    return bad_request("parse", e.what());
  }
  if (!req.is_object()) return bad_request("invalid_request", "body must be a JSON object");
  const auto items_it = req.find("items");
  if (items_it == req.end() || !items_it->is_array())
    return bad_request("invalid_request", "'items' must be a list");

  RewardSpec spec;
  ScoreConfig score_config;
  try {
    const auto rs = req.find("reward_spec");
    spec = RewardSpec::parse(rs != req.end() && rs->is_string() ? rs->get<std::string>() : "bleu");
    const Json overrides = req.value("config", Json());
    score_config = score_config_with_overrides(config_.score, overrides);
    if (overrides.is_object() && overrides.contains("format_weight")) {
      if (!overrides["format_weight"].is_number())
        return bad_request("invalid_request", "format_weight must be a number");
      spec.format_weight = overrides["format_weight"].get<double>();
    }
    if (spec.kind == RewardKind::kFormatAnswer && !spec.format_weight)
      return bad_request("invalid_request", "format_answer needs config.format_weight");
  } catch (const Error& e) {
    return bad_request(code_name(e.code()), e.what());
  }

  std::vector<ParsedItem> parsed;
  parsed.reserve(items_it->size());
  std::unordered_set<std::string> seen;
  for (std::size_t i = 0; i < items_it->size(); ++i) {
    const Json& obj = (*items_it)[i];
    // A missing or unusable id fails the batch; anything else is per item.
    ParsedItem p;
    try {
      p.item.id = item_id(obj);
    } catch (const Error& e) {
      return bad_request("invalid_request", "item " + std::to_string(i) + ": " + e.what());
    }
    try {
      p.item = parse_score_item(obj);
    } catch (const Error& e) {
      p.error = e.what();
    }
    parsed.push_back(std::move(p));
    if (!seen.insert(parsed.back().item.id).second)
      return bad_request("invalid_request", "duplicate item id: " + parsed.back().item.id);
  }

  // Only well-formed items reach the scorer; results map back by position.
  std::vector<ScoreItem> scorable;
  std::vector<std::size_t> origin;
  for (std::size_t i = 0; i < parsed.size(); ++i) {
    if (!parsed[i].error.empty()) continue;
    scorable.push_back(parsed[i].item);
    origin.push_back(i);
  }
  std::vector<ItemResult> results;
  try {
    results = score_items(scorable, spec, score_config, config_.workers);
  } catch (const Error& e) {
    return {500, error_body(code_name(e.code()), e.what())};
  }
  for (std::size_t j = 0; j < results.size(); ++j) {
    if (!results[j].score) parsed[origin[j]].error = results[j].error;
  }

  Json scores = Json::object();
  Json errors = Json::object();
  std::vector<std::optional<double>> final_scores(parsed.size());
  for (std::size_t j = 0; j < results.size(); ++j) final_scores[origin[j]] = results[j].score;
  for (std::size_t i = 0; i < parsed.size(); ++i) {
    if (final_scores[i]) {
      scores[parsed[i].item.id] = *final_scores[i];
    } else {
      errors[parsed[i].item.id] = item_error(parsed[i].error);
    }
  }

  Json resp = Json::object();
  resp["reward_spec"] = spec.name();
  resp["scores"] = std::move(scores);
  resp["errors"] = std::move(errors);

  // Group-normalized advantages for items tagged with a prompt_id.
  std::vector<std::string> group_order;
  std::unordered_map<std::string, std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < parsed.size(); ++i) {
    if (!parsed[i].item.prompt_id) continue;
    auto [it, inserted] = members.try_emplace(*parsed[i].item.prompt_id);
    if (inserted) group_order.push_back(it->first);
    it->second.push_back(i);
  }
  if (!group_order.empty()) {
    Json advantages = Json::object(), groups = Json::object(), group_errors = Json::object();
    for (const auto& pid : group_order) {
      std::vector<double> rewards;
      Json ids = Json::array();
      bool complete = true;
      for (std::size_t i : members[pid]) {
        ids.push_back(parsed[i].item.id);
        if (final_scores[i]) {
          rewards.push_back(*final_scores[i]);
        } else {
          complete = false;
        }
      }
      groups[pid] = ids;
      if (!complete) {
        group_errors[pid] = item_error("group has items that failed to score");
      } else if (rewards.size() < 2) {
        group_errors[pid] = item_error("advantage needs a group of at least 2");
      } else {
        advantages[pid] = group_advantage(rewards, config_.epsilon).values;
      }
    }
    resp["advantages"] = std::move(advantages);
    resp["groups"] = std::move(groups);
    if (!group_errors.empty()) resp["advantage_errors"] = std::move(group_errors);
  }
  resp["timing"] = Json{{"wall_ms", elapsed_ms(start)}, {"items", parsed.size()}};
  return {200, std::move(resp)};
}

HttpResult ScoringService::advantage(const std::string& body) const {
  const auto start = Clock::now();
  Json req;
  try {
    req = Json::parse(body);
  } catch (const Json::parse_error& e) {
    return bad_request("parse", e.what());
  }
  Json groups_json;
  double epsilon = config_.epsilon;
  if (req.is_array()) {
    groups_json = req;
  } else if (req.is_object() && req.contains("groups") && req["groups"].is_array()) {
    groups_json = req["groups"];
    if (req.contains("epsilon")) {
      if (!req["epsilon"].is_number() || req["epsilon"].get<double>() < 0.0)
        return bad_request("invalid_request", "epsilon must be a non-negative number");
      epsilon = req["epsilon"].get<double>();
    }
  } else {
    return bad_request("invalid_request", "body must be a list of groups or {\"groups\": [...]}");
  }

  std::vector<RewardGroup> groups;
  std::unordered_set<std::string> seen;
  for (std::size_t i = 0; i < groups_json.size(); ++i) {
    try {
      groups.push_back(parse_reward_group(groups_json[i]));
    } catch (const Error& e) {
      return bad_request(code_name(e.code()), "group " + std::to_string(i) + ": " + e.what());
    }
    if (!seen.insert(groups.back().prompt_id).second)
      return bad_request("invalid_request", "duplicate prompt_id: " + groups.back().prompt_id);
  }

  std::vector<std::optional<AdvantageVector>> out(groups.size());
  std::vector<std::string> errs(groups.size());
  parallel_for(groups.size(), config_.workers, [&](std::size_t i) {
    try {
      out[i] = group_advantage(groups[i].rewards, epsilon);
    } catch (const Error& e) {
      errs[i] = e.what();
    }
  });

  Json advantages = Json::object(), errors = Json::object();
  for (std::size_t i = 0; i < groups.size(); ++i) {
    if (out[i]) {
      advantages[groups[i].prompt_id] = out[i]->values;
    } else {
      errors[groups[i].prompt_id] = item_error(errs[i]);
    }
  }
  Json resp = Json::object();
  resp["advantages"] = std::move(advantages);
  resp["errors"] = std::move(errors);
  resp["epsilon"] = epsilon;
  resp["timing"] = Json{{"wall_ms", elapsed_ms(start)}, {"groups", groups.size()}};
  return {200, std::move(resp)};
}

void ScoringService::bind(const std::string& host, int port) {
  auto server = std::make_unique<Server>();
  const int workers = std::max(2, resolve_workers(config_.workers));
  server->http.new_task_queue = [workers] { return new httplib::ThreadPool(static_cast<size_t>(workers)); };
  // SO_REUSEADDR only: a port with a live listener must fail to bind.
  server->http.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const char*>(&yes), sizeof(yes));
  });
  server->http.set_payload_max_length(std::size_t{256} << 20);

  auto reply = [](httplib::Response& res, const HttpResult& result) {
    res.status = result.status;
    res.set_content(result.body.dump(), "application/json");
  };
  server->http.Post("/score", [this, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, score(req.body));
  });
  server->http.Post("/advantage", [this, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, advantage(req.body));
  });
  server->http.Get("/healthz", [this, reply](const httplib::Request&, httplib::Response& res) {
    reply(res, health());
  });
  server->http.set_error_handler([](const httplib::Request& req, httplib::Response& res) {
    if (!res.body.empty()) return httplib::Server::HandlerResponse::Unhandled;
    const std::string code = res.status == 404 ? "not_found" : "http_" + std::to_string(res.status);
    res.set_content(error_body(code, req.method + " " + req.path).dump(), "application/json");
    return httplib::Server::HandlerResponse::Handled;
  });
  server->http.set_exception_handler(
      [](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
        std::string message = "internal error";
        try {
          if (ep) std::rethrow_exception(ep);
        } catch (const std::exception& e) {
          message = e.what();
        } catch (...) {
        }
        res.status = 500;
        res.set_content(error_body("internal", message).dump(), "application/json");
      });

  if (port == 0) {
    server->port = server->http.bind_to_any_port(host);
    if (server->port < 0) fail(ErrorCode::kBind, "cannot bind " + host + ":0");
  } else {
    if (!server->http.bind_to_port(host, port))
      fail(ErrorCode::kBind, "cannot bind " + host + ":" + std::to_string(port));
    server->port = port;
  }
  server_ = std::move(server);
}

int ScoringService::port() const { return server_ ? server_->port : -1; }

void ScoringService::run() {
  if (!server_) fail(ErrorCode::kInvalidArgument, "service is not bound");
  server_->in_run = true;
  if (!server_->stop_requested) server_->http.listen_after_bind();
  server_->in_run = false;
}

void ScoringService::stop() {
  if (!server_) return;
  server_->stop_requested = true;
  // A stop that races run() waits until the accept loop is live.
  while (server_->in_run && !server_->http.is_running())
    std::this_thread::sleep_for(std::chrono::milliseconds(1));
  server_->http.stop();
}

}  // namespace lexreward
