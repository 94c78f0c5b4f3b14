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

// lexreward command-line front end. Talks to the engine only through the C API.

#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <pthread.h>
#include <unistd.h>

#include "CLI11.hpp"
#include "json.hpp"
#include "lexreward/lexreward.h"

namespace {

using Json = nlohmann::ordered_json;

struct Failure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Owns a char* handed out by the library.
struct LibString {
  char* p = nullptr;
  ~LibString() { lxr_string_free(p); }
  std::string str() const { return p ? std::string(p) : std::string(); }
};

void check(lxr_status status) {
  if (status != LXR_OK)
    throw Failure(std::string(lxr_status_string(status)) + ": " + lxr_last_error());
}

std::string slurp(const std::string& path) {
  if (path == "-") {
    std::ostringstream ss;
    ss << std::cin.rdbuf();
    return ss.str();
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Failure("io: cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_to(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text << std::flush;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Failure("io: cannot write " + path);
  out << text;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream ss(text);
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

class Engine {
 public:
  explicit Engine(const std::optional<std::string>& config_text) {
    check(lxr_engine_create(config_text ? config_text->c_str() : nullptr, &engine_));
  }
  ~Engine() { lxr_engine_destroy(engine_); }
  Engine(const Engine&) = delete;
  Engine& operator=(const Engine&) = delete;

  void set(const std::string& key, const std::string& value) {
    check(lxr_engine_set(engine_, key.c_str(), value.c_str()));
  }
  lxr_engine* get() const { return engine_; }

 private:
  lxr_engine* engine_ = nullptr;
};

// Reference sets for judge/sweep: FILE holds {"id", "references": {...}}
// rows; TAG=FILE holds one model's outputs as {"id", "text"} rows.
Json reference_sets(const std::vector<std::string>& specs) {
  Json sets = Json::array();
  for (const auto& spec : specs) {
    Json set = Json::object();
    const auto eq = spec.find('=');
    if (eq != std::string::npos && eq > 0) {
      set["tag"] = spec.substr(0, eq);
      set["jsonl"] = slurp(spec.substr(eq + 1));
    } else {
      set["jsonl"] = slurp(spec);
    }
    sets.push_back(std::move(set));
  }
  return sets;
}

sigset_t stop_signals() {
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  return set;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"BLEU-family rewards, preference judging, data selection and GRPO advantages"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(lxr_version()));

  std::string config_path;
  int workers = 0;
  std::optional<int> max_order;
  bool no_smoothing = false;
  std::string ref_length;
  app.add_option("--config", config_path, "key = value config file");
  app.add_option("--workers", workers, "worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);
  app.add_option("--max-order", max_order, "maximum n-gram order")->check(CLI::PositiveNumber);
  app.add_flag("--no-smoothing", no_smoothing, "disable add-one smoothing");
  app.add_option("--ref-length", ref_length, "effective reference length rule")
      ->check(CLI::IsMember({"closest", "shortest"}));
  bool workers_given = false;

  // score
  auto* score = app.add_subcommand("score", "score candidates (JSONL in, JSONL with scores out)");
  std::string score_in = "-", score_out, score_failures, reward = "bleu", tags;
  std::optional<double> format_weight;
  bool pool = false, advantages = false;
  score->add_option("input", score_in, "items JSONL (- for stdin)");
  score->add_option("-o,--output", score_out, "output path");
  score->add_option("--reward", reward, "reward spec")
      ->check(CLI::IsMember({"bleu", "rouge_l", "brf1", "harmonic", "format", "answer_bleu",
                             "format_answer", "bleu_plus_rm", "external"}));
  score->add_option("--format-weight", format_weight, "weight of the format term for format_answer");
  score->add_flag("--advantages", advantages, "add group advantages per prompt_id");
  score->add_flag("--pool", pool, "input is a corpus; sets scores.bleu from base_output");
  score->add_option("--tags", tags, "reference tags for --pool (comma list)");
  score->add_option("--failures", score_failures, "write --pool failures here");

  // judge
  auto* judge = app.add_subcommand("judge", "agreement of a judge with human preference labels");
  std::string judge_in = "-", judge_name = "bleu", tie_policy = "count_as_disagree", ref_tags;
  std::vector<std::string> refs;
  bool by_domain = false;
  judge->add_option("input", judge_in, "preference JSONL (- for stdin)");
  judge->add_option("--judge", judge_name, "bleu, rouge_l, harmonic, precision_only, bp_only, length, "
                                           "external:<metric> or combined:<a>+<b>");
  judge->add_option("--refs", refs, "reference set: FILE or TAG=FILE (repeatable)");
  judge->add_option("--ref-tags", ref_tags, "restrict to these reference tags (comma list)");
  judge->add_option("--tie-policy", tie_policy, "metric tie handling")
      ->check(CLI::IsMember({"exclude", "half_credit", "count_as_disagree"}));
  judge->add_flag("--by-domain", by_domain, "include per-domain agreement");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "agreement as references are added in a fixed order");
  std::string sweep_in = "-", order, sweep_judge = "bleu", sweep_tie = "count_as_disagree";
  std::vector<std::string> sweep_refs;
  bool sweep_csv = false, sweep_lengths = false;
  sweep->add_option("input", sweep_in, "preference JSONL (- for stdin)");
  sweep->add_option("--order", order, "reference tags in order (comma list)")->required();
  sweep->add_option("--refs", sweep_refs, "reference set: FILE or TAG=FILE (repeatable)");
  sweep->add_option("--judge", sweep_judge, "base judge");
  sweep->add_option("--tie-policy", sweep_tie, "metric tie handling")
      ->check(CLI::IsMember({"exclude", "half_credit", "count_as_disagree"}));
  sweep->add_flag("--csv", sweep_csv, "CSV table instead of JSON");
  sweep->add_flag("--length-groups", sweep_lengths, "add per-reference length statistics and their correlation");

  // select
  auto* select = app.add_subcommand("select", "difficulty-ranked selection from a scored corpus");
  std::string select_in = "-", mode = "hardest", metric = "bleu", subset_path;
  long long k = 0;
  std::uint64_t seed = 0;
  select->add_option("input", select_in, "corpus JSONL (- for stdin)");
  select->add_option("--k", k, "number of records")->required()->check(CLI::PositiveNumber);
  select->add_option("--mode", mode, "selection mode")
      ->check(CLI::IsMember({"hardest", "easy", "medium", "random"}));
  select->add_option("--seed", seed, "seed for --mode random");
  select->add_option("--metric", metric, "score field to rank by");
  select->add_option("--subset", subset_path, "write the selected records as corpus JSONL here");

  // filter
  auto* filter = app.add_subcommand("filter", "drop pool records by token bounds, language and quota");
  std::string filter_in = "-", langs, dropped_path;
  long long min_tokens = 10, max_tokens = 512;
  filter->add_option("input", filter_in, "corpus JSONL (- for stdin)");
  filter->add_option("--min-tokens", min_tokens, "minimum 13a tokens")->check(CLI::NonNegativeNumber);
  filter->add_option("--max-tokens", max_tokens, "maximum 13a tokens")->check(CLI::NonNegativeNumber);
  filter->add_option("--lang", langs, "allowed language tags (comma list)");
  filter->add_option("--dropped", dropped_path, "write dropped records with reasons here");
  std::vector<std::string> quotas;
  filter->add_option("--source-quota", quotas, "cap kept records per source: SOURCE=N (repeatable)");

  // advantage
  auto* advantage = app.add_subcommand("advantage", "group-normalized advantages from grouped rewards");
  std::string adv_in = "-";
  std::optional<double> epsilon;
  advantage->add_option("input", adv_in, "groups JSONL (- for stdin)");
  advantage->add_option("--epsilon", epsilon, "std offset")->check(CLI::NonNegativeNumber);

  // stats
  auto* stats = app.add_subcommand("stats", "repetition, refusal, markdown and opener statistics");
  std::string stats_in = "-", corpus_name = "corpus";
  bool stats_csv = false;
  stats->add_option("input", stats_in, "texts JSONL (- for stdin)");
  stats->add_flag("--csv", stats_csv, "CSV header and one row");
  stats->add_option("--name", corpus_name, "corpus name for the CSV row");

  // bench
  auto* bench = app.add_subcommand("bench", "single-example BLEU latency on synthetic data");
  long long bench_n = 1000, bench_tokens = 512;
  std::uint64_t bench_seed = 13;
  bench->add_option("--n", bench_n, "number of candidates")->check(CLI::PositiveNumber);
  bench->add_option("--tokens", bench_tokens, "tokens per candidate and reference")->check(CLI::PositiveNumber);
  bench->add_option("--seed", bench_seed, "data seed");

  // serve
  auto* serve = app.add_subcommand("serve", "HTTP batch scoring service");
  std::optional<std::string> bind;
  std::optional<int> port;
  serve->add_option("--bind", bind, "listen address");
  serve->add_option("--port", port, "listen port (0 = ephemeral)")->check(CLI::Range(0, 65535));

  try {
    app.parse(argc, argv);
    workers_given = app.count("--workers") > 0;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    std::optional<std::string> config_text;
    if (!config_path.empty()) config_text = slurp(config_path);
    Engine engine(config_text);
    if (workers_given) engine.set("workers", std::to_string(workers));
    if (max_order) engine.set("max_order", std::to_string(*max_order));
    if (no_smoothing) engine.set("smoothing", "false");
    if (!ref_length.empty()) engine.set("ref_length_rule", ref_length);

    LibString out, side;
    std::size_t n_failed = 0;

    if (*score) {
      const std::string input = slurp(score_in);
      Json opts = Json::object();
      if (pool) {
        opts["tags"] = split_list(tags);
        check(lxr_score_pool_jsonl(engine.get(), input.c_str(), opts.dump().c_str(), &out.p, &side.p,
                                   &n_failed));
        write_to(score_out, out.str());
        if (!score_failures.empty()) write_to(score_failures, side.str());
      } else {
        opts["reward_spec"] = reward;
        if (format_weight) opts["format_weight"] = *format_weight;
        opts["advantages"] = advantages;
        check(lxr_score_jsonl(engine.get(), input.c_str(), opts.dump().c_str(), &out.p, &n_failed));
        write_to(score_out, out.str());
      }
      if (n_failed > 0) {
        std::cerr << "lexreward: " << n_failed << " item(s) could not be scored\n";
        return 1;
      }
    } else if (*judge) {
      const std::string input = slurp(judge_in);
      Json opts = {{"judge", judge_name}, {"tie_policy", tie_policy}, {"by_domain", by_domain}};
      opts["ref_tags"] = split_list(ref_tags);
      opts["reference_sets"] = reference_sets(refs);
      check(lxr_judge(engine.get(), input.c_str(), opts.dump().c_str(), &out.p));
      write_to("", out.str());
    } else if (*sweep) {
      const std::string input = slurp(sweep_in);
      Json opts = {{"judge", sweep_judge}, {"tie_policy", sweep_tie}, {"csv", sweep_csv},
                   {"length_groups", sweep_lengths}};
      opts["order"] = split_list(order);
      opts["reference_sets"] = reference_sets(sweep_refs);
      check(lxr_sweep(engine.get(), input.c_str(), opts.dump().c_str(), &out.p));
      write_to("", out.str());
    } else if (*select) {
      const std::string input = slurp(select_in);
      const Json opts = {{"k", k}, {"mode", mode}, {"seed", seed}, {"metric", metric}};
      check(lxr_select(input.c_str(), opts.dump().c_str(), &out.p, &side.p));
      write_to("", out.str());
      if (!subset_path.empty()) write_to(subset_path, side.str());
    } else if (*filter) {
      const std::string input = slurp(filter_in);
      Json opts = {{"min_tokens", min_tokens}, {"max_tokens", max_tokens}};
      if (!langs.empty()) opts["languages"] = split_list(langs);
      Json quota = Json::object();
      for (const auto& q : quotas) {
        const auto eq = q.rfind('=');
        std::size_t used = 0;
        long long n = -1;
        try {
          if (eq != std::string::npos) n = std::stoll(q.substr(eq + 1), &used);
        } catch (const std::exception&) {
        }
        if (eq == std::string::npos || eq == 0 || n < 0 || used != q.size() - eq - 1)
          throw Failure("invalid_argument: --source-quota expects SOURCE=N, got '" + q + "'");
        quota[q.substr(0, eq)] = n;
      }
      opts["source_quota"] = quota;
      check(lxr_filter(input.c_str(), opts.dump().c_str(), &out.p, &side.p));
      write_to("", out.str());
      if (!dropped_path.empty()) write_to(dropped_path, side.str());
    } else if (*advantage) {
      const std::string input = slurp(adv_in);
      Json opts = Json::object();
      if (epsilon) opts["epsilon"] = *epsilon;
      check(lxr_advantage_jsonl(engine.get(), input.c_str(), opts.dump().c_str(), &out.p, &n_failed));
      write_to("", out.str());
      if (n_failed > 0) {
        std::cerr << "lexreward: " << n_failed << " group(s) have no advantages\n";
        return 1;
      }
    } else if (*stats) {
      const std::string input = slurp(stats_in);
      const Json opts = {{"csv", stats_csv}, {"name", corpus_name}};
      check(lxr_stats(engine.get(), input.c_str(), opts.dump().c_str(), &out.p));
      write_to("", out.str());
    } else if (*bench) {
      const Json opts = {{"n", bench_n}, {"tokens", bench_tokens}, {"seed", bench_seed}};
      check(lxr_bench(engine.get(), opts.dump().c_str(), &out.p));
      write_to("", out.str());
    } else if (*serve) {
      if (bind) engine.set("bind", *bind);
      if (port) engine.set("port", std::to_string(*port));
      check(lxr_engine_config_json(engine.get(), &out.p));
      const Json config = Json::parse(out.str());

      // Signals go to a dedicated thread so the server can shut down cleanly.
      sigset_t signals = stop_signals();
      pthread_sigmask(SIG_BLOCK, &signals, nullptr);
      lxr_server* server = nullptr;
      check(lxr_server_create(engine.get(), config["bind"].get<std::string>().c_str(),
                              config["port"].get<int>(), &server));
      std::cerr << "lexreward: listening on " << config["bind"].get<std::string>() << ":"
                << lxr_server_port(server) << "\n";
      std::jthread waiter([server, signals] {
        int sig = 0;
        sigwait(&signals, &sig);
        lxr_server_stop(server);
      });
      const lxr_status status = lxr_server_run(server);
      // Wakes the waiter if the server stopped on its own; otherwise the
      // signal stays pending and blocked.
      kill(getpid(), SIGTERM);
      waiter.join();
      lxr_server_destroy(server);
      check(status);
    }
  } catch (const Failure& e) {
    std::cerr << "lexreward: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "lexreward: internal: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
