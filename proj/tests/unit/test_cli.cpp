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

#include <signal.h>

#include <chrono>
#include <regex>
#include <thread>

#include "doctest.h"
#include "fixtures/synthetic.hpp"
#include "httplib.h"
#include "support/process.hpp"

using lexreward::Json;
using support::run;
using support::RunResult;
using support::TempDir;

namespace {

const std::string kCli = LEXREWARD_CLI;

RunResult cli(const std::vector<std::string>& args, const std::string& stdin_text = "") {
  return run(kCli, args, stdin_text);
}

std::string words(std::size_t n) {
  std::string out;
  for (std::size_t i = 0; i < n; ++i) out += (i ? " w" : "w") + std::to_string(i);
  return out;
}

// Humans always prefer the longer output.
std::string longer_wins_jsonl() {
  std::string out;
  for (int i = 0; i < 20; ++i) {
    const bool x_longer = i % 3 != 0;
    const std::string a = words(5 + i), b = words(3 + i / 2);
    out += Json{{"id", "p" + std::to_string(i)},
                {"output_x", x_longer ? a : b},
                {"output_y", x_longer ? b : a},
                {"human_label", x_longer ? "X" : "Y"}}
               .dump() +
           "\n";
  }
  return out;
}

}  // namespace

TEST_CASE("usage errors exit 2") {
  CHECK(cli({"--help"}).exit_code == 0);
  CHECK(cli({}).exit_code == 2);
  CHECK(cli({"frobnicate"}).exit_code == 2);
  const auto r = cli({"select", "--k", "2", "--bogus"});
  CHECK(r.exit_code == 2);
  CHECK(r.err.find("--bogus") != std::string::npos);
  CHECK(cli({"select"}).exit_code == 2);
  CHECK(cli({"select", "--k", "0"}).exit_code == 2);
  CHECK(cli({"select", "--k", "2", "--mode", "sideways"}).exit_code == 2);
}

TEST_CASE("runtime errors exit 1 with a diagnostic") {
  auto r = cli({"select", "/nonexistent/corpus.jsonl", "--k", "2"});
  CHECK(r.exit_code == 1);
  CHECK(r.err.rfind("lexreward: io", 0) == 0);
  r = cli({"select", "--k", "2"}, "{broken\n");
  CHECK(r.exit_code == 1);
  CHECK(r.err.find("line 1") != std::string::npos);
  r = cli({"filter", "--source-quota", "flan"}, "");
  CHECK(r.exit_code == 1);
}

TEST_CASE("select on the five-record fixture") {
  TempDir dir;
  const std::string corpus = dir.write("corpus.jsonl", fixtures::scored_corpus());
  const std::string subset = (dir / "subset.jsonl").string();
  const auto r = cli({"select", corpus, "--k", "2", "--subset", subset});
  REQUIRE(r.exit_code == 0);
  CHECK(Json::parse(r.out)["selected_ids"] == Json::parse(R"(["b", "d"])"));
  const auto rows = lexreward::parse_jsonl(support::slurp(subset));
  REQUIRE(rows.size() == 2);
  CHECK(rows[0]["id"] == "b");
  CHECK(rows[1]["id"] == "d");
  CHECK(rows[0]["scores"]["bleu"] == 0.1);

  const auto easy = cli({"select", corpus, "--k", "2", "--mode", "easy"});
  CHECK(Json::parse(easy.out)["selected_ids"] == Json::parse(R"(["a", "e"])"));
}

TEST_CASE("judge length on a longer-always-wins fixture") {
  const auto r = cli({"judge", "-", "--judge", "length"}, longer_wins_jsonl());
  REQUIRE(r.exit_code == 0);
  CHECK(Json::parse(r.out)["agreement_rate"] == 1.0);
  const auto bad = cli({"judge", "-", "--judge", "meteor"}, longer_wins_jsonl());
  CHECK(bad.exit_code == 1);
}

TEST_CASE("judge and sweep with external reference files") {
  TempDir dir;
  const std::string prefs = dir.write("prefs.jsonl",
      R"({"id":"1","output_x":"a b c d","output_y":"a b","human_label":"X","references":{"r":"a b c"}})" "\n"
      R"({"id":"2","output_x":"a","output_y":"a b c","human_label":"Y","references":{"r":"a b c"}})" "\n");
  const std::string gpt = dir.write("gpt.jsonl", R"({"id":"1","text":"a b c d"})" "\n" R"({"id":"2","text":"a b c"})" "\n");
  auto r = cli({"sweep", prefs, "--order", "r,gpt", "--refs", "gpt=" + gpt, "--length-groups"});
  REQUIRE(r.exit_code == 0);
  const Json sweep = Json::parse(r.out);
  REQUIRE(sweep["rows"].size() == 2);
  CHECK(sweep["rows"][1]["references"] == Json::parse(R"(["r", "gpt"])"));
  CHECK(sweep["rows"][1]["agreement_rate"] == 1.0);
  CHECK(sweep["length_groups"].size() == 2);

  r = cli({"sweep", prefs, "--order", "r,gpt", "--refs", "gpt=" + gpt, "--csv"});
  REQUIRE(r.exit_code == 0);
  CHECK(r.out == "k,references,n_total,n_agree,n_metric_ties,agreement_rate\n"
                 "1,r,2,1,0,0.500000\n"
                 "2,r|gpt,2,2,0,1.000000\n");

  r = cli({"judge", prefs, "--refs", "gpt=" + gpt, "--ref-tags", "gpt"});
  REQUIRE(r.exit_code == 0);
  CHECK(Json::parse(r.out)["agreement_rate"] == 1.0);

  r = cli({"sweep", prefs, "--order", "r,claude"});
  CHECK(r.exit_code == 1);
}

TEST_CASE("score writes every row and exits 1 when some fail") {
  const std::string items =
      R"({"id": "a", "candidate": "the cat sat", "references": ["the cat sat"], "prompt_id": "p"})" "\n"
      R"({"id": "b", "candidate": "", "references": ["the cat sat"], "prompt_id": "p"})" "\n"
      R"({"id": "c", "candidate": "x"})" "\n";
  auto r = cli({"score", "-", "--advantages"}, items);
  CHECK(r.exit_code == 1);
  CHECK(r.err.find("1 item") != std::string::npos);
  const auto rows = lexreward::parse_jsonl(r.out);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0]["score"] == 1.0);
  CHECK(rows[0]["advantage"].get<double>() == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(rows[2]["score"].is_null());
  CHECK(rows[2].contains("error"));

  r = cli({"score", "-", "--reward", "format"}, items);
  CHECK(r.exit_code == 0);
  r = cli({"score", "-", "--reward", "format_answer"}, items);
  CHECK(r.exit_code == 1);
  CHECK(r.out.empty());
}

TEST_CASE("global options and config files reach the engine") {
  TempDir dir;
  const std::string items = R"({"id": "a", "candidate": "a b x", "references": ["a b c"]})" "\n";
  const double order1 = lexreward::parse_jsonl(cli({"--max-order", "1", "score"}, items).out)[0]["score"];
  CHECK(order1 == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  const std::string conf = dir.write("c.conf", "max_order = 1\n");
  const double from_file = lexreward::parse_jsonl(cli({"--config", conf, "score"}, items).out)[0]["score"];
  CHECK(from_file == order1);
  const auto env = run(kCli, {"score"}, items, {{"LEXREWARD_MAX_ORDER", "1"}});
  CHECK(lexreward::parse_jsonl(env.out)[0]["score"] == order1);
  CHECK(cli({"--config", (dir / "missing.conf").string(), "score"}, items).exit_code == 1);
}

TEST_CASE("score --pool") {
  TempDir dir;
  const std::string corpus =
      R"({"id": "a", "prompt": "p", "references": {"t": "a b c d"}, "base_output": "a b c d"})" "\n"
      R"({"id": "b", "prompt": "p", "references": {"t": "a b c d"}})" "\n";
  const std::string failures = (dir / "fail.jsonl").string();
  const auto r = cli({"score", "-", "--pool", "--tags", "t", "--failures", failures}, corpus);
  CHECK(r.exit_code == 1);
  const auto rows = lexreward::parse_jsonl(r.out);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0]["scores"]["bleu"] == 1.0);
  CHECK_FALSE(rows[1].contains("scores"));
  CHECK(lexreward::parse_jsonl(support::slurp(failures))[0]["id"] == "b");
}

TEST_CASE("filter, advantage, stats and bench") {
  TempDir dir;
  const std::string corpus = Json{{"id", "keep"}, {"prompt", words(12)}, {"references", {{"r", words(12)}}}, {"source", "s"}}.dump() + "\n" +
                             Json{{"id", "short"}, {"prompt", "hi"}, {"references", {{"r", words(12)}}}}.dump() + "\n" +
                             Json{{"id", "quota"}, {"prompt", words(12)}, {"references", {{"r", words(12)}}}, {"source", "s"}}.dump() + "\n";
  const std::string dropped = (dir / "dropped.jsonl").string();
  auto r = cli({"filter", "-", "--dropped", dropped, "--source-quota", "s=1"}, corpus);
  REQUIRE(r.exit_code == 0);
  CHECK(lexreward::parse_jsonl(r.out).size() == 1);
  const auto d = lexreward::parse_jsonl(support::slurp(dropped));
  REQUIRE(d.size() == 2);
  CHECK(d[0]["reason"] == "min_tokens");
  CHECK(d[1]["reason"] == "source_quota");

  r = cli({"advantage"}, "{\"prompt_id\": \"g\", \"rewards\": [1, 1]}\n{\"prompt_id\": \"h\", \"rewards\": [0, 2]}\n");
  REQUIRE(r.exit_code == 0);
  const auto adv = lexreward::parse_jsonl(r.out);
  CHECK(adv[0]["advantages"] == Json::parse("[0.0, 0.0]"));
  CHECK(adv[1]["prompt_id"] == "h");
  r = cli({"advantage"}, "{\"prompt_id\": \"g\", \"rewards\": [1]}\n");
  CHECK(r.exit_code == 1);
  CHECK(lexreward::parse_jsonl(r.out)[0]["advantages"].is_null());

  r = cli({"stats", "--csv", "--name", "demo"}, "\"I'm sorry, but no.\"\n{\"text\": \"**Sure!** ok\"}\n");
  REQUIRE(r.exit_code == 0);
  CHECK(r.out.find("demo,2,") != std::string::npos);
  r = cli({"stats"}, "\"the cat the cat\"\n");
  CHECK(Json::parse(r.out)["repetition_rate"].get<double>() == doctest::Approx(0.208333).epsilon(1e-6));

  r = cli({"bench", "--n", "20", "--tokens", "64"});
  REQUIRE(r.exit_code == 0);
  const Json bench = Json::parse(r.out);
  for (const char* key : {"median_ms", "p90_ms", "p99_ms", "candidates_per_sec", "mean_bleu"})
    CHECK(bench.contains(key));
}

TEST_CASE("outputs are byte-identical across runs") {
  TempDir dir;
  const auto f = fixtures::preference_fixture(40, 30, 5);
  std::string prefs, texts;
  for (const auto& rec : f.records) {
    texts += Json(rec.output_x).dump() + "\n" + Json{{"output", rec.output_y}}.dump() + "\n";
    Json j = {{"id", rec.id}, {"output_x", rec.output_x}, {"output_y", rec.output_y},
              {"human_label", lexreward::to_string(rec.human_label)}};
    for (const auto& ref : rec.references) j["references"][ref.tag] = ref.text;
    prefs += j.dump() + "\n";
  }
  const std::string p = dir.write("prefs.jsonl", prefs);
  const std::string c = dir.write("corpus.jsonl", fixtures::scored_corpus());
  const std::string t = dir.write("texts.jsonl", texts);
  const std::vector<std::vector<std::string>> commands = {
      {"judge", p, "--by-domain"},
      {"sweep", p, "--order", "ref"},
      {"--workers", "3", "judge", p, "--judge", "rouge_l"},
      {"select", c, "--k", "3", "--mode", "random", "--seed", "9"},
      {"--workers", "2", "stats", t},
  };
  for (const auto& args : commands) {
    const auto a = cli(args), b = cli(args);
    INFO(args[0] << ": " << a.err);
    REQUIRE(a.exit_code == 0);
    CHECK(a.out == b.out);
  }
  CHECK(cli({"--workers", "1", "judge", p}).out == cli({"--workers", "4", "judge", p}).out);
}

TEST_CASE("serve answers requests and stops on SIGTERM") {
  TempDir dir;
  const std::string err_path = (dir / "serve.err").string();
  const pid_t pid = ::fork();
  if (pid == 0) {
    const int err = ::open(err_path.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0600);
    ::dup2(err, 2);
    ::execl(kCli.c_str(), kCli.c_str(), "serve", "--bind", "127.0.0.1", "--port", "0", nullptr);
    ::_exit(127);
  }
  REQUIRE(pid > 0);
  int port = -1;
  const std::regex listening("listening on 127\\.0\\.0\\.1:(\\d+)");
  for (int i = 0; i < 500 && port < 0; ++i) {
    std::smatch m;
    const std::string err = support::slurp(err_path);
    if (std::regex_search(err, m, listening)) port = std::stoi(m[1]);
    else std::this_thread::sleep_for(std::chrono::milliseconds(10));
  }
  REQUIRE(port > 0);
  httplib::Client client("127.0.0.1", port);
  auto res = client.Get("/healthz");
  REQUIRE(res);
  CHECK(res->status == 200);
  res = client.Post("/score", R"({"items": [{"id": "a", "candidate": "x y", "references": ["x y"]}]})",
                    "application/json");
  REQUIRE(res);
  CHECK(Json::parse(res->body)["scores"]["a"] == 1.0);

  ::kill(pid, SIGTERM);
  int status = 0;
  ::waitpid(pid, &status, 0);
  CHECK(WIFEXITED(status));
  CHECK(WEXITSTATUS(status) == 0);
}
