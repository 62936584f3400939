#include <doctest.h>

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "evokg/llm_client.hpp"

using namespace evokg;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const char* name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

// Local chat-completion endpoint echoing a canned reply.
struct FakeServer {
  httplib::Server server;
  std::thread thread;
  std::string endpoint;
  std::atomic<int> calls{0};

  explicit FakeServer(std::string reply, int failures_before_success = 0) {
    server.Post("/v1/chat/completions", [this, reply = std::move(reply),
                                         failures_before_success](const httplib::Request&,
                                                                  httplib::Response& res) {
      const int n = ++calls;
      if (n <= failures_before_success) {
        res.status = 500;
        return;
      }
      nlohmann::json j{{"choices",
                        {{{"message", {{"role", "assistant"}, {"content", reply}}}}}}};
      res.set_content(j.dump(), "application/json");
    });
    const int port = server.bind_to_any_port("127.0.0.1");
    REQUIRE(port > 0);
    endpoint = "http://127.0.0.1:" + std::to_string(port);
    thread = std::thread([this] { server.listen_after_bind(); });
    server.wait_until_ready();
  }
  ~FakeServer() {
    server.stop();
    thread.join();
  }
};

}  // namespace

TEST_CASE("constructor validates mode requirements") {
  CHECK_THROWS_AS(LlmClient(ClientMode::replay, ""), std::invalid_argument);
  CHECK_THROWS_AS(LlmClient(ClientMode::record, "/tmp/fx", ""), std::invalid_argument);
  CHECK_THROWS_AS(LlmClient(ClientMode::live, "", ""), std::invalid_argument);
  CHECK_NOTHROW(LlmClient(ClientMode::replay, "/tmp/fx"));
}

TEST_CASE("request digest is stable and input-sensitive") {
  LlmClient client(ClientMode::replay, "/tmp/fx", "", "", "m1");
  CompletionRequest req{"hello", 64, 0.0, Purpose::generate};
  const std::string d = client.request_digest(req);
  CHECK(d.size() == 16);
  CHECK(d == client.request_digest(req));
  CompletionRequest other = req;
  other.prompt = "hello!";
  CHECK(client.request_digest(other) != d);
  other = req;
  other.max_tokens = 65;
  CHECK(client.request_digest(other) != d);
  // Generation temperature participates in the digest.
  other = req;
  other.temperature = 0.7;
  CHECK(client.request_digest(other) != d);
  CHECK_THROWS_AS(client.request_digest(CompletionRequest{"", 64, 0.0, Purpose::generate}),
                  std::invalid_argument);
}

TEST_CASE("judge and label requests are normalized to temperature zero") {
  LlmClient client(ClientMode::replay, "/tmp/fx");
  for (Purpose p : {Purpose::judge, Purpose::label}) {
    CompletionRequest hot{"rate this", 64, 0.9, p};
    CompletionRequest cold{"rate this", 64, 0.0, p};
    CHECK(client.request_digest(hot) == client.request_digest(cold));
  }
}

TEST_CASE("replay returns the fixture entry for the digest") {
  TempDir dir("evokg_fixtures_hit");
  LlmClient client(ClientMode::replay, dir.path.string());
  CompletionRequest req{"what is the capital of france", 32, 0.0, Purpose::generate};
  const std::string digest = client.request_digest(req);
  std::ofstream(dir.path / (digest + ".json")) << nlohmann::json{{"response", "Paris"}}.dump();
  CHECK(client.complete(req) == "Paris");
}

TEST_CASE("replay miss raises an error naming the digest, never the network") {
  TempDir dir("evokg_fixtures_miss");
  LlmClient client(ClientMode::replay, dir.path.string());
  CompletionRequest req{"unseen prompt", 32, 0.0, Purpose::generate};
  try {
    client.complete(req);
    FAIL("expected FixtureMissError");
  } catch (const FixtureMissError& e) {
    CHECK(e.digest() == client.request_digest(req));
    CHECK(std::string(e.what()).find(e.digest()) != std::string::npos);
  }
}

TEST_CASE("corrupt fixture is a transport error") {
  TempDir dir("evokg_fixtures_corrupt");
  LlmClient client(ClientMode::replay, dir.path.string());
  CompletionRequest req{"prompt", 32, 0.0, Purpose::generate};
  std::ofstream(dir.path / (client.request_digest(req) + ".json")) << "not json";
  CHECK_THROWS_AS(client.complete(req), TransportError);
}

TEST_CASE("record captures a live response and replay then serves it offline") {
  TempDir dir("evokg_fixtures_record");
  CompletionRequest req{"what rtb of tsrc", 32, 0.0, Purpose::generate};
  std::string digest;
  {
    FakeServer server("ans0001");
    LlmClient rec(ClientMode::record, dir.path.string(), server.endpoint);
    CHECK(rec.complete(req) == "ans0001");
    // A second identical call reuses the fixture instead of the network.
    CHECK(rec.complete(req) == "ans0001");
    CHECK(server.calls == 1);
    digest = rec.request_digest(req);
  }
  CHECK(fs::exists(dir.path / (digest + ".json")));
  LlmClient rep(ClientMode::replay, dir.path.string());
  CHECK(rep.complete(req) == "ans0001");
}

TEST_CASE("live mode retries transient failures") {
  FakeServer server("recovered", 2);  // two 500s, then success
  LlmClient client(ClientMode::live, "", server.endpoint);
  CompletionRequest req{"retry me", 16, 0.0, Purpose::generate};
  CHECK(client.complete(req) == "recovered");
  CHECK(server.calls == 3);
}

TEST_CASE("live mode gives up after the retry budget") {
  FakeServer server("never", 100);
  LlmClient client(ClientMode::live, "", server.endpoint);
  CHECK_THROWS_AS(client.complete(CompletionRequest{"doomed", 16, 0.0, Purpose::generate}),
                  TransportError);
  CHECK(server.calls == 3);
}

TEST_CASE("template hashes are stable, non-empty and distinct") {
  const std::string g = prompts::template_hash(prompts::kGenerationTemplate);
  const std::string j = prompts::template_hash(prompts::kJudgeTemplate);
  const std::string l = prompts::template_hash(prompts::kLabelTemplate);
  for (const auto& h : {g, j, l}) CHECK(h.size() == 16);
  CHECK(g != j);
  CHECK(j != l);
  CHECK(g == prompts::template_hash(prompts::kGenerationTemplate));
}

TEST_CASE("generation prompt embeds question and context") {
  const std::string prompt = build_generation_prompt(
      "where does alice work", "alice -[works at]-> acme\n", 3000);
  CHECK(prompt.find("where does alice work") != std::string::npos);
  CHECK(prompt.find("alice -[works at]-> acme") != std::string::npos);
  CHECK(prompt.find("{context}") == std::string::npos);
  CHECK(prompt.find("{question}") == std::string::npos);
}

TEST_CASE("empty context renders the explicit no-knowledge marker") {
  const std::string prompt = build_generation_prompt("q", "", 3000);
  CHECK(prompt.find("(no retrieved knowledge)") != std::string::npos);
}

TEST_CASE("over-budget prompts drop trailing (lowest-priority) lines first") {
  std::string context;
  for (int i = 0; i < 50; ++i)
    context += "entity" + std::to_string(i) + " -[rel]-> tail" + std::to_string(i) + "\n";
  const std::string full = build_generation_prompt("q", context, 10000);
  const std::string trimmed = build_generation_prompt("q", context, 80);
  CHECK(full.find("entity49") != std::string::npos);
  CHECK(trimmed.find("entity0") != std::string::npos);   // best line kept
  CHECK(trimmed.find("entity49") == std::string::npos);  // worst dropped
  CHECK(trimmed.size() < full.size());
}

TEST_CASE("generate_response goes through the client") {
  TempDir dir("evokg_fixtures_gen");
  LlmClient client(ClientMode::replay, dir.path.string());
  CompletionRequest req;
  req.prompt = build_generation_prompt("q1", "a -[r]-> b\n", 3000);
  req.max_tokens = 512;
  req.purpose = Purpose::generate;
  std::ofstream(dir.path / (client.request_digest(req) + ".json"))
      << nlohmann::json{{"response", "b"}}.dump();
  CHECK(generate_response(client, "q1", "a -[r]-> b\n") == "b");
}
