#include "evokg/llm_client.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <httplib.h>
#include <json.hpp>

#include "evokg/text.hpp"

namespace evokg {

namespace {

std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[v & 0xF];
    v >>= 4;
  }
  return out;
}

}  // namespace

std::string_view purpose_name(Purpose p) {
  switch (p) {
    case Purpose::generate: return "generate";
    case Purpose::judge: return "judge";
    case Purpose::label: return "label";
  }
  return "generate";
}

LlmClient::LlmClient(ClientMode mode, std::string fixture_dir, std::string endpoint,
                     std::string api_key, std::string model)
    : mode_(mode),
      fixture_dir_(std::move(fixture_dir)),
      endpoint_(std::move(endpoint)),
      api_key_(std::move(api_key)),
      model_(std::move(model)) {
  if (mode_ != ClientMode::live && fixture_dir_.empty())
    throw std::invalid_argument("record/replay mode requires a fixture directory");
  if (mode_ != ClientMode::replay && endpoint_.empty())
    throw std::invalid_argument("live/record mode requires an endpoint");
}

LlmClient LlmClient::from_env(ClientMode mode, std::string fixture_dir, std::string model) {
  const char* ep = std::getenv("LLM_ENDPOINT");
  const char* key = std::getenv("LLM_API_KEY");
  return LlmClient(mode, std::move(fixture_dir), ep ? ep : "", key ? key : "",
                   std::move(model));
}

CompletionRequest LlmClient::normalized(CompletionRequest req) const {
  if (req.prompt.empty()) throw std::invalid_argument("completion prompt must be non-empty");
  if (req.purpose != Purpose::generate) req.temperature = 0.0;
  return req;
}

std::string LlmClient::request_digest(const CompletionRequest& req) const {
  const CompletionRequest n = normalized(req);
  nlohmann::json j{{"prompt", n.prompt},
                   {"max_tokens", n.max_tokens},
                   {"temperature", n.temperature},
                   {"purpose", purpose_name(n.purpose)},
                   {"model", model_}};
  return hex64(fnv1a64(j.dump()));
}

std::optional<std::string> LlmClient::read_fixture(const std::string& digest) const {
  const auto path = std::filesystem::path(fixture_dir_) / (digest + ".json");
  std::ifstream in(path);
  if (!in) return std::nullopt;
  nlohmann::json j;
  try {
    in >> j;
    return j.at("response").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw TransportError("corrupt fixture " + path.string() + ": " + e.what());
  }
}

void LlmClient::write_fixture(const std::string& digest, const CompletionRequest& req,
                              const std::string& response) const {
  std::filesystem::create_directories(fixture_dir_);
  const auto path = std::filesystem::path(fixture_dir_) / (digest + ".json");
  nlohmann::json j{{"request",
                    {{"prompt", req.prompt},
                     {"max_tokens", req.max_tokens},
                     {"temperature", req.temperature},
                     {"purpose", purpose_name(req.purpose)},
                     {"model", model_}}},
                   {"response", response}};
  std::ofstream out(path, std::ios::binary);
  if (!out) throw TransportError("cannot write fixture " + path.string());
  out << j.dump(2) << '\n';
}

std::string LlmClient::call_live(const CompletionRequest& req) const {
  nlohmann::json body{{"model", model_},
                      {"messages", nlohmann::json::array({nlohmann::json{
                                       {"role", "user"}, {"content", req.prompt}}})},
                      {"temperature", req.temperature},
                      {"max_tokens", req.max_tokens}};
  std::string last_error;
  for (int attempt = 0; attempt <= max_retries_; ++attempt) {
    httplib::Client client(endpoint_);
    client.set_connection_timeout(10);
    client.set_read_timeout(120);
    httplib::Headers headers;
    if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);
    auto res = client.Post("/v1/chat/completions", headers, body.dump(), "application/json");
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status != 200) {
      last_error = "http status " + std::to_string(res->status);
      continue;
    }
    try {
      auto j = nlohmann::json::parse(res->body);
      return j.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      last_error = std::string("bad response body: ") + e.what();
    }
  }
  throw TransportError("completion failed after " + std::to_string(max_retries_ + 1) +
                       " attempts: " + last_error);
}

std::string LlmClient::complete(const CompletionRequest& raw) const {
  const CompletionRequest req = normalized(raw);
  const std::string digest = request_digest(req);
  switch (mode_) {
    case ClientMode::replay: {
      auto fixture = read_fixture(digest);
      if (!fixture) throw FixtureMissError(digest);
      return *fixture;
    }
    case ClientMode::record: {
      if (auto fixture = read_fixture(digest)) return *fixture;
      const std::string response = call_live(req);
      write_fixture(digest, req, response);
      return response;
    }
    case ClientMode::live:
      return call_live(req);
  }
  throw TransportError("unreachable client mode");
}

namespace prompts {

const std::string kGenerationTemplate =
    "You answer questions using the reasoning paths below, extracted from a\n"
    "knowledge graph. Prefer information from the paths; answer concisely\n"
    "with the entity or fact asked for.\n\n"
    "Reasoning paths:\n{context}\n\n"
    "Question: {question}\n"
    "Answer:";

const std::string kJudgeTemplate =
    "You are evaluating how each retrieved reasoning path influenced an\n"
    "answer. The user gave the answer a satisfaction score of {fs} out of 5\n"
    "(4-5 means the answer is correct, 1-2 means incorrect, 3 is neutral).\n\n"
    "Question: {question}\n"
    "Answer: {response}\n\n"
    "Reasoning paths:\n{paths}\n\n"
    "For every path output exactly one line with four fields separated by\n"
    "spaces: the path index, then three numbers in [-1, 1]:\n"
    "supportiveness (did the path provide evidence for the answer, signed\n"
    "by whether the answer was correct), fidelity (was the path actually\n"
    "used by the answer), conflict (does the path contradict the answer or\n"
    "the other paths). Output nothing else.";

const std::string kLabelTemplate =
    "Propose one short relation label that summarizes the composite\n"
    "relation formed by following these relations in order:\n{relations}\n"
    "Reply with the label only.";

std::string template_hash(const std::string& text) {
  return hex64(fnv1a64(text));
}

}  // namespace prompts

namespace {

std::string replace_all(std::string haystack, const std::string& needle,
                        const std::string& value) {
  std::size_t pos = 0;
  while ((pos = haystack.find(needle, pos)) != std::string::npos) {
    haystack.replace(pos, needle.size(), value);
    pos += value.size();
  }
  return haystack;
}

std::size_t whitespace_token_count(const std::string& s) {
  std::istringstream in(s);
  std::string tok;
  std::size_t n = 0;
  while (in >> tok) ++n;
  return n;
}

}  // namespace

std::string build_generation_prompt(const std::string& query_text, const std::string& context,
                                    int prompt_token_budget) {
  // Context lines arrive ordered by priority descending; drop from the
  // end until the prompt fits the budget.
  std::vector<std::string> lines;
  std::istringstream in(context);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) lines.push_back(line);
  }
  auto render = [&](const std::vector<std::string>& ls) {
    std::string ctx;
    for (const auto& l : ls) ctx += l + "\n";
    if (ctx.empty()) ctx = "(no retrieved knowledge)\n";
    return replace_all(replace_all(prompts::kGenerationTemplate, "{context}", ctx), "{question}",
                       query_text);
  };
  std::string prompt = render(lines);
  while (!lines.empty() &&
         whitespace_token_count(prompt) > static_cast<std::size_t>(prompt_token_budget)) {
    lines.pop_back();
    prompt = render(lines);
  }
  return prompt;
}

std::string generate_response(const LlmClient& client, const std::string& query_text,
                              const std::string& context, int prompt_token_budget,
                              int max_tokens) {
  CompletionRequest req;
  req.prompt = build_generation_prompt(query_text, context, prompt_token_budget);
  req.max_tokens = max_tokens;
  req.temperature = 0.0;
  req.purpose = Purpose::generate;
  return client.complete(req);
}

}  // namespace evokg
