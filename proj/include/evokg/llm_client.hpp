#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace evokg {

enum class Purpose { generate, judge, label };

std::string_view purpose_name(Purpose p);

struct CompletionRequest {
  std::string prompt;
  int max_tokens = 512;
  double temperature = 0.0;
  Purpose purpose = Purpose::generate;
};

class TransportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class FixtureMissError : public std::runtime_error {
 public:
  explicit FixtureMissError(const std::string& digest)
      : std::runtime_error("no fixture for request digest " + digest), digest_(digest) {}
  const std::string& digest() const { return digest_; }

 private:
  std::string digest_;
};

enum class ClientMode { live, record, replay };

// Minimal chat-completion client. In replay mode every request must hit
// a fixture; there is never a silent fallback to the network.
class LlmClient {
 public:
  LlmClient(ClientMode mode, std::string fixture_dir = {}, std::string endpoint = {},
            std::string api_key = {}, std::string model = {});

  // Reads LLM_ENDPOINT / LLM_API_KEY; endpoint is required for live and
  // record modes.
  static LlmClient from_env(ClientMode mode, std::string fixture_dir = {},
                            std::string model = {});

  // Judge and label requests always run at temperature 0.
  std::string complete(const CompletionRequest& req) const;

  std::string request_digest(const CompletionRequest& req) const;

  ClientMode mode() const { return mode_; }
  const std::string& model() const { return model_; }

 private:
  ClientMode mode_;
  std::string fixture_dir_;
  std::string endpoint_;
  std::string api_key_;
  std::string model_;
  int max_retries_ = 2;

  std::string call_live(const CompletionRequest& req) const;
  std::optional<std::string> read_fixture(const std::string& digest) const;
  void write_fixture(const std::string& digest, const CompletionRequest& req,
                     const std::string& response) const;
  CompletionRequest normalized(CompletionRequest req) const;
};

namespace prompts {

extern const std::string kGenerationTemplate;
extern const std::string kJudgeTemplate;
extern const std::string kLabelTemplate;

// Content address of a template, recorded in reports.
std::string template_hash(const std::string& text);

}  // namespace prompts

// Assembles the generation prompt (dropping lowest-priority context lines
// first when over the whitespace-token budget) and calls the client.
std::string generate_response(const LlmClient& client, const std::string& query_text,
                              const std::string& context, int prompt_token_budget = 3000,
                              int max_tokens = 512);

std::string build_generation_prompt(const std::string& query_text, const std::string& context,
                                    int prompt_token_budget);

}  // namespace evokg
