#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "schemaprobe/probe_corpus.hpp"
#include "schemaprobe/schema.hpp"

namespace schemaprobe {

enum class TemplateId { kGpt4, kLlama2, kLlama3, kCodeLlama, kSqlCoder, kT5 };

// "gpt4_style", "llama2_style", ...
std::string_view template_id_name(TemplateId id);
// Throws kUnknownTemplate.
TemplateId parse_template_id(std::string_view name);

// Templates that have a Sec variant: gpt4, llama2, llama3.
bool has_defended_variant(TemplateId id);

struct ChatMessage {
  std::string role;  // "system" or "user"
  std::string content;
};

// Schema serialization each template expects: pipe format for t5, DDL
// otherwise.
std::string schema_text_for(TemplateId id, const Schema& schema);

// Throws kEmptyInput for an empty question and kUnknownTemplate when a
// defended prompt is requested for a template without a Sec variant.
std::vector<ChatMessage> render_prompt(TemplateId id, std::string_view schema_text,
                                       std::string_view question, bool defended);

struct EndpointConfig {
  std::string base_url = "http://127.0.0.1:8000";
  std::string model_name;
  TemplateId template_id = TemplateId::kGpt4;
  bool defended = false;
  int timeout_ms = 60000;
  int max_retries = 3;
  std::size_t max_parallel = 4;
  std::string api_key_env_name = "SCHEMA_PROBE_API_KEY";
  double temperature = 0.0;
  int backoff_initial_ms = 500;
  int backoff_max_ms = 8000;

  void validate() const;  // throws kInvalidConfig
};

enum class ExchangeErrorKind { kTimeout, kRateLimited, kHttpError, kAuthMissing, kBadResponse, kNetwork };

std::string_view exchange_error_name(ExchangeErrorKind kind);
std::optional<ExchangeErrorKind> parse_exchange_error(std::string_view name);

struct ExchangeError {
  ExchangeErrorKind kind = ExchangeErrorKind::kNetwork;
  int http_status = 0;
  std::string detail;
};

struct TargetExchange {
  std::int64_t probe_id = 0;
  std::string request_text;
  std::string response_text;  // empty iff error is set
  double latency_ms = 0.0;
  int attempt_count = 0;
  std::optional<ExchangeError> error;

  bool ok() const { return !error.has_value(); }
};

struct ChatResult {
  std::string content;
  int attempts = 0;
  double latency_ms = 0.0;
  std::optional<ExchangeError> error;
};

// OpenAI-compatible chat-completions client. Thread-safe; each call opens its
// own connection.
class ChatClient {
 public:
  explicit ChatClient(EndpointConfig config);

  // POST {base_url}/v1/chat/completions. Retries 429, 5xx and transport
  // failures with exponential backoff. Never throws for transport or HTTP
  // errors; they are reported in the result.
  ChatResult complete(const std::vector<ChatMessage>& messages) const;

  const EndpointConfig& config() const { return config_; }
  std::uint64_t request_count() const { return requests_.load(); }

 private:
  EndpointConfig config_;
  mutable std::atomic<std::uint64_t> requests_{0};
};

// Renders the probe against the configured template and schema, then queries.
TargetExchange query_target(const ChatClient& client, const ProbeInput& probe,
                            std::string_view schema_text);

enum class MockPolicy { kFullLeak, kSamplingLeak, kRefusing };

std::string_view mock_policy_name(MockPolicy policy);
std::optional<MockPolicy> parse_mock_policy(std::string_view name);

struct MockTargetConfig {
  Schema hidden_schema;
  MockPolicy policy = MockPolicy::kSamplingLeak;
  std::size_t tables_per_response = 1;
  std::size_t columns_per_table = 2;
  double refusal_rate = 0.0;
  std::uint64_t seed = 0;

  void validate() const;  // throws kInvalidConfig
};

inline constexpr std::string_view kRefusalText = "N/A";

// Pure in (config, probe.id).
TargetExchange query_mock(const MockTargetConfig& config, const ProbeInput& probe);

// A queryable attack target.
class Target {
 public:
  virtual ~Target() = default;
  virtual TargetExchange query(const ProbeInput& probe) = 0;
  virtual std::size_t max_parallel() const = 0;
};

class MockTarget final : public Target {
 public:
  explicit MockTarget(MockTargetConfig config, std::size_t max_parallel = 4);
  TargetExchange query(const ProbeInput& probe) override;
  std::size_t max_parallel() const override { return max_parallel_; }

 private:
  MockTargetConfig config_;
  std::size_t max_parallel_;
};

class EndpointTarget final : public Target {
 public:
  // schema is the text-to-SQL system's own schema, embedded in every prompt.
  EndpointTarget(EndpointConfig config, const Schema& schema);
  TargetExchange query(const ProbeInput& probe) override;
  std::size_t max_parallel() const override { return client_.config().max_parallel; }

 private:
  ChatClient client_;
  std::string schema_text_;
};

// Runs fn over probes with at most max_parallel in flight. on_done is called
// under a lock as each exchange completes. Probes not started when cancel is
// raised are skipped. Returns exchanges sorted by probe_id.
std::vector<TargetExchange> run_batch(
    const std::vector<ProbeInput>& probes,
    const std::function<TargetExchange(const ProbeInput&)>& fn, std::size_t max_parallel,
    const std::atomic<bool>* cancel = nullptr,
    const std::function<void(const TargetExchange&)>& on_done = {});

}  // namespace schemaprobe
