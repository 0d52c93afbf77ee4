#include <httplib.h>

#include <algorithm>
#include <chrono>
#include <exception>
#include <cstdlib>
#include <mutex>
#include <numeric>
#include <thread>

#include <json.hpp>

#include "schemaprobe/error.hpp"
#include "schemaprobe/gateway.hpp"
#include "schemaprobe/seeded_rng.hpp"

namespace schemaprobe {

using nlohmann::json;

void EndpointConfig::validate() const {
  if (max_parallel < 1) throw Error(ErrorCode::kInvalidConfig, "max_parallel must be >= 1");
  if (timeout_ms <= 0) throw Error(ErrorCode::kInvalidConfig, "timeout_ms must be > 0");
  if (max_retries < 0) throw Error(ErrorCode::kInvalidConfig, "max_retries must be >= 0");
  if (base_url.empty()) throw Error(ErrorCode::kInvalidConfig, "base_url is empty");
  if (api_key_env_name.empty()) throw Error(ErrorCode::kInvalidConfig, "api_key_env_name is empty");
}

std::string_view exchange_error_name(ExchangeErrorKind kind) {
  switch (kind) {
    case ExchangeErrorKind::kTimeout: return "Timeout";
    case ExchangeErrorKind::kRateLimited: return "RateLimited";
    case ExchangeErrorKind::kHttpError: return "HttpError";
    case ExchangeErrorKind::kAuthMissing: return "AuthMissing";
    case ExchangeErrorKind::kBadResponse: return "BadResponse";
    case ExchangeErrorKind::kNetwork: return "Network";
  }
  return "Network";
}

std::optional<ExchangeErrorKind> parse_exchange_error(std::string_view name) {
  for (auto k : {ExchangeErrorKind::kTimeout, ExchangeErrorKind::kRateLimited,
                 ExchangeErrorKind::kHttpError, ExchangeErrorKind::kAuthMissing,
                 ExchangeErrorKind::kBadResponse, ExchangeErrorKind::kNetwork}) {
    if (exchange_error_name(k) == name) return k;
  }
  return std::nullopt;
}

namespace {

struct SplitUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;    // prefix without trailing slash
};

SplitUrl split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  const auto host_begin = scheme_end == std::string::npos ? 0 : scheme_end + 3;
  const auto slash = url.find('/', host_begin);
  SplitUrl out;
  out.origin = slash == std::string::npos ? url : url.substr(0, slash);
  out.path = slash == std::string::npos ? "" : url.substr(slash);
  while (!out.path.empty() && out.path.back() == '/') out.path.pop_back();
  return out;
}

bool retryable(const ExchangeError& e) {
  switch (e.kind) {
    case ExchangeErrorKind::kRateLimited:
    case ExchangeErrorKind::kTimeout:
    case ExchangeErrorKind::kNetwork:
      return true;
    case ExchangeErrorKind::kHttpError:
      return e.http_status >= 500;
    default:
      return false;
  }
}

}  // namespace

ChatClient::ChatClient(EndpointConfig config) : config_(std::move(config)) { config_.validate(); }

ChatResult ChatClient::complete(const std::vector<ChatMessage>& messages) const {
  ChatResult result;
  const auto started = std::chrono::steady_clock::now();
  auto finish = [&] {
    result.latency_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started)
            .count();
    return result;
  };

  const char* key = std::getenv(config_.api_key_env_name.c_str());
  if (key == nullptr || *key == '\0') {
    result.error = ExchangeError{ExchangeErrorKind::kAuthMissing, 0,
                                 "environment variable " + config_.api_key_env_name + " is not set"};
    return finish();
  }

  json body{{"model", config_.model_name}, {"temperature", config_.temperature}};
  body["messages"] = json::array();
  for (const auto& m : messages) body["messages"].push_back({{"role", m.role}, {"content", m.content}});
  const auto payload = body.dump();

  const auto url = split_url(config_.base_url);
  const auto path = url.path + "/v1/chat/completions";
  const httplib::Headers headers{{"Authorization", std::string("Bearer ") + key}};
  const auto timeout = std::chrono::milliseconds(config_.timeout_ms);

  int backoff = config_.backoff_initial_ms;
  for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(std::chrono::milliseconds(backoff));
      backoff = std::min(backoff * 2, config_.backoff_max_ms);
    }
    ++result.attempts;
    ++requests_;

    httplib::Client client(url.origin);
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);
    auto res = client.Post(path, headers, payload, "application/json");

    ExchangeError err;
    if (!res) {
      const auto code = res.error();
      err.kind = code == httplib::Error::ConnectionTimeout || code == httplib::Error::Read
                     ? ExchangeErrorKind::kTimeout
                     : ExchangeErrorKind::kNetwork;
      err.detail = httplib::to_string(code);
    } else if (res->status == 429) {
      err = ExchangeError{ExchangeErrorKind::kRateLimited, 429, res->body};
    } else if (res->status < 200 || res->status >= 300) {
      err = ExchangeError{ExchangeErrorKind::kHttpError, res->status, res->body};
    } else {
      try {
        auto doc = json::parse(res->body);
        const auto& content = doc.at("choices").at(0).at("message").at("content");
        result.content = content.is_null() ? "" : content.get<std::string>();
        if (result.content.empty()) {
          err = ExchangeError{ExchangeErrorKind::kBadResponse, res->status, "empty completion"};
        } else {
          result.error.reset();
          return finish();
        }
      } catch (const json::exception& e) {
        err = ExchangeError{ExchangeErrorKind::kBadResponse, res->status, e.what()};
      }
    }
    result.error = err;
    if (!retryable(err)) break;
  }
  result.content.clear();
  return finish();
}

TargetExchange query_target(const ChatClient& client, const ProbeInput& probe,
                            std::string_view schema_text) {
  TargetExchange ex;
  ex.probe_id = probe.id;
  ex.request_text = probe.text;
  const auto& cfg = client.config();
  auto chat = client.complete(render_prompt(cfg.template_id, schema_text, probe.text, cfg.defended));
  ex.attempt_count = chat.attempts;
  ex.latency_ms = chat.latency_ms;
  if (chat.error) {
    ex.error = chat.error;
  } else {
    ex.response_text = std::move(chat.content);
  }
  return ex;
}

std::string_view mock_policy_name(MockPolicy policy) {
  switch (policy) {
    case MockPolicy::kFullLeak: return "full_leak";
    case MockPolicy::kSamplingLeak: return "sampling_leak";
    case MockPolicy::kRefusing: return "refusing";
  }
  return "sampling_leak";
}

std::optional<MockPolicy> parse_mock_policy(std::string_view name) {
  for (auto p : {MockPolicy::kFullLeak, MockPolicy::kSamplingLeak, MockPolicy::kRefusing}) {
    if (mock_policy_name(p) == name) return p;
  }
  return std::nullopt;
}

void MockTargetConfig::validate() const {
  if (policy != MockPolicy::kFullLeak && (tables_per_response < 1 || columns_per_table < 1)) {
    throw Error(ErrorCode::kInvalidConfig, "sampling parameters must be >= 1");
  }
  if (!(refusal_rate >= 0.0 && refusal_rate <= 1.0)) {
    throw Error(ErrorCode::kInvalidConfig, "refusal_rate must be in [0, 1]");
  }
  if (refusal_rate != 0.0 && policy != MockPolicy::kRefusing) {
    throw Error(ErrorCode::kInvalidConfig, "refusal_rate requires the refusing policy");
  }
}

namespace {

// First k entries of a uniform random permutation of [0, n).
std::vector<std::size_t> sample_indices(SeededRng& rng, std::size_t n, std::size_t k) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  k = std::min(k, n);
  for (std::size_t i = 0; i < k; ++i) std::swap(idx[i], idx[i + rng.below(n - i)]);
  idx.resize(k);
  return idx;
}

std::optional<std::string> literal_for(const std::string& raw_type) {
  const auto type = canonical_type(raw_type);
  if (type == "text") return "'sample'";
  if (type == "int") return "1";
  if (type == "real") return "1.5";
  if (type == "datetime") return "'2020-01-01'";
  if (type == "bool") return "TRUE";
  return std::nullopt;
}

std::string sampled_select(const Schema& schema, const MockTargetConfig& config, SeededRng& rng) {
  const auto& tables = schema.tables();
  std::vector<std::string> selected;
  std::vector<std::string> from;
  std::vector<std::string> where;
  for (auto t : sample_indices(rng, tables.size(), config.tables_per_response)) {
    const auto& table = tables[t];
    const auto tname = quote_identifier_if_needed(table.name);
    from.push_back(tname);
    for (auto c : sample_indices(rng, table.columns.size(), config.columns_per_table)) {
      const auto& column = table.columns[c];
      const auto ref = tname + "." + quote_identifier_if_needed(column.name);
      selected.push_back(ref);
      if (auto lit = literal_for(column.data_type)) where.push_back(ref + " = " + *lit);
    }
  }
  std::string sql = "SELECT ";
  if (selected.empty()) {
    sql += "*";
  } else {
    for (std::size_t i = 0; i < selected.size(); ++i) sql += (i ? ", " : "") + selected[i];
  }
  sql += " FROM ";
  for (std::size_t i = 0; i < from.size(); ++i) sql += (i ? ", " : "") + from[i];
  for (std::size_t i = 0; i < where.size(); ++i) sql += (i ? " AND " : " WHERE ") + where[i];
  return sql + ";";
}

}  // namespace

TargetExchange query_mock(const MockTargetConfig& config, const ProbeInput& probe) {
  TargetExchange ex;
  ex.probe_id = probe.id;
  ex.request_text = probe.text;
  ex.attempt_count = 1;
  SeededRng rng(derive_seed(config.seed, static_cast<std::uint64_t>(probe.id)));
  switch (config.policy) {
    case MockPolicy::kFullLeak:
      ex.response_text = render_ddl(config.hidden_schema);
      break;
    case MockPolicy::kRefusing:
      if (rng.unit() < config.refusal_rate) {
        ex.response_text = std::string(kRefusalText);
        break;
      }
      [[fallthrough]];
    case MockPolicy::kSamplingLeak:
      ex.response_text = config.hidden_schema.empty()
                             ? std::string(kRefusalText)
                             : sampled_select(config.hidden_schema, config, rng);
      break;
  }
  return ex;
}

MockTarget::MockTarget(MockTargetConfig config, std::size_t max_parallel)
    : config_(std::move(config)), max_parallel_(std::max<std::size_t>(1, max_parallel)) {
  config_.validate();
}

TargetExchange MockTarget::query(const ProbeInput& probe) { return query_mock(config_, probe); }

EndpointTarget::EndpointTarget(EndpointConfig config, const Schema& schema)
    : client_(std::move(config)),
      schema_text_(schema_text_for(client_.config().template_id, schema)) {}

TargetExchange EndpointTarget::query(const ProbeInput& probe) {
  return query_target(client_, probe, schema_text_);
}

std::vector<TargetExchange> run_batch(
    const std::vector<ProbeInput>& probes,
    const std::function<TargetExchange(const ProbeInput&)>& fn, std::size_t max_parallel,
    const std::atomic<bool>* cancel, const std::function<void(const TargetExchange&)>& on_done) {
  std::vector<std::optional<TargetExchange>> slots(probes.size());
  std::atomic<std::size_t> next{0};
  std::mutex done_mutex;
  std::exception_ptr failure;
  std::atomic<bool> failed{false};

  auto worker = [&] {
    for (;;) {
      if (failed.load() || (cancel != nullptr && cancel->load())) return;
      const auto i = next.fetch_add(1);
      if (i >= probes.size()) return;
      try {
        auto ex = fn(probes[i]);
        std::lock_guard lock(done_mutex);
        if (on_done) on_done(ex);
        slots[i] = std::move(ex);
      } catch (...) {
        std::lock_guard lock(done_mutex);
        if (!failure) failure = std::current_exception();
        failed = true;
        return;
      }
    }
  };

  const auto workers = std::min(std::max<std::size_t>(1, max_parallel), probes.size());
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  std::vector<TargetExchange> out;
  out.reserve(probes.size());
  for (auto& s : slots) {
    if (s) out.push_back(std::move(*s));
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const auto& a, const auto& b) { return a.probe_id < b.probe_id; });
  return out;
}

}  // namespace schemaprobe
