#include "schemaprobe/config.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "schemaprobe/error.hpp"

namespace schemaprobe {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

bool is_bare_key(std::string_view key) {
  if (key.empty()) return false;
  for (char c : key) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-')) return false;
  }
  return true;
}

[[noreturn]] void fail(const std::string& source, int line, const std::string& message) {
  throw Error(ErrorCode::kInvalidConfig, source + ":" + std::to_string(line) + ": " + message);
}

}  // namespace

ConfigDocument ConfigDocument::parse(std::string_view text, std::string source) {
  ConfigDocument doc;
  doc.source_ = std::move(source);
  std::string section;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    auto line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    if (line[0] == '[') {
      const auto close = line.find(']');
      if (close == std::string::npos) fail(doc.source_, line_no, "unterminated section header");
      auto rest = trim(std::string_view(line).substr(close + 1));
      if (!rest.empty() && rest[0] != '#') fail(doc.source_, line_no, "text after section header");
      section = trim(std::string_view(line).substr(1, close - 1));
      if (!is_bare_key(section)) fail(doc.source_, line_no, "invalid section name");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail(doc.source_, line_no, "expected key = value");
    const auto key = trim(std::string_view(line).substr(0, eq));
    if (!is_bare_key(key)) fail(doc.source_, line_no, "invalid key '" + key + "'");
    auto value_text = trim(std::string_view(line).substr(eq + 1));
    if (value_text.empty()) fail(doc.source_, line_no, "missing value for '" + key + "'");

    Value value{Kind::kString, {}, line_no};
    std::string after;
    if (value_text[0] == '"') {
      std::size_t i = 1;
      bool closed = false;
      for (; i < value_text.size(); ++i) {
        const char c = value_text[i];
        if (c == '"') {
          closed = true;
          break;
        }
        if (c == '\\') {
          if (++i >= value_text.size()) break;
          switch (value_text[i]) {
            case 'n': value.text += '\n'; break;
            case 't': value.text += '\t'; break;
            case '"': value.text += '"'; break;
            case '\\': value.text += '\\'; break;
            default: fail(doc.source_, line_no, "unsupported escape sequence");
          }
          continue;
        }
        value.text += c;
      }
      if (!closed) fail(doc.source_, line_no, "unterminated string");
      after = trim(std::string_view(value_text).substr(i + 1));
    } else if (value_text[0] == '\'') {
      const auto close = value_text.find('\'', 1);
      if (close == std::string::npos) fail(doc.source_, line_no, "unterminated string");
      value.text = value_text.substr(1, close - 1);
      after = trim(std::string_view(value_text).substr(close + 1));
    } else {
      const auto hash = value_text.find('#');
      auto bare = trim(std::string_view(value_text).substr(0, hash));
      if (hash != std::string::npos) after = "#";
      std::string digits;
      for (char c : bare) {
        if (c != '_') digits += c;
      }
      if (bare == "true" || bare == "false") {
        value.kind = Kind::kBool;
        value.text = bare;
      } else {
        std::int64_t iv = 0;
        std::uint64_t uv = 0;
        double dv = 0;
        const auto* b = digits.data();
        const auto* e = digits.data() + digits.size();
        if (!digits.empty() && (std::from_chars(b, e, iv).ptr == e || std::from_chars(b, e, uv).ptr == e)) {
          value.kind = Kind::kInteger;
        } else if (!digits.empty() && std::from_chars(b, e, dv).ptr == e) {
          value.kind = Kind::kFloat;
        } else {
          fail(doc.source_, line_no, "cannot parse value '" + bare + "' (strings need quotes)");
        }
        value.text = digits;
      }
    }
    if (!after.empty() && after[0] != '#') fail(doc.source_, line_no, "unexpected text after value");

    const auto full = section.empty() ? key : section + "." + key;
    if (doc.values_.count(full)) fail(doc.source_, line_no, "duplicate key '" + full + "'");
    doc.values_.emplace(full, std::move(value));
  }
  return doc;
}

ConfigDocument ConfigDocument::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kMissingFile, path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str(), path.string());
}

std::string ConfigDocument::where(const std::string& key) const {
  const auto it = values_.find(key);
  return source_ + ":" + (it == values_.end() ? std::string("?") : std::to_string(it->second.line));
}

const ConfigDocument::Value* ConfigDocument::find(const std::string& key, Kind expected,
                                                  std::string_view expected_name) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return nullptr;
  const bool ok = it->second.kind == expected ||
                  (expected == Kind::kFloat && it->second.kind == Kind::kInteger);
  if (!ok) fail(source_, it->second.line, "'" + key + "' expects " + std::string(expected_name));
  return &it->second;
}

std::optional<std::string> ConfigDocument::get_string(const std::string& key) const {
  const auto* v = find(key, Kind::kString, "a string");
  if (!v) return std::nullopt;
  return v->text;
}

std::optional<std::int64_t> ConfigDocument::get_int(const std::string& key) const {
  const auto* v = find(key, Kind::kInteger, "an integer");
  if (!v) return std::nullopt;
  std::int64_t out = 0;
  const auto* e = v->text.data() + v->text.size();
  if (std::from_chars(v->text.data(), e, out).ptr != e) fail(source_, v->line, "'" + key + "' is out of range");
  return out;
}

std::optional<std::uint64_t> ConfigDocument::get_uint(const std::string& key) const {
  const auto* v = find(key, Kind::kInteger, "a non-negative integer");
  if (!v) return std::nullopt;
  std::uint64_t out = 0;
  const auto* e = v->text.data() + v->text.size();
  if (std::from_chars(v->text.data(), e, out).ptr != e) {
    fail(source_, v->line, "'" + key + "' expects a non-negative integer");
  }
  return out;
}

std::optional<double> ConfigDocument::get_double(const std::string& key) const {
  const auto* v = find(key, Kind::kFloat, "a number");
  if (!v) return std::nullopt;
  double out = 0;
  std::from_chars(v->text.data(), v->text.data() + v->text.size(), out);
  return out;
}

std::optional<bool> ConfigDocument::get_bool(const std::string& key) const {
  const auto* v = find(key, Kind::kBool, "true or false");
  if (!v) return std::nullopt;
  return v->text == "true";
}

void ConfigDocument::require_known(const std::set<std::string>& known) const {
  for (const auto& [key, value] : values_) {
    if (!known.count(key)) fail(source_, value.line, "unknown key '" + key + "'");
  }
}

std::string_view target_kind_name(TargetKind kind) {
  return kind == TargetKind::kMock ? "mock" : "endpoint";
}

std::optional<TargetKind> parse_target_kind(std::string_view name) {
  if (name == "mock") return TargetKind::kMock;
  if (name == "endpoint") return TargetKind::kEndpoint;
  return std::nullopt;
}

std::string_view dataset_format_name(DatasetFormat format) {
  return format == DatasetFormat::kTablesJson ? "tables_json" : "ddl_dir";
}

std::optional<DatasetFormat> parse_dataset_format(std::string_view name) {
  if (name == "tables_json") return DatasetFormat::kTablesJson;
  if (name == "ddl_dir") return DatasetFormat::kDdlDir;
  return std::nullopt;
}

const std::set<std::string>& RunSettings::known_keys() {
  static const std::set<std::string> keys = [] {
    std::set<std::string> k{"mode",  "inputs",   "input_size", "cycles", "questions_per_cycle",
                            "seed",  "surrogate", "max_parallel", "max_parallel_dbs", "dataset",
                            "format", "target",  "out",        "label",
                            "mock.policy", "mock.tables_per_response", "mock.columns_per_table",
                            "mock.refusal_rate"};
    for (const auto* section : {"endpoint", "surrogate_endpoint"}) {
      for (const auto* key : {"base_url", "model_name", "timeout_ms", "max_retries", "max_parallel",
                              "api_key_env_name", "temperature", "backoff_initial_ms",
                              "backoff_max_ms"}) {
        k.insert(std::string(section) + "." + key);
      }
    }
    k.insert("endpoint.template_id");
    k.insert("endpoint.defended");
    return k;
  }();
  return keys;
}

namespace {

template <typename T, typename Parse>
void apply_enum(const ConfigDocument& doc, const std::string& key, T& out, Parse parse) {
  if (auto v = doc.get_string(key)) {
    auto parsed = parse(*v);
    if (!parsed) {
      throw Error(ErrorCode::kInvalidConfig, doc.where(key) + ": invalid value '" + *v + "' for '" + key + "'");
    }
    out = *parsed;
  }
}

template <typename T>
void apply_count(const ConfigDocument& doc, const std::string& key, T& out) {
  if (auto v = doc.get_int(key)) {
    if (*v < 0) throw Error(ErrorCode::kInvalidConfig, doc.where(key) + ": '" + key + "' must be >= 0");
    out = static_cast<T>(*v);
  }
}

void apply_endpoint(const ConfigDocument& doc, const std::string& section, EndpointConfig& e) {
  if (auto v = doc.get_string(section + ".base_url")) e.base_url = *v;
  if (auto v = doc.get_string(section + ".model_name")) e.model_name = *v;
  if (auto v = doc.get_string(section + ".api_key_env_name")) e.api_key_env_name = *v;
  if (auto v = doc.get_double(section + ".temperature")) e.temperature = *v;
  if (auto v = doc.get_bool(section + ".defended")) e.defended = *v;
  apply_count(doc, section + ".timeout_ms", e.timeout_ms);
  apply_count(doc, section + ".max_retries", e.max_retries);
  apply_count(doc, section + ".max_parallel", e.max_parallel);
  apply_count(doc, section + ".backoff_initial_ms", e.backoff_initial_ms);
  apply_count(doc, section + ".backoff_max_ms", e.backoff_max_ms);
  if (auto v = doc.get_string(section + ".template_id")) {
    try {
      e.template_id = parse_template_id(*v);
    } catch (const Error&) {
      throw Error(ErrorCode::kInvalidConfig,
                  doc.where(section + ".template_id") + ": unknown template '" + *v + "'");
    }
  }
}

std::optional<Step1Mode> parse_inputs(std::string_view name) {
  if (name == "full") return Step1Mode::kFull;
  if (name == "zero_knowledge") return Step1Mode::kZeroKnowledge;
  return std::nullopt;
}

}  // namespace

void RunSettings::apply(const ConfigDocument& doc) {
  doc.require_known(known_keys());
  apply_enum(doc, "mode", attack.mode, parse_attack_mode);
  apply_enum(doc, "inputs", attack.inputs, parse_inputs);
  apply_enum(doc, "surrogate", attack.surrogate, parse_surrogate_backend);
  apply_enum(doc, "format", format, parse_dataset_format);
  apply_enum(doc, "target", target, parse_target_kind);
  apply_enum(doc, "mock.policy", mock_policy, parse_mock_policy);
  apply_count(doc, "input_size", attack.input_size);
  apply_count(doc, "cycles", attack.cycles);
  apply_count(doc, "questions_per_cycle", attack.questions_per_cycle);
  apply_count(doc, "max_parallel", attack.max_parallel);
  apply_count(doc, "max_parallel_dbs", max_parallel_dbs);
  apply_count(doc, "mock.tables_per_response", tables_per_response);
  apply_count(doc, "mock.columns_per_table", columns_per_table);
  if (auto v = doc.get_uint("seed")) attack.seed = *v;
  if (auto v = doc.get_double("mock.refusal_rate")) refusal_rate = *v;
  if (auto v = doc.get_string("dataset")) dataset = *v;
  if (auto v = doc.get_string("out")) out = *v;
  if (auto v = doc.get_string("label")) label = *v;
  apply_endpoint(doc, "endpoint", endpoint);
  apply_endpoint(doc, "surrogate_endpoint", surrogate_endpoint);
}

void RunSettings::validate() const {
  attack.validate();
  if (dataset.empty()) throw Error(ErrorCode::kInvalidConfig, "dataset is required");
  if (out.empty()) throw Error(ErrorCode::kInvalidConfig, "out is required");
  if (max_parallel_dbs < 1) throw Error(ErrorCode::kInvalidConfig, "max_parallel_dbs must be >= 1");
  if (target == TargetKind::kMock) {
    MockTargetConfig probe;
    probe.policy = mock_policy;
    probe.tables_per_response = tables_per_response;
    probe.columns_per_table = columns_per_table;
    probe.refusal_rate = refusal_rate;
    probe.validate();
  } else {
    endpoint.validate();
    if (endpoint.defended && !has_defended_variant(endpoint.template_id)) {
      throw Error(ErrorCode::kUnknownTemplate,
                  std::string(template_id_name(endpoint.template_id)) + " has no defended variant");
    }
  }
  if (attack.surrogate == SurrogateBackend::kLlm) surrogate_endpoint.validate();
}

std::string RunSettings::target_snapshot() const {
  nlohmann::json j;
  j["kind"] = target_kind_name(target);
  if (target == TargetKind::kMock) {
    j["policy"] = mock_policy_name(mock_policy);
    j["tables_per_response"] = tables_per_response;
    j["columns_per_table"] = columns_per_table;
    j["refusal_rate"] = refusal_rate;
  } else {
    j["base_url"] = endpoint.base_url;
    j["model_name"] = endpoint.model_name;
    j["template_id"] = template_id_name(endpoint.template_id);
    j["defended"] = endpoint.defended;
    j["temperature"] = endpoint.temperature;
  }
  return j.dump();
}

std::string RunSettings::effective_label() const {
  if (!label.empty()) return label;
  if (target == TargetKind::kMock) return "mock:" + std::string(mock_policy_name(mock_policy));
  auto name = endpoint.model_name.empty() ? std::string(template_id_name(endpoint.template_id))
                                          : endpoint.model_name;
  return endpoint.defended ? name + " (Sec)" : name;
}

std::map<std::string, std::string> RunSettings::describe() const {
  std::map<std::string, std::string> d{
      {"mode", std::string(attack_mode_name(attack.mode))},
      {"inputs", std::string(step1_mode_name(attack.inputs))},
      {"input_size", std::to_string(attack.input_size)},
      {"cycles", std::to_string(attack.cycles)},
      {"questions_per_cycle", std::to_string(attack.questions_per_cycle)},
      {"seed", std::to_string(attack.seed)},
      {"surrogate", std::string(surrogate_backend_name(attack.surrogate))},
      {"format", std::string(dataset_format_name(format))},
      {"target_config", target_snapshot()}};
  if (attack.surrogate == SurrogateBackend::kLlm) {
    d["surrogate_endpoint"] = surrogate_endpoint.base_url + " " + surrogate_endpoint.model_name;
  }
  return d;
}

}  // namespace schemaprobe
