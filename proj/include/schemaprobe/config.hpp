#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>

#include "schemaprobe/gateway.hpp"
#include "schemaprobe/pipeline.hpp"
#include "schemaprobe/probe_corpus.hpp"

namespace schemaprobe {

// TOML subset: [section] headers, key = value pairs with basic or literal
// strings, integers, floats and booleans, '#' comments. Keys are addressed as
// "section.key"; top-level keys have no prefix. Errors are kInvalidConfig
// with "source:line: message".
class ConfigDocument {
 public:
  static ConfigDocument parse(std::string_view text, std::string source = "<config>");
  static ConfigDocument load(const std::filesystem::path& path);

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  std::optional<std::string> get_string(const std::string& key) const;
  std::optional<std::int64_t> get_int(const std::string& key) const;
  std::optional<std::uint64_t> get_uint(const std::string& key) const;
  std::optional<double> get_double(const std::string& key) const;
  std::optional<bool> get_bool(const std::string& key) const;

  // Throws on the first key outside known, reporting its line.
  void require_known(const std::set<std::string>& known) const;
  // "source:line" of a key, for error messages.
  std::string where(const std::string& key) const;

 private:
  enum class Kind { kString, kInteger, kFloat, kBool };
  struct Value {
    Kind kind;
    std::string text;
    int line;
  };
  const Value* find(const std::string& key, Kind expected, std::string_view expected_name) const;

  std::string source_;
  std::map<std::string, Value> values_;
};

enum class TargetKind { kMock, kEndpoint };

std::string_view target_kind_name(TargetKind kind);
std::optional<TargetKind> parse_target_kind(std::string_view name);
std::string_view dataset_format_name(DatasetFormat format);
std::optional<DatasetFormat> parse_dataset_format(std::string_view name);

// Everything an attack run needs, before CLI overrides.
struct RunSettings {
  AttackConfig attack;
  std::filesystem::path dataset;
  DatasetFormat format = DatasetFormat::kTablesJson;
  TargetKind target = TargetKind::kMock;
  std::filesystem::path out;
  std::string label;  // attacked-model label in reports
  std::size_t max_parallel_dbs = 2;

  MockPolicy mock_policy = MockPolicy::kSamplingLeak;
  std::size_t tables_per_response = 1;
  std::size_t columns_per_table = 2;
  double refusal_rate = 0.0;

  EndpointConfig endpoint;
  EndpointConfig surrogate_endpoint;

  static const std::set<std::string>& known_keys();
  // Overlays every key present in the document.
  void apply(const ConfigDocument& doc);
  void validate() const;  // throws kInvalidConfig

  // Target description without secrets; part of the run id.
  std::string target_snapshot() const;
  // Flat key/value view for manifests and report metadata.
  std::map<std::string, std::string> describe() const;
  std::string effective_label() const;
};

}  // namespace schemaprobe
