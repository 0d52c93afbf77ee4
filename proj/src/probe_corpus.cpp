#include "schemaprobe/probe_corpus.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "schemaprobe/error.hpp"
#include "schemaprobe/seeded_rng.hpp"
#include "schemaprobe/sql_extract.hpp"

namespace schemaprobe {

using nlohmann::json;

std::string_view probe_kind_name(ProbeKind kind) {
  switch (kind) {
    case ProbeKind::kRandom: return "random";
    case ProbeKind::kAdversarial: return "adversarial";
    case ProbeKind::kGenerated: return "generated";
  }
  return "random";
}

std::optional<ProbeKind> parse_probe_kind(std::string_view name) {
  if (name == "random") return ProbeKind::kRandom;
  if (name == "adversarial") return ProbeKind::kAdversarial;
  if (name == "generated") return ProbeKind::kGenerated;
  return std::nullopt;
}

std::string_view step1_mode_name(Step1Mode mode) {
  switch (mode) {
    case Step1Mode::kFull: return "full";
    case Step1Mode::kZeroKnowledge: return "zero_knowledge";
    case Step1Mode::kBaseline: return "baseline";
  }
  return "full";
}

std::vector<ProbeInput> generate_random_probes(std::size_t count, std::uint64_t seed,
                                               const RandomProbeParams& params,
                                               std::int64_t first_id) {
  if (params.charset.empty() || params.min_length == 0 || params.max_length < params.min_length) {
    throw Error(ErrorCode::kInvalidConfig, "random probe parameters out of range");
  }
  SeededRng rng(derive_seed(seed, fnv1a64("random-probes")));
  std::vector<ProbeInput> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const auto span = params.max_length - params.min_length + 1;
    const auto length = params.min_length + rng.below(span);
    std::string text(length, ' ');
    for (auto& c : text) c = params.charset[rng.below(params.charset.size())];
    // Keep the probe visibly non-blank at both ends.
    for (char* end : {&text.front(), &text.back()}) {
      while (*end == ' ') *end = params.charset[rng.below(params.charset.size())];
    }
    out.push_back(ProbeInput{first_id + static_cast<std::int64_t>(i), ProbeKind::kRandom,
                             std::move(text), 0});
  }
  return out;
}

std::vector<ProbeInput> load_adversarial_bank(const std::filesystem::path& path, ProbeKind kind) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kMissingFile, path.string());
  std::vector<ProbeInput> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    out.push_back(ProbeInput{static_cast<std::int64_t>(out.size() + 1), kind, line, 0});
  }
  if (out.empty()) throw Error(ErrorCode::kEmptyBank, path.string());
  return out;
}

ProbeBanks ProbeBanks::load_default(const std::filesystem::path& data_dir) {
  ProbeBanks banks;
  banks.adversarial = load_adversarial_bank(data_dir / "probes" / "initial_queries.txt");
  banks.zero_knowledge =
      load_adversarial_bank(data_dir / "probes" / "zero_knowledge.txt", ProbeKind::kRandom);
  return banks;
}

std::vector<ProbeInput> compose_step1_inputs(Step1Mode mode, std::size_t input_size,
                                             std::uint64_t seed, const ProbeBanks& banks) {
  if (input_size == 0) throw Error(ErrorCode::kInvalidConfig, "input_size must be >= 1");
  if (mode == Step1Mode::kBaseline) {
    return {ProbeInput{1, ProbeKind::kAdversarial, std::string(kBaselineProbe), 0}};
  }
  const auto& bank = mode == Step1Mode::kFull ? banks.adversarial : banks.zero_knowledge;
  std::vector<ProbeInput> out;
  const auto from_bank = std::min(bank.size(), input_size);
  for (std::size_t i = 0; i < from_bank; ++i) {
    auto probe = bank[i];
    probe.id = static_cast<std::int64_t>(i + 1);
    probe.cycle = 0;
    out.push_back(std::move(probe));
  }
  auto fill = generate_random_probes(input_size - from_bank, seed, banks.random,
                                     static_cast<std::int64_t>(from_bank + 1));
  std::move(fill.begin(), fill.end(), std::back_inserter(out));
  return out;
}

std::string_view size_class_name(SizeClass size) {
  switch (size) {
    case SizeClass::kSmall: return "small";
    case SizeClass::kMedium: return "medium";
    case SizeClass::kLarge: return "large";
  }
  return "small";
}

SizeClass size_class_for(std::size_t table_count) {
  if (table_count >= 10) return SizeClass::kLarge;
  if (table_count >= 5) return SizeClass::kMedium;
  return SizeClass::kSmall;
}

const Schema* DatasetBundle::find(std::string_view db_id) const {
  const auto i = index_of(db_id);
  return i == std::string::npos ? nullptr : &schemas[i];
}

std::size_t DatasetBundle::index_of(std::string_view db_id) const {
  for (std::size_t i = 0; i < schemas.size(); ++i) {
    if (schemas[i].db_id() == db_id) return i;
  }
  return std::string::npos;
}

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kMissingFile, path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

[[noreturn]] void format_error(const std::filesystem::path& path, std::size_t offset,
                               const std::string& what) {
  throw Error(ErrorCode::kSchemaFormatError,
              path.string() + ":" + std::to_string(offset) + ": " + what);
}

void add_schema(DatasetBundle& bundle, Schema schema, std::set<std::string>& seen,
                const std::filesystem::path& path) {
  if (schema.db_id().empty()) format_error(path, 0, "empty db_id");
  if (!seen.insert(schema.db_id()).second) {
    throw Error(ErrorCode::kDuplicateDbId, path.string() + ": " + schema.db_id());
  }
  bundle.size_classes.push_back(size_class_for(schema.tables().size()));
  bundle.schemas.push_back(std::move(schema));
}

DatasetBundle load_tables_json(const std::filesystem::path& path) {
  const auto text = read_file(path);
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    format_error(path, e.byte, e.what());
  }
  if (!doc.is_array()) format_error(path, 0, "expected a top-level array");

  DatasetBundle bundle;
  bundle.name = path.stem().string();
  std::set<std::string> seen;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const auto& db = doc[i];
    // Structural errors report the database's index in the array as offset.
    try {
      Schema schema(db.at("db_id").get<std::string>());
      const auto& table_names = db.at("table_names_original");
      const auto& columns = db.at("column_names_original");
      const auto& types = db.at("column_types");
      if (types.size() != columns.size()) {
        format_error(path, i, "column_types and column_names_original differ in length");
      }
      for (const auto& name : table_names) schema.add_table(name.get<std::string>());
      for (std::size_t c = 0; c < columns.size(); ++c) {
        const auto index = columns[c].at(0).get<int>();
        if (index < 0) continue;  // the "*" wildcard
        if (static_cast<std::size_t>(index) >= table_names.size()) {
          format_error(path, i, "column table index out of range");
        }
        schema.add_column(table_names[index].get<std::string>(),
                          ColumnDef{columns[c].at(1).get<std::string>(), types[c].get<std::string>()});
      }
      schema.tag_all(Stage::kGroundTruth);
      add_schema(bundle, std::move(schema), seen, path);
    } catch (const json::exception& e) {
      format_error(path, i, e.what());
    }
  }
  return bundle;
}

DatasetBundle load_ddl_dir(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw Error(ErrorCode::kMissingFile, dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".sql") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  DatasetBundle bundle;
  bundle.name = dir.filename().string();
  std::set<std::string> seen;
  for (const auto& file : files) {
    const auto text = read_file(file);
    std::vector<ExtractionResult> results;
    for (const auto& stmt : split_statements(text)) {
      if (stmt.kind != StatementKind::kCreateTable) continue;
      auto r = extract_from_create(stmt);
      if (r.skipped_statements > 0) {
        const auto offset = text.find(stmt.raw);
        format_error(file, offset == std::string::npos ? 0 : offset, "malformed CREATE TABLE");
      }
      results.push_back(std::move(r));
    }
    // Keep file order rather than the merge's sorted order.
    Schema schema(file.stem().string());
    for (const auto& r : results) {
      for (const auto& t : r.schema.tables()) schema.add_table(t);
    }
    schema.tag_all(Stage::kGroundTruth);
    add_schema(bundle, std::move(schema), seen, file);
  }
  return bundle;
}

}  // namespace

DatasetBundle load_dataset(const std::filesystem::path& path, DatasetFormat format) {
  return format == DatasetFormat::kTablesJson ? load_tables_json(path) : load_ddl_dir(path);
}

void write_ddl_dir(const DatasetBundle& bundle, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& schema : bundle.schemas) {
    std::ofstream out(dir / (schema.db_id() + ".sql"), std::ios::binary);
    if (!out) throw Error(ErrorCode::kIoError, (dir / (schema.db_id() + ".sql")).string());
    out << render_ddl(schema);
  }
}

std::string to_tables_json(const DatasetBundle& bundle) {
  json doc = json::array();
  for (const auto& schema : bundle.schemas) {
    json table_names = json::array();
    json columns = json::array({json::array({-1, "*"})});
    json types = json::array({"text"});
    for (std::size_t t = 0; t < schema.tables().size(); ++t) {
      const auto& table = schema.tables()[t];
      table_names.push_back(table.name);
      for (const auto& column : table.columns) {
        columns.push_back(json::array({static_cast<int>(t), column.name}));
        types.push_back(column.data_type);
      }
    }
    doc.push_back(json{{"db_id", schema.db_id()},
                       {"table_names_original", table_names},
                       {"column_names_original", columns},
                       {"column_types", types}});
  }
  return doc.dump(1) + "\n";
}

}  // namespace schemaprobe
