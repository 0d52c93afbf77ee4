#include <CLI11.hpp>
#include <json.hpp>
#include <openssl/evp.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "schemaprobe/config.hpp"
#include "schemaprobe/error.hpp"
#include "schemaprobe/pipeline.hpp"
#include "schemaprobe/report.hpp"
#include "schemaprobe/seeded_rng.hpp"
#include "schemaprobe/sql_extract.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace schemaprobe;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFatal = 1;
constexpr int kExitPartial = 2;

std::atomic<bool> g_cancel{false};

extern "C" void on_sigint(int) { g_cancel.store(true); }

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kMissingFile, path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const fs::path& path, const std::string& data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << data;
  out.flush();
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
}

std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int size = 0;
  EVP_Digest(data.data(), data.size(), digest, &size, EVP_sha256(), nullptr);
  std::string out;
  char buf[3];
  for (unsigned int i = 0; i < size; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", digest[i]);
    out += buf;
  }
  return out;
}

// Files are hashed by content; directories by sorted relative names and contents.
std::string sha256_path(const fs::path& path) {
  if (!fs::is_directory(path)) return sha256_hex(read_file(path));
  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(path)) {
    if (entry.is_regular_file()) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::string joined;
  for (const auto& f : files) {
    joined += fs::relative(f, path).generic_string() + "\n" + sha256_hex(read_file(f)) + "\n";
  }
  return sha256_hex(joined);
}

std::string utc_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

template <typename T, typename Parse>
T parse_or_throw(const std::string& value, Parse parse, const char* what) {
  auto parsed = parse(value);
  if (!parsed) throw Error(ErrorCode::kInvalidConfig, std::string("invalid ") + what + " '" + value + "'");
  return *parsed;
}

std::optional<Step1Mode> parse_inputs(std::string_view name) {
  if (name == "full") return Step1Mode::kFull;
  if (name == "zero_knowledge") return Step1Mode::kZeroKnowledge;
  return std::nullopt;
}

struct AttackFlags {
  std::string config;
  std::optional<std::string> mode, inputs, dataset, format, target, surrogate, out, label;
  std::optional<std::string> mock_policy, base_url, model, template_id, surrogate_url, surrogate_model;
  std::optional<std::size_t> input_size, questions, max_parallel, max_parallel_dbs;
  std::optional<std::size_t> tables_per_response, columns_per_table;
  std::optional<int> cycles;
  std::optional<std::uint64_t> seed;
  std::optional<double> refusal_rate;
  bool defended = false;
  bool resume = false;
  bool force = false;
  std::string data_dir = SCHEMAPROBE_DATA_DIR;
};

RunSettings resolve_settings(const AttackFlags& f) {
  RunSettings s;
  if (!f.config.empty()) s.apply(ConfigDocument::load(f.config));
  if (f.mode) s.attack.mode = parse_or_throw<AttackMode>(*f.mode, parse_attack_mode, "mode");
  if (f.inputs) s.attack.inputs = parse_or_throw<Step1Mode>(*f.inputs, parse_inputs, "inputs");
  if (f.surrogate) {
    s.attack.surrogate = parse_or_throw<SurrogateBackend>(*f.surrogate, parse_surrogate_backend, "surrogate");
  }
  if (f.format) s.format = parse_or_throw<DatasetFormat>(*f.format, parse_dataset_format, "format");
  if (f.target) s.target = parse_or_throw<TargetKind>(*f.target, parse_target_kind, "target");
  if (f.mock_policy) s.mock_policy = parse_or_throw<MockPolicy>(*f.mock_policy, parse_mock_policy, "mock policy");
  if (f.dataset) s.dataset = *f.dataset;
  if (f.out) s.out = *f.out;
  if (f.label) s.label = *f.label;
  if (f.input_size) s.attack.input_size = *f.input_size;
  if (f.cycles) s.attack.cycles = *f.cycles;
  if (f.questions) s.attack.questions_per_cycle = *f.questions;
  if (f.seed) s.attack.seed = *f.seed;
  if (f.max_parallel) {
    s.attack.max_parallel = *f.max_parallel;
    s.endpoint.max_parallel = *f.max_parallel;
  }
  if (f.max_parallel_dbs) s.max_parallel_dbs = *f.max_parallel_dbs;
  if (f.tables_per_response) s.tables_per_response = *f.tables_per_response;
  if (f.columns_per_table) s.columns_per_table = *f.columns_per_table;
  if (f.refusal_rate) s.refusal_rate = *f.refusal_rate;
  if (f.base_url) s.endpoint.base_url = *f.base_url;
  if (f.model) s.endpoint.model_name = *f.model;
  if (f.template_id) s.endpoint.template_id = parse_template_id(*f.template_id);
  if (f.surrogate_url) s.surrogate_endpoint.base_url = *f.surrogate_url;
  if (f.surrogate_model) s.surrogate_endpoint.model_name = *f.surrogate_model;
  if (f.defended) {
    if (s.target == TargetKind::kMock) {
      throw Error(ErrorCode::kInvalidConfig,
                  "--defended applies to endpoint targets; model a defended mock with "
                  "--mock-policy refusing --refusal-rate R");
    }
    s.endpoint.defended = true;
  }
  s.validate();
  return s;
}

std::string campaign_run_id(const RunSettings& s, const std::string& dataset_hash) {
  json j = s.describe();
  j["dataset_sha256"] = dataset_hash;
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(j.dump())));
  return buf;
}

fs::path transcripts_dir(const fs::path& out) { return out / "transcripts"; }

void write_reports(const CampaignReport& report, const fs::path& dir, const std::string& stem) {
  for (auto format : {ReportFormat::kJson, ReportFormat::kMarkdown, ReportFormat::kCsv}) {
    write_file(dir / (stem + ".report." + std::string(report_format_extension(format))),
               render_report(report, format));
  }
}

SynonymTable load_synonyms(const fs::path& data_dir) {
  const auto path = data_dir / "synonyms.tsv";
  return fs::exists(path) ? SynonymTable::load(path) : SynonymTable{};
}

std::vector<AttackTranscript> load_transcripts(const fs::path& dir) {
  std::vector<fs::path> files;
  if (fs::is_directory(dir)) {
    for (const auto& entry : fs::directory_iterator(dir)) {
      if (entry.is_regular_file() && entry.path().extension() == ".jsonl") files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  std::vector<AttackTranscript> out;
  for (const auto& f : files) out.push_back(load_transcript(f));
  return out;
}

int cmd_attack(const AttackFlags& flags, const std::vector<std::string>& argv) {
  const auto settings = resolve_settings(flags);
  const auto bundle = load_dataset(settings.dataset, settings.format);
  const fs::path data_dir = flags.data_dir;
  const auto banks = ProbeBanks::load_default(data_dir);

  json corpus{{"dataset", sha256_path(settings.dataset)},
              {"initial_queries", sha256_path(data_dir / "probes" / "initial_queries.txt")},
              {"zero_knowledge", sha256_path(data_dir / "probes" / "zero_knowledge.txt")}};
  if (fs::exists(data_dir / "synonyms.tsv")) corpus["synonyms"] = sha256_path(data_dir / "synonyms.tsv");
  const auto run_id = campaign_run_id(settings, corpus["dataset"].get<std::string>());

  ReportMeta meta{run_id, settings.effective_label(), bundle.name, settings.describe()};
  json manifest{
      {"run_id", run_id},
      {"command_line", argv},
      {"config_file", flags.config.empty() ? json(nullptr)
                                           : json{{"path", flags.config},
                                                  {"sha256", sha256_path(flags.config)}}},
      {"corpus_sha256", corpus},
      {"seed", settings.attack.seed},
      {"input_size", settings.attack.input_size},
      {"dataset", {{"path", settings.dataset.string()}, {"format", dataset_format_name(settings.format)}}},
      {"tool_version", SCHEMAPROBE_VERSION},
      {"started_at", utc_now()},
      {"report_meta", {{"run_id", meta.run_id}, {"target", meta.target}, {"dataset", meta.dataset},
                       {"settings", meta.settings}}}};

  fs::create_directories(settings.out);
  const auto manifest_path = settings.out / "manifest.json";
  if (fs::exists(manifest_path)) {
    const auto existing = json::parse(read_file(manifest_path));
    if (flags.resume) {
      if (existing.value("run_id", "") != run_id) {
        throw Error(ErrorCode::kInvalidConfig, manifest_path.string() + " belongs to run " +
                                                   existing.value("run_id", "?") + ", not " + run_id);
      }
    } else if (!flags.force) {
      throw Error(ErrorCode::kInvalidConfig,
                  settings.out.string() + " already holds a run; use --resume or --force");
    }
  }
  if (!flags.resume || !fs::exists(manifest_path)) {
    if (flags.force) fs::remove_all(transcripts_dir(settings.out));
    write_file(manifest_path, manifest.dump(2) + "\n");
  }

  std::optional<ChatClient> surrogate_client;
  if (settings.attack.surrogate == SurrogateBackend::kLlm) surrogate_client.emplace(settings.surrogate_endpoint);

  TargetFactory factory = [&](const Schema& truth, std::uint64_t seed) -> std::unique_ptr<Target> {
    if (settings.target == TargetKind::kEndpoint) {
      return std::make_unique<EndpointTarget>(settings.endpoint, truth);
    }
    MockTargetConfig c;
    c.hidden_schema = truth;
    c.policy = settings.mock_policy;
    c.tables_per_response = settings.tables_per_response;
    c.columns_per_table = settings.columns_per_table;
    c.refusal_rate = settings.refusal_rate;
    c.seed = seed;
    return std::make_unique<MockTarget>(c, settings.attack.max_parallel);
  };

  CampaignOptions options;
  options.transcript_dir = transcripts_dir(settings.out);
  options.max_parallel_dbs = settings.max_parallel_dbs;
  options.surrogate_client = surrogate_client ? &*surrogate_client : nullptr;
  options.cancel = &g_cancel;
  options.target_snapshot = settings.target_snapshot();
  options.resume = flags.resume;

  std::signal(SIGINT, on_sigint);
  const auto entries = run_campaign(bundle, settings.attack, banks, factory, options);
  std::signal(SIGINT, SIG_DFL);

  std::vector<AttackTranscript> transcripts;
  json failures = json::object();
  for (const auto& e : entries) {
    if (e.ok()) {
      transcripts.push_back(*e.transcript);
    } else {
      failures[e.db_id] = e.error;
      std::cerr << "attack failed for " << e.db_id << ": " << e.error << "\n";
    }
  }
  write_file(settings.out / "completion.json",
             json{{"run_id", run_id},
                  {"finished_at", utc_now()},
                  {"interrupted", g_cancel.load()},
                  {"succeeded", transcripts.size()},
                  {"failed", failures}}
                     .dump(2) + "\n");
  if (g_cancel.load()) {
    std::cerr << "interrupted; completed work is in " << options.transcript_dir.string()
              << "; rerun with --resume to continue\n";
    return kExitFatal;
  }

  // Score from the files on disk so a later `score` run sees the same input.
  const auto report = score_campaign(load_transcripts(options.transcript_dir), bundle, meta,
                                     load_synonyms(data_dir));
  write_reports(report, settings.out, run_id);
  std::cout << render_report(report, ReportFormat::kMarkdown);
  std::cerr << "wrote " << (settings.out / (run_id + ".report.*")).string() << "\n";
  return failures.empty() ? kExitOk : kExitPartial;
}

struct ScoreFlags {
  std::string run;
  std::vector<std::string> sweep;
  std::optional<std::string> dataset, format, out;
  bool strata = false;
  std::string data_dir = SCHEMAPROBE_DATA_DIR;
};

struct ScoredRun {
  CampaignReport report;
  std::size_t input_size = 0;
};

ScoredRun score_run(const fs::path& dir, const ScoreFlags& flags) {
  const auto manifest = json::parse(read_file(dir / "manifest.json"));
  const auto& m = manifest.at("report_meta");
  ReportMeta meta{m.at("run_id").get<std::string>(), m.at("target").get<std::string>(),
                  m.at("dataset").get<std::string>(),
                  m.at("settings").get<std::map<std::string, std::string>>()};
  const fs::path dataset = flags.dataset ? fs::path(*flags.dataset)
                                         : fs::path(manifest.at("dataset").at("path").get<std::string>());
  const auto format = parse_or_throw<DatasetFormat>(
      flags.format ? *flags.format : manifest.at("dataset").at("format").get<std::string>(),
      parse_dataset_format, "format");
  const auto bundle = load_dataset(dataset, format);
  ScoredRun out;
  out.report = score_campaign(load_transcripts(transcripts_dir(dir)), bundle, meta,
                              load_synonyms(flags.data_dir));
  out.input_size = manifest.at("input_size").get<std::size_t>();
  return out;
}

int cmd_score(const ScoreFlags& flags) {
  if (!flags.sweep.empty()) {
    std::map<std::size_t, CampaignReport> by_size;
    std::string ids;
    CampaignReport sweep;
    for (const auto& dir : flags.sweep) {
      auto run = score_run(dir, flags);
      ids += run.report.meta.run_id + ",";
      if (sweep.meta.target.empty()) {
        sweep.meta.target = run.report.meta.target;
        sweep.meta.dataset = run.report.meta.dataset;
      }
      if (!by_size.emplace(run.input_size, std::move(run.report)).second) {
        throw Error(ErrorCode::kInvalidConfig, "two sweep runs share input size " + std::to_string(run.input_size));
      }
    }
    sweep.sweep = sweep_report(by_size);
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(ids)));
    sweep.meta.run_id = buf;
    std::string sizes;
    for (const auto& [size, r] : by_size) sizes += (sizes.empty() ? "" : ",") + std::to_string(size);
    sweep.meta.settings["input_sizes"] = sizes;
    if (flags.out) {
      fs::create_directories(*flags.out);
      write_reports(sweep, *flags.out, "sweep-" + sweep.meta.run_id);
    }
    std::cout << render_report(sweep, ReportFormat::kMarkdown);
    return kExitOk;
  }
  if (flags.run.empty()) throw Error(ErrorCode::kInvalidConfig, "score needs --run or --sweep");
  auto run = score_run(flags.run, flags);
  const fs::path out = flags.out ? fs::path(*flags.out) : fs::path(flags.run);
  fs::create_directories(out);
  write_reports(run.report, out, run.report.meta.run_id);
  const auto md = render_report(run.report, ReportFormat::kMarkdown);
  if (flags.strata) {
    const auto begin = md.find("## By database size");
    const auto end = md.find("\n## ", begin + 1);
    std::cout << md.substr(begin, end == std::string::npos ? std::string::npos : end - begin + 1);
  } else {
    std::cout << md;
  }
  return kExitOk;
}

int cmd_extract(const std::string& input, bool stats) {
  const auto text = read_file(input);
  ExtractionStats counters;
  const auto schema = extract_schema(text, &counters);
  std::cout << render_ddl(schema);
  if (stats) {
    std::cerr << "statements=" << counters.statements << " skipped=" << counters.skipped
              << " attributed=" << counters.attributed << " unattributed=" << counters.unattributed
              << "\n";
  }
  return kExitOk;
}

std::vector<std::string> fact_lines(const fs::path& path) {
  std::istringstream in(read_file(path));
  std::vector<std::string> out;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") != std::string::npos) out.push_back(line);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Schema inference attacks against text-to-SQL models"};
  app.require_subcommand(1);
  app.set_version_flag("--version", SCHEMAPROBE_VERSION);

  AttackFlags af;
  auto* attack = app.add_subcommand("attack", "Run an attack campaign over a dataset");
  attack->add_option("--config", af.config, "TOML-style config file")->check(CLI::ExistingFile);
  attack->add_option("--mode", af.mode, "baseline | psi | full");
  attack->add_option("--inputs", af.inputs, "full | zero_knowledge");
  attack->add_option("--dataset", af.dataset, "tables.json file or DDL directory");
  attack->add_option("--format", af.format, "tables_json | ddl_dir");
  attack->add_option("--target", af.target, "mock | endpoint");
  attack->add_flag("--defended", af.defended, "Use the Sec prompt variant");
  attack->add_option("--input-size", af.input_size, "Step-1 probe count");
  attack->add_option("--cycles", af.cycles, "Question-generation cycles");
  attack->add_option("--questions", af.questions, "Questions per cycle");
  attack->add_option("--seed", af.seed, "Root seed");
  attack->add_option("--surrogate", af.surrogate, "llm | deterministic");
  attack->add_option("--out", af.out, "Output directory");
  attack->add_option("--label", af.label, "Attacked-model label for reports");
  attack->add_option("--max-parallel", af.max_parallel, "Concurrent target requests per database");
  attack->add_option("--max-parallel-dbs", af.max_parallel_dbs, "Databases attacked concurrently");
  attack->add_option("--mock-policy", af.mock_policy, "full_leak | sampling_leak | refusing");
  attack->add_option("--refusal-rate", af.refusal_rate, "Refusal probability for the refusing mock");
  attack->add_option("--tables-per-response", af.tables_per_response, "Mock sampling width");
  attack->add_option("--columns-per-table", af.columns_per_table, "Mock sampling depth");
  attack->add_option("--base-url", af.base_url, "Target endpoint base URL");
  attack->add_option("--model", af.model, "Target model name");
  attack->add_option("--template", af.template_id, "Target prompt template");
  attack->add_option("--surrogate-url", af.surrogate_url, "Surrogate endpoint base URL");
  attack->add_option("--surrogate-model", af.surrogate_model, "Surrogate model name");
  attack->add_flag("--resume", af.resume, "Continue transcripts already in --out");
  attack->add_flag("--force", af.force, "Replace an existing run in --out");
  attack->add_option("--data-dir", af.data_dir, "Directory with probes/ and synonyms.tsv");

  ScoreFlags sf;
  auto* score = app.add_subcommand("score", "Re-score stored transcripts");
  score->add_option("--run", sf.run, "Attack output directory");
  score->add_option("--sweep", sf.sweep, "Attack output directories at different input sizes");
  score->add_option("--dataset", sf.dataset, "Override the ground-truth dataset");
  score->add_option("--format", sf.format, "tables_json | ddl_dir");
  score->add_option("--out", sf.out, "Report directory (default: the run directory)");
  score->add_flag("--strata", sf.strata, "Print the by-size table");
  score->add_option("--data-dir", sf.data_dir, "Directory with synonyms.tsv");

  std::string extract_input;
  bool extract_stats = false;
  auto* extract = app.add_subcommand("extract", "Reconstruct DDL from SQL or response text");
  extract->add_option("input", extract_input, "Input file")->required();
  extract->add_flag("--stats", extract_stats, "Print statement counters to stderr");

  std::string rouge_ref, rouge_cand;
  auto* rouge = app.add_subcommand("rouge", "ROUGE scores for reconstructed facts");
  rouge->add_option("--reference", rouge_ref, "Reference facts, one per line")->required();
  rouge->add_option("--candidate", rouge_cand, "Reconstructed facts, one per line")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitFatal;
  }

  try {
    if (attack->parsed()) return cmd_attack(af, std::vector<std::string>(argv, argv + argc));
    if (score->parsed()) return cmd_score(sf);
    if (extract->parsed()) return cmd_extract(extract_input, extract_stats);
    if (rouge->parsed()) {
      const auto ref = fact_lines(rouge_ref);
      const auto cand = fact_lines(rouge_cand);
      std::cout << render_rouge(rouge_facts(ref, cand));
      return kExitOk;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFatal;
  }
  return kExitFatal;
}
