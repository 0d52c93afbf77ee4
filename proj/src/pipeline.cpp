#include "schemaprobe/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "schemaprobe/error.hpp"
#include "schemaprobe/seeded_rng.hpp"
#include "schemaprobe/sql_extract.hpp"

namespace schemaprobe {

using nlohmann::json;

std::string_view attack_mode_name(AttackMode mode) {
  switch (mode) {
    case AttackMode::kBaseline: return "baseline";
    case AttackMode::kPsiOnly: return "psi_only";
    case AttackMode::kFullReconstruction: return "full_reconstruction";
  }
  return "full_reconstruction";
}

std::optional<AttackMode> parse_attack_mode(std::string_view name) {
  if (name == "baseline") return AttackMode::kBaseline;
  if (name == "psi_only" || name == "psi") return AttackMode::kPsiOnly;
  if (name == "full_reconstruction" || name == "full") return AttackMode::kFullReconstruction;
  return std::nullopt;
}

namespace {

std::optional<Step1Mode> parse_step1_mode(std::string_view name) {
  for (auto m : {Step1Mode::kFull, Step1Mode::kZeroKnowledge, Step1Mode::kBaseline}) {
    if (step1_mode_name(m) == name) return m;
  }
  return std::nullopt;
}

}  // namespace

void AttackConfig::validate() const {
  if (input_size < 1) throw Error(ErrorCode::kInvalidConfig, "input_size must be >= 1");
  if (cycles < 1) throw Error(ErrorCode::kInvalidConfig, "cycles must be >= 1");
  if (questions_per_cycle < 1) {
    throw Error(ErrorCode::kInvalidConfig, "questions_per_cycle must be >= 1");
  }
  if (max_parallel < 1) throw Error(ErrorCode::kInvalidConfig, "max_parallel must be >= 1");
  if (inputs == Step1Mode::kBaseline) {
    throw Error(ErrorCode::kInvalidConfig, "inputs must be full or zero_knowledge");
  }
}

std::string AttackConfig::to_json() const {
  json j{{"mode", attack_mode_name(mode)},
         {"inputs", step1_mode_name(inputs)},
         {"input_size", input_size},
         {"cycles", cycles},
         {"questions_per_cycle", questions_per_cycle},
         {"seed", seed},
         {"surrogate", surrogate_backend_name(surrogate)},
         {"max_parallel", max_parallel}};
  return j.dump();
}

AttackConfig AttackConfig::from_json(std::string_view text) {
  AttackConfig c;
  try {
    auto j = json::parse(text);
    auto mode = parse_attack_mode(j.at("mode").get<std::string>());
    auto inputs = parse_step1_mode(j.at("inputs").get<std::string>());
    auto surrogate = parse_surrogate_backend(j.at("surrogate").get<std::string>());
    if (!mode || !inputs || !surrogate) throw Error(ErrorCode::kInvalidConfig, "unknown enum value");
    c.mode = *mode;
    c.inputs = *inputs;
    c.surrogate = *surrogate;
    c.input_size = j.at("input_size").get<std::size_t>();
    c.cycles = j.at("cycles").get<int>();
    c.questions_per_cycle = j.at("questions_per_cycle").get<std::size_t>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.max_parallel = j.at("max_parallel").get<std::size_t>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidConfig, std::string("attack config: ") + e.what());
  }
  return c;
}

std::size_t AttackTranscript::exchange_count(std::string_view stage) const {
  return static_cast<std::size_t>(std::count_if(
      exchanges.begin(), exchanges.end(), [&](const auto& e) { return e.stage == stage; }));
}

std::string make_run_id(const AttackConfig& config, std::string_view db_id,
                        std::string_view target_snapshot) {
  const auto h = fnv1a64(config.to_json() + "\n" + std::string(db_id) + "\n" +
                         std::string(target_snapshot));
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::uint64_t database_seed(std::uint64_t seed, std::string_view db_id) {
  return derive_seed(seed, fnv1a64(db_id));
}

std::filesystem::path transcript_file(const std::filesystem::path& dir, std::string_view db_id) {
  return dir / (std::string(db_id) + ".jsonl");
}

namespace {

std::string utc_now() {
  using namespace std::chrono;
  const auto now = system_clock::now();
  const auto t = system_clock::to_time_t(now);
  const auto ms = duration_cast<milliseconds>(now.time_since_epoch()).count() % 1000;
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &tm);
  char out[40];
  std::snprintf(out, sizeof out, "%s.%03lldZ", buf, static_cast<long long>(ms));
  return out;
}

json schema_to_json(const Schema& s) {
  json tables = json::array();
  for (const auto& t : s.tables()) {
    json cols = json::array();
    for (const auto& c : t.columns) cols.push_back(json::array({c.name, c.data_type}));
    tables.push_back({{"name", t.name}, {"columns", cols}});
  }
  return tables;
}

Schema schema_from_json(const json& j, const std::string& db_id) {
  Schema s(db_id);
  for (const auto& t : j) {
    auto& table = s.add_table(t.at("name").get<std::string>());
    (void)table;
    for (const auto& c : t.at("columns")) {
      s.add_column(t.at("name").get<std::string>(),
                   ColumnDef{c.at(0).get<std::string>(), c.at(1).get<std::string>()});
    }
  }
  return s;
}

std::string stage_key(std::string_view stage, int cycle) {
  return std::string(stage) + "#" + std::to_string(cycle);
}

class TranscriptWriter {
 public:
  TranscriptWriter() = default;
  TranscriptWriter(const std::filesystem::path& path, bool append) {
    if (path.empty()) return;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    out_.open(path, append ? std::ios::binary | std::ios::app : std::ios::binary | std::ios::trunc);
    if (!out_) throw Error(ErrorCode::kIoError, "cannot write transcript " + path.string());
  }

  void append(json record) {
    if (!out_.is_open()) return;
    record["ts"] = utc_now();
    std::lock_guard lock(mutex_);
    out_ << record.dump() << '\n';
    out_.flush();
    if (!out_) throw Error(ErrorCode::kIoError, "transcript write failed");
  }

 private:
  std::ofstream out_;
  std::mutex mutex_;
};

json exchange_record(const StagedExchange& s) {
  const auto& ex = s.exchange;
  json error = nullptr;
  if (ex.error) {
    error = {{"kind", exchange_error_name(ex.error->kind)},
             {"status", ex.error->http_status},
             {"detail", ex.error->detail}};
  }
  return {{"record_type", "exchange"},  {"stage", s.stage},
          {"cycle", s.cycle},           {"probe_id", ex.probe_id},
          {"kind", probe_kind_name(s.kind)}, {"request", ex.request_text},
          {"text", ex.response_text},   {"attempts", ex.attempt_count},
          {"latency_ms", ex.latency_ms}, {"error", error}};
}

StagedExchange exchange_from_record(const json& r) {
  StagedExchange s;
  s.stage = r.at("stage").get<std::string>();
  s.cycle = r.at("cycle").get<int>();
  s.kind = parse_probe_kind(r.at("kind").get<std::string>()).value_or(ProbeKind::kRandom);
  auto& ex = s.exchange;
  ex.probe_id = r.at("probe_id").get<std::int64_t>();
  ex.request_text = r.at("request").get<std::string>();
  ex.response_text = r.at("text").get<std::string>();
  ex.attempt_count = r.at("attempts").get<int>();
  ex.latency_ms = r.at("latency_ms").get<double>();
  if (!r.at("error").is_null()) {
    const auto& e = r.at("error");
    ex.error = ExchangeError{
        parse_exchange_error(e.at("kind").get<std::string>()).value_or(ExchangeErrorKind::kNetwork),
        e.at("status").get<int>(), e.at("detail").get<std::string>()};
  }
  return s;
}

// Completed stage markers, keyed "stage#cycle".
struct Progress {
  std::set<std::string> done;
  bool has(std::string_view stage, int cycle) const { return done.count(stage_key(stage, cycle)) > 0; }
};

class Runner {
 public:
  Runner(AttackTranscript& t, Progress& progress, const AttackContext& ctx, TranscriptWriter& writer)
      : t_(t), progress_(progress), ctx_(ctx), writer_(writer) {}

  void run() {
    const auto& c = t_.config;
    if (c.mode == AttackMode::kBaseline) {
      probe_stage("step1", 0, compose_step1_inputs(Step1Mode::kBaseline, 1, c.seed, *ctx_.banks));
      if (!t_.final_schema) {
        Schema final_schema(t_.db_id);
        for (const auto& s : t_.exchanges) {
          if (s.exchange.ok()) {
            const auto extracted = extract_schema(s.exchange.response_text);
            for (const auto& table : extracted.tables()) final_schema.add_table(table);
          }
        }
        finish(final_schema.sorted());
      }
      return;
    }

    probe_stage("step1", 0, compose_step1_inputs(c.inputs, c.input_size, c.seed, *ctx_.banks));
    if (c.mode == AttackMode::kPsiOnly) {
      psi_stage(1, false);
      if (!t_.final_schema) finish(t_.psi.back());
      return;
    }
    for (int cycle = 1; cycle <= c.cycles; ++cycle) {
      psi_stage(cycle, c.surrogate == SurrogateBackend::kLlm);
      question_stage(cycle);
      probe_stage("step3", cycle, t_.questions[cycle - 1]);
    }
    if (!t_.final_schema) reconstruction_stage();
  }

 private:
  void check_cancel() {
    if (ctx_.cancel != nullptr && ctx_.cancel->load()) {
      throw Error(ErrorCode::kCancelled, "attack on " + t_.db_id + " cancelled");
    }
  }

  void mark_done(std::string_view stage, int cycle, json payload, double ms) {
    json record{{"record_type", "stage_end"}, {"stage", stage}, {"cycle", cycle},
                {"probe_id", nullptr},        {"text", std::move(payload)}, {"ms", ms}};
    writer_.append(std::move(record));
    progress_.done.insert(stage_key(stage, cycle));
    t_.stage_ms[stage_key(stage, cycle)] = ms;
  }

  void note(std::string_view stage, int cycle, const std::string& text) {
    t_.notes.push_back(stage_key(stage, cycle) + ": " + text);
    writer_.append({{"record_type", "note"}, {"stage", stage}, {"cycle", cycle},
                    {"probe_id", nullptr}, {"text", text}});
  }

  static double elapsed_ms(std::chrono::steady_clock::time_point since) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since).count();
  }

  void probe_stage(const std::string& stage, int cycle, const std::vector<ProbeInput>& probes) {
    if (progress_.has(stage, cycle)) return;
    check_cancel();
    const auto started = std::chrono::steady_clock::now();
    std::set<std::int64_t> recorded;
    for (const auto& s : t_.exchanges) recorded.insert(s.exchange.probe_id);
    std::vector<ProbeInput> pending;
    std::map<std::int64_t, ProbeKind> kinds;
    for (const auto& p : probes) {
      kinds[p.id] = p.kind;
      if (!recorded.count(p.id)) pending.push_back(p);
    }
    const auto parallel = std::min(t_.config.max_parallel, ctx_.target->max_parallel());
    std::vector<StagedExchange> fresh;
    auto merge = [&] {
      for (auto& s : fresh) t_.exchanges.push_back(std::move(s));
      fresh.clear();
    };
    try {
      run_batch(
          pending, [&](const ProbeInput& p) { return ctx_.target->query(p); }, parallel,
          ctx_.cancel, [&](const TargetExchange& ex) {
            StagedExchange s{stage, cycle, kinds[ex.probe_id], ex};
            writer_.append(exchange_record(s));
            fresh.push_back(std::move(s));
          });
    } catch (...) {
      merge();
      throw;
    }
    merge();
    std::stable_sort(t_.exchanges.begin(), t_.exchanges.end(), [](const auto& a, const auto& b) {
      return a.exchange.probe_id < b.exchange.probe_id;
    });
    check_cancel();

    if (stage == "step1" && !probes.empty()) {
      const bool all_failed = std::all_of(t_.exchanges.begin(), t_.exchanges.end(), [](const auto& s) {
        return s.stage != "step1" || !s.exchange.ok();
      });
      if (all_failed) {
        const auto& first = t_.exchanges.front().exchange;
        const auto cause = first.error ? std::string(exchange_error_name(first.error->kind)) + " " +
                                             first.error->detail
                                       : std::string("no response");
        note(stage, cycle, "every exchange failed: " + cause);
        throw Error(ErrorCode::kStageFailed, "step1: " + cause);
      }
    }
    mark_done(stage, cycle, "", elapsed_ms(started));
  }

  std::string surrogate(const SurrogateRequest& req) {
    return run_surrogate(req, t_.config.surrogate, ctx_.surrogate_client);
  }

  void psi_stage(int cycle, bool speculative) {
    if (progress_.has("psi", cycle)) return;
    check_cancel();
    const auto started = std::chrono::steady_clock::now();
    Schema psi(t_.db_id);
    std::vector<TargetExchange> exchanges;
    for (const auto& s : t_.exchanges) exchanges.push_back(s.exchange);
    try {
      auto reply = surrogate(build_psi_prompt(exchanges, speculative));
      psi = parse_schema_reply(reply);
      psi.set_db_id(t_.db_id);
      psi.tag_all(Stage::kPsi);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kNoUsableExchanges && e.code() != ErrorCode::kNoSchemaFound) throw;
      note("psi", cycle, e.what());
    }
    t_.psi.push_back(psi);
    mark_done("psi", cycle, schema_to_json(psi), elapsed_ms(started));
  }

  void question_stage(int cycle) {
    if (progress_.has("questions", cycle)) return;
    check_cancel();
    const auto started = std::chrono::steady_clock::now();
    std::int64_t next_id = 1;
    for (const auto& s : t_.exchanges) next_id = std::max(next_id, s.exchange.probe_id + 1);
    std::vector<ProbeInput> questions;
    try {
      auto reply = surrogate(build_question_prompt(PsiResult{t_.psi.back(), false},
                                                   t_.config.questions_per_cycle));
      questions = parse_question_list(reply, t_.config.questions_per_cycle, next_id, cycle);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kEmptyPsi && e.code() != ErrorCode::kNoQuestionsParsed) throw;
      note("questions", cycle, e.what());
    }
    json list = json::array();
    for (const auto& q : questions) list.push_back(q.text);
    t_.questions.push_back(questions);
    mark_done("questions", cycle, json{{"first_id", next_id}, {"questions", list}},
              elapsed_ms(started));
  }

  void reconstruction_stage() {
    check_cancel();
    const auto started = std::chrono::steady_clock::now();
    Schema final_schema(t_.db_id);
    std::vector<TargetExchange> exchanges;
    for (const auto& s : t_.exchanges) exchanges.push_back(s.exchange);
    try {
      final_schema = parse_schema_reply(surrogate(build_reconstruction_prompt(exchanges)));
      final_schema.set_db_id(t_.db_id);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kNoUsableExchanges && e.code() != ErrorCode::kNoSchemaFound) throw;
      note("reconstruction", 0, e.what());
    }
    t_.stage_ms[stage_key("reconstruction", 0)] = elapsed_ms(started);
    finish(final_schema);
  }

  void finish(Schema schema) {
    schema.set_db_id(t_.db_id);
    const auto stage = t_.config.mode == AttackMode::kBaseline  ? Stage::kBaseline
                       : t_.config.mode == AttackMode::kPsiOnly ? Stage::kPsi
                                                                : Stage::kReconstruction;
    schema.tag_all(stage);
    writer_.append({{"record_type", "final"}, {"stage", stage_name(stage)}, {"cycle", 0},
                    {"probe_id", nullptr}, {"text", schema_to_json(schema)}});
    t_.final_schema = std::move(schema);
  }

  AttackTranscript& t_;
  Progress& progress_;
  const AttackContext& ctx_;
  TranscriptWriter& writer_;
};

void require_context(const AttackContext& ctx) {
  if (ctx.target == nullptr || ctx.banks == nullptr) {
    throw Error(ErrorCode::kInvalidConfig, "attack context needs a target and probe banks");
  }
}

struct Loaded {
  AttackTranscript transcript;
  Progress progress;
};

// Parses records up to the first bad line; bad_offset is set when one exists.
Loaded parse_records(const std::string& data, const std::string& where,
                     std::optional<std::size_t>& bad_offset, std::size_t& good_end) {
  Loaded out;
  auto& t = out.transcript;
  bool have_header = false;
  std::size_t pos = 0;
  good_end = 0;
  while (pos < data.size()) {
    const auto nl = data.find('\n', pos);
    if (nl == std::string::npos) {
      bad_offset = pos;  // unterminated final record
      return out;
    }
    const auto line = data.substr(pos, nl - pos);
    try {
      const auto r = json::parse(line);
      const auto type = r.at("record_type").get<std::string>();
      if (!have_header && type != "header") throw Error(ErrorCode::kCorruptTranscript, "missing header");
      if (type == "header") {
        t.run_id = r.at("run_id").get<std::string>();
        t.db_id = r.at("db_id").get<std::string>();
        t.config = AttackConfig::from_json(r.at("text").get<std::string>());
        t.target_snapshot = r.at("target").get<std::string>();
        have_header = true;
      } else if (type == "exchange") {
        t.exchanges.push_back(exchange_from_record(r));
      } else if (type == "stage_end") {
        const auto stage = r.at("stage").get<std::string>();
        const auto cycle = r.at("cycle").get<int>();
        if (stage == "psi") {
          t.psi.push_back(schema_from_json(r.at("text"), t.db_id));
          t.psi.back().tag_all(Stage::kPsi);
        } else if (stage == "questions") {
          std::vector<ProbeInput> qs;
          auto id = r.at("text").at("first_id").get<std::int64_t>();
          for (const auto& q : r.at("text").at("questions")) {
            qs.push_back(ProbeInput{id++, ProbeKind::kGenerated, q.get<std::string>(), cycle});
          }
          t.questions.push_back(std::move(qs));
        }
        out.progress.done.insert(stage_key(stage, cycle));
        t.stage_ms[stage_key(stage, cycle)] = r.at("ms").get<double>();
      } else if (type == "note") {
        t.notes.push_back(stage_key(r.at("stage").get<std::string>(), r.at("cycle").get<int>()) +
                          ": " + r.at("text").get<std::string>());
      } else if (type == "final") {
        t.final_schema = schema_from_json(r.at("text"), t.db_id);
        t.final_schema->tag_all(parse_stage(r.at("stage").get<std::string>()).value_or(Stage::kReconstruction));
      } else {
        throw Error(ErrorCode::kCorruptTranscript, "unknown record_type " + type);
      }
    } catch (const std::exception&) {
      bad_offset = pos;
      return out;
    }
    pos = nl + 1;
    good_end = pos;
  }
  if (!have_header) bad_offset = 0;
  (void)where;
  std::stable_sort(t.exchanges.begin(), t.exchanges.end(), [](const auto& a, const auto& b) {
    return a.exchange.probe_id < b.exchange.probe_id;
  });
  return out;
}

std::string read_all(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kMissingFile, path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

Loaded load_checked(const std::filesystem::path& path) {
  const auto data = read_all(path);
  std::optional<std::size_t> bad;
  std::size_t good_end = 0;
  auto loaded = parse_records(data, path.string(), bad, good_end);
  if (bad) {
    throw Error(ErrorCode::kCorruptTranscript, path.string() + " at offset " + std::to_string(*bad));
  }
  return loaded;
}

AttackConfig normalized(AttackConfig config) {
  if (config.mode == AttackMode::kBaseline) {
    config.input_size = 1;
    config.cycles = 1;
  }
  return config;
}

// Run id from the header line, or nothing when the file is absent or its
// header is unreadable.
std::optional<std::string> header_run_id(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::string line;
  if (!in || !std::getline(in, line) || in.eof()) return std::nullopt;
  try {
    const auto j = json::parse(line);
    if (j.at("record_type") != "header") return std::nullopt;
    return j.at("run_id").get<std::string>();
  } catch (const json::exception&) {
    return std::nullopt;
  }
}

}  // namespace

AttackTranscript run_attack(const AttackConfig& config, const std::string& db_id,
                            const AttackContext& context) {
  require_context(context);
  config.validate();
  AttackTranscript t;
  t.db_id = db_id;
  t.config = normalized(config);
  t.target_snapshot = context.target_snapshot;
  t.run_id = make_run_id(t.config, db_id, t.target_snapshot);

  TranscriptWriter writer(context.transcript_path, false);
  writer.append({{"record_type", "header"}, {"stage", "setup"}, {"probe_id", nullptr},
                 {"text", t.config.to_json()}, {"run_id", t.run_id}, {"db_id", db_id},
                 {"target", t.target_snapshot}});
  Progress progress;
  Runner(t, progress, context, writer).run();
  return t;
}

AttackTranscript load_transcript(const std::filesystem::path& path) {
  return load_checked(path).transcript;
}

std::size_t salvage_transcript(const std::filesystem::path& path) {
  const auto data = read_all(path);
  std::optional<std::size_t> bad;
  std::size_t good_end = 0;
  parse_records(data, path.string(), bad, good_end);
  if (bad) std::filesystem::resize_file(path, good_end);
  return bad ? good_end : data.size();
}

AttackTranscript resume_attack(const std::filesystem::path& path, const AttackContext& context,
                               bool salvage) {
  require_context(context);
  Loaded loaded;
  try {
    loaded = load_checked(path);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kCorruptTranscript || !salvage) throw;
    if (salvage_transcript(path) == 0) throw;
    loaded = load_checked(path);
  }
  auto& t = loaded.transcript;
  if (t.complete()) return t;
  TranscriptWriter writer(path, true);
  Runner(t, loaded.progress, context, writer).run();
  return t;
}

std::vector<CampaignEntry> run_campaign(const DatasetBundle& bundle, const AttackConfig& config,
                                        const ProbeBanks& banks, const TargetFactory& factory,
                                        const CampaignOptions& options) {
  config.validate();
  std::vector<CampaignEntry> entries(bundle.schemas.size());
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (;;) {
      const auto i = next.fetch_add(1);
      if (i >= bundle.schemas.size()) return;
      const auto& schema = bundle.schemas[i];
      auto& entry = entries[i];
      entry.db_id = schema.db_id();
      if (options.cancel != nullptr && options.cancel->load()) {
        entry.error = "Cancelled: not started";
        continue;
      }
      try {
        AttackConfig db_config = config;
        db_config.seed = database_seed(config.seed, schema.db_id());
        auto target = factory(schema, db_config.seed);
        if (!target) throw Error(ErrorCode::kInvalidConfig, "target factory returned nothing");
        AttackContext ctx;
        ctx.target = target.get();
        ctx.banks = &banks;
        ctx.surrogate_client = options.surrogate_client;
        ctx.cancel = options.cancel;
        ctx.target_snapshot = options.target_snapshot;
        if (!options.transcript_dir.empty()) {
          ctx.transcript_path = transcript_file(options.transcript_dir, schema.db_id());
        }
        const auto stored = options.resume && !ctx.transcript_path.empty()
                                ? header_run_id(ctx.transcript_path)
                                : std::nullopt;
        if (stored) {
          if (*stored != make_run_id(normalized(db_config), schema.db_id(), ctx.target_snapshot)) {
            throw Error(ErrorCode::kInvalidConfig, "transcript " + ctx.transcript_path.string() +
                                                       " belongs to another configuration");
          }
          entry.transcript = resume_attack(ctx.transcript_path, ctx, true);
        } else {
          entry.transcript = run_attack(db_config, schema.db_id(), ctx);
        }
      } catch (const std::exception& e) {
        entry.error = e.what();
      }
    }
  };

  const auto workers = std::min(std::max<std::size_t>(1, options.max_parallel_dbs), bundle.schemas.size());
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  return entries;
}

}  // namespace schemaprobe
