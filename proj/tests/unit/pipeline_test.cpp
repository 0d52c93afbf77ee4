#include <json.hpp>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <set>

#include "doctest.h"
#include "schemaprobe/error.hpp"
#include "schemaprobe/metrics.hpp"
#include "schemaprobe/pipeline.hpp"
#include "schemaprobe/sql_extract.hpp"

using namespace schemaprobe;
namespace fs = std::filesystem;

namespace {

const fs::path kData = SCHEMAPROBE_DATA_DIR;

Schema hidden() {
  return Schema("shop", {TableDef{"customers", {{"id", "INT"}, {"name", "TEXT"}, {"email", "TEXT"}}},
                         TableDef{"orders", {{"id", "INT"}, {"customer_id", "INT"}, {"total", "REAL"}}},
                         TableDef{"items", {{"id", "INT"}, {"order_id", "INT"}, {"sku", "TEXT"}}},
                         TableDef{"stores", {{"id", "INT"}, {"city", "TEXT"}}},
                         TableDef{"staff", {{"id", "INT"}, {"store_id", "INT"}, {"hired", "DATETIME"}}}});
}

// Records every probe id it answers.
class CountingTarget final : public Target {
 public:
  explicit CountingTarget(MockTargetConfig config) : inner_(std::move(config)) {}
  TargetExchange query(const ProbeInput& probe) override {
    {
      std::lock_guard lock(mutex_);
      seen.push_back(probe.id);
    }
    return inner_.query(probe);
  }
  std::size_t max_parallel() const override { return 3; }

  std::vector<std::int64_t> seen;

 private:
  MockTarget inner_;
  std::mutex mutex_;
};

MockTargetConfig mock(MockPolicy policy, std::uint64_t seed = 11) {
  MockTargetConfig c;
  c.hidden_schema = hidden();
  c.policy = policy;
  c.seed = seed;
  return c;
}

AttackConfig config(AttackMode mode, std::size_t inputs = 20, int cycles = 1) {
  AttackConfig c;
  c.mode = mode;
  c.input_size = inputs;
  c.cycles = cycles;
  c.questions_per_cycle = 6;
  c.seed = 5;
  return c;
}

const ProbeBanks& banks() {
  static const ProbeBanks b = ProbeBanks::load_default(kData);
  return b;
}

fs::path temp_path(const std::string& name) {
  auto dir = fs::temp_directory_path() / "schemaprobe_pipeline_test";
  fs::create_directories(dir);
  auto p = dir / name;
  fs::remove_all(p);
  return p;
}

double recall(const AttackTranscript& t, const Schema& truth) {
  return score_database(canonicalize(*t.final_schema), canonicalize(truth)).table_col.score.recall;
}

std::vector<std::string> lines_of(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::string> out;
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

}  // namespace

TEST_CASE("attack config json round trip and validation") {
  auto c = config(AttackMode::kPsiOnly, 33, 2);
  c.inputs = Step1Mode::kZeroKnowledge;
  c.surrogate = SurrogateBackend::kLlm;
  c.seed = 0xfedcba9876543210ULL;
  const auto back = AttackConfig::from_json(c.to_json());
  CHECK(back.to_json() == c.to_json());
  CHECK(back.seed == c.seed);
  CHECK(parse_attack_mode("full") == AttackMode::kFullReconstruction);
  CHECK(parse_attack_mode("psi") == AttackMode::kPsiOnly);
  CHECK_FALSE(parse_attack_mode("other"));

  auto bad = c;
  bad.cycles = 0;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = c;
  bad.inputs = Step1Mode::kBaseline;
  CHECK_THROWS_AS(bad.validate(), Error);
  CHECK_THROWS_AS(AttackConfig::from_json("{\"mode\":1}"), Error);

  CHECK(make_run_id(c, "a", "{}") == make_run_id(c, "a", "{}"));
  CHECK(make_run_id(c, "a", "{}") != make_run_id(c, "b", "{}"));
  CHECK(make_run_id(c, "a", "{}").size() == 16);
}

TEST_CASE("baseline against a full leak recovers the hidden schema") {
  CountingTarget target(mock(MockPolicy::kFullLeak));
  AttackContext ctx{&target, &banks()};
  auto t = run_attack(config(AttackMode::kBaseline), "shop", ctx);
  REQUIRE(t.complete());
  CHECK(t.exchanges.size() == 1);
  CHECK(t.exchanges[0].exchange.request_text == std::string(kBaselineProbe));
  CHECK(t.config.input_size == 1);
  CHECK(canonicalize(*t.final_schema) == canonicalize(hidden()));
  CHECK(t.final_schema->provenance().at("customers") == Stage::kBaseline);
}

TEST_CASE("psi_only stops after PSI") {
  CountingTarget target(mock(MockPolicy::kSamplingLeak));
  AttackContext ctx{&target, &banks()};
  auto t = run_attack(config(AttackMode::kPsiOnly, 25), "shop", ctx);
  REQUIRE(t.complete());
  CHECK(t.exchange_count("step1") == 25);
  CHECK(t.exchange_count("step3") == 0);
  CHECK(t.questions.empty());
  REQUIRE(t.psi.size() == 1);
  CHECK(canonicalize(*t.final_schema) == canonicalize(t.psi[0]));
  CHECK(target.seen.size() == 25);
}

TEST_CASE("full reconstruction exchange counts over cycles") {
  CountingTarget target(mock(MockPolicy::kSamplingLeak));
  AttackContext ctx{&target, &banks()};
  auto t = run_attack(config(AttackMode::kFullReconstruction, 20, 3), "shop", ctx);
  REQUIRE(t.complete());
  CHECK(t.psi.size() == 3);
  REQUIRE(t.questions.size() == 3);
  std::size_t generated = 0;
  for (const auto& qs : t.questions) generated += qs.size();
  CHECK(t.exchange_count("step3") == generated);
  CHECK(t.exchanges.size() == 20 + generated);
  for (int k = 1; k <= 3; ++k) {
    for (const auto& q : t.questions[k - 1]) CHECK(q.cycle == k);
  }
  std::set<std::int64_t> ids;
  for (const auto& s : t.exchanges) ids.insert(s.exchange.probe_id);
  CHECK(ids.size() == t.exchanges.size());
  CHECK(*ids.begin() == 1);
  CHECK(*ids.rbegin() == static_cast<std::int64_t>(t.exchanges.size()));
  CHECK(target.seen.size() == t.exchanges.size());
}

TEST_CASE("mode dominance on a sampling leak") {
  for (std::uint64_t seed : {1u, 2u, 3u, 4u}) {
    double r[3];
    int i = 0;
    for (auto mode : {AttackMode::kBaseline, AttackMode::kPsiOnly, AttackMode::kFullReconstruction}) {
      CountingTarget target(mock(MockPolicy::kSamplingLeak, seed));
      AttackContext ctx{&target, &banks()};
      r[i++] = recall(run_attack(config(mode), "shop", ctx), hidden());
    }
    CHECK(r[0] <= r[1]);
    CHECK(r[1] <= r[2]);
  }
}

TEST_CASE("refusing target yields an empty schema with notes") {
  auto c = mock(MockPolicy::kRefusing);
  c.refusal_rate = 1.0;
  CountingTarget target(c);
  AttackContext ctx{&target, &banks()};
  auto t = run_attack(config(AttackMode::kFullReconstruction), "shop", ctx);
  REQUIRE(t.complete());
  CHECK(t.final_schema->empty());
  CHECK_FALSE(t.notes.empty());
  CHECK(t.exchange_count("step3") == 0);
}

TEST_CASE("all transport errors fail step1") {
  class Down final : public Target {
   public:
    TargetExchange query(const ProbeInput& p) override {
      TargetExchange ex;
      ex.probe_id = p.id;
      ex.request_text = p.text;
      ex.error = ExchangeError{ExchangeErrorKind::kNetwork, 0, "refused"};
      return ex;
    }
    std::size_t max_parallel() const override { return 2; }
  } down;
  const auto path = temp_path("down.jsonl");
  AttackContext ctx{&down, &banks(), nullptr, path};
  try {
    run_attack(config(AttackMode::kPsiOnly, 5), "shop", ctx);
    FAIL("expected StageFailed");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kStageFailed);
  }
  CHECK(load_transcript(path).exchange_count("step1") == 5);
}

TEST_CASE("transcript is replayable and deterministic") {
  const auto a = temp_path("a.jsonl");
  const auto b = temp_path("b.jsonl");
  for (const auto& p : {a, b}) {
    CountingTarget target(mock(MockPolicy::kSamplingLeak));
    AttackContext ctx{&target, &banks(), nullptr, p};
    run_attack(config(AttackMode::kFullReconstruction, 15, 2), "shop", ctx);
  }
  const auto ta = load_transcript(a);
  const auto tb = load_transcript(b);
  REQUIRE(ta.complete());
  CHECK(ta.run_id == tb.run_id);
  CHECK(ta.exchanges.size() == tb.exchanges.size());
  for (std::size_t i = 0; i < ta.exchanges.size(); ++i) {
    CHECK(ta.exchanges[i].exchange.request_text == tb.exchanges[i].exchange.request_text);
    CHECK(ta.exchanges[i].exchange.response_text == tb.exchanges[i].exchange.response_text);
  }
  CHECK(canonicalize(*ta.final_schema) == canonicalize(*tb.final_schema));

  // Re-parsing the transcript matches the in-memory result.
  CountingTarget target(mock(MockPolicy::kSamplingLeak));
  AttackContext ctx{&target, &banks()};
  const auto live = run_attack(config(AttackMode::kFullReconstruction, 15, 2), "shop", ctx);
  CHECK(live.run_id == ta.run_id);
  CHECK(canonicalize(*live.final_schema) == canonicalize(*ta.final_schema));
  REQUIRE(live.psi.size() == ta.psi.size());
  for (std::size_t i = 0; i < live.psi.size(); ++i) {
    CHECK(canonicalize(live.psi[i]) == canonicalize(ta.psi[i]));
  }
  for (const auto& line : lines_of(a)) {
    const auto j = nlohmann::json::parse(line);
    CHECK(j.contains("record_type"));
    CHECK(j.contains("stage"));
    CHECK(j.contains("probe_id"));
    CHECK(j.contains("text"));
    CHECK(j.contains("ts"));
  }
}

TEST_CASE("resume continues after step1 without re-sending") {
  const auto full_path = temp_path("full.jsonl");
  {
    CountingTarget target(mock(MockPolicy::kSamplingLeak));
    AttackContext ctx{&target, &banks(), nullptr, full_path};
    run_attack(config(AttackMode::kFullReconstruction, 12), "shop", ctx);
  }
  const auto lines = lines_of(full_path);
  const auto cut = temp_path("cut.jsonl");
  {
    std::ofstream out(cut);
    for (const auto& line : lines) {
      out << line << '\n';
      const auto j = nlohmann::json::parse(line);
      if (j["record_type"] == "stage_end" && j["stage"] == "step1") break;
    }
  }
  const auto partial = load_transcript(cut);
  CHECK_FALSE(partial.complete());
  CHECK(partial.exchange_count("step1") == 12);

  CountingTarget target(mock(MockPolicy::kSamplingLeak));
  AttackContext ctx{&target, &banks()};
  const auto resumed = resume_attack(cut, ctx);
  REQUIRE(resumed.complete());
  for (auto id : target.seen) CHECK(id > 12);
  CHECK(target.seen.size() == resumed.exchange_count("step3"));
  const auto reference = load_transcript(full_path);
  CHECK(canonicalize(*resumed.final_schema) == canonicalize(*reference.final_schema));
  CHECK(canonicalize(*load_transcript(cut).final_schema) == canonicalize(*reference.final_schema));
}

TEST_CASE("resume within step1 sends only missing probes") {
  const auto path = temp_path("mid.jsonl");
  {
    CountingTarget target(mock(MockPolicy::kSamplingLeak));
    AttackContext ctx{&target, &banks(), nullptr, path};
    run_attack(config(AttackMode::kPsiOnly, 10), "shop", ctx);
  }
  auto lines = lines_of(path);
  std::set<std::int64_t> kept;
  {
    std::ofstream out(path, std::ios::trunc);
    int exchanges = 0;
    for (const auto& line : lines) {
      const auto j = nlohmann::json::parse(line);
      if (j["record_type"] == "exchange") {
        if (++exchanges > 4) break;
        kept.insert(j["probe_id"].get<std::int64_t>());
      }
      out << line << '\n';
    }
  }
  CountingTarget target(mock(MockPolicy::kSamplingLeak));
  AttackContext ctx{&target, &banks()};
  const auto t = resume_attack(path, ctx);
  CHECK(t.complete());
  CHECK(target.seen.size() == 6);
  for (auto id : target.seen) CHECK_FALSE(kept.count(id));
}

TEST_CASE("resuming a complete transcript is a no-op") {
  const auto path = temp_path("done.jsonl");
  {
    CountingTarget target(mock(MockPolicy::kSamplingLeak));
    AttackContext ctx{&target, &banks(), nullptr, path};
    run_attack(config(AttackMode::kFullReconstruction, 8), "shop", ctx);
  }
  const auto before = fs::file_size(path);
  CountingTarget target(mock(MockPolicy::kSamplingLeak));
  AttackContext ctx{&target, &banks()};
  const auto t = resume_attack(path, ctx);
  CHECK(t.complete());
  CHECK(target.seen.empty());
  CHECK(fs::file_size(path) == before);
}

TEST_CASE("truncated record is reported and salvaged") {
  const auto path = temp_path("torn.jsonl");
  {
    CountingTarget target(mock(MockPolicy::kSamplingLeak));
    AttackContext ctx{&target, &banks(), nullptr, path};
    run_attack(config(AttackMode::kPsiOnly, 6), "shop", ctx);
  }
  const auto lines = lines_of(path);
  std::size_t good = 0;
  {
    std::ofstream out(path, std::ios::trunc | std::ios::binary);
    for (std::size_t i = 0; i < 4; ++i) {
      out << lines[i] << '\n';
      good += lines[i].size() + 1;
    }
    out << lines[4].substr(0, lines[4].size() / 2);
  }
  try {
    load_transcript(path);
    FAIL("expected CorruptTranscript");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kCorruptTranscript);
    CHECK(std::string(e.what()).find("offset " + std::to_string(good)) != std::string::npos);
  }
  CountingTarget target(mock(MockPolicy::kSamplingLeak));
  AttackContext ctx{&target, &banks()};
  CHECK_THROWS_AS(resume_attack(path, ctx), Error);
  const auto t = resume_attack(path, ctx, true);
  CHECK(t.complete());
  CHECK(t.exchange_count("step1") == 6);
  CHECK(target.seen.size() == 3);
  CHECK(load_transcript(path).complete());
}

TEST_CASE("cancel keeps completed work") {
  const auto path = temp_path("cancel.jsonl");
  std::atomic<bool> cancel{true};
  CountingTarget target(mock(MockPolicy::kSamplingLeak));
  AttackContext ctx{&target, &banks(), nullptr, path, &cancel};
  try {
    run_attack(config(AttackMode::kFullReconstruction, 6), "shop", ctx);
    FAIL("expected Cancelled");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kCancelled);
  }
  const auto t = load_transcript(path);
  CHECK_FALSE(t.complete());
  cancel = false;
  CHECK(resume_attack(path, ctx).complete());
}

TEST_CASE("campaign isolates per-database failures") {
  DatasetBundle bundle;
  bundle.name = "three";
  for (const auto* id : {"alpha", "beta", "gamma"}) {
    auto s = hidden();
    s.set_db_id(id);
    bundle.schemas.push_back(s);
    bundle.size_classes.push_back(SizeClass::kMedium);
  }
  std::mutex mutex;
  std::vector<std::uint64_t> seeds;
  TargetFactory factory = [&](const Schema& truth, std::uint64_t seed) -> std::unique_ptr<Target> {
    if (truth.db_id() == "beta") throw Error(ErrorCode::kInvalidConfig, "no endpoint for beta");
    {
      std::lock_guard lock(mutex);
      seeds.push_back(seed);
    }
    MockTargetConfig c;
    c.hidden_schema = truth;
    c.policy = MockPolicy::kSamplingLeak;
    c.seed = seed;
    return std::make_unique<MockTarget>(c);
  };
  const auto dir = temp_path("campaign");
  CampaignOptions options;
  options.transcript_dir = dir;
  options.max_parallel_dbs = 3;
  const auto entries = run_campaign(bundle, config(AttackMode::kFullReconstruction, 10), banks(),
                                    factory, options);
  REQUIRE(entries.size() == 3);
  CHECK(entries[0].db_id == "alpha");
  CHECK(entries[0].ok());
  CHECK_FALSE(entries[1].ok());
  CHECK(entries[1].error.find("beta") != std::string::npos);
  CHECK(entries[2].ok());
  CHECK(fs::exists(transcript_file(dir, "alpha")));
  CHECK_FALSE(fs::exists(transcript_file(dir, "beta")));
  CHECK(entries[0].transcript->config.seed == database_seed(5, "alpha"));
  CHECK(database_seed(5, "alpha") != database_seed(5, "gamma"));
  CHECK(entries[0].transcript->run_id != entries[2].transcript->run_id);
}
