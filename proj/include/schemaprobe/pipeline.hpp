#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "schemaprobe/gateway.hpp"
#include "schemaprobe/probe_corpus.hpp"
#include "schemaprobe/schema.hpp"
#include "schemaprobe/surrogate.hpp"

namespace schemaprobe {

enum class AttackMode { kBaseline, kPsiOnly, kFullReconstruction };

// "baseline", "psi_only", "full_reconstruction".
std::string_view attack_mode_name(AttackMode mode);
// Also accepts the short forms "psi" and "full".
std::optional<AttackMode> parse_attack_mode(std::string_view name);

struct AttackConfig {
  AttackMode mode = AttackMode::kFullReconstruction;
  Step1Mode inputs = Step1Mode::kFull;  // full or zero_knowledge
  std::size_t input_size = 50;
  int cycles = 1;
  std::size_t questions_per_cycle = kDefaultQuestionCount;
  std::uint64_t seed = 0;
  SurrogateBackend surrogate = SurrogateBackend::kDeterministic;
  std::size_t max_parallel = 4;

  void validate() const;  // throws kInvalidConfig
  std::string to_json() const;
  static AttackConfig from_json(std::string_view text);
};

// Exchange plus where it happened in the loop.
struct StagedExchange {
  std::string stage;  // "step1" or "step3"
  int cycle = 0;
  ProbeKind kind = ProbeKind::kRandom;
  TargetExchange exchange;
};

struct AttackTranscript {
  std::string run_id;
  std::string db_id;
  AttackConfig config;
  std::string target_snapshot;  // JSON text
  std::vector<StagedExchange> exchanges;
  std::vector<Schema> psi;  // one per completed PSI stage
  std::vector<std::vector<ProbeInput>> questions;  // one list per completed cycle
  std::optional<Schema> final_schema;
  std::map<std::string, double> stage_ms;
  std::vector<std::string> notes;

  bool complete() const { return final_schema.has_value(); }
  std::size_t exchange_count(std::string_view stage) const;
};

struct AttackContext {
  Target* target = nullptr;
  const ProbeBanks* banks = nullptr;
  const ChatClient* surrogate_client = nullptr;  // llm backend only
  std::filesystem::path transcript_path;         // empty keeps it in memory
  const std::atomic<bool>* cancel = nullptr;
  std::string target_snapshot = "{}";
};

// Deterministic id from the config snapshot and db_id.
std::string make_run_id(const AttackConfig& config, std::string_view db_id,
                        std::string_view target_snapshot);

// Steps 1-4 per mode. Every record is appended to the transcript file before
// the next stage starts. Throws kStageFailed when every Step-1 exchange is a
// transport error or the surrogate endpoint fails, and kCancelled on cancel;
// the transcript keeps completed work in both cases.
AttackTranscript run_attack(const AttackConfig& config, const std::string& db_id,
                            const AttackContext& context);

// Parses a transcript file. Throws kCorruptTranscript with the byte offset of
// the first bad record.
AttackTranscript load_transcript(const std::filesystem::path& path);

// Truncates the file after the last complete record; returns the new size.
std::size_t salvage_transcript(const std::filesystem::path& path);

// Continues from the last completed stage without re-sending recorded
// exchanges. With salvage, a corrupt tail is truncated first instead of
// throwing. The context's transcript_path is ignored.
AttackTranscript resume_attack(const std::filesystem::path& path, const AttackContext& context,
                               bool salvage = false);

using TargetFactory =
    std::function<std::unique_ptr<Target>(const Schema& ground_truth, std::uint64_t db_seed)>;

struct CampaignOptions {
  std::filesystem::path transcript_dir;  // empty keeps transcripts in memory
  std::size_t max_parallel_dbs = 2;
  const ChatClient* surrogate_client = nullptr;
  const std::atomic<bool>* cancel = nullptr;
  std::string target_snapshot = "{}";
  // Continue existing transcripts in transcript_dir (salvaging torn tails)
  // instead of starting over.
  bool resume = false;
};

struct CampaignEntry {
  std::string db_id;
  std::optional<AttackTranscript> transcript;
  std::string error;  // set when the attack failed

  bool ok() const { return transcript.has_value(); }
};

// Per-database seed used for probes and the target.
std::uint64_t database_seed(std::uint64_t seed, std::string_view db_id);

// One attack per database in bundle order; failures are recorded per entry.
std::vector<CampaignEntry> run_campaign(const DatasetBundle& bundle, const AttackConfig& config,
                                        const ProbeBanks& banks, const TargetFactory& factory,
                                        const CampaignOptions& options);

// Transcript file name for a database inside transcript_dir.
std::filesystem::path transcript_file(const std::filesystem::path& dir, std::string_view db_id);

}  // namespace schemaprobe
