#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "schemaprobe/metrics.hpp"
#include "schemaprobe/pipeline.hpp"
#include "schemaprobe/probe_corpus.hpp"

namespace schemaprobe {

struct ReportMeta {
  std::string run_id;
  std::string target;   // attacked model label
  std::string dataset;
  std::map<std::string, std::string> settings;
};

// One database under one attack mode.
struct DbModeScore {
  AttackMode mode = AttackMode::kFullReconstruction;
  SizeClass size = SizeClass::kSmall;
  bool attacked = false;  // false when the transcript was missing or incomplete
  DbScore score;
};

struct ModeSummary {
  AttackMode mode = AttackMode::kFullReconstruction;
  AggregateScore overall;
  std::map<SizeClass, AggregateScore> strata;  // only non-empty classes
  std::map<SizeClass, std::size_t> strata_sizes;
  ErrorBreakdown errors;
  std::size_t attacked = 0;
  std::size_t databases = 0;
};

struct SweepRow {
  std::size_t input_size = 0;
  AttackMode mode = AttackMode::kFullReconstruction;
  AggregateScore aggregate;
  // Macro F1 change against the next smaller input size; zero on the first row.
  double delta_table = 0.0;
  double delta_table_col = 0.0;
  double delta_table_col_type = 0.0;
};

struct CampaignReport {
  ReportMeta meta;
  std::vector<DbModeScore> scores;  // sorted by mode, then db_id
  std::vector<ModeSummary> modes;   // sorted by mode
  std::vector<SweepRow> sweep;
};

// Scores every bundle database for each mode that appears in transcripts.
// A database without a complete transcript for a mode scores as an empty
// prediction. Throws kUnknownDbId.
CampaignReport score_campaign(std::span<const AttackTranscript> transcripts,
                              const DatasetBundle& bundle, ReportMeta meta = {},
                              const SynonymTable& synonyms = {});

// Rows per (input_size, mode) in ascending size. Throws kInvalidConfig for
// fewer than two sizes.
std::vector<SweepRow> sweep_report(const std::map<std::size_t, CampaignReport>& by_input_size);

struct RougeScore {
  ScoreTriple rouge1;
  ScoreTriple rouge2;
  ScoreTriple rougeL;
};

// Lowercase, drop punctuation, split on whitespace.
std::vector<std::string> rouge_tokens(std::string_view text);
RougeScore rouge_scores(std::string_view reference, std::string_view candidate);
// Facts joined with newlines, then scored as one text each.
RougeScore rouge_facts(std::span<const std::string> reference, std::span<const std::string> candidate);

enum class ReportFormat { kJson, kMarkdown, kCsv };

std::string_view report_format_extension(ReportFormat format);  // "json", "md", "csv"
std::string render_report(const CampaignReport& report, ReportFormat format);
// Inverse of the json rendering. Throws kInvalidConfig on malformed input.
CampaignReport report_from_json(std::string_view text);

std::string render_rouge(const RougeScore& score);

}  // namespace schemaprobe
