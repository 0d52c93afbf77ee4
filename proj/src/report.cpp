#include "schemaprobe/report.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cstdio>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "schemaprobe/error.hpp"

namespace schemaprobe {

using nlohmann::json;

namespace {

constexpr SizeClass kSizes[] = {SizeClass::kSmall, SizeClass::kMedium, SizeClass::kLarge};

std::string method_label(AttackMode mode) {
  switch (mode) {
    case AttackMode::kBaseline: return "Baseline";
    case AttackMode::kPsiOnly: return "PSI";
    case AttackMode::kFullReconstruction: return "Schema Reconstruction";
  }
  return "";
}

}  // namespace

CampaignReport score_campaign(std::span<const AttackTranscript> transcripts,
                              const DatasetBundle& bundle, ReportMeta meta,
                              const SynonymTable& synonyms) {
  std::map<std::pair<AttackMode, std::string>, const AttackTranscript*> by_key;
  std::set<AttackMode> modes;
  for (const auto& t : transcripts) {
    if (bundle.index_of(t.db_id) == static_cast<std::size_t>(-1)) {
      throw Error(ErrorCode::kUnknownDbId, "transcript for unknown database " + t.db_id);
    }
    modes.insert(t.config.mode);
    auto& slot = by_key[{t.config.mode, t.db_id}];
    if (slot == nullptr || (!slot->complete() && t.complete())) slot = &t;
  }

  std::vector<std::string> db_ids;
  for (const auto& s : bundle.schemas) db_ids.push_back(s.db_id());
  std::sort(db_ids.begin(), db_ids.end());

  CampaignReport report;
  report.meta = std::move(meta);
  for (auto mode : modes) {
    for (const auto& id : db_ids) {
      DbModeScore row;
      row.mode = mode;
      row.size = bundle.size_classes.at(bundle.index_of(id));
      row.score.db_id = id;
      report.scores.push_back(std::move(row));
    }
  }

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const auto i = next.fetch_add(1);
      if (i >= report.scores.size()) return;
      auto& row = report.scores[i];
      const auto& truth = *bundle.find(row.score.db_id);
      const auto it = by_key.find({row.mode, row.score.db_id});
      const bool attacked = it != by_key.end() && it->second->complete();
      const auto predicted =
          attacked ? canonicalize(*it->second->final_schema) : CanonicalSchema{};
      row.attacked = attacked;
      row.score = score_database(predicted, canonicalize(truth), synonyms);
      row.score.db_id = truth.db_id();
    }
  };
  const auto workers = std::min<std::size_t>(
      std::max(1u, std::thread::hardware_concurrency()), report.scores.size());
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  }

  for (auto mode : modes) {
    ModeSummary summary;
    summary.mode = mode;
    std::vector<DbScore> all;
    std::map<SizeClass, std::vector<DbScore>> strata;
    for (const auto& row : report.scores) {
      if (row.mode != mode) continue;
      all.push_back(row.score);
      strata[row.size].push_back(row.score);
      summary.errors += row.score.errors;
      summary.attacked += row.attacked ? 1 : 0;
    }
    summary.databases = all.size();
    summary.overall = aggregate_scores(all);
    for (const auto& [size, scores] : strata) {
      summary.strata[size] = aggregate_scores(scores);
      summary.strata_sizes[size] = scores.size();
    }
    report.modes.push_back(std::move(summary));
  }
  return report;
}

std::vector<SweepRow> sweep_report(const std::map<std::size_t, CampaignReport>& by_input_size) {
  if (by_input_size.size() < 2) {
    throw Error(ErrorCode::kInvalidConfig, "a sweep needs at least two input sizes");
  }
  std::vector<SweepRow> rows;
  std::map<AttackMode, const AggregateScore*> previous;
  for (const auto& [size, report] : by_input_size) {
    for (const auto& m : report.modes) {
      SweepRow row;
      row.input_size = size;
      row.mode = m.mode;
      row.aggregate = m.overall;
      if (auto it = previous.find(m.mode); it != previous.end()) {
        row.delta_table = m.overall.table.macro.f1 - it->second->table.macro.f1;
        row.delta_table_col = m.overall.table_col.macro.f1 - it->second->table_col.macro.f1;
        row.delta_table_col_type =
            m.overall.table_col_type.macro.f1 - it->second->table_col_type.macro.f1;
      }
      previous[m.mode] = &m.overall;
      rows.push_back(row);
    }
  }
  std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
    return std::tie(a.mode, a.input_size) < std::tie(b.mode, b.input_size);
  });
  return rows;
}

std::vector<std::string> rouge_tokens(std::string_view text) {
  std::vector<std::string> out;
  std::string current;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isspace(c)) {
      if (!current.empty()) out.push_back(std::move(current));
      current.clear();
    } else if (std::isalnum(c) || c >= 0x80) {
      current.push_back(static_cast<char>(std::tolower(c)));
    }
  }
  if (!current.empty()) out.push_back(std::move(current));
  return out;
}

namespace {

ScoreTriple ngram_overlap(const std::vector<std::string>& ref, const std::vector<std::string>& cand,
                          std::size_t n) {
  auto grams = [n](const std::vector<std::string>& tokens) {
    std::map<std::vector<std::string>, std::size_t> counts;
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
      ++counts[std::vector<std::string>(tokens.begin() + i, tokens.begin() + i + n)];
    }
    return counts;
  };
  const auto r = grams(ref);
  const auto c = grams(cand);
  std::size_t total_r = 0, total_c = 0, overlap = 0;
  for (const auto& [g, k] : r) total_r += k;
  for (const auto& [g, k] : c) {
    total_c += k;
    if (auto it = r.find(g); it != r.end()) overlap += std::min(k, it->second);
  }
  if (total_r == 0 || total_c == 0) return {};
  return ScoreTriple::from_pr(static_cast<double>(overlap) / total_c,
                              static_cast<double>(overlap) / total_r);
}

ScoreTriple lcs_score(const std::vector<std::string>& ref, const std::vector<std::string>& cand) {
  if (ref.empty() || cand.empty()) return {};
  std::vector<std::size_t> prev(cand.size() + 1, 0), cur(cand.size() + 1, 0);
  for (std::size_t i = 1; i <= ref.size(); ++i) {
    for (std::size_t j = 1; j <= cand.size(); ++j) {
      cur[j] = ref[i - 1] == cand[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  const double lcs = static_cast<double>(prev[cand.size()]);
  return ScoreTriple::from_pr(lcs / cand.size(), lcs / ref.size());
}

std::string join_lines(std::span<const std::string> lines) {
  std::string out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (i) out += "\n";
    out += lines[i];
  }
  return out;
}

}  // namespace

RougeScore rouge_scores(std::string_view reference, std::string_view candidate) {
  const auto ref = rouge_tokens(reference);
  const auto cand = rouge_tokens(candidate);
  return RougeScore{ngram_overlap(ref, cand, 1), ngram_overlap(ref, cand, 2), lcs_score(ref, cand)};
}

RougeScore rouge_facts(std::span<const std::string> reference, std::span<const std::string> candidate) {
  return rouge_scores(join_lines(reference), join_lines(candidate));
}

std::string_view report_format_extension(ReportFormat format) {
  switch (format) {
    case ReportFormat::kJson: return "json";
    case ReportFormat::kMarkdown: return "md";
    case ReportFormat::kCsv: return "csv";
  }
  return "json";
}

namespace {

json triple_json(const ScoreTriple& s) {
  return {{"precision", s.precision}, {"recall", s.recall}, {"f1", s.f1}};
}

ScoreTriple triple_from(const json& j) {
  return ScoreTriple{j.at("precision").get<double>(), j.at("recall").get<double>(),
                     j.at("f1").get<double>()};
}

json level_agg_json(const LevelAggregate& a) {
  auto j = triple_json(a.macro);
  j["f1_of_means"] = a.f1_of_means;
  j["databases"] = a.databases;
  return j;
}

LevelAggregate level_agg_from(const json& j) {
  LevelAggregate a;
  a.macro = triple_from(j);
  a.f1_of_means = j.at("f1_of_means").get<double>();
  a.databases = j.at("databases").get<std::size_t>();
  return a;
}

json agg_json(const AggregateScore& a) {
  return {{"table", level_agg_json(a.table)},
          {"table_col", level_agg_json(a.table_col)},
          {"table_col_type", level_agg_json(a.table_col_type)}};
}

AggregateScore agg_from(const json& j) {
  return AggregateScore{level_agg_from(j.at("table")), level_agg_from(j.at("table_col")),
                        level_agg_from(j.at("table_col_type"))};
}

json level_json(const LevelScore& l) {
  auto j = triple_json(l.score);
  j["tp"] = l.tp;
  j["fp"] = l.fp;
  j["fn"] = l.fn;
  j["skipped"] = l.skipped;
  return j;
}

LevelScore level_from(const json& j) {
  LevelScore l;
  l.score = triple_from(j);
  l.tp = j.at("tp").get<std::size_t>();
  l.fp = j.at("fp").get<std::size_t>();
  l.fn = j.at("fn").get<std::size_t>();
  l.skipped = j.at("skipped").get<bool>();
  return l;
}

json errors_json(const ErrorBreakdown& e) {
  return {{"suffix_mismatch", e.suffix_mismatch},
          {"semantic_substitution", e.semantic_substitution},
          {"other_fp", e.other_fp},
          {"other_fn", e.other_fn}};
}

ErrorBreakdown errors_from(const json& j) {
  ErrorBreakdown e;
  e.suffix_mismatch = j.at("suffix_mismatch").get<std::size_t>();
  e.semantic_substitution = j.at("semantic_substitution").get<std::size_t>();
  e.other_fp = j.at("other_fp").get<std::size_t>();
  e.other_fn = j.at("other_fn").get<std::size_t>();
  return e;
}

SizeClass size_from(const std::string& name) {
  for (auto s : kSizes) {
    if (size_class_name(s) == name) return s;
  }
  throw Error(ErrorCode::kInvalidConfig, "unknown size class " + name);
}

AttackMode mode_from(const std::string& name) {
  if (auto m = parse_attack_mode(name)) return *m;
  throw Error(ErrorCode::kInvalidConfig, "unknown attack mode " + name);
}

json to_json(const CampaignReport& r) {
  json scores = json::array();
  for (const auto& s : r.scores) {
    scores.push_back({{"db_id", s.score.db_id},
                      {"mode", attack_mode_name(s.mode)},
                      {"size_class", size_class_name(s.size)},
                      {"attacked", s.attacked},
                      {"table", level_json(s.score.table)},
                      {"table_col", level_json(s.score.table_col)},
                      {"table_col_type", level_json(s.score.table_col_type)},
                      {"errors", errors_json(s.score.errors)}});
  }
  json modes = json::array();
  for (const auto& m : r.modes) {
    json strata = json::object();
    for (const auto& [size, agg] : m.strata) {
      auto j = agg_json(agg);
      j["size"] = m.strata_sizes.at(size);
      strata[std::string(size_class_name(size))] = j;
    }
    modes.push_back({{"mode", attack_mode_name(m.mode)},
                     {"overall", agg_json(m.overall)},
                     {"strata", strata},
                     {"errors", errors_json(m.errors)},
                     {"attacked", m.attacked},
                     {"databases", m.databases}});
  }
  json sweep = json::array();
  for (const auto& s : r.sweep) {
    sweep.push_back({{"input_size", s.input_size},
                     {"mode", attack_mode_name(s.mode)},
                     {"aggregate", agg_json(s.aggregate)},
                     {"delta_table", s.delta_table},
                     {"delta_table_col", s.delta_table_col},
                     {"delta_table_col_type", s.delta_table_col_type}});
  }
  json meta{{"run_id", r.meta.run_id},
            {"target", r.meta.target},
            {"dataset", r.meta.dataset},
            {"settings", r.meta.settings}};
  return {{"meta", meta}, {"scores", scores}, {"modes", modes}, {"sweep", sweep}};
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

std::string fmt_signed(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%+.3f", v);
  return buf;
}

std::string fmt6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string render_markdown(const CampaignReport& r) {
  std::ostringstream out;
  out << "# Schema reconstruction report\n\n";
  out << "- run_id: " << r.meta.run_id << "\n";
  out << "- target: " << r.meta.target << "\n";
  out << "- dataset: " << r.meta.dataset << "\n";
  for (const auto& [k, v] : r.meta.settings) out << "- " << k << ": " << v << "\n";

  out << "\n## Macro F1\n\n";
  out << "| Attacked Model | Attack Method | Table | Table+Col | Table+Col+Type |\n";
  out << "|---|---|---:|---:|---:|\n";
  bool first = true;
  for (const auto& m : r.modes) {
    out << "| " << (first ? r.meta.target : "") << " | " << method_label(m.mode) << " | "
        << fmt(m.overall.table.macro.f1) << " | " << fmt(m.overall.table_col.macro.f1) << " | "
        << fmt(m.overall.table_col_type.macro.f1) << " |\n";
    first = false;
  }

  out << "\n## Precision and recall\n\n";
  out << "| Attack Method | Level | Precision | Recall | F1 | F1 of means | Databases |\n";
  out << "|---|---|---:|---:|---:|---:|---:|\n";
  for (const auto& m : r.modes) {
    const std::pair<const char*, const LevelAggregate*> levels[] = {
        {"Table", &m.overall.table},
        {"Table+Col", &m.overall.table_col},
        {"Table+Col+Type", &m.overall.table_col_type}};
    for (const auto& [name, agg] : levels) {
      out << "| " << method_label(m.mode) << " | " << name << " | " << fmt(agg->macro.precision)
          << " | " << fmt(agg->macro.recall) << " | " << fmt(agg->macro.f1) << " | "
          << fmt(agg->f1_of_means) << " | " << agg->databases << " |\n";
    }
  }

  out << "\n## By database size\n\n";
  out << "| Attack Method | Size | Databases | Table | Table+Col | Table+Col+Type |\n";
  out << "|---|---|---:|---:|---:|---:|\n";
  for (const auto& m : r.modes) {
    for (const auto& [size, agg] : m.strata) {
      out << "| " << method_label(m.mode) << " | " << size_class_name(size) << " | "
          << m.strata_sizes.at(size) << " | " << fmt(agg.table.macro.f1) << " | "
          << fmt(agg.table_col.macro.f1) << " | " << fmt(agg.table_col_type.macro.f1) << " |\n";
    }
  }

  out << "\n## Error taxonomy\n\n";
  out << "| Attack Method | Suffix mismatch | Semantic substitution | Other FP | Other FN |\n";
  out << "|---|---:|---:|---:|---:|\n";
  for (const auto& m : r.modes) {
    out << "| " << method_label(m.mode) << " | " << m.errors.suffix_mismatch << " | "
        << m.errors.semantic_substitution << " | " << m.errors.other_fp << " | "
        << m.errors.other_fn << " |\n";
  }

  if (!r.sweep.empty()) {
    out << "\n## Input size sweep\n\n";
    out << "| Attack Method | Input Size | Table | Table+Col | Table+Col+Type | dTable | dTable+Col "
           "| dTable+Col+Type |\n";
    out << "|---|---:|---:|---:|---:|---:|---:|---:|\n";
    for (const auto& s : r.sweep) {
      out << "| " << method_label(s.mode) << " | " << s.input_size << " | "
          << fmt(s.aggregate.table.macro.f1) << " | " << fmt(s.aggregate.table_col.macro.f1)
          << " | " << fmt(s.aggregate.table_col_type.macro.f1) << " | "
          << fmt_signed(s.delta_table) << " | " << fmt_signed(s.delta_table_col) << " | "
          << fmt_signed(s.delta_table_col_type) << " |\n";
    }
  }
  return out.str();
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string render_csv(const CampaignReport& r) {
  std::ostringstream out;
  out << "db_id,size_class,mode,level,attacked,tp,fp,fn,skipped,precision,recall,f1\n";
  for (const auto& s : r.scores) {
    const std::pair<const char*, const LevelScore*> levels[] = {
        {"table", &s.score.table},
        {"table_col", &s.score.table_col},
        {"table_col_type", &s.score.table_col_type}};
    for (const auto& [name, level] : levels) {
      out << csv_field(s.score.db_id) << ',' << size_class_name(s.size) << ','
          << attack_mode_name(s.mode) << ',' << name << ',' << (s.attacked ? 1 : 0) << ','
          << level->tp << ',' << level->fp << ',' << level->fn << ',' << (level->skipped ? 1 : 0)
          << ',' << fmt6(level->score.precision) << ',' << fmt6(level->score.recall) << ','
          << fmt6(level->score.f1) << '\n';
    }
  }
  return out.str();
}

}  // namespace

std::string render_report(const CampaignReport& report, ReportFormat format) {
  switch (format) {
    case ReportFormat::kJson: return to_json(report).dump(2) + "\n";
    case ReportFormat::kMarkdown: return render_markdown(report);
    case ReportFormat::kCsv: return render_csv(report);
  }
  return {};
}

CampaignReport report_from_json(std::string_view text) {
  CampaignReport r;
  try {
    const auto j = json::parse(text);
    const auto& meta = j.at("meta");
    r.meta.run_id = meta.at("run_id").get<std::string>();
    r.meta.target = meta.at("target").get<std::string>();
    r.meta.dataset = meta.at("dataset").get<std::string>();
    r.meta.settings = meta.at("settings").get<std::map<std::string, std::string>>();
    for (const auto& s : j.at("scores")) {
      DbModeScore row;
      row.mode = mode_from(s.at("mode").get<std::string>());
      row.size = size_from(s.at("size_class").get<std::string>());
      row.attacked = s.at("attacked").get<bool>();
      row.score.db_id = s.at("db_id").get<std::string>();
      row.score.table = level_from(s.at("table"));
      row.score.table_col = level_from(s.at("table_col"));
      row.score.table_col_type = level_from(s.at("table_col_type"));
      row.score.errors = errors_from(s.at("errors"));
      r.scores.push_back(std::move(row));
    }
    for (const auto& m : j.at("modes")) {
      ModeSummary summary;
      summary.mode = mode_from(m.at("mode").get<std::string>());
      summary.overall = agg_from(m.at("overall"));
      for (const auto& [name, agg] : m.at("strata").items()) {
        const auto size = size_from(name);
        summary.strata[size] = agg_from(agg);
        summary.strata_sizes[size] = agg.at("size").get<std::size_t>();
      }
      summary.errors = errors_from(m.at("errors"));
      summary.attacked = m.at("attacked").get<std::size_t>();
      summary.databases = m.at("databases").get<std::size_t>();
      r.modes.push_back(std::move(summary));
    }
    for (const auto& s : j.at("sweep")) {
      SweepRow row;
      row.input_size = s.at("input_size").get<std::size_t>();
      row.mode = mode_from(s.at("mode").get<std::string>());
      row.aggregate = agg_from(s.at("aggregate"));
      row.delta_table = s.at("delta_table").get<double>();
      row.delta_table_col = s.at("delta_table_col").get<double>();
      row.delta_table_col_type = s.at("delta_table_col_type").get<double>();
      r.sweep.push_back(row);
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidConfig, std::string("report json: ") + e.what());
  }
  return r;
}

std::string render_rouge(const RougeScore& score) {
  std::ostringstream out;
  out << "metric,precision,recall,f1\n";
  const std::pair<const char*, const ScoreTriple*> rows[] = {
      {"rouge1", &score.rouge1}, {"rouge2", &score.rouge2}, {"rougeL", &score.rougeL}};
  for (const auto& [name, s] : rows) {
    out << name << ',' << fmt6(s->precision) << ',' << fmt6(s->recall) << ',' << fmt6(s->f1)
        << '\n';
  }
  return out.str();
}

}  // namespace schemaprobe
