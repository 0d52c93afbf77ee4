#include "schemaprobe/surrogate.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

#include "schemaprobe/error.hpp"
#include "schemaprobe/sql_extract.hpp"

namespace schemaprobe {

namespace {

constexpr std::string_view kPsiHead =
    "The following are SQL queries generated based on the database schema: ";
constexpr std::string_view kPsiBody =
    ". Based on these queries, reconstruct the complete database schema. Provide the schema in "
    "the format of SQL CREATE TABLE statements, including table names, columns, data types.";
constexpr std::string_view kPsiSpeculative =
    " Also add CREATE TABLE statements for related tables that are likely to exist in this "
    "database even though no query references them.";
constexpr std::string_view kPsiTail =
    " Do not include constraints such as PRIMARY KEY and FOREIGN KEY and only output SQL CREATE "
    "TABLE statements without any additional text or explanation!";

constexpr std::string_view kQuestionHead = "Suppose this is the current database schema: ";

std::string question_tail(std::size_t count) {
  return ". Based on this schema, generate " + std::to_string(count) +
         " distinct and comprehensive natural language questions that would help uncover other "
         "potential unknown elements of the schema, such as additional tables, columns, data "
         "types, relationships between tables, or constraints. Ensure that the questions vary in "
         "focus (e.g., targeting potential missing tables, columns, column types, or "
         "relationships) and cover different aspects of the schema's structure. Provide these "
         "questions in a well-organized, ordered list.";
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

SurrogateRequest extraction_request(SurrogateStage stage, std::span<const TargetExchange> exchanges,
                                    bool speculative) {
  const auto outputs = usable_outputs(exchanges);
  if (outputs.empty()) throw Error(ErrorCode::kNoUsableExchanges, "no usable target outputs");
  SurrogateRequest req;
  req.stage = stage;
  req.speculative = speculative;
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    if (i) req.payload_text += "\n";
    req.payload_text += outputs[i];
  }
  req.prompt = std::string(kPsiHead) + req.payload_text + std::string(kPsiBody) +
               (speculative ? std::string(kPsiSpeculative) : "") + std::string(kPsiTail);
  return req;
}

// "1.", "1)", "(1)", "Q1:", "-", "*", "•" followed by text.
std::optional<std::string> strip_list_marker(const std::string& line) {
  std::size_t i = 0;
  const auto n = line.size();
  auto rest = [&](std::size_t from) -> std::optional<std::string> {
    auto text = trim(std::string_view(line).substr(from));
    if (text.empty()) return std::nullopt;
    return text;
  };
  if (line.compare(0, 3, "•") == 0) return rest(3);
  if (line[0] == '-' || line[0] == '*' || line[0] == '+') {
    if (n > 1 && line[1] == ' ') return rest(2);
    return std::nullopt;
  }
  if (line[0] == '(') i = 1;
  if ((line[i] == 'Q' || line[i] == 'q') && i + 1 < n && std::isdigit(static_cast<unsigned char>(line[i + 1]))) ++i;
  const auto digits_begin = i;
  while (i < n && std::isdigit(static_cast<unsigned char>(line[i]))) ++i;
  if (i == digits_begin || i >= n) return std::nullopt;
  if (line[i] == '.' || line[i] == ')' || line[i] == ':') {
    if (i + 1 < n && !std::isspace(static_cast<unsigned char>(line[i + 1])) && line[i] == '.') {
      return std::nullopt;  // "1.5 is ..." is not a marker
    }
    return rest(i + 1);
  }
  return std::nullopt;
}

std::string clean_question(std::string q) {
  // Markdown emphasis and wrapping quotes.
  auto strip_pair = [&](std::string_view open, std::string_view close) {
    if (q.size() >= open.size() + close.size() && q.compare(0, open.size(), open) == 0 &&
        q.compare(q.size() - close.size(), close.size(), close) == 0) {
      q = trim(std::string_view(q).substr(open.size(), q.size() - open.size() - close.size()));
    }
  };
  strip_pair("**", "**");
  strip_pair("\"", "\"");
  return q;
}

std::string deterministic_questions(const SurrogateRequest& request) {
  const auto psi = parse_schema_reply(request.payload_text);
  std::vector<std::string> questions;
  for (const auto& t : psi.tables()) questions.push_back("What are all attributes of " + t.name + "?");
  const auto& tables = psi.tables();
  for (std::size_t i = 0; i < tables.size(); ++i) {
    for (std::size_t j = i + 1; j < tables.size(); ++j) {
      questions.push_back("Which records relate " + tables[i].name + " to " + tables[j].name + "?");
    }
  }
  if (questions.size() > request.question_count) questions.resize(request.question_count);
  std::string out;
  for (std::size_t i = 0; i < questions.size(); ++i) {
    out += std::to_string(i + 1) + ". " + questions[i] + "\n";
  }
  return out;
}

}  // namespace

std::string_view surrogate_stage_name(SurrogateStage stage) {
  switch (stage) {
    case SurrogateStage::kPsi: return "psi";
    case SurrogateStage::kQuestionGen: return "question_gen";
    case SurrogateStage::kReconstruction: return "reconstruction";
  }
  return "psi";
}

std::string_view surrogate_backend_name(SurrogateBackend backend) {
  return backend == SurrogateBackend::kLlm ? "llm" : "deterministic";
}

std::optional<SurrogateBackend> parse_surrogate_backend(std::string_view name) {
  if (name == "llm") return SurrogateBackend::kLlm;
  if (name == "deterministic") return SurrogateBackend::kDeterministic;
  return std::nullopt;
}

std::vector<std::string> usable_outputs(std::span<const TargetExchange> exchanges) {
  std::vector<const TargetExchange*> sorted;
  for (const auto& ex : exchanges) sorted.push_back(&ex);
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](auto* a, auto* b) { return a->probe_id < b->probe_id; });
  std::vector<std::string> out;
  for (const auto* ex : sorted) {
    if (!ex->ok()) continue;
    auto text = trim(ex->response_text);
    if (text.empty() || text == kRefusalText || text == "'N/A'") continue;
    out.push_back(std::move(text));
  }
  return out;
}

SurrogateRequest build_psi_prompt(std::span<const TargetExchange> exchanges, bool speculative) {
  return extraction_request(SurrogateStage::kPsi, exchanges, speculative);
}

SurrogateRequest build_reconstruction_prompt(std::span<const TargetExchange> exchanges) {
  return extraction_request(SurrogateStage::kReconstruction, exchanges, false);
}

SurrogateRequest build_question_prompt(const PsiResult& psi, std::size_t question_count) {
  if (psi.schema.empty()) throw Error(ErrorCode::kEmptyPsi, "PSI schema has no tables");
  if (question_count == 0) throw Error(ErrorCode::kInvalidConfig, "question count must be >= 1");
  SurrogateRequest req;
  req.stage = SurrogateStage::kQuestionGen;
  req.question_count = question_count;
  req.payload_text = render_ddl(psi.schema);
  req.prompt = std::string(kQuestionHead) + req.payload_text + question_tail(question_count);
  return req;
}

std::vector<ProbeInput> parse_question_list(std::string_view reply, std::size_t max_questions,
                                            std::int64_t first_id, int cycle) {
  std::vector<ProbeInput> out;
  std::set<std::string> seen;
  std::istringstream in{std::string(reply)};
  std::string line;
  while (std::getline(in, line) && out.size() < max_questions) {
    line = trim(line);
    if (line.empty()) continue;
    auto text = strip_list_marker(line);
    if (!text) continue;
    auto question = clean_question(*text);
    if (question.empty() || !seen.insert(question).second) continue;
    out.push_back(ProbeInput{first_id + static_cast<std::int64_t>(out.size()),
                             ProbeKind::kGenerated, std::move(question), cycle});
  }
  if (out.empty()) throw Error(ErrorCode::kNoQuestionsParsed, "reply contains no list items");
  return out;
}

std::string run_surrogate(const SurrogateRequest& request, SurrogateBackend backend,
                          const ChatClient* client) {
  if (backend == SurrogateBackend::kDeterministic) {
    if (request.stage == SurrogateStage::kQuestionGen) return deterministic_questions(request);
    return render_ddl(extract_schema(request.payload_text));
  }
  if (client == nullptr) {
    throw Error(ErrorCode::kInvalidConfig, "llm surrogate requires an endpoint");
  }
  auto result = client->complete({ChatMessage{"user", request.prompt}});
  if (result.error) {
    throw Error(ErrorCode::kStageFailed,
                std::string(surrogate_stage_name(request.stage)) + ": " +
                    std::string(exchange_error_name(result.error->kind)) + " " +
                    result.error->detail);
  }
  return result.content;
}

Schema parse_schema_reply(std::string_view reply) {
  std::vector<ExtractionResult> results;
  for (const auto& stmt : split_statements(reply)) {
    if (stmt.kind != StatementKind::kCreateTable) continue;
    results.push_back(extract_from_create(stmt));
  }
  auto schema = merge_extractions(results);
  if (schema.empty()) throw Error(ErrorCode::kNoSchemaFound, "reply contains no CREATE TABLE");
  return schema;
}

}  // namespace schemaprobe
