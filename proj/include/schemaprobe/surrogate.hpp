#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "schemaprobe/gateway.hpp"
#include "schemaprobe/probe_corpus.hpp"
#include "schemaprobe/schema.hpp"

namespace schemaprobe {

enum class SurrogateStage { kPsi, kQuestionGen, kReconstruction };

std::string_view surrogate_stage_name(SurrogateStage stage);

enum class SurrogateBackend { kLlm, kDeterministic };

std::string_view surrogate_backend_name(SurrogateBackend backend);
std::optional<SurrogateBackend> parse_surrogate_backend(std::string_view name);

struct SurrogateRequest {
  SurrogateStage stage = SurrogateStage::kPsi;
  // Joined target outputs (psi, reconstruction) or the PSI DDL (question_gen).
  std::string payload_text;
  // Full instruction sent to an LLM surrogate.
  std::string prompt;
  std::size_t question_count = 30;
  bool speculative = false;
};

struct PsiResult {
  Schema schema;
  bool includes_speculative = false;
};

inline constexpr std::size_t kDefaultQuestionCount = 30;

// Outputs of successful, non-refusal exchanges in probe_id order.
std::vector<std::string> usable_outputs(std::span<const TargetExchange> exchanges);

// Throws kNoUsableExchanges. speculative adds the instruction to propose
// related tables not seen in the outputs.
SurrogateRequest build_psi_prompt(std::span<const TargetExchange> exchanges,
                                  bool speculative = false);

// Same prompt shape over Step-1 and Step-3 exchanges together.
SurrogateRequest build_reconstruction_prompt(std::span<const TargetExchange> exchanges);

// Throws kEmptyPsi.
SurrogateRequest build_question_prompt(const PsiResult& psi,
                                       std::size_t question_count = kDefaultQuestionCount);

// Numbered or bulleted lines only; markers stripped, blanks and duplicates
// dropped, capped at max_questions. Ids start at first_id. Throws
// kNoQuestionsParsed.
std::vector<ProbeInput> parse_question_list(std::string_view reply, std::size_t max_questions,
                                            std::int64_t first_id = 1, int cycle = 1);

// Deterministic backend: sql-extract over the payload, or templated questions
// for question_gen. LLM backend: one user message to the client; transport
// failures throw kStageFailed.
std::string run_surrogate(const SurrogateRequest& request, SurrogateBackend backend,
                          const ChatClient* client = nullptr);

// CREATE TABLE statements anywhere in the reply, merged. Throws kNoSchemaFound.
Schema parse_schema_reply(std::string_view reply);

}  // namespace schemaprobe
