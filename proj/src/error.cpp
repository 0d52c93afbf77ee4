#include "schemaprobe/error.hpp"

namespace schemaprobe {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNormalizationEmpty: return "NormalizationEmpty";
    case ErrorCode::kEmptyGroundTruth: return "EmptyGroundTruth";
    case ErrorCode::kEmptyInput: return "EmptyInput";
    case ErrorCode::kMalformedDdl: return "MalformedDdl";
    case ErrorCode::kMalformedQuery: return "MalformedQuery";
    case ErrorCode::kMissingFile: return "MissingFile";
    case ErrorCode::kEmptyBank: return "EmptyBank";
    case ErrorCode::kSchemaFormatError: return "SchemaFormatError";
    case ErrorCode::kDuplicateDbId: return "DuplicateDbId";
    case ErrorCode::kUnknownTemplate: return "UnknownTemplate";
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
    case ErrorCode::kNoUsableExchanges: return "NoUsableExchanges";
    case ErrorCode::kEmptyPsi: return "EmptyPsi";
    case ErrorCode::kNoQuestionsParsed: return "NoQuestionsParsed";
    case ErrorCode::kNoSchemaFound: return "NoSchemaFound";
    case ErrorCode::kStageFailed: return "StageFailed";
    case ErrorCode::kCorruptTranscript: return "CorruptTranscript";
    case ErrorCode::kUnknownDbId: return "UnknownDbId";
    case ErrorCode::kCancelled: return "Cancelled";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace schemaprobe
