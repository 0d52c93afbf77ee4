#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace schemaprobe {

enum class ErrorCode {
  kNormalizationEmpty,
  kEmptyGroundTruth,
  kEmptyInput,
  kMalformedDdl,
  kMalformedQuery,
  kMissingFile,
  kEmptyBank,
  kSchemaFormatError,
  kDuplicateDbId,
  kUnknownTemplate,
  kInvalidConfig,
  kNoUsableExchanges,
  kEmptyPsi,
  kNoQuestionsParsed,
  kNoSchemaFound,
  kStageFailed,
  kCorruptTranscript,
  kUnknownDbId,
  kCancelled,
  kIoError,
};

std::string_view error_code_name(ErrorCode code);

// Single exception type for the library; callers branch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace schemaprobe
