#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace flowtok {

// Stable process exit codes, one per error class. Documented in README.md.
enum class ErrorCode : int {
  kIo = 10,
  kParse = 11,
  kValidation = 12,
  kCsvDialect = 13,
  kHeaderMismatch = 14,
  kTimestampParse = 15,
  kIntegerCoercion = 16,
  kNegativeDelta = 17,
  kGroupAlreadyTrained = 18,
  kFormatVersion = 19,
  kChecksum = 20,
  kTruncation = 21,
  kUnknownCategory = 22,
  kUnknownCharacter = 23,
  kMalformedStream = 24,
  kReservedCharacter = 25,
};

std::string_view error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }
  int exit_code() const noexcept { return static_cast<int>(code_); }

 private:
  ErrorCode code_;
};

#define FLOWTOK_DEFINE_ERROR(Name, Code)                   \
  class Name : public Error {                              \
   public:                                                 \
    explicit Name(const std::string& message)              \
        : Error(ErrorCode::Code, message) {}               \
  };

FLOWTOK_DEFINE_ERROR(IoError, kIo)
FLOWTOK_DEFINE_ERROR(ParseError, kParse)
FLOWTOK_DEFINE_ERROR(ValidationError, kValidation)
FLOWTOK_DEFINE_ERROR(CsvDialectError, kCsvDialect)
FLOWTOK_DEFINE_ERROR(HeaderMismatchError, kHeaderMismatch)
FLOWTOK_DEFINE_ERROR(TimestampParseError, kTimestampParse)
FLOWTOK_DEFINE_ERROR(IntegerCoercionError, kIntegerCoercion)
FLOWTOK_DEFINE_ERROR(NegativeDeltaError, kNegativeDelta)
FLOWTOK_DEFINE_ERROR(GroupAlreadyTrainedError, kGroupAlreadyTrained)
FLOWTOK_DEFINE_ERROR(FormatVersionError, kFormatVersion)
FLOWTOK_DEFINE_ERROR(ChecksumError, kChecksum)
FLOWTOK_DEFINE_ERROR(TruncationError, kTruncation)
FLOWTOK_DEFINE_ERROR(UnknownCategoryError, kUnknownCategory)
FLOWTOK_DEFINE_ERROR(UnknownCharacterError, kUnknownCharacter)
FLOWTOK_DEFINE_ERROR(MalformedStreamError, kMalformedStream)
FLOWTOK_DEFINE_ERROR(ReservedCharacterError, kReservedCharacter)

#undef FLOWTOK_DEFINE_ERROR

// Rethrows `e` as the same error class with `context` prepended to the
// message.
[[noreturn]] void rethrow_with_context(const Error& e, std::string_view context);

}  // namespace flowtok
