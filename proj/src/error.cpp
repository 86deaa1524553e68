#include "flowtok/error.hpp"

namespace flowtok {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kIo: return "IoError";
    case ErrorCode::kParse: return "ParseError";
    case ErrorCode::kValidation: return "ValidationError";
    case ErrorCode::kCsvDialect: return "CsvDialectError";
    case ErrorCode::kHeaderMismatch: return "HeaderMismatchError";
    case ErrorCode::kTimestampParse: return "TimestampParseError";
    case ErrorCode::kIntegerCoercion: return "IntegerCoercionError";
    case ErrorCode::kNegativeDelta: return "NegativeDeltaError";
    case ErrorCode::kGroupAlreadyTrained: return "GroupAlreadyTrainedError";
    case ErrorCode::kFormatVersion: return "FormatVersionError";
    case ErrorCode::kChecksum: return "ChecksumError";
    case ErrorCode::kTruncation: return "TruncationError";
    case ErrorCode::kUnknownCategory: return "UnknownCategoryError";
    case ErrorCode::kUnknownCharacter: return "UnknownCharacterError";
    case ErrorCode::kMalformedStream: return "MalformedStreamError";
    case ErrorCode::kReservedCharacter: return "ReservedCharacterError";
  }
  return "Error";
}

void rethrow_with_context(const Error& e, std::string_view context) {
  std::string msg = std::string(context) + ": " + e.what();
  switch (e.code()) {
    case ErrorCode::kIo: throw IoError(msg);
    case ErrorCode::kParse: throw ParseError(msg);
    case ErrorCode::kValidation: throw ValidationError(msg);
    case ErrorCode::kCsvDialect: throw CsvDialectError(msg);
    case ErrorCode::kHeaderMismatch: throw HeaderMismatchError(msg);
    case ErrorCode::kTimestampParse: throw TimestampParseError(msg);
    case ErrorCode::kIntegerCoercion: throw IntegerCoercionError(msg);
    case ErrorCode::kNegativeDelta: throw NegativeDeltaError(msg);
    case ErrorCode::kGroupAlreadyTrained: throw GroupAlreadyTrainedError(msg);
    case ErrorCode::kFormatVersion: throw FormatVersionError(msg);
    case ErrorCode::kChecksum: throw ChecksumError(msg);
    case ErrorCode::kTruncation: throw TruncationError(msg);
    case ErrorCode::kUnknownCategory: throw UnknownCategoryError(msg);
    case ErrorCode::kUnknownCharacter: throw UnknownCharacterError(msg);
    case ErrorCode::kMalformedStream: throw MalformedStreamError(msg);
    case ErrorCode::kReservedCharacter: throw ReservedCharacterError(msg);
  }
  throw Error(e.code(), msg);
}

}  // namespace flowtok
