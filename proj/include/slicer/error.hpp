#pragma once

#include <stdexcept>
#include <string>

namespace slicer {

enum class ErrorCode {
  kInvalidArgument,
  kShape,
  kFormat,
  kTruncated,
  kNonFinite,
  kIo,
  kChecksum,
  kCorruptData,
};

const char* to_string(ErrorCode code);

/// Base of every error the library throws. The code lets callers (the CLI in
/// particular) map failures to exit statuses without RTTI ladders.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

#define SLICER_DEFINE_ERROR(Name, Code)                               \
  class Name : public Error {                                         \
   public:                                                            \
    explicit Name(const std::string& what) : Error(Code, what) {}     \
  }

SLICER_DEFINE_ERROR(InvalidArgument, ErrorCode::kInvalidArgument);
SLICER_DEFINE_ERROR(ShapeError, ErrorCode::kShape);
SLICER_DEFINE_ERROR(FormatError, ErrorCode::kFormat);
SLICER_DEFINE_ERROR(TruncatedError, ErrorCode::kTruncated);
SLICER_DEFINE_ERROR(NonFiniteError, ErrorCode::kNonFinite);
SLICER_DEFINE_ERROR(IoError, ErrorCode::kIo);
SLICER_DEFINE_ERROR(ChecksumError, ErrorCode::kChecksum);
SLICER_DEFINE_ERROR(CorruptDataError, ErrorCode::kCorruptData);

#undef SLICER_DEFINE_ERROR

}  // namespace slicer
