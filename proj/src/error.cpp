#include "slicer/error.hpp"

namespace slicer {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid argument";
    case ErrorCode::kShape: return "shape error";
    case ErrorCode::kFormat: return "format error";
    case ErrorCode::kTruncated: return "truncated data";
    case ErrorCode::kNonFinite: return "non-finite value";
    case ErrorCode::kIo: return "I/O error";
    case ErrorCode::kChecksum: return "checksum mismatch";
    case ErrorCode::kCorruptData: return "corrupt data";
  }
  return "unknown error";
}

}  // namespace slicer
