#include "relunet/error.hpp"

namespace relunet {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDimensionMismatch: return "dimension-mismatch";
    case ErrorCode::kNonfiniteEntry: return "nonfinite-entry";
    case ErrorCode::kDepthMismatch: return "depth-mismatch";
    case ErrorCode::kInvalidArgument: return "invalid-argument";
    case ErrorCode::kInvalidSelector: return "invalid-selector";
    case ErrorCode::kPackingMismatch: return "packing-mismatch";
    case ErrorCode::kParse: return "parse-error";
    case ErrorCode::kIo: return "io-error";
  }
  return "unknown";
}

}  // namespace relunet
