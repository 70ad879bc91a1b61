#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace relunet {

enum class ErrorCode {
  kDimensionMismatch,
  kNonfiniteEntry,
  kDepthMismatch,
  kInvalidArgument,
  kInvalidSelector,
  kPackingMismatch,
  kParse,
  kIo,
};

std::string_view to_string(ErrorCode code);

// Every failure in the library surfaces as this exception. `index` carries
// the offending layer (1-based) or sample (0-based) where one applies.
class Error : public std::runtime_error {
 public:
  static constexpr std::size_t kNoIndex = static_cast<std::size_t>(-1);

  Error(ErrorCode code, const std::string& what, std::size_t index = kNoIndex)
      : std::runtime_error(what), code_(code), index_(index) {}

  ErrorCode code() const noexcept { return code_; }
  std::size_t index() const noexcept { return index_; }
  bool has_index() const noexcept { return index_ != kNoIndex; }

 private:
  ErrorCode code_;
  std::size_t index_;
};

}  // namespace relunet
