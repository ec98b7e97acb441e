#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace ontorules {

// Line/column are 1-based. For CSV input, column is the cell index.
struct SourceLocation {
  std::size_t line = 0;
  std::size_t column = 0;
};

// Machine-readable error codes shared by the library, the CLI and the HTTP API.
namespace errc {
inline constexpr const char* kParse = "parse_error";
inline constexpr const char* kSchema = "schema_error";
inline constexpr const char* kEmptyDataset = "empty_dataset";
inline constexpr const char* kLookup = "lookup_error";
inline constexpr const char* kCycle = "cycle_error";
inline constexpr const char* kResolution = "resolution_error";
inline constexpr const char* kValidity = "validity_error";
inline constexpr const char* kNothingToUndo = "nothing_to_undo";
inline constexpr const char* kConfig = "config_error";
inline constexpr const char* kIo = "io_error";
inline constexpr const char* kDigestMismatch = "digest_mismatch";
inline constexpr const char* kOpen = "open_error";
}  // namespace errc

class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message,
        std::optional<SourceLocation> location = std::nullopt)
      : std::runtime_error(message), code_(std::move(code)), location_(location) {}

  const std::string& code() const noexcept { return code_; }
  const std::optional<SourceLocation>& location() const noexcept { return location_; }

 private:
  std::string code_;
  std::optional<SourceLocation> location_;
};

}  // namespace ontorules
