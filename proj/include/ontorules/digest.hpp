#pragma once

#include <string>
#include <string_view>

namespace ontorules {

// Lower-case hex SHA-256 of the given bytes.
std::string sha256_hex(std::string_view data);

// Short content-addressed identifier: `prefix` followed by the first 16 hex digits.
std::string content_id(std::string_view prefix, std::string_view data);

}  // namespace ontorules
