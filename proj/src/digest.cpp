#include "ontorules/digest.hpp"

#include <openssl/evp.h>

#include <array>
#include <stdexcept>

namespace ontorules {

std::string sha256_hex(std::string_view data) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md.data(), &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256 failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[md[i] >> 4]);
    out.push_back(kHex[md[i] & 0xf]);
  }
  return out;
}

std::string content_id(std::string_view prefix, std::string_view data) {
  return std::string(prefix) + sha256_hex(data).substr(0, 16);
}

}  // namespace ontorules
