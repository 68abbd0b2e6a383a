#pragma once

#include <string>
#include <string_view>

namespace draftforge {

inline constexpr std::string_view kDigestAlgorithm = "sha256";

// Lowercase hex SHA-256 of the bytes.
std::string sha256_hex(std::string_view bytes);

}  // namespace draftforge
