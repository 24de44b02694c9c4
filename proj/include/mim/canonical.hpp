#pragma once

#include <string>

#include "json.hpp"

namespace mim {

// Canonical rendering shared by configs, run records, and metrics files:
// object keys sorted, floats printed with 17 significant digits, no inset
// whitespace, newline-terminated. Identical values produce identical bytes
// on every platform.
std::string canonical_dump(const nlohmann::json& j);

// SHA-256 of a byte string, lowercase hex.
std::string sha256_hex(const std::string& bytes);

// Writes bytes atomically (temp file + rename). Throws IoError.
void atomic_write(const std::string& path, const std::string& bytes);

}  // namespace mim
