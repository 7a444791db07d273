#pragma once

#include <cstddef>
#include <string>

namespace mealgen {

// SHA-256, lowercase hex.
std::string sha256_hex(const void* data, size_t len);
std::string sha256_hex(const std::string& data);
std::string sha256_file(const std::string& path);  // streaming; throws Io on failure

} // namespace mealgen
