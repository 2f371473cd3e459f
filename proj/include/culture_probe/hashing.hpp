#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace cprobe {

/// Lower-case hex SHA-256 digest.
std::string sha256Hex(std::string_view data);
std::string sha256File(const std::filesystem::path& path);

}  // namespace cprobe
