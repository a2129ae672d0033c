#pragma once

#include <filesystem>
#include <string>

namespace ecsrl {

// Writes via a sibling temp file and renames into place, so readers never
// observe a half-written file.
void write_atomic(const std::filesystem::path& path, const std::string& content);

std::string read_file(const std::filesystem::path& path);

}  // namespace ecsrl
