#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace groundwork::fs {

std::string read_file(const std::filesystem::path& path);

// Writes to a sibling temporary file, then renames over `path`, so readers
// observe either the old or the new content.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace groundwork::fs
