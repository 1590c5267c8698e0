#pragma once

#include <filesystem>

namespace normal_forge::detail {

// Sibling temporary path unique to this process.
std::filesystem::path temp_path_for(const std::filesystem::path& target);

// Renames tmp over target; removes tmp and throws IoError on failure.
void commit_file(const std::filesystem::path& tmp, const std::filesystem::path& target);

}  // namespace normal_forge::detail
