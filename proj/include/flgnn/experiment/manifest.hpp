#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "json.hpp"

namespace flgnn::experiment {

// SHA-1 of "blob <size>\0<bytes>", the id git gives a file's content.
std::string git_blob_hash(std::string_view bytes);
std::string hash_file(const std::filesystem::path& path);

// Hash of every regular file under `dir` (sorted by name), combined as the
// blob hash of the "<name> <hash>\n" listing.
std::string hash_directory(const std::filesystem::path& dir);

// manifest.json: the given fields plus the tool name and format version.
void write_manifest(const std::filesystem::path& path, nlohmann::json fields);

}  // namespace flgnn::experiment
