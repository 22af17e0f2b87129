#pragma once

#include <filesystem>

#include "flgnn/gat/params.hpp"
#include "json.hpp"

namespace flgnn::gat {

inline constexpr int kCheckpointVersion = 1;

// {"format": "flgnn-gat", "version": 1, "layers": [{in_dim, out_dim, combine,
//  heads: [{W: [...row-major...], a: [...]}]}]}. Doubles are written with
// shortest round-trip precision, so load(save(p)) == p bit for bit.
nlohmann::json to_json(const ModelParams& params);
ModelParams params_from_json(const nlohmann::json& doc);

void save_checkpoint(const std::filesystem::path& path, const ModelParams& params);
// Throws FormatError for a malformed or wrong-version file.
ModelParams load_checkpoint(const std::filesystem::path& path);

}  // namespace flgnn::gat
