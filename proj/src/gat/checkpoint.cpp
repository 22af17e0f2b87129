#include "flgnn/gat/checkpoint.hpp"

#include <fstream>

#include "flgnn/error.hpp"

namespace flgnn::gat {

using nlohmann::json;

json to_json(const ModelParams& params) {
  json layers = json::array();
  for (const auto& layer : params.layers) {
    json heads = json::array();
    for (const auto& head : layer.heads) {
      const auto w = head.weight.values();
      heads.push_back({{"W", std::vector<double>(w.begin(), w.end())}, {"a", head.attention}});
    }
    layers.push_back({{"in_dim", layer.in_dim},
                      {"out_dim", layer.out_dim},
                      {"combine", layer.combine == HeadCombine::concat ? "concat" : "single"},
                      {"heads", heads}});
  }
  return {{"format", "flgnn-gat"}, {"version", kCheckpointVersion}, {"layers", layers}};
}

ModelParams params_from_json(const json& doc) {
  try {
    if (doc.at("format") != "flgnn-gat") throw FormatError("not a flgnn-gat checkpoint");
    if (doc.at("version") != kCheckpointVersion) {
      throw FormatError("unsupported checkpoint version " + doc.at("version").dump());
    }
    const auto& layers = doc.at("layers");
    if (!layers.is_array() || layers.size() != kLayerCount) {
      throw FormatError("checkpoint must hold exactly 3 layers");
    }
    ModelParams params;
    for (std::size_t l = 0; l < kLayerCount; ++l) {
      const auto& src = layers[l];
      auto& layer = params.layers[l];
      layer.in_dim = src.at("in_dim").get<std::size_t>();
      layer.out_dim = src.at("out_dim").get<std::size_t>();
      const auto combine = src.at("combine").get<std::string>();
      if (combine != "concat" && combine != "single") throw FormatError("bad head combine " + combine);
      layer.combine = combine == "concat" ? HeadCombine::concat : HeadCombine::single;
      for (const auto& h : src.at("heads")) {
        auto w = h.at("W").get<std::vector<double>>();
        if (w.size() != layer.in_dim * layer.out_dim) throw FormatError("W has the wrong length");
        AttentionHead head;
        head.weight = numerics::Matrix(layer.in_dim, layer.out_dim, std::move(w));
        head.attention = h.at("a").get<std::vector<double>>();
        layer.heads.push_back(std::move(head));
      }
    }
    validate_params(params);
    return params;
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed checkpoint: ") + e.what());
  } catch (const DimensionError& e) {
    throw FormatError(std::string("inconsistent checkpoint: ") + e.what());
  }
}

void save_checkpoint(const std::filesystem::path& path, const ModelParams& params) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << to_json(params).dump() << '\n';
}

ModelParams load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  return params_from_json(doc);
}

}  // namespace flgnn::gat
