#include "stsscore/backend/bundle.hpp"

#include <fstream>

#include "stsscore/error.hpp"
#include "stsscore/hash.hpp"

namespace stsscore {

namespace {

template <typename T>
T required(const nlohmann::json& j, const char* key) {
  if (!j.contains(key)) fail(Errc::malformed_config, std::string("bundle.json missing '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    fail(Errc::malformed_config, std::string("bundle.json field '") + key + "' has the wrong type");
  }
}

}  // namespace

std::string_view to_string(BundleKind kind) {
  return kind == BundleKind::regression_pair ? "regression_pair" : "encoder";
}

BundleConfig parse_bundle_config(const nlohmann::json& j) {
  if (!j.is_object()) fail(Errc::malformed_config, "bundle.json is not an object");
  BundleConfig c;
  c.raw = j;

  const auto kind = required<std::string>(j, "kind");
  if (kind == "regression_pair") c.kind = BundleKind::regression_pair;
  else if (kind == "encoder") c.kind = BundleKind::encoder;
  else fail(Errc::malformed_config, "unknown bundle kind '" + kind + "'");

  c.runtime = j.value("runtime", std::string("transformer"));
  c.graph = j.value("graph", std::string("model.onnx"));
  if (c.graph.empty() || c.graph.find('/') != std::string::npos)
    fail(Errc::malformed_config, "graph must be a plain file name");

  const auto max_len = required<long long>(j, "max_len");
  if (max_len <= 0) fail(Errc::malformed_config, "max_len must be positive");
  c.max_len = static_cast<std::size_t>(max_len);

  const auto pooling = required<std::string>(j, "pooling");
  if (pooling == "mean") c.pooling = Pooling::mean;
  else if (pooling == "none") c.pooling = Pooling::none;
  else fail(Errc::malformed_config, "unknown pooling '" + pooling + "'");

  c.output_scale = required<double>(j, "output_scale");

  if (j.contains("rescale_baseline") && !j.at("rescale_baseline").is_null()) {
    const double b = required<double>(j, "rescale_baseline");
    if (!(b >= 0.0 && b < 1.0)) fail(Errc::malformed_config, "rescale_baseline must lie in [0,1)");
    c.rescale_baseline = b;
  }

  if (j.contains("embedding_layer") && !j.at("embedding_layer").is_null()) {
    const auto& layer = j.at("embedding_layer");
    if (layer.is_string()) {
      if (layer.get<std::string>() != "last")
        fail(Errc::malformed_config, "embedding_layer must be an integer or \"last\"");
    } else if (layer.is_number_integer()) {
      c.embedding_layer = layer.get<int>();
    } else {
      fail(Errc::malformed_config, "embedding_layer must be an integer or \"last\"");
    }
  }

  c.idf = j.value("idf", false);
  c.pool_special_tokens = j.value("pool_special_tokens", false);
  c.checkpoint = j.value("checkpoint", std::string());

  if (c.kind == BundleKind::regression_pair) {
    if (c.pooling != Pooling::none) fail(Errc::malformed_config, "regression bundles require pooling=none");
    if (!(c.output_scale > 0.0)) fail(Errc::malformed_config, "output_scale must be positive");
  } else if (c.pooling != Pooling::mean) {
    fail(Errc::malformed_config, "encoder bundles require pooling=mean");
  }
  return c;
}

std::string compute_bundle_fingerprint(const std::filesystem::path& dir, const std::string& graph_file) {
  Sha256 h;
  for (const auto& name : {graph_file, std::string(kTokenizerFile), std::string(kConfigFile)}) {
    std::ifstream in(dir / name, std::ios::binary);
    if (!in) fail(Errc::missing_file, "bundle file missing: " + (dir / name).string());
    char buf[1 << 16];
    while (in) {
      in.read(buf, sizeof buf);
      h.update(std::string_view(buf, static_cast<std::size_t>(in.gcount())));
    }
  }
  return to_hex(h.finish());
}

}  // namespace stsscore
