#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

namespace stsscore {

enum class BundleKind { regression_pair, encoder };
enum class Pooling { mean, none };

// Parsed bundle.json. `raw` keeps the full document for runtime-specific keys
// such as "architecture" (transformer runtime) or the fixture description.
struct BundleConfig {
  BundleKind kind = BundleKind::encoder;
  std::string runtime;  // "transformer" or "fixture"
  std::string graph;    // graph file name inside the bundle directory
  std::size_t max_len = 0;
  Pooling pooling = Pooling::mean;
  double output_scale = 1.0;
  std::optional<double> rescale_baseline;
  std::optional<int> embedding_layer;  // nullopt = last hidden layer
  bool idf = false;
  bool pool_special_tokens = false;
  std::string checkpoint;
  nlohmann::json raw;
};

inline constexpr const char* kTokenizerFile = "tokenizer.json";
inline constexpr const char* kConfigFile = "bundle.json";
inline constexpr const char* kFingerprintFile = "fingerprint.txt";

// Throws malformed_config when a field is missing, mistyped, or violates the
// kind/pooling/scale/baseline invariants.
BundleConfig parse_bundle_config(const nlohmann::json& j);

// Lowercase hex SHA-256 of graph file, tokenizer.json and bundle.json
// concatenated in that order.
std::string compute_bundle_fingerprint(const std::filesystem::path& dir, const std::string& graph_file);

std::string_view to_string(BundleKind kind);

}  // namespace stsscore
