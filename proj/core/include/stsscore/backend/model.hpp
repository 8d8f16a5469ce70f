#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "stsscore/backend/bundle.hpp"
#include "stsscore/backend/encoding.hpp"
#include "stsscore/backend/tokenizer.hpp"

namespace stsscore {

// Executes a bundle's graph. Implementations are immutable after construction
// and may be called concurrently.
class InferenceRuntime {
 public:
  virtual ~InferenceRuntime() = default;
  // One regression logit per input.
  virtual std::vector<double> regress(std::span<const EncodedInput> inputs) const = 0;
  // Per-token vectors from the configured layer, one matrix per input.
  virtual std::vector<EmbeddingMatrix> embed(std::span<const EncodedInput> inputs) const = 0;
};

inline constexpr std::size_t kDefaultBatchSize = 16;

// A loaded, validated model bundle. Copies share the same immutable state.
class ModelBundle {
 public:
  const BundleConfig& config() const;
  BundleKind kind() const { return config().kind; }
  const std::string& fingerprint() const;
  const Tokenizer& tokenizer() const;
  const std::filesystem::path& directory() const;

  // Joint encoding of both texts with the tokenizer's pair template, truncated
  // to max_len with the longest-first strategy. Requires kind=regression_pair.
  EncodedInput tokenize_pair(std::string_view text_a, std::string_view text_b) const;
  EncodedInput tokenize_text(std::string_view text) const;

  double run_regression(const EncodedInput& input) const;
  std::vector<double> run_regression_batch(std::span<const EncodedInput> inputs,
                                           std::size_t batch_size = kDefaultBatchSize) const;

  // Requires kind=encoder.
  TokenEmbeddings encode_tokens(std::string_view text) const;
  std::vector<TokenEmbeddings> encode_tokens_batch(std::span<const std::string> texts,
                                                   std::size_t batch_size = kDefaultBatchSize) const;

  // Number of sequences sent through the runtime since loading.
  std::uint64_t inference_calls() const;

  friend ModelBundle load_bundle(const std::filesystem::path& dir);

  struct State;  // opaque

 private:
  explicit ModelBundle(std::shared_ptr<State> state);
  std::shared_ptr<State> state_;
};

// Validates the directory layout, recomputes the fingerprint against
// fingerprint.txt and checks the config invariants.
// Errors: missing_file, fingerprint_mismatch, malformed_config.
ModelBundle load_bundle(const std::filesystem::path& dir);

// Mean over rows with mask=1 and, unless include_special, special flag unset.
// Throws all_tokens_excluded when no row qualifies.
Eigen::VectorXd mean_pool(const TokenEmbeddings& emb, bool include_special = false);

}  // namespace stsscore
