#pragma once

#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "stsscore/backend/encoding.hpp"

namespace stsscore {

// Encoder hyperparameters, read from the "architecture" object of bundle.json.
struct TransformerConfig {
  std::string family;  // "bert" or "roberta"
  int hidden_size = 0;
  int num_layers = 0;
  int num_heads = 0;
  int intermediate_size = 0;
  int max_position_embeddings = 0;
  int type_vocab_size = 0;
  double layer_norm_eps = 1e-12;
  int pad_token_id = 0;
  std::string hidden_act = "gelu";
  int vocab_size = 0;

  static TransformerConfig from_json(const nlohmann::json& j);
};

// Post-LayerNorm BERT/RoBERTa encoder evaluated in double precision, with an
// optional single-output sequence regression head. Weights use the HuggingFace
// state-dict names; a leading "bert."/"roberta." prefix is detected.
//
// Sequences in a batch are evaluated over their own tokens only (no padding),
// so results do not depend on how inputs are grouped into batches.
class TransformerModel {
 public:
  static TransformerModel load(const std::filesystem::path& weights, const TransformerConfig& config,
                               bool regression_head);

  // Hidden states after `layer` encoder blocks (0 = embedding output), one
  // matrix (tokens × hidden) per input.
  std::vector<EmbeddingMatrix> hidden_states(std::span<const EncodedInput> batch, int layer) const;

  // One regression logit per input.
  std::vector<double> regress(std::span<const EncodedInput> batch) const;

  const TransformerConfig& config() const;

  struct Weights;  // opaque

 private:
  explicit TransformerModel(std::shared_ptr<const Weights> w);
  std::shared_ptr<const Weights> w_;
};

}  // namespace stsscore
