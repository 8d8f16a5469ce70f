#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Core>

namespace stsscore {

// Tokenizer output for one model call. All per-token vectors have equal length.
struct EncodedInput {
  std::vector<std::int32_t> token_ids;
  std::vector<std::uint8_t> attention_mask;
  std::vector<std::uint8_t> special_tokens_mask;
  std::vector<std::uint8_t> type_ids;
  // Index of the first token belonging to the second text of a pair.
  std::optional<std::size_t> pair_boundary;

  std::size_t size() const { return token_ids.size(); }
  bool operator==(const EncodedInput&) const = default;
};

using EmbeddingMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Per-token vectors for one text; row i belongs to token i.
struct TokenEmbeddings {
  EmbeddingMatrix vectors;
  std::vector<std::int32_t> token_ids;
  std::vector<std::uint8_t> mask;
  std::vector<std::uint8_t> special_token_flags;

  std::size_t rows() const { return static_cast<std::size_t>(vectors.rows()); }
  // Row is masked in and not a special token.
  bool eligible(std::size_t row) const { return mask[row] != 0 && special_token_flags[row] == 0; }
};

}  // namespace stsscore
