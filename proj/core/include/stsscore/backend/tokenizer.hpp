#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "stsscore/backend/encoding.hpp"

namespace stsscore {

// Reader for the `tokenizer.json` serialization used by HuggingFace fast
// tokenizers. Supported components:
//   normalizer:     BertNormalizer, Lowercase, StripAccents, NFC/NFD/NFKC/NFKD, Strip, Sequence
//   pre_tokenizer:  BertPreTokenizer, ByteLevel, Whitespace, WhitespaceSplit, Sequence
//   model:          WordPiece, BPE, WordLevel
//   post_processor: TemplateProcessing, RobertaProcessing, BertProcessing, ByteLevel, Sequence
//   decoder:        WordPiece, ByteLevel
// Pair truncation follows the longest-first strategy: the shorter sequence keeps
// min(len, budget/2) tokens and the longer one takes the remainder.
class Tokenizer {
 public:
  static Tokenizer from_file(const std::filesystem::path& path);
  static Tokenizer from_json(const nlohmann::json& desc);

  // Raw model ids, without special tokens or truncation.
  std::vector<std::int32_t> encode_ids(std::string_view text) const;
  std::vector<std::string> encode_tokens(std::string_view text) const;

  // Full encodings with post-processing, truncated to at most max_len tokens.
  EncodedInput encode(std::string_view text, std::size_t max_len) const;
  EncodedInput encode_pair(std::string_view text_a, std::string_view text_b, std::size_t max_len) const;

  std::string decode(std::span<const std::int32_t> ids, bool skip_special_tokens = true) const;

  std::optional<std::int32_t> token_to_id(std::string_view token) const;
  std::string id_to_token(std::int32_t id) const;
  bool is_special(std::int32_t id) const;
  std::size_t vocab_size() const;
  // Tokens the post-processor adds around a single text or a pair.
  std::size_t added_special_tokens(bool pair) const;

 private:
  struct Impl;
  explicit Tokenizer(std::shared_ptr<const Impl> impl);
  std::shared_ptr<const Impl> impl_;
};

}  // namespace stsscore
