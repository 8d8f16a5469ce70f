#pragma once

#include <atomic>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "stsscore/hash.hpp"
#include "stsscore/types.hpp"

namespace stsscore {

// Content address of one (metric, model, texts, config) scoring request.
// Texts are NFC-normalised before hashing; case is preserved.
struct CacheKey {
  Digest256 digest{};

  static CacheKey compute(MetricId metric, std::string_view model_fingerprint,
                          std::string_view text_a, std::string_view text_b,
                          std::string_view config_hash);

  std::string hex() const { return to_hex(digest); }
  bool operator==(const CacheKey&) const = default;
};

// One JSON file per key under <root>/<hex[0:2]>/<hex[2:4]>/<hex>.json.
// Writes go to a temporary file in the same directory and are renamed into
// place, so readers never observe a partially written entry.
class ScoreCache {
 public:
  explicit ScoreCache(std::filesystem::path root);

  // Corrupt entries are deleted and reported as a miss.
  std::optional<MetricScore> get(const CacheKey& key) const;
  void put(const CacheKey& key, const MetricScore& score) const;

  std::filesystem::path entry_path(const CacheKey& key) const;
  const std::filesystem::path& root() const { return root_; }
  std::size_t corrupt_discarded() const { return corrupt_.load(); }

 private:
  std::filesystem::path root_;
  mutable std::atomic<std::size_t> corrupt_{0};
};

}  // namespace stsscore
