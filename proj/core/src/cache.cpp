#include "stsscore/cache.hpp"

#include <fstream>
#include <sstream>
#include <system_error>
#include <thread>

#include <nlohmann/json.hpp>
#include <unistd.h>

#include "stsscore/error.hpp"
#include "stsscore/text.hpp"

namespace stsscore {

namespace fs = std::filesystem;

CacheKey CacheKey::compute(MetricId metric, std::string_view model_fingerprint,
                           std::string_view text_a, std::string_view text_b,
                           std::string_view config_hash) {
  Sha256 h;
  h.update_field("stsscore-cache-v1")
      .update_field(to_string(metric))
      .update_field(model_fingerprint)
      .update_field(text::nfc(text_a))
      .update_field(text::nfc(text_b))
      .update_field(config_hash);
  return CacheKey{h.finish()};
}

ScoreCache::ScoreCache(fs::path root) : root_(std::move(root)) {
  std::error_code ec;
  fs::create_directories(root_, ec);
  if (ec || !fs::is_directory(root_))
    fail(Errc::storage_unavailable, "cache directory unavailable: " + root_.string());
}

fs::path ScoreCache::entry_path(const CacheKey& key) const {
  const std::string hex = key.hex();
  return root_ / hex.substr(0, 2) / hex.substr(2, 2) / (hex + ".json");
}

std::optional<MetricScore> ScoreCache::get(const CacheKey& key) const {
  const fs::path path = entry_path(key);
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::stringstream buf;
  buf << in.rdbuf();
  in.close();
  try {
    auto j = nlohmann::json::parse(buf.str());
    auto score = j.get<MetricScore>();
    if (!(score.score >= 0.0 && score.score <= 1.0)) throw Error(Errc::corrupt_entry, "score range");
    return score;
  } catch (const std::exception&) {
    std::error_code ec;
    fs::remove(path, ec);
    ++corrupt_;
    return std::nullopt;
  }
}

void ScoreCache::put(const CacheKey& key, const MetricScore& score) const {
  const fs::path path = entry_path(key);
  std::error_code ec;
  fs::create_directories(path.parent_path(), ec);
  if (ec) fail(Errc::storage_unavailable, "cannot create " + path.parent_path().string());

  std::ostringstream tmp_name;
  tmp_name << path.filename().string() << ".tmp." << ::getpid() << "."
           << std::hash<std::thread::id>{}(std::this_thread::get_id());
  const fs::path tmp = path.parent_path() / tmp_name.str();
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(Errc::storage_unavailable, "cannot write " + tmp.string());
    out << nlohmann::json(score).dump();
    out.flush();
    if (!out) fail(Errc::storage_unavailable, "short write to " + tmp.string());
  }
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    fail(Errc::storage_unavailable, "cannot publish cache entry " + path.string());
  }
}

}  // namespace stsscore
