#include "test_support.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "stsscore/backend/bundle.hpp"

namespace fs = std::filesystem;

namespace stsscore::testing {

fs::path fixtures_dir() { return fs::path(STSSCORE_FIXTURES_DIR); }
fs::path bundle_dir(const std::string& name) { return fixtures_dir() / "bundles" / name; }
fs::path data_file(const std::string& name) { return fixtures_dir() / "data" / name; }
fs::path oracle_file(const std::string& name) { return fixtures_dir() / "oracle" / name; }

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

nlohmann::json read_json(const fs::path& path) { return nlohmann::json::parse(read_text(path)); }

TempDir::TempDir() {
  std::random_device rd;
  for (int attempt = 0; attempt < 100; ++attempt) {
    auto candidate = fs::temp_directory_path() / ("stsscore-test-" + std::to_string(rd()) + std::to_string(rd()));
    if (fs::create_directory(candidate)) {
      path_ = candidate;
      return;
    }
  }
  throw std::runtime_error("cannot create a temporary directory");
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

void make_bundle_set(const fs::path& root, const std::string& sts, const std::string& sbert,
                     const std::string& bertscore) {
  fs::create_directories(root);
  fs::copy(bundle_dir(sts), root / "sts", fs::copy_options::recursive);
  fs::copy(bundle_dir(sbert), root / "sbert", fs::copy_options::recursive);
  fs::copy(bundle_dir(bertscore), root / "bertscore", fs::copy_options::recursive);
}

fs::path write_fixture_bundle(const fs::path& dir, const nlohmann::json& bundle_json, const nlohmann::json& fixture_json) {
  fs::create_directories(dir);
  fs::copy_file(bundle_dir("fixture-encoder") / kTokenizerFile, dir / kTokenizerFile, fs::copy_options::overwrite_existing);
  const std::string graph = bundle_json.value("graph", "fixture.json");
  std::ofstream(dir / kConfigFile) << bundle_json.dump(2);
  std::ofstream(dir / graph) << fixture_json.dump(2);
  std::ofstream(dir / kFingerprintFile) << compute_bundle_fingerprint(dir, graph) << "\n";
  return dir;
}

const std::vector<std::string>& fixture_words() {
  static const std::vector<std::string> words = [] {
    const auto tok = read_json(bundle_dir("fixture-encoder") / kTokenizerFile);
    std::vector<std::string> out;
    for (const auto& [word, id] : tok["model"]["vocab"].items())
      if (word.front() != '[') out.push_back(word);
    return out;
  }();
  return words;
}

std::string random_sentence(std::mt19937_64& rng, std::size_t min_words, std::size_t max_words) {
  const auto& words = fixture_words();
  std::uniform_int_distribution<std::size_t> len(min_words, max_words);
  std::uniform_int_distribution<std::size_t> pick(0, words.size() - 1);
  std::string out;
  const std::size_t n = len(rng);
  for (std::size_t i = 0; i < n; ++i) {
    if (i) out += ' ';
    out += words[pick(rng)];
  }
  return out;
}

LabeledDataset binary_dataset(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  LabeledDataset d;
  d.name = DatasetName::custom;
  d.split = "test";
  for (std::size_t i = 0; i < n; ++i) {
    const bool positive = i % 3 != 0;
    const auto a = random_sentence(rng, 4, 10);
    const auto b = positive ? a : random_sentence(rng, 4, 10);
    d.pairs.push_back({{"p" + std::to_string(i), a, b}, {LabelKind::binary, positive ? 1.0 : 0.0}});
  }
  return d;
}

LabeledDataset similarity_dataset(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> label(0.0, 5.0);
  LabeledDataset d;
  d.name = DatasetName::custom;
  d.split = "test";
  for (std::size_t i = 0; i < n; ++i)
    d.pairs.push_back({{"s" + std::to_string(i), random_sentence(rng, 3, 12), random_sentence(rng, 3, 12)},
                       {LabelKind::similarity_0_5, label(rng)}});
  return d;
}

}  // namespace stsscore::testing
