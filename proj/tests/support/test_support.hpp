#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "stsscore/error.hpp"
#include "stsscore/report/run.hpp"
#include "stsscore/types.hpp"

// Expects `stmt` to throw stsscore::Error with the given code.
#define EXPECT_ERRC(stmt, errc)                                  \
  EXPECT_THROW(                                                  \
      {                                                          \
        try {                                                    \
          stmt;                                                  \
        } catch (const ::stsscore::Error& e_) {                  \
          EXPECT_EQ(e_.code(), errc) << e_.what();               \
          throw;                                                 \
        }                                                        \
      },                                                         \
      ::stsscore::Error)

namespace stsscore::testing {

std::filesystem::path fixtures_dir();
std::filesystem::path bundle_dir(const std::string& name);
std::filesystem::path data_file(const std::string& name);
std::filesystem::path oracle_file(const std::string& name);
nlohmann::json read_json(const std::filesystem::path& path);
std::string read_text(const std::filesystem::path& path);

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

// Copies fixture bundles into <root>/sts, <root>/sbert and <root>/bertscore.
void make_bundle_set(const std::filesystem::path& root, const std::string& sts = "fixture-sts-overlap",
                     const std::string& sbert = "fixture-encoder", const std::string& bertscore = "fixture-encoder");

// Writes a fixture-runtime bundle (bundle.json, fixture.json, tokenizer.json
// copied from fixture-encoder, fingerprint.txt) and returns its directory.
std::filesystem::path write_fixture_bundle(const std::filesystem::path& dir, const nlohmann::json& bundle_json,
                                           const nlohmann::json& fixture_json);

// Words known to the fixture tokenizers.
const std::vector<std::string>& fixture_words();
std::string random_sentence(std::mt19937_64& rng, std::size_t min_words, std::size_t max_words);

LabeledDataset binary_dataset(std::size_t n, std::uint64_t seed);
LabeledDataset similarity_dataset(std::size_t n, std::uint64_t seed);

}  // namespace stsscore::testing
