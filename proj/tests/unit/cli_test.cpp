#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <string>

#include "test_support.hpp"

namespace fs = std::filesystem;
namespace st = stsscore::testing;

namespace {

struct Result {
  int code = -1;
  std::string out;
  std::string err;
};

std::string quote(const std::string& s) {
  std::string q = "'";
  for (char c : s) q += c == '\'' ? std::string("'\\''") : std::string(1, c);
  return q + "'";
}

Result run_cli(const std::string& args) {
  st::TempDir tmp;
  const auto out = tmp / "out.txt", err = tmp / "err.txt";
  const std::string cmd = quote(STSSCORE_CLI) + " " + args + " >" + quote(out.string()) + " 2>" + quote(err.string());
  const int status = std::system(cmd.c_str());
  Result r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = st::read_text(out);
  r.err = st::read_text(err);
  return r;
}

std::string path(const fs::path& p) { return quote(p.string()); }

}  // namespace

TEST(Cli, ScoreBleuPrintsDecimal) {
  const auto r = run_cli("score --metric bleu --text-a 'the cat sat on the red mat' --text-b 'the cat sat on the mat'");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NEAR(std::stod(r.out), 0.6731821382417487, 1e-12);
}

TEST(Cli, ScoreStsWithSingleBundle) {
  const auto r = run_cli("score --metric sts --bundle-dir " + path(st::bundle_dir("fixture-sts-constant")) +
                         " --text-a 'a man' --text-b 'a woman'");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, "0.5\n");
}

TEST(Cli, ScorePairsStreamsCsv) {
  st::TempDir tmp;
  st::make_bundle_set(tmp / "b");
  const auto r = run_cli("score --pairs " + path(st::data_file("separable_binary.jsonl")) +
                         " --metric bleu,ensemble --bundle-dir " + path(tmp / "b"));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out.substr(0, r.out.find('\n')), "id,metric,score");
  EXPECT_NE(r.out.find("\np1,ensemble,1\n"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("\nn3,bleu,0\n"), std::string::npos) << r.out;
}

TEST(Cli, BenchmarkThenReport) {
  st::TempDir tmp;
  st::make_bundle_set(tmp / "b");
  auto r = run_cli("benchmark --dataset mrpc --data " + path(st::data_file("mrpc_small.tsv")) +
                   " --metrics bleu,sts --bundles " + path(tmp / "b") + " --out " + path(tmp / "out") + " --run-id m1");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(tmp / "out" / "runs" / "m1" / "manifest.json"));
  r = run_cli("benchmark --dataset stsb --data " + path(st::data_file("stsb_glue_small.tsv")) +
              " --metrics sts --bundles " + path(tmp / "b") + " --out " + path(tmp / "out") +
              " --run-id s1 --subset 4 --seed 2 --length-split");
  ASSERT_EQ(r.code, 0) << r.err;

  r = run_cli("report --runs " + path(tmp / "out") + " --format md --figures");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("| | MRPC | | STS-B | |"), std::string::npos) << r.out;
  EXPECT_TRUE(fs::exists(tmp / "out" / "runs" / "m1" / "figures" / "roc.svg"));
  r = run_cli("report --runs " + path(tmp / "out" / "runs" / "s1") + " --format json");
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["summary"]["groups"][0]["dataset"], "STS-B");
  r = run_cli("report --runs " + path(tmp / "out" / "runs" / "s1") + " --format csv");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out.substr(0, r.out.find('\n')), "row,STS-B r,STS-B rho");
}

TEST(Cli, PartialRunExitsOne) {
  st::TempDir tmp;
  st::make_bundle_set(tmp / "b", "fixture-sts-overlap", "fixture-encoder-signed", "fixture-encoder-signed");
  std::ofstream(tmp / "d.jsonl")
      << R"({"id":"a","text_a":"up left","text_b":"up","label_kind":"binary","label":1,"split":"t"})" << "\n"
      << R"({"id":"b","text_a":"up down","text_b":"left","label_kind":"binary","label":0,"split":"t"})" << "\n"
      << R"({"id":"c","text_a":"left","text_b":"down","label_kind":"binary","label":0,"split":"t"})" << "\n";
  const auto r = run_cli("benchmark --dataset canonical --data " + path(tmp / "d.jsonl") + " --metrics sbert --bundles " +
                         path(tmp / "b") + " --out " + path(tmp / "out"));
  EXPECT_EQ(r.code, 1) << r.err;
}

TEST(Cli, ConfigurationErrorsExitTwo) {
  EXPECT_EQ(run_cli("score --metric sts --text-a a --text-b b").code, 2);
  EXPECT_EQ(run_cli("score --metric rouge --text-a a --text-b b").code, 2);
  EXPECT_EQ(run_cli("benchmark --dataset stsb --data x.tsv --metrics bleu").code, 2);
  EXPECT_EQ(run_cli("report --runs /nonexistent/dir").code, 2);
  EXPECT_EQ(run_cli("frobnicate").code, 2);
  st::TempDir tmp;
  EXPECT_EQ(run_cli("benchmark --dataset stsb --data " + path(st::data_file("stsb_glue_small.tsv")) +
                    " --metrics sts --bundles " + path(tmp / "none") + " --out " + path(tmp / "o"))
                .code,
            2);
}

TEST(Cli, DataErrorsExitThree) {
  st::TempDir tmp;
  EXPECT_EQ(run_cli("benchmark --dataset stsb --data " + path(st::data_file("stsb_bad_label.tsv")) +
                    " --metrics bleu --out " + path(tmp / "o"))
                .code,
            3);
  EXPECT_EQ(run_cli("benchmark --dataset qqp --data " + path(st::data_file("qqp_test_small.tsv")) +
                    " --metrics bleu --out " + path(tmp / "o"))
                .code,
            3);
  EXPECT_EQ(run_cli("score --metric bleu --text-a ' ' --text-b b").code, 3);
}

TEST(Cli, HelpExitsZero) { EXPECT_EQ(run_cli("--help").code, 0); }
