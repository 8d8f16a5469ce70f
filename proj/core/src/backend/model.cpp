#include "stsscore/backend/model.hpp"

#include <cmath>
#include <fstream>

#include "fixture.hpp"
#include "stsscore/backend/transformer.hpp"
#include "stsscore/error.hpp"
#include "stsscore/text.hpp"

namespace stsscore {

namespace {

class TransformerRuntime final : public InferenceRuntime {
 public:
  TransformerRuntime(TransformerModel model, int layer) : model_(std::move(model)), layer_(layer) {}

  std::vector<double> regress(std::span<const EncodedInput> inputs) const override { return model_.regress(inputs); }

  std::vector<EmbeddingMatrix> embed(std::span<const EncodedInput> inputs) const override {
    return model_.hidden_states(inputs, layer_);
  }

 private:
  TransformerModel model_;
  int layer_;
};

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::missing_file, "bundle file missing: " + path.string());
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

std::unique_ptr<InferenceRuntime> make_runtime(const BundleConfig& config, const std::filesystem::path& dir,
                                               const Tokenizer& tokenizer) {
  if (config.runtime == "fixture") {
    nlohmann::json desc;
    try {
      desc = nlohmann::json::parse(read_text(dir / config.graph));
    } catch (const nlohmann::json::exception& e) {
      fail(Errc::malformed_config, "fixture description: " + std::string(e.what()));
    }
    return detail::make_fixture_runtime(desc, config.kind, tokenizer);
  }
  if (config.runtime == "transformer") {
    if (!config.raw.contains("architecture"))
      fail(Errc::malformed_config, "transformer bundle lacks an 'architecture' section");
    const auto arch = TransformerConfig::from_json(config.raw.at("architecture"));
    const auto head = config.raw.value("head", std::string("none"));
    const bool regression = config.kind == BundleKind::regression_pair;
    if (regression && head != "sequence_regression")
      fail(Errc::malformed_config, "regression bundles require head=sequence_regression");
    const int layer = config.embedding_layer.value_or(arch.num_layers);
    if (layer < 0 || layer > arch.num_layers)
      fail(Errc::malformed_config, "embedding_layer outside [0, num_layers]");
    if (config.max_len > static_cast<std::size_t>(arch.max_position_embeddings))
      fail(Errc::malformed_config, "max_len exceeds the model's position table");
    return std::make_unique<TransformerRuntime>(TransformerModel::load(dir / config.graph, arch, regression), layer);
  }
  fail(Errc::malformed_config, "runtime '" + config.runtime + "' is not supported by this build");
}

}  // namespace

struct ModelBundle::State {
  State(std::filesystem::path d, BundleConfig c, std::string fp, Tokenizer tok)
      : dir(std::move(d)), config(std::move(c)), fingerprint(std::move(fp)), tokenizer(std::move(tok)) {}

  std::filesystem::path dir;
  BundleConfig config;
  std::string fingerprint;
  Tokenizer tokenizer;
  std::unique_ptr<InferenceRuntime> runtime;
  mutable std::atomic<std::uint64_t> calls{0};
};

ModelBundle::ModelBundle(std::shared_ptr<State> state) : state_(std::move(state)) {}

const BundleConfig& ModelBundle::config() const { return state_->config; }
const std::string& ModelBundle::fingerprint() const { return state_->fingerprint; }
const Tokenizer& ModelBundle::tokenizer() const { return state_->tokenizer; }
const std::filesystem::path& ModelBundle::directory() const { return state_->dir; }
std::uint64_t ModelBundle::inference_calls() const { return state_->calls.load(); }

ModelBundle load_bundle(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) fail(Errc::missing_file, "bundle directory not found: " + dir.string());
  const auto config_text = read_text(dir / kConfigFile);
  nlohmann::json config_json;
  try {
    config_json = nlohmann::json::parse(config_text);
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::malformed_config, "bundle.json: " + std::string(e.what()));
  }
  const std::string graph =
      config_json.is_object() ? config_json.value("graph", std::string("model.onnx")) : std::string("model.onnx");
  for (const auto& name : {graph, std::string(kTokenizerFile), std::string(kFingerprintFile)})
    if (!std::filesystem::is_regular_file(dir / name)) fail(Errc::missing_file, "bundle file missing: " + (dir / name).string());

  const std::string recorded(text::trim(read_text(dir / kFingerprintFile)));
  const std::string actual = compute_bundle_fingerprint(dir, graph);
  if (recorded != actual)
    fail(Errc::fingerprint_mismatch, "bundle " + dir.string() + " fingerprint " + actual + " does not match recorded " + recorded);

  auto config = parse_bundle_config(config_json);
  auto state = std::make_shared<ModelBundle::State>(dir, std::move(config), actual, Tokenizer::from_file(dir / kTokenizerFile));
  state->runtime = make_runtime(state->config, dir, state->tokenizer);
  return ModelBundle(std::move(state));
}

EncodedInput ModelBundle::tokenize_pair(std::string_view text_a, std::string_view text_b) const {
  if (kind() != BundleKind::regression_pair) fail(Errc::invalid_argument, "pair tokenization needs a regression bundle");
  return state_->tokenizer.encode_pair(text_a, text_b, state_->config.max_len);
}

EncodedInput ModelBundle::tokenize_text(std::string_view text) const {
  return state_->tokenizer.encode(text, state_->config.max_len);
}

double ModelBundle::run_regression(const EncodedInput& input) const {
  return run_regression_batch(std::span<const EncodedInput>(&input, 1)).front();
}

std::vector<double> ModelBundle::run_regression_batch(std::span<const EncodedInput> inputs,
                                                      std::size_t batch_size) const {
  if (kind() != BundleKind::regression_pair) fail(Errc::invalid_argument, "regression needs a regression bundle");
  if (batch_size == 0) fail(Errc::invalid_argument, "batch size must be positive");
  std::vector<double> out;
  out.reserve(inputs.size());
  for (std::size_t i = 0; i < inputs.size(); i += batch_size) {
    const auto chunk = inputs.subspan(i, std::min(batch_size, inputs.size() - i));
    state_->calls += chunk.size();
    for (double v : state_->runtime->regress(chunk)) {
      if (!std::isfinite(v)) fail(Errc::inference_failure, "non-finite regression output");
      out.push_back(v);
    }
  }
  return out;
}

TokenEmbeddings ModelBundle::encode_tokens(std::string_view text) const {
  const std::string owned(text);
  return encode_tokens_batch(std::span<const std::string>(&owned, 1)).front();
}

std::vector<TokenEmbeddings> ModelBundle::encode_tokens_batch(std::span<const std::string> texts,
                                                              std::size_t batch_size) const {
  if (kind() != BundleKind::encoder) fail(Errc::invalid_argument, "token embeddings need an encoder bundle");
  if (batch_size == 0) fail(Errc::invalid_argument, "batch size must be positive");
  std::vector<TokenEmbeddings> out;
  out.reserve(texts.size());
  for (std::size_t i = 0; i < texts.size(); i += batch_size) {
    const std::size_t n = std::min(batch_size, texts.size() - i);
    std::vector<EncodedInput> encoded;
    encoded.reserve(n);
    for (std::size_t k = 0; k < n; ++k) encoded.push_back(tokenize_text(texts[i + k]));
    state_->calls += n;
    auto matrices = state_->runtime->embed(encoded);
    for (std::size_t k = 0; k < n; ++k) {
      if (static_cast<std::size_t>(matrices[k].rows()) != encoded[k].size() || !matrices[k].allFinite())
        fail(Errc::inference_failure, "encoder produced malformed token embeddings");
      out.push_back(TokenEmbeddings{std::move(matrices[k]), encoded[k].token_ids, encoded[k].attention_mask,
                                    encoded[k].special_tokens_mask});
    }
  }
  return out;
}

Eigen::VectorXd mean_pool(const TokenEmbeddings& emb, bool include_special) {
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(emb.vectors.cols());
  std::size_t n = 0;
  for (std::size_t r = 0; r < emb.rows(); ++r) {
    if (emb.mask[r] == 0 || (!include_special && emb.special_token_flags[r] != 0)) continue;
    sum += emb.vectors.row(static_cast<Eigen::Index>(r)).transpose();
    ++n;
  }
  if (n == 0) fail(Errc::all_tokens_excluded, "no eligible tokens to pool");
  return sum / static_cast<double>(n);
}

}  // namespace stsscore
