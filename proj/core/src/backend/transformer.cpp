#include "stsscore/backend/transformer.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "stsscore/backend/safetensors.hpp"
#include "stsscore/error.hpp"

namespace stsscore {

namespace {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct Linear {
  Matrix wt;  // in × out
  Vector b;

  Matrix operator()(const Matrix& x) const {
    Matrix y = x * wt;
    y.rowwise() += b.transpose();
    return y;
  }
};

struct LayerNorm {
  Vector gamma;
  Vector beta;
  double eps = 1e-12;

  void apply(Matrix& x) const {
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
      const double mean = x.row(r).mean();
      const double var = (x.row(r).array() - mean).square().mean();
      const double inv = 1.0 / std::sqrt(var + eps);
      x.row(r) = (((x.row(r).array() - mean) * inv) * gamma.transpose().array() + beta.transpose().array()).matrix();
    }
  }
};

struct Layer {
  Linear query, key, value, attn_out;
  LayerNorm attn_norm;
  Linear intermediate, output;
  LayerNorm out_norm;
};

Matrix to_matrix(const Tensor& t, std::size_t rows, std::size_t cols, const std::string& name) {
  if (t.shape.size() != 2 || t.shape[0] != rows || t.shape[1] != cols)
    fail(Errc::inference_failure, "tensor '" + name + "' has unexpected shape");
  Matrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = t.data[r * cols + c];
  return m;
}

Vector to_vector(const Tensor& t, std::size_t n, const std::string& name) {
  if (t.shape.size() != 1 || t.shape[0] != n) fail(Errc::inference_failure, "tensor '" + name + "' has unexpected shape");
  Vector v(n);
  for (std::size_t i = 0; i < n; ++i) v(i) = t.data[i];
  return v;
}

Linear load_linear(const SafeTensors& st, const std::string& name, std::size_t in, std::size_t out) {
  Linear l;
  l.wt = to_matrix(st.at(name + ".weight"), out, in, name + ".weight").transpose();
  l.b = to_vector(st.at(name + ".bias"), out, name + ".bias");
  return l;
}

LayerNorm load_norm(const SafeTensors& st, const std::string& name, std::size_t n, double eps) {
  return {to_vector(st.at(name + ".weight"), n, name + ".weight"), to_vector(st.at(name + ".bias"), n, name + ".bias"),
          eps};
}

double activate(double x, const std::string& act) {
  if (act == "gelu") return 0.5 * x * (1.0 + std::erf(x / std::sqrt(2.0)));
  if (act == "relu") return x > 0.0 ? x : 0.0;
  // gelu_new / gelu_pytorch_tanh
  constexpr double k = 0.7978845608028654;  // sqrt(2/pi)
  return 0.5 * x * (1.0 + std::tanh(k * (x + 0.044715 * x * x * x)));
}

}  // namespace

struct TransformerModel::Weights {
  TransformerConfig config;
  Matrix word, position, token_type;
  LayerNorm embed_norm;
  std::vector<Layer> layers;
  bool has_head = false;
  Linear head_dense, head_out;  // pooler/classifier.dense → classifier/out_proj
};

TransformerConfig TransformerConfig::from_json(const nlohmann::json& j) {
  TransformerConfig c;
  try {
    c.family = j.at("family").get<std::string>();
    c.hidden_size = j.at("hidden_size").get<int>();
    c.num_layers = j.at("num_layers").get<int>();
    c.num_heads = j.at("num_heads").get<int>();
    c.intermediate_size = j.at("intermediate_size").get<int>();
    c.max_position_embeddings = j.at("max_position_embeddings").get<int>();
    c.type_vocab_size = j.at("type_vocab_size").get<int>();
    c.layer_norm_eps = j.value("layer_norm_eps", 1e-12);
    c.pad_token_id = j.value("pad_token_id", 0);
    c.hidden_act = j.value("hidden_act", std::string("gelu"));
    c.vocab_size = j.at("vocab_size").get<int>();
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::malformed_config, "architecture: " + std::string(e.what()));
  }
  if (c.family != "bert" && c.family != "roberta")
    fail(Errc::malformed_config, "unsupported architecture family '" + c.family + "'");
  if (c.hidden_size <= 0 || c.num_layers <= 0 || c.num_heads <= 0 || c.hidden_size % c.num_heads != 0 ||
      c.intermediate_size <= 0 || c.max_position_embeddings <= 0 || c.type_vocab_size <= 0 || c.vocab_size <= 0)
    fail(Errc::malformed_config, "architecture dimensions are inconsistent");
  if (c.hidden_act != "gelu" && c.hidden_act != "relu" && c.hidden_act != "gelu_new" &&
      c.hidden_act != "gelu_pytorch_tanh")
    fail(Errc::malformed_config, "unsupported activation '" + c.hidden_act + "'");
  return c;
}

TransformerModel::TransformerModel(std::shared_ptr<const Weights> w) : w_(std::move(w)) {}

const TransformerConfig& TransformerModel::config() const { return w_->config; }

TransformerModel TransformerModel::load(const std::filesystem::path& weights, const TransformerConfig& config,
                                        bool regression_head) {
  const SafeTensors st = SafeTensors::load(weights);
  const std::string suffix = "embeddings.word_embeddings.weight";
  std::string prefix;
  bool found = false;
  for (const auto& name : st.names()) {
    if (name.size() >= suffix.size() && name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0) {
      prefix = name.substr(0, name.size() - suffix.size());
      found = true;
      break;
    }
  }
  if (!found) fail(Errc::inference_failure, "weights contain no word embedding table");

  auto w = std::make_shared<Weights>();
  w->config = config;
  const auto H = static_cast<std::size_t>(config.hidden_size);
  const auto I = static_cast<std::size_t>(config.intermediate_size);
  const double eps = config.layer_norm_eps;
  w->word = to_matrix(st.at(prefix + suffix), config.vocab_size, H, prefix + suffix);
  w->position = to_matrix(st.at(prefix + "embeddings.position_embeddings.weight"), config.max_position_embeddings, H,
                          "position_embeddings");
  w->token_type = to_matrix(st.at(prefix + "embeddings.token_type_embeddings.weight"), config.type_vocab_size, H,
                            "token_type_embeddings");
  w->embed_norm = load_norm(st, prefix + "embeddings.LayerNorm", H, eps);
  for (int i = 0; i < config.num_layers; ++i) {
    const std::string p = prefix + "encoder.layer." + std::to_string(i) + ".";
    Layer l;
    l.query = load_linear(st, p + "attention.self.query", H, H);
    l.key = load_linear(st, p + "attention.self.key", H, H);
    l.value = load_linear(st, p + "attention.self.value", H, H);
    l.attn_out = load_linear(st, p + "attention.output.dense", H, H);
    l.attn_norm = load_norm(st, p + "attention.output.LayerNorm", H, eps);
    l.intermediate = load_linear(st, p + "intermediate.dense", H, I);
    l.output = load_linear(st, p + "output.dense", I, H);
    l.out_norm = load_norm(st, p + "output.LayerNorm", H, eps);
    w->layers.push_back(std::move(l));
  }
  if (regression_head) {
    w->has_head = true;
    if (st.contains("classifier.out_proj.weight")) {
      w->head_dense = load_linear(st, "classifier.dense", H, H);
      w->head_out = load_linear(st, "classifier.out_proj", H, 1);
    } else if (st.contains("classifier.weight") && st.contains(prefix + "pooler.dense.weight")) {
      w->head_dense = load_linear(st, prefix + "pooler.dense", H, H);
      w->head_out = load_linear(st, "classifier", H, 1);
    } else {
      fail(Errc::inference_failure, "weights contain no single-output regression head");
    }
  }
  return TransformerModel(std::move(w));
}

namespace {

struct Batch {
  std::vector<Eigen::Index> offsets;  // start row of each sequence; back() = total
};

Matrix embed(const TransformerModel::Weights& w, std::span<const EncodedInput> inputs, Batch& batch) {
  const auto& c = w.config;
  Eigen::Index total = 0;
  batch.offsets.clear();
  for (const auto& in : inputs) {
    batch.offsets.push_back(total);
    total += static_cast<Eigen::Index>(in.size());
  }
  batch.offsets.push_back(total);
  Matrix x(total, c.hidden_size);
  for (std::size_t s = 0; s < inputs.size(); ++s) {
    const auto& in = inputs[s];
    if (in.size() == 0) fail(Errc::inference_failure, "empty encoding");
    for (std::size_t t = 0; t < in.size(); ++t) {
      const int id = in.token_ids[t];
      if (id < 0 || id >= c.vocab_size) fail(Errc::inference_failure, "token id outside the vocabulary");
      const int pos = c.family == "roberta" ? c.pad_token_id + 1 + static_cast<int>(t) : static_cast<int>(t);
      if (pos >= c.max_position_embeddings) fail(Errc::inference_failure, "sequence exceeds the position table");
      const int type = c.type_vocab_size > 1 && t < in.type_ids.size() ? in.type_ids[t] : 0;
      if (type >= c.type_vocab_size) fail(Errc::inference_failure, "token type outside the type table");
      x.row(batch.offsets[s] + static_cast<Eigen::Index>(t)) = w.word.row(id) + w.position.row(pos) + w.token_type.row(type);
    }
  }
  w.embed_norm.apply(x);
  return x;
}

void encoder_layer(const TransformerModel::Weights& w, const Layer& l, std::span<const EncodedInput> inputs,
                   const Batch& batch, Matrix& x) {
  const auto& c = w.config;
  const Eigen::Index d = c.hidden_size / c.num_heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(d));
  const Matrix q = l.query(x);
  const Matrix k = l.key(x);
  const Matrix v = l.value(x);
  Matrix ctx(x.rows(), x.cols());
  for (std::size_t s = 0; s < inputs.size(); ++s) {
    const Eigen::Index off = batch.offsets[s];
    const Eigen::Index n = batch.offsets[s + 1] - off;
    const auto& mask = inputs[s].attention_mask;
    for (int h = 0; h < c.num_heads; ++h) {
      Matrix scores = q.block(off, h * d, n, d) * k.block(off, h * d, n, d).transpose() * scale;
      for (Eigen::Index j = 0; j < n; ++j)
        if (!mask.empty() && mask[static_cast<std::size_t>(j)] == 0)
          scores.col(j).setConstant(-std::numeric_limits<double>::infinity());
      for (Eigen::Index r = 0; r < n; ++r) {
        const double m = scores.row(r).maxCoeff();
        scores.row(r) = (scores.row(r).array() - m).exp().matrix();
        scores.row(r) /= scores.row(r).sum();
      }
      ctx.block(off, h * d, n, d) = scores * v.block(off, h * d, n, d);
    }
  }
  Matrix attn = l.attn_out(ctx) + x;
  l.attn_norm.apply(attn);
  Matrix inter = l.intermediate(attn);
  inter = inter.unaryExpr([&](double z) { return activate(z, c.hidden_act); });
  x = l.output(inter) + attn;
  l.out_norm.apply(x);
}

}  // namespace

std::vector<EmbeddingMatrix> TransformerModel::hidden_states(std::span<const EncodedInput> inputs, int layer) const {
  if (layer < 0 || layer > w_->config.num_layers)
    fail(Errc::malformed_config, "embedding layer " + std::to_string(layer) + " outside [0, num_layers]");
  std::vector<EmbeddingMatrix> out;
  if (inputs.empty()) return out;
  Batch batch;
  Matrix x = embed(*w_, inputs, batch);
  for (int i = 0; i < layer; ++i) encoder_layer(*w_, w_->layers[static_cast<std::size_t>(i)], inputs, batch, x);
  for (std::size_t s = 0; s < inputs.size(); ++s)
    out.emplace_back(x.middleRows(batch.offsets[s], batch.offsets[s + 1] - batch.offsets[s]));
  return out;
}

std::vector<double> TransformerModel::regress(std::span<const EncodedInput> inputs) const {
  if (!w_->has_head) fail(Errc::inference_failure, "model was loaded without a regression head");
  std::vector<double> out;
  if (inputs.empty()) return out;
  Batch batch;
  Matrix x = embed(*w_, inputs, batch);
  for (const auto& l : w_->layers) encoder_layer(*w_, l, inputs, batch, x);
  for (std::size_t s = 0; s < inputs.size(); ++s) {
    Matrix first = x.row(batch.offsets[s]);
    Matrix pooled = w_->head_dense(first).array().tanh().matrix();
    const double logit = w_->head_out(pooled)(0, 0);
    if (!std::isfinite(logit)) fail(Errc::inference_failure, "non-finite regression output");
    out.push_back(logit);
  }
  return out;
}

}  // namespace stsscore
