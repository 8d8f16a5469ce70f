#include "fixture.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "stsscore/error.hpp"
#include "stsscore/hash.hpp"

namespace stsscore::detail {

namespace {

class FixtureRegression final : public InferenceRuntime {
 public:
  explicit FixtureRegression(const nlohmann::json& desc) {
    mode_ = desc.at("mode").get<std::string>();
    if (mode_ == "constant") {
      logit_ = desc.at("logit").get<double>();
    } else if (mode_ == "overlap") {
      scale_ = desc.value("scale", 5.0);
    } else if (mode_ == "hash") {
      min_ = desc.at("min").get<double>();
      max_ = desc.at("max").get<double>();
    } else {
      fail(Errc::malformed_config, "unknown fixture regression mode '" + mode_ + "'");
    }
  }

  std::vector<double> regress(std::span<const EncodedInput> inputs) const override {
    std::vector<double> out;
    out.reserve(inputs.size());
    for (const auto& in : inputs) out.push_back(one(in));
    return out;
  }

  std::vector<EmbeddingMatrix> embed(std::span<const EncodedInput>) const override {
    fail(Errc::inference_failure, "regression fixture has no token embeddings");
  }

 private:
  double one(const EncodedInput& in) const {
    if (mode_ == "constant") return logit_;
    if (mode_ == "overlap") {
      const std::size_t boundary = in.pair_boundary.value_or(in.size());
      std::set<std::int32_t> a, b;
      for (std::size_t i = 0; i < in.size(); ++i) {
        if (in.special_tokens_mask[i]) continue;
        (i < boundary ? a : b).insert(in.token_ids[i]);
      }
      std::vector<std::int32_t> inter, uni;
      std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(inter));
      std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(uni));
      return uni.empty() ? 0.0 : scale_ * static_cast<double>(inter.size()) / static_cast<double>(uni.size());
    }
    Sha256 h;
    for (auto id : in.token_ids) {
      const auto u = static_cast<std::uint32_t>(id);
      const char bytes[4] = {static_cast<char>(u >> 24), static_cast<char>(u >> 16), static_cast<char>(u >> 8),
                             static_cast<char>(u)};
      h.update(std::string_view(bytes, 4));
    }
    const Digest256 d = h.finish();
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v = (v << 8) | d[static_cast<std::size_t>(i)];
    const double u = static_cast<double>(v >> 11) / static_cast<double>(std::uint64_t{1} << 53);
    return min_ + (max_ - min_) * u;
  }

  std::string mode_;
  double logit_ = 0.0;
  double scale_ = 5.0;
  double min_ = 0.0;
  double max_ = 1.0;
};

class FixtureEncoder final : public InferenceRuntime {
 public:
  FixtureEncoder(const nlohmann::json& desc, const Tokenizer& tokenizer) {
    const auto mode = desc.value("mode", std::string("orthonormal"));
    if (mode != "orthonormal") fail(Errc::malformed_config, "unknown fixture encoder mode '" + mode + "'");
    dim_ = desc.value("dim", tokenizer.vocab_size());
    if (dim_ == 0) fail(Errc::malformed_config, "fixture encoder dim must be positive");
    if (desc.contains("vectors")) {
      for (auto it = desc.at("vectors").begin(); it != desc.at("vectors").end(); ++it) {
        const auto id = tokenizer.token_to_id(it.key());
        if (!id) fail(Errc::malformed_config, "fixture vector for unknown token '" + it.key() + "'");
        const auto v = it.value().get<std::vector<double>>();
        if (v.size() != dim_) fail(Errc::malformed_config, "fixture vector has the wrong dimension");
        overrides_[*id] = Eigen::Map<const Eigen::RowVectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
      }
    }
  }

  std::vector<double> regress(std::span<const EncodedInput>) const override {
    fail(Errc::inference_failure, "encoder fixture has no regression head");
  }

  std::vector<EmbeddingMatrix> embed(std::span<const EncodedInput> inputs) const override {
    std::vector<EmbeddingMatrix> out;
    for (const auto& in : inputs) {
      EmbeddingMatrix m = EmbeddingMatrix::Zero(static_cast<Eigen::Index>(in.size()), static_cast<Eigen::Index>(dim_));
      for (std::size_t t = 0; t < in.size(); ++t) {
        const auto id = in.token_ids[t];
        auto it = overrides_.find(id);
        if (it != overrides_.end()) m.row(static_cast<Eigen::Index>(t)) = it->second;
        else m(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(static_cast<std::size_t>(id) % dim_)) = 1.0;
      }
      out.push_back(std::move(m));
    }
    return out;
  }

 private:
  std::size_t dim_ = 0;
  std::map<std::int32_t, Eigen::RowVectorXd> overrides_;
};

}  // namespace

std::unique_ptr<InferenceRuntime> make_fixture_runtime(const nlohmann::json& desc, BundleKind kind,
                                                       const Tokenizer& tokenizer) {
  try {
    if (kind == BundleKind::regression_pair) {
      if (!desc.contains("regression")) fail(Errc::malformed_config, "fixture desc lacks a regression section");
      return std::make_unique<FixtureRegression>(desc.at("regression"));
    }
    if (!desc.contains("encoder")) fail(Errc::malformed_config, "fixture desc lacks an encoder section");
    return std::make_unique<FixtureEncoder>(desc.at("encoder"), tokenizer);
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::malformed_config, "fixture desc: " + std::string(e.what()));
  }
}

}  // namespace stsscore::detail
