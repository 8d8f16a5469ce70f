#pragma once

#include <memory>

#include <nlohmann/json.hpp>

#include "stsscore/backend/model.hpp"

namespace stsscore::detail {

// Deterministic stand-in runtime described by a JSON desc:
//   {"regression": {"mode": "constant", "logit": x}}
//   {"regression": {"mode": "overlap", "scale": s}}   s · Jaccard of the two segments' token-id sets
//   {"regression": {"mode": "hash", "min": a, "max": b}}  a + (b−a)·u, u from SHA-256 of the ids
//   {"encoder": {"mode": "orthonormal", "dim": d, "vectors": {token: [...]}}}
//       token id i maps to basis vector e_(i mod d) unless overridden by token text
std::unique_ptr<InferenceRuntime> make_fixture_runtime(const nlohmann::json& desc, BundleKind kind,
                                                       const Tokenizer& tokenizer);

}  // namespace stsscore::detail
