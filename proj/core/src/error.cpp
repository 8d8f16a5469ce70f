#include "stsscore/error.hpp"

namespace stsscore {

std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::invalid_argument: return "invalid-argument";
    case Errc::length_mismatch: return "length-mismatch";
    case Errc::empty_text: return "empty-text";
    case Errc::parse_error: return "parse-error";
    case Errc::schema_violation: return "schema-violation";
    case Errc::wrong_split: return "wrong-split";
    case Errc::out_of_range: return "out-of-range";
    case Errc::empty_class: return "empty-class";
    case Errc::single_class: return "single-class";
    case Errc::zero_vector: return "zero-vector";
    case Errc::all_tokens_excluded: return "all-tokens-excluded";
    case Errc::missing_component: return "missing-component";
    case Errc::pair_id_mismatch: return "pair-id-mismatch";
    case Errc::missing_file: return "missing-file";
    case Errc::fingerprint_mismatch: return "fingerprint-mismatch";
    case Errc::malformed_config: return "malformed-config";
    case Errc::bundle_missing: return "bundle-missing";
    case Errc::incompatible_runs: return "incompatible-runs";
    case Errc::tokenizer_failure: return "tokenizer-failure";
    case Errc::inference_failure: return "inference-failure";
    case Errc::storage_unavailable: return "storage-unavailable";
    case Errc::corrupt_entry: return "corrupt-entry";
    case Errc::io_error: return "io-error";
  }
  return "unknown";
}

ErrorClass classify(Errc code) {
  switch (code) {
    case Errc::empty_text:
    case Errc::parse_error:
    case Errc::schema_violation:
    case Errc::wrong_split:
    case Errc::empty_class:
    case Errc::single_class:
    case Errc::length_mismatch:
      return ErrorClass::data;
    case Errc::invalid_argument:
    case Errc::out_of_range:
    case Errc::missing_file:
    case Errc::fingerprint_mismatch:
    case Errc::malformed_config:
    case Errc::bundle_missing:
    case Errc::incompatible_runs:
    case Errc::storage_unavailable:
      return ErrorClass::configuration;
    default:
      return ErrorClass::runtime;
  }
}

Error::Error(Errc code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

void fail(Errc code, const std::string& message) { throw Error(code, message); }

}  // namespace stsscore
