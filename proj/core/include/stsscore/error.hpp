#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace stsscore {

enum class Errc {
  invalid_argument,
  length_mismatch,
  empty_text,
  parse_error,
  schema_violation,
  wrong_split,
  out_of_range,
  empty_class,
  single_class,
  zero_vector,
  all_tokens_excluded,
  missing_component,
  pair_id_mismatch,
  missing_file,
  fingerprint_mismatch,
  malformed_config,
  bundle_missing,
  incompatible_runs,
  tokenizer_failure,
  inference_failure,
  storage_unavailable,
  corrupt_entry,
  io_error,
};

std::string_view to_string(Errc code);

// Coarse grouping used by the CLI to choose an exit code.
enum class ErrorClass { configuration, data, runtime };
ErrorClass classify(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message);

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] void fail(Errc code, const std::string& message);

}  // namespace stsscore
