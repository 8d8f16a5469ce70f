#pragma once

#include <string>
#include <vector>

#include "stsscore/types.hpp"

namespace stsscore {

struct Violation {
  std::string pair_id;
  std::string rule;     // e.g. "id_unique", "label_binary"
  std::string message;
};

// Checks every SentencePair/Label/LabeledDataset invariant. Violations are
// returned as data; an empty result means the dataset is well formed.
std::vector<Violation> validate_dataset(const LabeledDataset& dataset);

}  // namespace stsscore
