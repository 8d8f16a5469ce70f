#include "stsscore/validate.hpp"

#include <cmath>
#include <unordered_set>

#include "stsscore/text.hpp"

namespace stsscore {

std::vector<Violation> validate_dataset(const LabeledDataset& dataset) {
  std::vector<Violation> out;
  std::unordered_set<std::string> seen;
  const LabelKind kind = dataset.label_kind();

  for (const auto& [pair, label] : dataset.pairs) {
    auto add = [&](std::string rule, std::string message) {
      out.push_back({pair.id, std::move(rule), std::move(message)});
    };
    if (pair.id.empty()) add("id_nonempty", "pair id is empty");
    else if (!seen.insert(pair.id).second) add("id_unique", "duplicate pair id '" + pair.id + "'");
    if (text::is_blank(pair.text_a)) add("text_a_nonempty", "text_a is empty after trimming");
    if (text::is_blank(pair.text_b)) add("text_b_nonempty", "text_b is empty after trimming");
    if (label.kind != kind) {
      add("label_kind_consistent", "label kind " + std::string(to_string(label.kind)) +
                                       " differs from dataset kind " + std::string(to_string(kind)));
    }
    switch (label.kind) {
      case LabelKind::similarity_0_5:
        if (!(label.value >= 0.0 && label.value <= 5.0))
          add("label_range", "similarity label " + format_number(label.value) + " outside [0,5]");
        break;
      case LabelKind::binary:
        if (label.value != 0.0 && label.value != 1.0)
          add("label_binary", "binary label " + format_number(label.value) + " not in {0,1}");
        break;
      case LabelKind::mqm:
        if (!std::isfinite(label.value)) add("label_finite", "mqm label is not finite");
        break;
    }
  }
  return out;
}

}  // namespace stsscore
