#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace stsscore {

// One tensor widened to float, row-major.
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<float> data;

  std::size_t numel() const;
};

// Reader for the safetensors container: an 8-byte little-endian header length,
// a JSON header mapping names to {dtype, shape, data_offsets}, then raw bytes.
// F32, F16 and BF16 payloads are supported.
class SafeTensors {
 public:
  static SafeTensors load(const std::filesystem::path& path);

  bool contains(const std::string& name) const { return tensors_.count(name) != 0; }
  // Throws inference_failure when the tensor is absent.
  const Tensor& at(const std::string& name) const;
  std::vector<std::string> names() const;

 private:
  std::map<std::string, Tensor> tensors_;
};

}  // namespace stsscore
