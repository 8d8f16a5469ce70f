#include "stsscore/backend/safetensors.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

#include <nlohmann/json.hpp>

#include "stsscore/error.hpp"

namespace stsscore {

namespace {

float half_to_float(std::uint16_t h) {
  const std::uint32_t sign = static_cast<std::uint32_t>(h & 0x8000u) << 16;
  std::uint32_t exp = (h >> 10) & 0x1Fu;
  std::uint32_t mant = h & 0x3FFu;
  std::uint32_t bits;
  if (exp == 0) {
    if (mant == 0) {
      bits = sign;
    } else {
      // Subnormal: renormalize.
      exp = 127 - 15 + 1;
      while ((mant & 0x400u) == 0) {
        mant <<= 1;
        --exp;
      }
      mant &= 0x3FFu;
      bits = sign | (exp << 23) | (mant << 13);
    }
  } else if (exp == 0x1F) {
    bits = sign | 0x7F800000u | (mant << 13);
  } else {
    bits = sign | ((exp + 127 - 15) << 23) | (mant << 13);
  }
  return std::bit_cast<float>(bits);
}

std::uint16_t read_u16le(const unsigned char* p) { return static_cast<std::uint16_t>(p[0] | (p[1] << 8)); }

std::uint32_t read_u32le(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

}  // namespace

std::size_t Tensor::numel() const {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

SafeTensors SafeTensors::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::missing_file, "cannot open weights " + path.string());
  unsigned char len_bytes[8];
  if (!in.read(reinterpret_cast<char*>(len_bytes), 8)) fail(Errc::inference_failure, "truncated safetensors header");
  std::uint64_t header_len = 0;
  for (int i = 7; i >= 0; --i) header_len = (header_len << 8) | len_bytes[i];
  if (header_len > (std::uint64_t{1} << 30)) fail(Errc::inference_failure, "implausible safetensors header size");
  std::string header(header_len, '\0');
  if (!in.read(header.data(), static_cast<std::streamsize>(header_len)))
    fail(Errc::inference_failure, "truncated safetensors header");
  std::vector<unsigned char> payload((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(header);
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::inference_failure, "safetensors header: " + std::string(e.what()));
  }

  SafeTensors st;
  for (auto it = meta.begin(); it != meta.end(); ++it) {
    if (it.key() == "__metadata__") continue;
    const auto& info = it.value();
    const auto dtype = info.at("dtype").get<std::string>();
    Tensor t;
    t.shape = info.at("shape").get<std::vector<std::size_t>>();
    const auto offsets = info.at("data_offsets").get<std::vector<std::size_t>>();
    if (offsets.size() != 2 || offsets[0] > offsets[1] || offsets[1] > payload.size())
      fail(Errc::inference_failure, "tensor '" + it.key() + "' has invalid offsets");
    const std::size_t n = t.numel();
    const std::size_t width = dtype == "F32" ? 4 : (dtype == "F16" || dtype == "BF16") ? 2 : 0;
    if (width == 0) fail(Errc::inference_failure, "tensor '" + it.key() + "' has unsupported dtype " + dtype);
    if (offsets[1] - offsets[0] != n * width)
      fail(Errc::inference_failure, "tensor '" + it.key() + "' size does not match its shape");
    const unsigned char* p = payload.data() + offsets[0];
    t.data.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (dtype == "F32") t.data[i] = std::bit_cast<float>(read_u32le(p + 4 * i));
      else if (dtype == "F16") t.data[i] = half_to_float(read_u16le(p + 2 * i));
      else t.data[i] = std::bit_cast<float>(static_cast<std::uint32_t>(read_u16le(p + 2 * i)) << 16);
    }
    st.tensors_.emplace(it.key(), std::move(t));
  }
  return st;
}

const Tensor& SafeTensors::at(const std::string& name) const {
  auto it = tensors_.find(name);
  if (it == tensors_.end()) fail(Errc::inference_failure, "weights missing tensor '" + name + "'");
  return it->second;
}

std::vector<std::string> SafeTensors::names() const {
  std::vector<std::string> out;
  for (const auto& [name, _] : tensors_) out.push_back(name);
  return out;
}

}  // namespace stsscore
