#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "hardc/nn/tensor.hpp"

namespace hardc::nn {

using NamedTensors = std::vector<std::pair<std::string, Tensor>>;

// "HRDC", u32 version, u32 count, then per tensor: u16 name length, name,
// u8 rank, u32 dims, f32 payload. All little-endian.
std::string encode_blob(const NamedTensors& tensors);
// Throws FormatError on a truncated or malformed blob.
NamedTensors decode_blob(const std::string& bytes);

inline constexpr std::uint32_t kBlobVersion = 1;

// Artifact file: u32 little-endian header length, a key=value text header
// (one pair per line, insertion order kept), then the tensor blob.
using HeaderFields = std::vector<std::pair<std::string, std::string>>;

struct Artifact {
  HeaderFields header;
  NamedTensors tensors;

  // Throws FormatError if the key is missing.
  const std::string& field(const std::string& key) const;
};

std::string encode_artifact(const Artifact& a);
Artifact decode_artifact(const std::string& bytes);

}  // namespace hardc::nn
