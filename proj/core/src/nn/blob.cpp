#include "hardc/nn/blob.hpp"

#include <bit>
#include <cstring>

#include "hardc/error.hpp"

namespace hardc::nn {
namespace {

template <typename T>
void put(std::string& out, T v) {
  using U = std::conditional_t<sizeof(T) == 1, std::uint8_t,
                               std::conditional_t<sizeof(T) == 2, std::uint16_t, std::uint32_t>>;
  U u;
  std::memcpy(&u, &v, sizeof(T));
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<char>((u >> (8 * i)) & 0xFF));
}

class Reader {
 public:
  explicit Reader(const std::string& s) : s_(s) {}
  template <typename T>
  T get() {
    need(sizeof(T));
    std::uint32_t u = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i)
      u |= static_cast<std::uint32_t>(static_cast<unsigned char>(s_[pos_ + i])) << (8 * i);
    pos_ += sizeof(T);
    T v;
    if constexpr (sizeof(T) == 4) {
      std::memcpy(&v, &u, 4);
    } else {
      v = static_cast<T>(u);
    }
    return v;
  }
  std::string bytes(std::size_t n) {
    need(n);
    std::string out = s_.substr(pos_, n);
    pos_ += n;
    return out;
  }
  bool done() const { return pos_ == s_.size(); }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > s_.size()) throw FormatError("truncated tensor blob");
  }
  const std::string& s_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string encode_blob(const NamedTensors& tensors) {
  std::string out = "HRDC";
  put<std::uint32_t>(out, kBlobVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(tensors.size()));
  for (const auto& [name, t] : tensors) {
    if (name.size() > 0xFFFF) throw FormatError("tensor name too long: " + name.substr(0, 32));
    put<std::uint16_t>(out, static_cast<std::uint16_t>(name.size()));
    out += name;
    put<std::uint8_t>(out, static_cast<std::uint8_t>(t.rank()));
    for (std::size_t d : t.shape()) put<std::uint32_t>(out, static_cast<std::uint32_t>(d));
    for (double v : t.data()) put<float>(out, static_cast<float>(v));
  }
  return out;
}

NamedTensors decode_blob(const std::string& bytes) {
  Reader r(bytes);
  if (r.bytes(4) != "HRDC") throw FormatError("bad blob magic");
  const auto version = r.get<std::uint32_t>();
  if (version != kBlobVersion) throw FormatError("unsupported blob version " + std::to_string(version));
  const auto count = r.get<std::uint32_t>();
  NamedTensors out;
  for (std::uint32_t k = 0; k < count; ++k) {
    const auto len = r.get<std::uint16_t>();
    std::string name = r.bytes(len);
    const auto rank = r.get<std::uint8_t>();
    Shape shape(rank);
    for (auto& d : shape) d = r.get<std::uint32_t>();
    Tensor t(shape);
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = static_cast<double>(r.get<float>());
    out.emplace_back(std::move(name), std::move(t));
  }
  if (!r.done()) throw FormatError("trailing bytes after tensor blob");
  return out;
}

const std::string& Artifact::field(const std::string& key) const {
  for (const auto& [k, v] : header)
    if (k == key) return v;
  throw FormatError("artifact header lacks '" + key + "'");
}

std::string encode_artifact(const Artifact& a) {
  std::string head;
  for (const auto& [k, v] : a.header) {
    if (k.find_first_of("=\n") != std::string::npos || v.find('\n') != std::string::npos)
      throw FormatError("header field '" + k + "' cannot be encoded");
    head += k + "=" + v + "\n";
  }
  std::string out;
  put<std::uint32_t>(out, static_cast<std::uint32_t>(head.size()));
  out += head;
  out += encode_blob(a.tensors);
  return out;
}

Artifact decode_artifact(const std::string& bytes) {
  Reader r(bytes);
  const auto len = r.get<std::uint32_t>();
  const std::string head = r.bytes(len);
  Artifact a;
  std::size_t pos = 0;
  while (pos < head.size()) {
    const std::size_t nl = head.find('\n', pos);
    if (nl == std::string::npos) throw FormatError("unterminated artifact header line");
    const std::string line = head.substr(pos, nl - pos);
    pos = nl + 1;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) throw FormatError("artifact header line without '=': " + line);
    a.header.emplace_back(line.substr(0, eq), line.substr(eq + 1));
  }
  a.tensors = decode_blob(bytes.substr(4 + len));
  return a;
}

}  // namespace hardc::nn
