#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ginv/tensor.hpp"

namespace ginv {

/// Parameter checkpoint: "GINVCKPT" magic, u32 version, u32 scalar byte
/// width, u32 record count, then per record u32 name length, name bytes,
/// u32 rank, u64 dims, raw values. All integers and values little-endian;
/// save/load roundtrips are bit-exact.
namespace ckpt {

constexpr char kMagic[8] = {'G', 'I', 'N', 'V', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void write_le(std::ostream& out, T v) {
  unsigned char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
#if defined(__BYTE_ORDER__) && __BYTE_ORDER__ == __ORDER_BIG_ENDIAN__
  for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(buf[i], buf[sizeof(T) - 1 - i]);
#endif
  out.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <typename T>
T read_le(std::istream& in) {
  unsigned char buf[sizeof(T)];
  in.read(reinterpret_cast<char*>(buf), sizeof(T));
  if (!in) throw std::runtime_error("checkpoint: truncated file");
#if defined(__BYTE_ORDER__) && __BYTE_ORDER__ == __ORDER_BIG_ENDIAN__
  for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(buf[i], buf[sizeof(T) - 1 - i]);
#endif
  T v;
  std::memcpy(&v, buf, sizeof(T));
  return v;
}

}  // namespace ckpt

template <typename Scalar>
struct NamedTensor {
  std::string name;
  Tensor<Scalar> tensor;
};

template <typename Scalar>
void save_checkpoint(const std::string& path, const std::vector<NamedTensor<Scalar>>& records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("checkpoint: cannot open for writing: " + path);
  out.write(ckpt::kMagic, sizeof(ckpt::kMagic));
  ckpt::write_le<std::uint32_t>(out, ckpt::kVersion);
  ckpt::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(sizeof(Scalar)));
  ckpt::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(records.size()));
  for (const auto& r : records) {
    ckpt::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(r.name.size()));
    out.write(r.name.data(), static_cast<std::streamsize>(r.name.size()));
    ckpt::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(r.tensor.rank()));
    for (Index d : r.tensor.shape()) ckpt::write_le<std::uint64_t>(out, static_cast<std::uint64_t>(d));
    for (Index i = 0; i < r.tensor.size(); ++i) ckpt::write_le<Scalar>(out, r.tensor[i]);
  }
  if (!out) throw std::runtime_error("checkpoint: write failed: " + path);
}

template <typename Scalar>
std::vector<NamedTensor<Scalar>> load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("checkpoint: cannot open: " + path);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, ckpt::kMagic, sizeof(magic)) != 0)
    throw std::runtime_error("checkpoint: bad magic in " + path);
  const auto version = ckpt::read_le<std::uint32_t>(in);
  if (version != ckpt::kVersion)
    throw std::runtime_error("checkpoint: unsupported version " + std::to_string(version));
  const auto width = ckpt::read_le<std::uint32_t>(in);
  if (width != sizeof(Scalar))
    throw std::runtime_error("checkpoint: scalar width " + std::to_string(width) +
                             " does not match requested precision");
  const auto count = ckpt::read_le<std::uint32_t>(in);
  std::vector<NamedTensor<Scalar>> records;
  records.reserve(count);
  for (std::uint32_t r = 0; r < count; ++r) {
    const auto name_len = ckpt::read_le<std::uint32_t>(in);
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    const auto rank = ckpt::read_le<std::uint32_t>(in);
    Shape shape(rank);
    for (auto& d : shape) d = static_cast<Index>(ckpt::read_le<std::uint64_t>(in));
    Tensor<Scalar> t(shape);
    for (Index i = 0; i < t.size(); ++i) t[i] = ckpt::read_le<Scalar>(in);
    if (!in) throw std::runtime_error("checkpoint: truncated record in " + path);
    records.push_back({std::move(name), std::move(t)});
  }
  return records;
}

}  // namespace ginv
