#include "streamad/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "streamad/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

namespace streamad {

namespace {

constexpr char kMagic[4] = {'C', 'A', 'D', 'M'};
constexpr std::uint32_t kVersion = 1;

void wr_u32(std::ofstream& out, std::uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), 4);
}

std::uint32_t rd_u32(std::ifstream& in, const std::string& path) {
  std::uint32_t v = 0;
  if (!in.read(reinterpret_cast<char*>(&v), 4)) throw FormatError(path + ": truncated checkpoint");
  return v;
}

}  // namespace

void save_checkpoint(const std::string& path,
                     const std::vector<std::pair<std::string, Tensor>>& params) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out.write(kMagic, 4);
  wr_u32(out, kVersion);
  wr_u32(out, static_cast<std::uint32_t>(params.size()));
  for (const auto& [name, tensor] : params) {
    wr_u32(out, static_cast<std::uint32_t>(name.size()));
    out.write(name.data(), static_cast<long>(name.size()));
    const Shape& s = tensor.shape();
    wr_u32(out, static_cast<std::uint32_t>(s.size()));
    for (int e : s) wr_u32(out, static_cast<std::uint32_t>(e));
    std::vector<float> f32(tensor.values().begin(), tensor.values().end());
    out.write(reinterpret_cast<const char*>(f32.data()), static_cast<long>(f32.size() * 4));
  }
  if (!out) throw IoError("short write to " + path);
}

std::vector<std::pair<std::string, Tensor>> load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open checkpoint " + path);
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) {
    throw FormatError(path + ": bad checkpoint magic");
  }
  const std::uint32_t version = rd_u32(in, path);
  if (version != kVersion) {
    throw FormatError(path + ": unsupported checkpoint version " + std::to_string(version));
  }
  const std::uint32_t count = rd_u32(in, path);
  std::vector<std::pair<std::string, Tensor>> params;
  params.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::uint32_t name_len = rd_u32(in, path);
    std::string name(name_len, '\0');
    if (!in.read(name.data(), name_len)) throw FormatError(path + ": truncated blob name");
    const std::uint32_t rank = rd_u32(in, path);
    Shape shape;
    for (std::uint32_t d = 0; d < rank; ++d) shape.push_back(static_cast<int>(rd_u32(in, path)));
    Tensor t(shape);
    std::vector<float> f32(static_cast<std::size_t>(t.size()));
    if (!in.read(reinterpret_cast<char*>(f32.data()), static_cast<long>(f32.size() * 4))) {
      throw FormatError(path + ": truncated blob payload for '" + name + "'");
    }
    std::copy(f32.begin(), f32.end(), t.data());
    params.emplace_back(std::move(name), std::move(t));
  }
  return params;
}

}  // namespace streamad
