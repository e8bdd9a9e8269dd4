#include "streamad/idx.hpp"

#include <fstream>

#include "streamad/errors.hpp"

namespace streamad {

namespace {

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

IdxData load_idx_raw(const std::string& path) {
  const std::vector<std::uint8_t> bytes = read_file(path);
  if (bytes.size() < 4) {
    throw FormatError(path + ": truncated header at byte offset " + std::to_string(bytes.size()));
  }
  if (bytes[0] != 0 || bytes[1] != 0) {
    throw FormatError(path + ": bad magic at byte offset 0");
  }
  if (bytes[2] != 0x08) {
    throw FormatError(path + ": unsupported element type at byte offset 2");
  }
  const int rank = bytes[3];
  if (rank < 1 || rank > 4) {
    throw FormatError(path + ": unsupported rank at byte offset 3");
  }
  std::size_t off = 4;
  IdxData idx;
  std::uint64_t count = 1;
  for (int d = 0; d < rank; ++d) {
    if (off + 4 > bytes.size()) {
      throw FormatError(path + ": truncated dimension header at byte offset " + std::to_string(off));
    }
    const std::uint32_t extent = (std::uint32_t(bytes[off]) << 24) |
                                 (std::uint32_t(bytes[off + 1]) << 16) |
                                 (std::uint32_t(bytes[off + 2]) << 8) | std::uint32_t(bytes[off + 3]);
    idx.dims.push_back(extent);
    count *= extent;
    off += 4;
  }
  if (bytes.size() - off != count) {
    throw FormatError(path + ": payload is " + std::to_string(bytes.size() - off) +
                      " bytes, expected " + std::to_string(count) + " at byte offset " +
                      std::to_string(off));
  }
  idx.payload.assign(bytes.begin() + static_cast<long>(off), bytes.end());
  return idx;
}

std::vector<Tensor> load_idx_images(const std::string& path) {
  const IdxData idx = load_idx_raw(path);
  if (idx.dims.size() != 3) {
    throw FormatError(path + ": expected a rank-3 image file, got rank " +
                      std::to_string(idx.dims.size()));
  }
  const int n = static_cast<int>(idx.dims[0]);
  const int h = static_cast<int>(idx.dims[1]);
  const int w = static_cast<int>(idx.dims[2]);
  std::vector<Tensor> images;
  images.reserve(static_cast<std::size_t>(n));
  const long hw = static_cast<long>(h) * w;
  for (int i = 0; i < n; ++i) {
    Tensor img({1, 1, h, w});
    double* p = img.data();
    const std::uint8_t* src = idx.payload.data() + static_cast<long>(i) * hw;
    for (long j = 0; j < hw; ++j) p[j] = static_cast<double>(src[j]) / 127.5 - 1.0;
    images.push_back(std::move(img));
  }
  return images;
}

std::vector<int> load_idx_labels(const std::string& path) {
  const IdxData idx = load_idx_raw(path);
  if (idx.dims.size() != 1) {
    throw FormatError(path + ": expected a rank-1 label file, got rank " +
                      std::to_string(idx.dims.size()));
  }
  return {idx.payload.begin(), idx.payload.end()};
}

void write_idx(const std::string& path, const std::vector<std::uint32_t>& dims,
               const std::vector<std::uint8_t>& payload) {
  std::uint64_t count = 1;
  for (std::uint32_t d : dims) count *= d;
  if (count != payload.size()) {
    throw ContractError("write_idx: payload size does not match extents");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  const std::uint8_t magic[4] = {0, 0, 0x08, static_cast<std::uint8_t>(dims.size())};
  out.write(reinterpret_cast<const char*>(magic), 4);
  for (std::uint32_t d : dims) {
    const std::uint8_t be[4] = {static_cast<std::uint8_t>(d >> 24), static_cast<std::uint8_t>(d >> 16),
                                static_cast<std::uint8_t>(d >> 8), static_cast<std::uint8_t>(d)};
    out.write(reinterpret_cast<const char*>(be), 4);
  }
  out.write(reinterpret_cast<const char*>(payload.data()), static_cast<long>(payload.size()));
  if (!out) throw IoError("short write to " + path);
}

}  // namespace streamad
