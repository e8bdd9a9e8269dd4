#include "streamad/image.hpp"

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "streamad/errors.hpp"

namespace streamad {

namespace {

std::uint8_t luma(int r, int g, int b) {
  return static_cast<std::uint8_t>(std::lround(0.299 * r + 0.587 * g + 0.114 * b));
}

GrayImage decode_pgm(const std::vector<std::uint8_t>& bytes, const std::string& origin) {
  std::size_t pos = 2;
  const bool ascii = bytes[1] == '2';
  auto skip_ws = [&]() {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(bytes[pos])) {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto read_int = [&]() -> long {
    skip_ws();
    if (pos >= bytes.size() || !std::isdigit(bytes[pos])) {
      throw FormatError(origin + ": malformed PGM header");
    }
    long v = 0;
    while (pos < bytes.size() && std::isdigit(bytes[pos])) v = v * 10 + (bytes[pos++] - '0');
    return v;
  };
  GrayImage img;
  img.width = static_cast<int>(read_int());
  img.height = static_cast<int>(read_int());
  const long maxval = read_int();
  if (img.width <= 0 || img.height <= 0 || maxval <= 0 || maxval > 255) {
    throw FormatError(origin + ": unsupported PGM geometry or maxval");
  }
  const long n = static_cast<long>(img.width) * img.height;
  img.pixels.resize(static_cast<std::size_t>(n));
  if (ascii) {
    for (long i = 0; i < n; ++i) {
      img.pixels[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(read_int() * 255 / maxval);
    }
  } else {
    ++pos;  // single whitespace after maxval
    if (static_cast<long>(bytes.size()) - static_cast<long>(pos) < n) {
      throw FormatError(origin + ": truncated PGM payload");
    }
    for (long i = 0; i < n; ++i) {
      const std::uint8_t v = bytes[pos + static_cast<std::size_t>(i)];
      img.pixels[static_cast<std::size_t>(i)] =
          maxval == 255 ? v : static_cast<std::uint8_t>(v * 255 / maxval);
    }
  }
  return img;
}

std::uint32_t rd_u32le(const std::uint8_t* p) {
  return std::uint32_t(p[0]) | (std::uint32_t(p[1]) << 8) | (std::uint32_t(p[2]) << 16) |
         (std::uint32_t(p[3]) << 24);
}

GrayImage decode_bmp(const std::vector<std::uint8_t>& bytes, const std::string& origin) {
  if (bytes.size() < 54) throw FormatError(origin + ": truncated BMP header");
  const std::uint32_t data_off = rd_u32le(&bytes[10]);
  const std::uint32_t hdr_size = rd_u32le(&bytes[14]);
  if (hdr_size < 40) throw FormatError(origin + ": unsupported BMP header");
  const std::int32_t width = static_cast<std::int32_t>(rd_u32le(&bytes[18]));
  const std::int32_t height_raw = static_cast<std::int32_t>(rd_u32le(&bytes[22]));
  const std::uint16_t bpp = static_cast<std::uint16_t>(bytes[28] | (bytes[29] << 8));
  const std::uint32_t compression = rd_u32le(&bytes[30]);
  if (compression != 0) throw FormatError(origin + ": compressed BMP not supported");
  if (bpp != 8 && bpp != 24) throw FormatError(origin + ": only 8/24-bit BMP supported");
  const bool top_down = height_raw < 0;
  const int height = top_down ? -height_raw : height_raw;
  if (width <= 0 || height <= 0) throw FormatError(origin + ": bad BMP geometry");

  std::vector<std::uint8_t> palette_gray;
  if (bpp == 8) {
    std::uint32_t colors = rd_u32le(&bytes[46]);
    if (colors == 0) colors = 256;
    const std::size_t pal_off = 14 + hdr_size;
    if (pal_off + colors * 4 > bytes.size()) throw FormatError(origin + ": truncated BMP palette");
    palette_gray.resize(colors);
    for (std::uint32_t i = 0; i < colors; ++i) {
      const std::uint8_t* e = &bytes[pal_off + i * 4];  // BGRA
      palette_gray[i] = luma(e[2], e[1], e[0]);
    }
  }
  const long row_bytes = ((static_cast<long>(width) * bpp / 8) + 3) & ~3L;
  if (data_off + row_bytes * height > static_cast<long>(bytes.size())) {
    throw FormatError(origin + ": truncated BMP payload");
  }
  GrayImage img;
  img.width = width;
  img.height = height;
  img.pixels.resize(static_cast<std::size_t>(width) * height);
  for (int y = 0; y < height; ++y) {
    const int src_y = top_down ? y : height - 1 - y;
    const std::uint8_t* row = &bytes[data_off + static_cast<long>(src_y) * row_bytes];
    for (int x = 0; x < width; ++x) {
      std::uint8_t v;
      if (bpp == 8) {
        const std::uint8_t ci = row[x];
        if (ci >= palette_gray.size()) throw FormatError(origin + ": BMP palette index out of range");
        v = palette_gray[ci];
      } else {
        v = luma(row[x * 3 + 2], row[x * 3 + 1], row[x * 3]);
      }
      img.pixels[static_cast<std::size_t>(y) * width + x] = v;
    }
  }
  return img;
}

std::uint32_t rd_u32be(const std::uint8_t* p) {
  return (std::uint32_t(p[0]) << 24) | (std::uint32_t(p[1]) << 16) | (std::uint32_t(p[2]) << 8) |
         std::uint32_t(p[3]);
}

GrayImage decode_png(const std::vector<std::uint8_t>& bytes, const std::string& origin) {
  static const std::uint8_t sig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  if (bytes.size() < 8 || std::memcmp(bytes.data(), sig, 8) != 0) {
    throw FormatError(origin + ": bad PNG signature");
  }
  std::size_t pos = 8;
  int width = 0, height = 0, bit_depth = 0, color_type = 0;
  std::vector<std::uint8_t> idat;
  bool saw_ihdr = false, saw_iend = false;
  while (pos + 8 <= bytes.size() && !saw_iend) {
    const std::uint32_t len = rd_u32be(&bytes[pos]);
    if (pos + 12 + len > bytes.size()) throw FormatError(origin + ": truncated PNG chunk");
    const char* type = reinterpret_cast<const char*>(&bytes[pos + 4]);
    const std::uint8_t* data = &bytes[pos + 8];
    if (std::memcmp(type, "IHDR", 4) == 0) {
      if (len != 13) throw FormatError(origin + ": bad IHDR length");
      width = static_cast<int>(rd_u32be(data));
      height = static_cast<int>(rd_u32be(data + 4));
      bit_depth = data[8];
      color_type = data[9];
      if (data[12] != 0) throw FormatError(origin + ": interlaced PNG not supported");
      if (bit_depth != 8 || (color_type != 0 && color_type != 2 && color_type != 6)) {
        throw FormatError(origin + ": only 8-bit gray/RGB/RGBA PNG supported");
      }
      saw_ihdr = true;
    } else if (std::memcmp(type, "IDAT", 4) == 0) {
      idat.insert(idat.end(), data, data + len);
    } else if (std::memcmp(type, "IEND", 4) == 0) {
      saw_iend = true;
    }
    pos += 12 + len;
  }
  if (!saw_ihdr || !saw_iend || idat.empty()) throw FormatError(origin + ": incomplete PNG");
  if (width <= 0 || height <= 0) throw FormatError(origin + ": bad PNG geometry");

  const int bypp = color_type == 0 ? 1 : color_type == 2 ? 3 : 4;
  const long stride = static_cast<long>(width) * bypp;
  std::vector<std::uint8_t> raw(static_cast<std::size_t>((stride + 1) * height));
  uLongf out_len = static_cast<uLongf>(raw.size());
  const int zrc = uncompress(raw.data(), &out_len, idat.data(), static_cast<uLong>(idat.size()));
  if (zrc != Z_OK || out_len != raw.size()) {
    throw FormatError(origin + ": PNG inflate failed");
  }

  // undo per-scanline filters in place
  std::vector<std::uint8_t> prior(static_cast<std::size_t>(stride), 0);
  std::vector<std::uint8_t> line(static_cast<std::size_t>(stride));
  GrayImage img;
  img.width = width;
  img.height = height;
  img.pixels.resize(static_cast<std::size_t>(width) * height);
  for (int y = 0; y < height; ++y) {
    const std::uint8_t filter = raw[static_cast<std::size_t>(y) * (stride + 1)];
    const std::uint8_t* src = &raw[static_cast<std::size_t>(y) * (stride + 1) + 1];
    for (long i = 0; i < stride; ++i) {
      const int a = i >= bypp ? line[i - bypp] : 0;
      const int b = prior[i];
      const int c = i >= bypp ? prior[i - bypp] : 0;
      int v = src[i];
      switch (filter) {
        case 0: break;
        case 1: v += a; break;
        case 2: v += b; break;
        case 3: v += (a + b) / 2; break;
        case 4: {
          const int p = a + b - c;
          const int pa = std::abs(p - a), pb = std::abs(p - b), pc = std::abs(p - c);
          v += (pa <= pb && pa <= pc) ? a : (pb <= pc ? b : c);
          break;
        }
        default: throw FormatError(origin + ": unknown PNG filter type");
      }
      line[i] = static_cast<std::uint8_t>(v & 0xff);
    }
    for (int x = 0; x < width; ++x) {
      std::uint8_t g;
      if (bypp == 1) {
        g = line[x];
      } else {
        g = luma(line[static_cast<long>(x) * bypp], line[static_cast<long>(x) * bypp + 1],
                 line[static_cast<long>(x) * bypp + 2]);
      }
      img.pixels[static_cast<std::size_t>(y) * width + x] = g;
    }
    std::swap(prior, line);
  }
  return img;
}

}  // namespace

GrayImage decode_image_bytes(const std::vector<std::uint8_t>& bytes, const std::string& origin) {
  if (bytes.size() >= 2 && bytes[0] == 'P' && (bytes[1] == '5' || bytes[1] == '2')) {
    return decode_pgm(bytes, origin);
  }
  if (bytes.size() >= 2 && bytes[0] == 'B' && bytes[1] == 'M') {
    return decode_bmp(bytes, origin);
  }
  if (bytes.size() >= 8 && bytes[0] == 0x89 && bytes[1] == 'P') {
    return decode_png(bytes, origin);
  }
  throw FormatError(origin + ": unrecognized image format");
}

GrayImage decode_image(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path);
  std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(in),
                                  std::istreambuf_iterator<char>()};
  return decode_image_bytes(bytes, path);
}

void save_pgm(const std::string& path, const GrayImage& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << "P5\n" << img.width << " " << img.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.pixels.data()),
            static_cast<long>(img.pixels.size()));
  if (!out) throw IoError("short write to " + path);
}

Tensor image_to_tensor(const GrayImage& img, int out_h, int out_w) {
  Tensor t({1, 1, out_h, out_w});
  double* p = t.data();
  const double sy = out_h > 1 ? static_cast<double>(img.height - 1) / (out_h - 1) : 0.0;
  const double sx = out_w > 1 ? static_cast<double>(img.width - 1) / (out_w - 1) : 0.0;
  for (int y = 0; y < out_h; ++y) {
    const double fy = y * sy;
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, img.height - 1);
    const double wy = fy - y0;
    for (int x = 0; x < out_w; ++x) {
      const double fx = x * sx;
      const int x0 = static_cast<int>(fx);
      const int x1 = std::min(x0 + 1, img.width - 1);
      const double wx = fx - x0;
      const double v00 = img.pixels[static_cast<std::size_t>(y0) * img.width + x0];
      const double v01 = img.pixels[static_cast<std::size_t>(y0) * img.width + x1];
      const double v10 = img.pixels[static_cast<std::size_t>(y1) * img.width + x0];
      const double v11 = img.pixels[static_cast<std::size_t>(y1) * img.width + x1];
      const double v = (1 - wy) * ((1 - wx) * v00 + wx * v01) + wy * ((1 - wx) * v10 + wx * v11);
      p[static_cast<long>(y) * out_w + x] = v / 127.5 - 1.0;
    }
  }
  return t;
}

GrayImage tensor_to_image(const Tensor& frame) {
  const Shape& s = frame.shape();
  if (s.size() != 4 || s[0] != 1 || s[1] != 1) {
    throw DimensionError("tensor_to_image: expected [1,1,H,W], got " + shape_str(s));
  }
  GrayImage img;
  img.height = s[2];
  img.width = s[3];
  img.pixels.resize(static_cast<std::size_t>(img.width) * img.height);
  const double* p = frame.data();
  for (std::size_t i = 0; i < img.pixels.size(); ++i) {
    const double v = std::clamp((p[i] + 1.0) * 127.5, 0.0, 255.0);
    img.pixels[i] = static_cast<std::uint8_t>(std::lround(v));
  }
  return img;
}

}  // namespace streamad
