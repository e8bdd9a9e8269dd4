#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "streamad/tensor.hpp"

namespace streamad {

struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // row-major
};

/// Decodes PGM (P2/P5), BMP (8-bit palette / 24-bit, uncompressed) or PNG
/// (8-bit gray/RGB/RGBA, non-interlaced), converting color to luma.
/// Dispatches on the file's magic bytes.
GrayImage decode_image(const std::string& path);
GrayImage decode_image_bytes(const std::vector<std::uint8_t>& bytes, const std::string& origin);

void save_pgm(const std::string& path, const GrayImage& img);

/// Bilinear resize to (out_h, out_w) and map [0,255] -> [-1,1] as [1,1,H,W].
Tensor image_to_tensor(const GrayImage& img, int out_h, int out_w);

/// Inverse of the intensity mapping, clamped to [0,255]; for frame dumps.
GrayImage tensor_to_image(const Tensor& frame);

}  // namespace streamad
