// Copyright 2026 The vig-curate Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Visual-absence preprocessing: a resolution-scaled Gaussian blur heavy
// enough to wipe out the semantic content of an image, so an external scorer
// can run its "without image" pass on it.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace vig {

struct PixelImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> data;  // row-major RGB, 3 bytes per pixel

  static constexpr std::size_t kChannels = 3;

  /// Throws DegenerateImage on zero extent or a size mismatch.
  void validate() const;
  std::uint8_t at(std::size_t x, std::size_t y, std::size_t c) const { return data[(y * width + x) * kChannels + c]; }

  bool operator==(const PixelImage&) const = default;
};

// Same layout as PixelImage, unquantized.
struct FloatImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<double> data;

  double at(std::size_t x, std::size_t y, std::size_t c) const {
    return data[(y * width + x) * PixelImage::kChannels + c];
  }
};

inline constexpr double kDefaultBlurScale = 0.05;

/// sigma = scale * min(width, height).
double blur_sigma(std::size_t width, std::size_t height, double scale);

/// Sampled Gaussian of radius ceil(3 sigma), normalized to sum 1.
std::vector<double> gaussian_kernel(double sigma);

/// Mirror index into [0, n) without repeating the edge sample
/// (d c b | a b c d | c b a), folding as often as needed.
std::size_t reflect_index(std::int64_t i, std::size_t n);

/// Separable blur, horizontal then vertical pass, before quantization.
FloatImage gaussian_blur_float(const PixelImage& img, double scale = kDefaultBlurScale);

/// Round half to even, clamp to [0, 255].
PixelImage quantize(const FloatImage& img);

PixelImage gaussian_blur(const PixelImage& img, double scale = kDefaultBlurScale);

/// Binary P6 with maxval 255. Comments are accepted in the header.
PixelImage read_ppm(std::istream& in);
/// Writes the canonical header "P6\n<w> <h>\n255\n" followed by the pixels.
void write_ppm(std::ostream& out, const PixelImage& img);

}  // namespace vig
