// Copyright 2026 The vig-curate Authors
// SPDX-License-Identifier: Apache-2.0

#include "vig/blur.hpp"

#include <algorithm>
#include <cctype>
#include <cfenv>
#include <cmath>
#include <istream>
#include <ostream>
#include <string>

#include "vig/error.hpp"

namespace vig {

void PixelImage::validate() const {
  if (width == 0 || height == 0) throw Error(ErrorKind::DegenerateImage, "image has zero extent");
  if (data.size() != width * height * kChannels) {
    throw Error(ErrorKind::DegenerateImage, "pixel buffer does not match width * height * 3");
  }
}

double blur_sigma(std::size_t width, std::size_t height, double scale) {
  if (!(scale > 0.0) || !std::isfinite(scale)) throw Error(ErrorKind::InvalidScale, "blur scale must be > 0");
  return scale * static_cast<double>(std::min(width, height));
}

std::vector<double> gaussian_kernel(double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw Error(ErrorKind::InvalidScale, "sigma must be > 0");
  const auto radius = static_cast<std::int64_t>(std::ceil(3.0 * sigma));
  std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
  double sum = 0.0;
  for (std::int64_t i = -radius; i <= radius; ++i) {
    const double x = static_cast<double>(i);
    const double w = std::exp(-(x * x) / (2.0 * sigma * sigma));
    k[static_cast<std::size_t>(i + radius)] = w;
    sum += w;
  }
  for (double& w : k) w /= sum;
  return k;
}

std::size_t reflect_index(std::int64_t i, std::size_t n) {
  if (n == 1) return 0;
  const auto period = static_cast<std::int64_t>(2 * (n - 1));
  std::int64_t m = i % period;
  if (m < 0) m += period;
  if (m >= static_cast<std::int64_t>(n)) m = period - m;
  return static_cast<std::size_t>(m);
}

FloatImage gaussian_blur_float(const PixelImage& img, double scale) {
  img.validate();
  const auto kernel = gaussian_kernel(blur_sigma(img.width, img.height, scale));
  const auto radius = static_cast<std::int64_t>(kernel.size() / 2);
  const std::size_t w = img.width;
  const std::size_t h = img.height;
  constexpr std::size_t C = PixelImage::kChannels;

  std::vector<double> tmp(w * h * C);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      for (std::size_t c = 0; c < C; ++c) {
        double acc = 0.0;
        for (std::int64_t k = -radius; k <= radius; ++k) {
          const auto xs = reflect_index(static_cast<std::int64_t>(x) + k, w);
          acc += kernel[static_cast<std::size_t>(k + radius)] * img.data[(y * w + xs) * C + c];
        }
        tmp[(y * w + x) * C + c] = acc;
      }
    }
  }

  FloatImage out{w, h, std::vector<double>(w * h * C)};
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      for (std::size_t c = 0; c < C; ++c) {
        double acc = 0.0;
        for (std::int64_t k = -radius; k <= radius; ++k) {
          const auto ys = reflect_index(static_cast<std::int64_t>(y) + k, h);
          acc += kernel[static_cast<std::size_t>(k + radius)] * tmp[(ys * w + x) * C + c];
        }
        out.data[(y * w + x) * C + c] = acc;
      }
    }
  }
  return out;
}

PixelImage quantize(const FloatImage& img) {
  PixelImage out{img.width, img.height, std::vector<std::uint8_t>(img.data.size())};
  const int saved = std::fegetround();
  std::fesetround(FE_TONEAREST);
  for (std::size_t i = 0; i < img.data.size(); ++i) {
    out.data[i] = static_cast<std::uint8_t>(std::clamp(std::nearbyint(img.data[i]), 0.0, 255.0));
  }
  std::fesetround(saved);
  return out;
}

PixelImage gaussian_blur(const PixelImage& img, double scale) { return quantize(gaussian_blur_float(img, scale)); }

namespace {

// Next header token, skipping whitespace and '#' comments.
std::string header_token(std::istream& in) {
  std::string tok;
  int ch;
  while ((ch = in.get()) != EOF) {
    if (ch == '#') {
      while ((ch = in.get()) != EOF && ch != '\n' && ch != '\r') {
      }
      continue;
    }
    if (std::isspace(ch)) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(static_cast<char>(ch));
    if (tok.size() > 20) throw Error(ErrorKind::MalformedHeader, "header token too long");
  }
  // The single whitespace after maxval has been consumed by the loop above.
  return tok;
}

std::size_t header_number(std::istream& in, const char* what) {
  const auto tok = header_token(in);
  if (tok.empty() || tok.find_first_not_of("0123456789") != std::string::npos) {
    throw Error(ErrorKind::MalformedHeader, std::string("bad ") + what + " '" + tok + "'");
  }
  return std::stoull(tok);
}

}  // namespace

PixelImage read_ppm(std::istream& in) {
  char magic[2] = {0, 0};
  in.read(magic, 2);
  if (in.gcount() != 2 || magic[0] != 'P' || magic[1] != '6') {
    throw Error(ErrorKind::MalformedHeader, "not a binary P6 pixmap");
  }
  const int sep = in.peek();
  if (sep == EOF || !(std::isspace(sep) || sep == '#')) throw Error(ErrorKind::MalformedHeader, "bad magic");
  PixelImage img;
  img.width = header_number(in, "width");
  img.height = header_number(in, "height");
  const auto maxval = header_number(in, "maxval");
  if (maxval != 255) throw Error(ErrorKind::MalformedHeader, "only maxval 255 is supported");
  if (img.width == 0 || img.height == 0) throw Error(ErrorKind::DegenerateImage, "image has zero extent");
  if (img.width > (1u << 16) || img.height > (1u << 16)) throw Error(ErrorKind::MalformedHeader, "image too large");
  img.data.resize(img.width * img.height * PixelImage::kChannels);
  in.read(reinterpret_cast<char*>(img.data.data()), static_cast<std::streamsize>(img.data.size()));
  if (static_cast<std::size_t>(in.gcount()) != img.data.size()) {
    throw Error(ErrorKind::TruncatedPixelData, "pixel data ends early");
  }
  return img;
}

void write_ppm(std::ostream& out, const PixelImage& img) {
  img.validate();
  out << "P6\n" << img.width << ' ' << img.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.data.data()), static_cast<std::streamsize>(img.data.size()));
  if (!out) throw Error(ErrorKind::Io, "write failure");
}

}  // namespace vig
