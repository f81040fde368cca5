// Copyright 2026 The vig-curate Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <doctest.h>
#include <random>
#include <sstream>

#include "test_helpers.hpp"
#include "vig/blur.hpp"

using namespace vig;
using testing::kind_of;

namespace {

PixelImage random_image(std::mt19937_64& rng, std::size_t w, std::size_t h) {
  std::uniform_int_distribution<int> px(0, 255);
  PixelImage img{w, h, std::vector<std::uint8_t>(w * h * 3)};
  for (auto& b : img.data) b = static_cast<std::uint8_t>(px(rng));
  return img;
}

double total_variation(const FloatImage& img) {
  double tv = 0.0;
  for (std::size_t y = 0; y < img.height; ++y) {
    for (std::size_t x = 0; x < img.width; ++x) {
      for (std::size_t c = 0; c < 3; ++c) {
        if (x + 1 < img.width) tv += std::abs(img.at(x + 1, y, c) - img.at(x, y, c));
        if (y + 1 < img.height) tv += std::abs(img.at(x, y + 1, c) - img.at(x, y, c));
      }
    }
  }
  return tv;
}

}  // namespace

TEST_CASE("kernel: radius ceil(3 sigma), normalized, symmetric") {
  const auto k = gaussian_kernel(1.5);
  CHECK(k.size() == 2 * 5 + 1);
  double sum = 0.0;
  for (double v : k) sum += v;
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-15));
  for (std::size_t i = 0; i < k.size(); ++i) CHECK(k[i] == k[k.size() - 1 - i]);
  CHECK(blur_sigma(200, 100, 0.05) == doctest::Approx(5.0));
  CHECK(kind_of([] { gaussian_kernel(0.0); }) == ErrorKind::InvalidScale);
}

TEST_CASE("reflect_index mirrors without repeating the edge") {
  CHECK(reflect_index(-1, 4) == 1);
  CHECK(reflect_index(-3, 4) == 3);
  CHECK(reflect_index(4, 4) == 2);
  CHECK(reflect_index(6, 4) == 0);
  CHECK(reflect_index(-7, 4) == 1);
  CHECK(reflect_index(5, 1) == 0);
  for (long i = -40; i < 40; ++i) {
    for (std::size_t n = 1; n < 7; ++n) REQUIRE(reflect_index(i, n) == oracle::mirror(i, static_cast<long>(n)));
  }
}

TEST_CASE("constant image is a fixed point") {
  PixelImage img{17, 9, std::vector<std::uint8_t>(17 * 9 * 3, 128)};
  CHECK(gaussian_blur(img, 0.05) == img);
  CHECK(gaussian_blur(img, 0.4) == img);
}

TEST_CASE("1x1 image is unchanged") {
  PixelImage img{1, 1, {10, 200, 33}};
  CHECK(gaussian_blur(img) == img);
  CHECK(gaussian_blur(img, 3.0) == img);
}

TEST_CASE("impulse response matches dense 2D convolution") {
  const std::size_t w = 21, h = 21;
  PixelImage img{w, h, std::vector<std::uint8_t>(w * h * 3, 0)};
  for (std::size_t c = 0; c < 3; ++c) img.data[(10 * w + 10) * 3 + c] = 255;
  const double scale = 0.06;  // sigma = 1.26, radius 4
  const auto got = gaussian_blur_float(img, scale);
  const auto want = oracle::dense_blur(img.data, w, h, blur_sigma(w, h, scale));
  double worst = 0.0;
  for (std::size_t i = 0; i < want.size(); ++i) worst = std::max(worst, std::abs(got.data[i] - want[i]));
  CHECK(worst < 1e-6);
  // Center row against the sampled, normalized 2D Gaussian directly.
  const double sigma = blur_sigma(w, h, scale);
  const auto r = static_cast<long>(std::ceil(3.0 * sigma));
  double z = 0.0;
  for (long dy = -r; dy <= r; ++dy)
    for (long dx = -r; dx <= r; ++dx) z += std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
  for (long dx = -r; dx <= r; ++dx) {
    const double expect = 255.0 * std::exp(-(dx * dx) / (2.0 * sigma * sigma)) / z;
    CHECK(std::abs(got.at(static_cast<std::size_t>(10 + dx), 10, 0) - expect) < 1e-6);
  }
}

TEST_CASE("property: separable pass equals dense convolution on random images") {
  std::mt19937_64 rng(31);
  std::uniform_int_distribution<std::size_t> dim(1, 24);
  std::uniform_real_distribution<double> scale(0.02, 0.3);
  for (int trial = 0; trial < 40; ++trial) {
    const auto img = random_image(rng, dim(rng), dim(rng));
    const double s = scale(rng);
    const auto got = gaussian_blur_float(img, s);
    const auto want = oracle::dense_blur(img.data, static_cast<long>(img.width), static_cast<long>(img.height),
                                         blur_sigma(img.width, img.height, s));
    for (std::size_t i = 0; i < want.size(); ++i) REQUIRE(std::abs(got.data[i] - want[i]) < 1e-6);
  }
  // A few at the 64 x 64 upper end.
  for (int trial = 0; trial < 2; ++trial) {
    const auto img = random_image(rng, 64, 64);
    const auto got = gaussian_blur_float(img, 0.03);
    const auto want = oracle::dense_blur(img.data, 64, 64, blur_sigma(64, 64, 0.03));
    for (std::size_t i = 0; i < want.size(); ++i) REQUIRE(std::abs(got.data[i] - want[i]) < 1e-6);
  }
}

TEST_CASE("property: mean preserved within one level, variation decreases with sigma") {
  std::mt19937_64 rng(32);
  std::uniform_int_distribution<std::size_t> dim(8, 48);
  for (int trial = 0; trial < 30; ++trial) {
    const auto img = random_image(rng, dim(rng), dim(rng));
    double in_mean = 0.0;
    for (auto b : img.data) in_mean += b;
    in_mean /= static_cast<double>(img.data.size());
    const auto out = gaussian_blur(img, 0.05);
    double out_mean = 0.0;
    for (auto b : out.data) out_mean += b;
    out_mean /= static_cast<double>(out.data.size());
    REQUIRE(std::abs(out_mean - in_mean) <= 1.0);

    const double tv1 = total_variation(gaussian_blur_float(img, 0.03));
    const double tv2 = total_variation(gaussian_blur_float(img, 0.08));
    const double tv3 = total_variation(gaussian_blur_float(img, 0.2));
    REQUIRE(tv2 <= tv1);
    REQUIRE(tv3 <= tv2);
  }
}

TEST_CASE("quantize rounds half to even and clamps") {
  FloatImage f{2, 1, {0.5, 1.5, 2.5, -3.0, 255.7, 127.49}};
  const auto q = quantize(f);
  CHECK(q.data == std::vector<std::uint8_t>{0, 2, 2, 0, 255, 127});
}

TEST_CASE("blur errors") {
  PixelImage img{4, 4, std::vector<std::uint8_t>(48, 1)};
  CHECK(kind_of([&] { gaussian_blur(img, 0.0); }) == ErrorKind::InvalidScale);
  CHECK(kind_of([&] { gaussian_blur(img, -1.0); }) == ErrorKind::InvalidScale);
  PixelImage empty{0, 3, {}};
  CHECK(kind_of([&] { gaussian_blur(empty); }) == ErrorKind::DegenerateImage);
}

TEST_CASE("PPM: bit-exact round trip") {
  std::mt19937_64 rng(33);
  std::uniform_int_distribution<std::size_t> dim(1, 40);
  for (int trial = 0; trial < 25; ++trial) {
    const auto img = random_image(rng, dim(rng), dim(rng));
    std::ostringstream a;
    write_ppm(a, img);
    std::istringstream in(a.str());
    const auto back = read_ppm(in);
    REQUIRE(back == img);
    std::ostringstream b;
    write_ppm(b, back);
    REQUIRE(b.str() == a.str());
  }
}

TEST_CASE("PPM: header comments, unsupported and malformed inputs") {
  std::istringstream commented(std::string("P6\n# made by hand\n2 1\n255\n") + std::string("\x01\x02\x03\x04\x05\x06", 6));
  const auto img = read_ppm(commented);
  CHECK(img.width == 2);
  CHECK(img.data[5] == 6);

  std::istringstream p3("P3\n1 1\n255\n0 0 0\n");
  CHECK(kind_of([&] { read_ppm(p3); }) == ErrorKind::MalformedHeader);
  std::istringstream deep("P6\n1 1\n65535\n\0\0\0\0\0\0");
  CHECK(kind_of([&] { read_ppm(deep); }) == ErrorKind::MalformedHeader);
  std::istringstream junk("P6\nx 1\n255\n");
  CHECK(kind_of([&] { read_ppm(junk); }) == ErrorKind::MalformedHeader);
  std::istringstream truncated(std::string("P6\n2 2\n255\n") + std::string(5, 'a'));
  CHECK(kind_of([&] { read_ppm(truncated); }) == ErrorKind::TruncatedPixelData);
  std::istringstream zero("P6\n0 2\n255\n");
  CHECK(kind_of([&] { read_ppm(zero); }) == ErrorKind::DegenerateImage);
}
