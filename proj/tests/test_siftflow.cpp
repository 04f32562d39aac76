#include <doctest.h>

#include "docrect/error.hpp"
#include "docrect/siftflow.hpp"
#include "support.hpp"

using namespace docrect;

namespace {

double norm(const float* d) {
  double s = 0;
  for (int i = 0; i < kSiftDim; ++i) s += static_cast<double>(d[i]) * d[i];
  return std::sqrt(s);
}

struct ShiftStats {
  double exact_fraction;
  int median_dx, median_dy;
};

// a = crop at (y0 + sy, x0 + sx), b = crop at (y0, x0): a(p) sits at b(p + (sx, sy)).
ShiftStats recover_shift(int n, int sx, int sy, std::uint32_t seed) {
  const ImagePlane tex = testing::texture(n + 40, n + 40, seed);
  const ImagePlane a = testing::crop(tex, 20 + sy, 20 + sx, n, n), b = testing::crop(tex, 20, 20, n, n);
  const DisplacementField f = sift_flow_match(dense_sift(a), dense_sift(b));
  std::vector<int> dxs, dys;
  long exact = 0, total = 0;
  const int margin = 12;
  for (int y = margin; y < n - margin; ++y)
    for (int x = margin; x < n - margin; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * n + x;
      dxs.push_back(f.dx[i]);
      dys.push_back(f.dy[i]);
      exact += f.dx[i] == sx && f.dy[i] == sy;
      ++total;
    }
  std::nth_element(dxs.begin(), dxs.begin() + dxs.size() / 2, dxs.end());
  std::nth_element(dys.begin(), dys.begin() + dys.size() / 2, dys.end());
  return {static_cast<double>(exact) / total, dxs[dxs.size() / 2], dys[dys.size() / 2]};
}

}  // namespace

TEST_CASE("dense_sift on a constant image") {
  const DescriptorGrid g = dense_sift(ImagePlane(20, 24, 1, 0.4f));
  REQUIRE(g.height == 20);
  REQUIRE(g.width == 24);
  const float expected = static_cast<float>(1 / std::sqrt(128.0));
  for (float v : g.data) CHECK(std::fabs(v - expected) <= 1e-7);
}

TEST_CASE("dense_sift descriptor invariants") {
  const ImagePlane img = testing::texture(40, 36, 21);
  const DescriptorGrid g = dense_sift(img);
  for (int y = 0; y < g.height; ++y)
    for (int x = 0; x < g.width; ++x) {
      REQUIRE(std::fabs(norm(g.at(y, x)) - 1.0) <= 1e-4);
      for (int i = 0; i < kSiftDim; ++i) REQUIRE(g.at(y, x)[i] >= 0.f);
    }
  CHECK(dense_sift(img).data == g.data);

  // Colour input goes through luma.
  ImagePlane rgb(40, 36, 3);
  for (std::size_t i = 0; i < img.pixel_count(); ++i)
    for (int c = 0; c < 3; ++c) rgb.data[i * 3 + c] = img.data[i];
  CHECK(testing::max_abs_diff(dense_sift(rgb).data, g.data) <= 1e-5);

  CHECK_THROWS_AS(dense_sift(ImagePlane(11, 40, 1)), ShapeError);
}

TEST_CASE("dense_sift is shift-equivariant in the interior") {
  const ImagePlane tex = testing::texture(60, 80, 22);
  const ImagePlane a = testing::crop(tex, 0, 0, 60, 70), b = testing::crop(tex, 0, 3, 60, 70);
  const DescriptorGrid ga = dense_sift(a), gb = dense_sift(b);
  double worst = 0;
  for (int y = 10; y < 50; ++y)
    for (int x = 10; x < 55; ++x)
      for (int i = 0; i < kSiftDim; ++i) worst = std::max(worst, std::fabs(double(ga.at(y, x + 3)[i]) - gb.at(y, x)[i]));
  CHECK(worst <= 1e-4);
}

TEST_CASE("downsample_descriptors halves the grid") {
  const DescriptorGrid g = dense_sift(testing::texture(33, 20, 23));
  const DescriptorGrid d = downsample_descriptors(g);
  CHECK(d.height == 17);
  CHECK(d.width == 10);
  CHECK(d.data.size() == 17u * 10 * kSiftDim);
}

TEST_CASE("self-match gives the zero field") {
  const DescriptorGrid g = dense_sift(testing::texture(64, 48, 24));
  const DisplacementField f = sift_flow_match(g, g);
  for (int v : f.dx) CHECK(v == 0);
  for (int v : f.dy) CHECK(v == 0);
  CHECK(sift_flow_energy(g, g, f) == 0.0);
}

TEST_CASE("translations are recovered") {
  for (auto [sx, sy] : std::vector<std::pair<int, int>>{{5, 0}, {-5, 0}, {0, 5}, {3, -4}}) {
    const ShiftStats s = recover_shift(96, sx, sy, 25);
    CHECK(s.median_dx == sx);
    CHECK(s.median_dy == sy);
    CHECK(s.exact_fraction >= 0.95);
  }
}

TEST_CASE("exactly shifted grids are recovered in every direction") {
  // b is a window of a random grid, a the same window moved by (sx, sy):
  // a(p) == b(p + (sx, sy)) wherever p + (sx, sy) is inside.
  const int n = 25, pad = 5;
  std::mt19937 rng(31);
  std::uniform_real_distribution<float> u(0.f, 0.1f);
  DescriptorGrid big{n + 2 * pad, n + 2 * pad, std::vector<float>(static_cast<std::size_t>(n + 2 * pad) * (n + 2 * pad) * kSiftDim)};
  for (float& v : big.data) v = u(rng);
  for (auto [sx, sy] : std::vector<std::pair<int, int>>{{3, 3}, {-3, -3}, {3, -3}, {-3, 3}, {-4, 0}, {0, -4}}) {
    DescriptorGrid a{n, n, std::vector<float>(static_cast<std::size_t>(n) * n * kSiftDim)}, b = a;
    for (int y = 0; y < n; ++y)
      for (int x = 0; x < n; ++x) {
        std::copy_n(big.at(y + pad + sy, x + pad + sx), kSiftDim, a.at(y, x));
        std::copy_n(big.at(y + pad, x + pad), kSiftDim, b.at(y, x));
      }
    const DisplacementField f = sift_flow_match(a, b);
    long exact = 0;
    for (std::size_t i = 0; i < f.size(); ++i) exact += f.dx[i] == sx && f.dy[i] == sy;
    CHECK(exact == static_cast<long>(f.size()));
  }
}

TEST_CASE("unrelated images: bounded, no worse than zero, deterministic") {
  std::mt19937 rng(26);
  const DescriptorGrid a = dense_sift(testing::random_image(rng, 48, 40, 1));
  const DescriptorGrid b = dense_sift(testing::random_image(rng, 48, 40, 1));
  const DisplacementField f = sift_flow_match(a, b);
  const int bound = max_displacement(48, 40);
  for (std::size_t i = 0; i < f.size(); ++i) {
    CHECK(std::abs(f.dx[i]) <= bound);
    CHECK(std::abs(f.dy[i]) <= bound);
  }
  CHECK(sift_flow_energy(a, b, f) <= sift_flow_energy(a, b, DisplacementField(48, 40)));
  const DisplacementField again = sift_flow_match(a, b);
  CHECK(again.dx == f.dx);
  CHECK(again.dy == f.dy);
  CHECK_THROWS_AS(sift_flow_match(a, dense_sift(testing::random_image(rng, 40, 40, 1))), ShapeError);
}

TEST_CASE("max_displacement follows the pyramid") {
  // 200 -> 100 -> 50 -> 25: four levels, 5 * 8 + 1 * (4 + 2 + 1).
  CHECK(max_displacement(200, 200) == 47);
  CHECK(max_displacement(20, 30) == 5);
}

TEST_CASE("sift_flow_energy by hand") {
  DescriptorGrid a{1, 2, std::vector<float>(2 * kSiftDim, 0.f)}, b = a;
  b.data[0] = 0.5f;  // pixel (0,0) differs by 0.5 in one entry
  SiftFlowParams p;
  DisplacementField zero(1, 2);
  CHECK(sift_flow_energy(a, b, zero, p) == doctest::Approx(0.5 * p.descriptor_scale));
  DisplacementField one(1, 2);
  one.dx = {1, 0};  // (0,0) -> (0,1) matches exactly; smoothness |1 - 0|
  CHECK(sift_flow_energy(a, b, one, p) == doctest::Approx(p.eta + p.alpha));
}

TEST_CASE("displacement DSFL round trip") {
  DisplacementField f(3, 4);
  for (std::size_t i = 0; i < f.size(); ++i) {
    f.dx[i] = static_cast<int>(i) - 5;
    f.dy[i] = 7 - static_cast<int>(i);
  }
  const auto bytes = encode_displacement(f);
  const DisplacementField back = decode_displacement(bytes);
  CHECK(back.dx == f.dx);
  CHECK(back.dy == f.dy);
  CHECK(bytes[9] == 1);  // displacement semantics
  CHECK(encode_displacement(back) == bytes);
}
