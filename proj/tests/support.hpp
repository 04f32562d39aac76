// Shared fixtures and brute-force reference implementations for the tests.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "docrect/flow.hpp"
#include "docrect/image.hpp"
#include "docrect/tensor.hpp"
#include "docrect/weights.hpp"

namespace testing {

inline std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("docrect_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline docrect::FeatureMap random_map(std::mt19937& rng, int c, int h, int w, float lo = -1.f, float hi = 1.f) {
  std::uniform_real_distribution<float> d(lo, hi);
  docrect::FeatureMap m(c, h, w);
  for (float& v : m.data) v = d(rng);
  return m;
}

inline docrect::Tensor random_tensor(std::mt19937& rng, std::vector<std::int64_t> shape, float scale = 1.f) {
  docrect::Tensor t;
  t.shape = std::move(shape);
  std::uniform_real_distribution<float> d(-scale, scale);
  t.data.resize(static_cast<std::size_t>(t.numel()));
  for (float& v : t.data) v = d(rng);
  return t;
}

inline docrect::ImagePlane random_image(std::mt19937& rng, int h, int w, int c) {
  std::uniform_real_distribution<float> d(0.f, 1.f);
  docrect::ImagePlane img(h, w, c);
  for (float& v : img.data) v = d(rng);
  return img;
}

/// Smooth random texture: white noise blurred with a 7-tap Gaussian and
/// stretched to [0.05, 0.95]. Deterministic in the seed.
inline docrect::ImagePlane texture(int h, int w, std::uint32_t seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> d(0.0, 1.0);
  std::vector<double> noise(static_cast<std::size_t>(h) * w), tmp(noise.size()), out(noise.size());
  for (double& v : noise) v = d(rng);
  const double k[7] = {0.0702, 0.1311, 0.1907, 0.2161, 0.1907, 0.1311, 0.0702};
  auto clampi = [](int v, int n) { return v < 0 ? 0 : (v >= n ? n - 1 : v); };
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double s = 0;
      for (int t = -3; t <= 3; ++t) s += k[t + 3] * noise[static_cast<std::size_t>(y) * w + clampi(x + t, w)];
      tmp[static_cast<std::size_t>(y) * w + x] = s;
    }
  double lo = 1e9, hi = -1e9;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double s = 0;
      for (int t = -3; t <= 3; ++t) s += k[t + 3] * tmp[static_cast<std::size_t>(clampi(y + t, h)) * w + x];
      out[static_cast<std::size_t>(y) * w + x] = s;
      lo = std::min(lo, s);
      hi = std::max(hi, s);
    }
  docrect::ImagePlane img(h, w, 1);
  for (std::size_t i = 0; i < out.size(); ++i) img.data[i] = static_cast<float>(0.05 + 0.9 * (out[i] - lo) / (hi - lo));
  return img;
}

/// Crop of `src` starting at (y0, x0).
inline docrect::ImagePlane crop(const docrect::ImagePlane& src, int y0, int x0, int h, int w) {
  docrect::ImagePlane out(h, w, src.channels);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < src.channels; ++c) out.at(y, x, c) = src.at(y0 + y, x0 + x, c);
  return out;
}

/// Direct nested-loop cross-correlation in double precision, zero padding
/// k/2, output ceil(H/stride).
inline std::vector<double> ref_conv(const std::vector<double>& in, int cin, int h, int w, const docrect::Tensor& wt,
                                    const docrect::Tensor& b, int stride, int& oh, int& ow) {
  const int cout = static_cast<int>(wt.shape[0]), kh = static_cast<int>(wt.shape[2]), kw = static_cast<int>(wt.shape[3]);
  oh = (h + stride - 1) / stride;
  ow = (w + stride - 1) / stride;
  std::vector<double> out(static_cast<std::size_t>(cout) * oh * ow);
  for (int o = 0; o < cout; ++o)
    for (int y = 0; y < oh; ++y)
      for (int x = 0; x < ow; ++x) {
        double s = b.data[o];
        for (int c = 0; c < cin; ++c)
          for (int ky = 0; ky < kh; ++ky)
            for (int kx = 0; kx < kw; ++kx) {
              const int sy = y * stride + ky - kh / 2, sx = x * stride + kx - kw / 2;
              if (sy < 0 || sy >= h || sx < 0 || sx >= w) continue;
              s += static_cast<double>(wt.data[((static_cast<std::size_t>(o) * cin + c) * kh + ky) * kw + kx]) *
                   in[(static_cast<std::size_t>(c) * h + sy) * w + sx];
            }
        out[(static_cast<std::size_t>(o) * oh + y) * ow + x] = s;
      }
  return out;
}

inline std::vector<double> to_double(const docrect::FeatureMap& m) { return {m.data.begin(), m.data.end()}; }

/// Scalar evaluation of the gated update: z, r from [h, x]; candidate from
/// [r*h, x]; h' = (1 - z) h + z cand.
inline std::vector<double> ref_gru(const docrect::FeatureMap& h, const docrect::FeatureMap& x,
                                   const docrect::WeightStore& w) {
  const int hh = h.height, ww = h.width, ch = h.channels, cx = x.channels;
  std::vector<double> hx(static_cast<std::size_t>(ch + cx) * hh * ww);
  std::copy(h.data.begin(), h.data.end(), hx.begin());
  std::copy(x.data.begin(), x.data.end(), hx.begin() + h.data.size());
  int oh, ow;
  auto z = ref_conv(hx, ch + cx, hh, ww, w.get("gru.z.weight"), w.get("gru.z.bias"), 1, oh, ow);
  auto r = ref_conv(hx, ch + cx, hh, ww, w.get("gru.r.weight"), w.get("gru.r.bias"), 1, oh, ow);
  for (auto& v : z) v = 1.0 / (1.0 + std::exp(-v));
  for (auto& v : r) v = 1.0 / (1.0 + std::exp(-v));
  std::vector<double> rhx = hx;
  for (std::size_t i = 0; i < h.data.size(); ++i) rhx[i] = r[i] * h.data[i];
  auto q = ref_conv(rhx, ch + cx, hh, ww, w.get("gru.h.weight"), w.get("gru.h.bias"), 1, oh, ow);
  std::vector<double> out(h.data.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = (1 - z[i]) * h.data[i] + z[i] * std::tanh(q[i]);
  return out;
}

/// Residual head: conv3x3 -> ReLU -> conv3x3.
inline std::vector<double> ref_residual(const docrect::FeatureMap& h, const docrect::WeightStore& w) {
  int oh, ow;
  auto t = ref_conv(to_double(h), h.channels, h.height, h.width, w.get("head.conv1.weight"), w.get("head.conv1.bias"), 1,
                    oh, ow);
  for (auto& v : t) v = std::max(v, 0.0);
  const int mid = static_cast<int>(w.get("head.conv1.weight").shape[0]);
  return ref_conv(t, mid, oh, ow, w.get("head.conv2.weight"), w.get("head.conv2.bias"), 1, oh, ow);
}

template <class A, class B>
double max_abs_diff(const A& a, const B& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(static_cast<double>(a[i]) - static_cast<double>(b[i])));
  return m;
}

/// Memoised recursive edit distance over all prefix pairs (the oracle for
/// the dynamic-programming implementation).
inline int recursive_edit_distance(const std::u32string& a, const std::u32string& b) {
  std::vector<int> memo((a.size() + 1) * (b.size() + 1), -1);
  auto rec = [&](auto&& self, std::size_t i, std::size_t j) -> int {
    if (i == 0) return static_cast<int>(j);
    if (j == 0) return static_cast<int>(i);
    int& m = memo[i * (b.size() + 1) + j];
    if (m >= 0) return m;
    return m = std::min({self(self, i - 1, j) + 1, self(self, i, j - 1) + 1,
                         self(self, i - 1, j - 1) + (a[i - 1] != b[j - 1] ? 1 : 0)});
  };
  return rec(rec, a.size(), b.size());
}

/// Every string of length <= max_len over the given alphabet.
inline std::vector<std::u32string> all_strings(const std::u32string& alphabet, int max_len) {
  std::vector<std::u32string> out{U""};
  std::size_t begin = 0;
  for (int len = 1; len <= max_len; ++len) {
    const std::size_t end = out.size();
    for (std::size_t i = begin; i < end; ++i)
      for (char32_t c : alphabet) out.push_back(out[i] + c);
    begin = end;
  }
  return out;
}

}  // namespace testing
