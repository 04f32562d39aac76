#include "docrect/layers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Core>

#include "docrect/error.hpp"

namespace docrect {

namespace {

using RowMatrix = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowMatrixD = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

constexpr float kBelowOne = 1.0f - 0x1p-24f;

// Reduction depth per float GEMM; partial products are summed in double.
// Output columns are tiled so the double accumulator stays in cache.
constexpr Eigen::Index kDepthBlock = 64;
constexpr Eigen::Index kColumnTile = 432;

struct Scratch {
  std::vector<float> cols;
  RowMatrixD acc;
  RowMatrix part;
};

Scratch& scratch() {
  thread_local Scratch s;
  return s;
}

void blocked_product(const Eigen::Map<const RowMatrix>& w, const float* cols, Eigen::Index n, const Tensor& bias,
                     Eigen::Map<RowMatrix>& out) {
  const Eigen::Index cout = w.rows(), depth = w.cols();
  const Eigen::Map<const RowMatrix> x(cols, depth, n);
  Scratch& s = scratch();
  const Eigen::Index tile = std::min(kColumnTile, n);
  s.acc.resize(cout, tile);
  s.part.resize(cout, tile);
  for (Eigen::Index n0 = 0; n0 < n; n0 += tile) {
    const Eigen::Index nt = std::min(tile, n - n0);
    auto acc = s.acc.leftCols(nt);
    auto part = s.part.leftCols(nt);
    for (Eigen::Index o = 0; o < cout; ++o) acc.row(o).setConstant(bias.data[o]);
    for (Eigen::Index k0 = 0; k0 < depth; k0 += kDepthBlock) {
      const Eigen::Index kc = std::min(kDepthBlock, depth - k0);
      part.noalias() = w.middleCols(k0, kc) * x.block(k0, n0, kc, nt);
      acc += part.cast<double>();
    }
    out.middleCols(n0, nt) = acc.cast<float>();
  }
}

}  // namespace

FeatureMap conv2d(const FeatureMap& in, const std::string& name, int stride, const WeightStore& weights) {
  const std::string wname = name + ".weight";
  const std::string bname = name + ".bias";
  const Tensor& kernel = weights.get(wname);
  const Tensor& bias = weights.get(bname);
  if (kernel.shape.size() != 4) throw ManifestError("tensor '" + wname + "' must be 4-D (OIHW)");
  const int cout = static_cast<int>(kernel.shape[0]);
  const int cin = static_cast<int>(kernel.shape[1]);
  const int kh = static_cast<int>(kernel.shape[2]);
  const int kw = static_cast<int>(kernel.shape[3]);
  if (kh % 2 == 0 || kw % 2 == 0) throw ManifestError("tensor '" + wname + "' needs odd kernel extents");
  if (cin != in.channels)
    throw ManifestError("tensor '" + wname + "' expects " + std::to_string(cin) + " input channels, got " +
                        std::to_string(in.channels));
  if (bias.shape != std::vector<std::int64_t>{cout})
    throw ManifestError("tensor '" + bname + "' must have shape [" + std::to_string(cout) + "]");
  if (stride < 1) throw ParameterError("conv2d stride must be >= 1");

  const int ph = kh / 2, pw = kw / 2;
  const int oh = (in.height + stride - 1) / stride;
  const int ow = (in.width + stride - 1) / stride;
  const Eigen::Index n = static_cast<Eigen::Index>(oh) * ow;
  const Eigen::Index depth = static_cast<Eigen::Index>(cin) * kh * kw;

  FeatureMap out(cout, oh, ow);
  Eigen::Map<const RowMatrix> wmat(kernel.data.data(), cout, depth);
  Eigen::Map<RowMatrix> omat(out.data.data(), cout, n);

  if (kh == 1 && kw == 1 && stride == 1) {
    blocked_product(wmat, in.data.data(), n, bias, omat);
  } else {
    std::vector<float>& cols = scratch().cols;
    cols.resize(static_cast<std::size_t>(depth * n));
    for (int c = 0; c < cin; ++c) {
      const float* src = in.plane(c);
      for (int ky = 0; ky < kh; ++ky) {
        for (int kx = 0; kx < kw; ++kx) {
          float* dst = cols.data() + ((static_cast<std::size_t>(c) * kh + ky) * kw + kx) * n;
          // Output columns whose source x lies inside the input.
          const int x_lo = std::min(ow, std::max(0, (pw - kx + stride - 1) / stride));
          const int last = in.width - 1 + pw - kx;
          const int x_hi = last < 0 ? x_lo : std::max(x_lo, std::min(ow, last / stride + 1));
          for (int y = 0; y < oh; ++y) {
            const int sy = y * stride + ky - ph;
            float* row = dst + static_cast<std::size_t>(y) * ow;
            if (sy < 0 || sy >= in.height) {
              std::fill(row, row + ow, 0.0f);
              continue;
            }
            const float* srow = src + static_cast<std::size_t>(sy) * in.width;
            std::fill(row, row + x_lo, 0.0f);
            if (stride == 1) {
              std::copy(srow + x_lo + kx - pw, srow + x_hi + kx - pw, row + x_lo);
            } else {
              for (int x = x_lo; x < x_hi; ++x) row[x] = srow[x * stride + kx - pw];
            }
            std::fill(row + x_hi, row + ow, 0.0f);
          }
        }
      }
    }
    blocked_product(wmat, scratch().cols.data(), n, bias, omat);
  }
  return out;
}

float bounded_tanh(float x) { return std::clamp(std::tanh(x), -kBelowOne, kBelowOne); }

float bounded_sigmoid(float x) {
  const float s = 1.0f / (1.0f + std::exp(-x));
  return std::clamp(s, std::numeric_limits<float>::min(), kBelowOne);
}

void relu_inplace(FeatureMap& map) {
  for (float& v : map.data) v = std::max(v, 0.0f);
}

void tanh_inplace(FeatureMap& map) {
  for (float& v : map.data) v = bounded_tanh(v);
}

void sigmoid_inplace(FeatureMap& map) {
  for (float& v : map.data) v = bounded_sigmoid(v);
}

FeatureMap concat_channels(const std::vector<const FeatureMap*>& parts) {
  if (parts.empty()) return {};
  int channels = 0;
  for (const auto* p : parts) {
    if (p->height != parts[0]->height || p->width != parts[0]->width)
      throw ShapeError("concat_channels: spatial sizes differ");
    channels += p->channels;
  }
  FeatureMap out(channels, parts[0]->height, parts[0]->width);
  auto it = out.data.begin();
  for (const auto* p : parts) it = std::copy(p->data.begin(), p->data.end(), it);
  return out;
}

FeatureMap slice_channels(const FeatureMap& map, int first, int count) {
  if (first < 0 || count < 0 || first + count > map.channels) throw ShapeError("slice_channels: range out of bounds");
  FeatureMap out(count, map.height, map.width);
  std::copy(map.plane(first), map.plane(first) + count * map.plane_size(), out.data.begin());
  return out;
}

FeatureMap to_feature_map(const ImagePlane& img) {
  FeatureMap out(img.channels, img.height, img.width);
  const std::size_t n = img.pixel_count();
  for (int c = 0; c < img.channels; ++c) {
    float* dst = out.plane(c);
    for (std::size_t i = 0; i < n; ++i) dst[i] = img.data[i * img.channels + c];
  }
  return out;
}

}  // namespace docrect
