#include "docrect/siftflow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <Eigen/Core>

#include "docrect/codec.hpp"
#include "docrect/error.hpp"
#include "docrect/flow_io.hpp"

namespace docrect {

namespace {

constexpr int kBins = 8;
constexpr int kCells = 4;

using DescVec = Eigen::Map<const Eigen::Array<float, kSiftDim, 1>>;

// Separable [1 4 6 4 1]/16 along one axis with edge replication, applied to
// pixel-major vectors of `dim` floats.
void blur_rows(const std::vector<float>& in, std::vector<float>& out, int h, int w, int dim) {
  static constexpr float k[5] = {1 / 16.f, 4 / 16.f, 6 / 16.f, 4 / 16.f, 1 / 16.f};
  out.assign(in.size(), 0.0f);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      float* dst = out.data() + (static_cast<std::size_t>(y) * w + x) * dim;
      for (int t = -2; t <= 2; ++t) {
        const int xx = std::clamp(x + t, 0, w - 1);
        const float* src = in.data() + (static_cast<std::size_t>(y) * w + xx) * dim;
        for (int c = 0; c < dim; ++c) dst[c] += k[t + 2] * src[c];
      }
    }
  }
}

std::vector<float> triangle_pool(const std::vector<float>& plane, int h, int w, int half) {
  std::vector<float> kernel;
  for (int d = -(half - 1); d <= half - 1; ++d) kernel.push_back(static_cast<float>(half - std::abs(d)) / half);
  const int r = half - 1;
  std::vector<float> tmp(plane.size(), 0.0f), out(plane.size(), 0.0f);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      float s = 0.0f;
      for (int t = -r; t <= r; ++t) s += kernel[t + r] * plane[static_cast<std::size_t>(y) * w + std::clamp(x + t, 0, w - 1)];
      tmp[static_cast<std::size_t>(y) * w + x] = s;
    }
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      float s = 0.0f;
      for (int t = -r; t <= r; ++t) s += kernel[t + r] * tmp[static_cast<std::size_t>(std::clamp(y + t, 0, h - 1)) * w + x];
      out[static_cast<std::size_t>(y) * w + x] = s;
    }
  return out;
}

void normalize_descriptor(float* d) {
  double n = 0.0;
  for (int i = 0; i < kSiftDim; ++i) n += static_cast<double>(d[i]) * d[i];
  n = std::sqrt(n);
  if (n < 1e-12) {
    std::fill(d, d + kSiftDim, static_cast<float>(1.0 / std::sqrt(static_cast<double>(kSiftDim))));
    return;
  }
  double n2 = 0.0;
  for (int i = 0; i < kSiftDim; ++i) {
    d[i] = std::min(static_cast<float>(d[i] / n), 0.2f);
    n2 += static_cast<double>(d[i]) * d[i];
  }
  n2 = std::sqrt(n2);
  for (int i = 0; i < kSiftDim; ++i) d[i] = static_cast<float>(d[i] / n2);
}

double descriptor_cost(const DescriptorGrid& a, const DescriptorGrid& b, int y, int x, int dx, int dy,
                       const SiftFlowParams& p) {
  // Targets outside the grid compare against the nearest border descriptor.
  const int tx = std::clamp(x + dx, 0, b.width - 1), ty = std::clamp(y + dy, 0, b.height - 1);
  const float l1 = (DescVec(a.at(y, x)) - DescVec(b.at(ty, tx))).abs().sum();
  return std::min(static_cast<double>(l1) * p.descriptor_scale, p.data_truncation);
}

// Dual-layer loopy BP on one pyramid level. Plane 0 carries horizontal
// displacements, plane 1 vertical ones. Label l of a node means
// displacement offset + l - radius.
class DualLayerBp {
 public:
  DualLayerBp(int h, int w, int radius, std::vector<int> off_x, std::vector<int> off_y, std::vector<float> data,
              const SiftFlowParams& p)
      : h_(h), w_(w), r_(radius), s_(2 * radius + 1), p_(p), data_(std::move(data)) {
    const std::size_t n = static_cast<std::size_t>(h_) * w_;
    off_[0] = std::move(off_x);
    off_[1] = std::move(off_y);
    for (int c = 0; c < 2; ++c) {
      range_[c].resize(n * s_);
      for (std::size_t i = 0; i < n; ++i)
        for (int l = 0; l < s_; ++l) range_[c][i * s_ + l] = static_cast<float>(p_.eta * std::abs(off_[c][i] + l - r_));
      spatial_[c].assign(n * 4 * s_, 0.0f);
      dual_[c].assign(n * s_, 0.0f);
    }
    buf_.resize(s_);
  }

  static DualLayerBp from_grids(const DescriptorGrid& a, const DescriptorGrid& b, int radius, std::vector<int> off_x,
                                std::vector<int> off_y, const SiftFlowParams& p) {
    const int s = 2 * radius + 1;
    std::vector<float> data(static_cast<std::size_t>(a.height) * a.width * s * s);
    for (int y = 0; y < a.height; ++y)
      for (int x = 0; x < a.width; ++x) {
        const std::size_t i = static_cast<std::size_t>(y) * a.width + x;
        float* d = data.data() + i * s * s;
        for (int j = 0; j < s; ++j)
          for (int k = 0; k < s; ++k)
            d[j * s + k] = static_cast<float>(descriptor_cost(a, b, y, x, off_x[i] + k - radius, off_y[i] + j - radius, p));
      }
    return DualLayerBp(a.height, a.width, radius, std::move(off_x), std::move(off_y), std::move(data), p);
  }

  /// Runs the schedule and returns the lowest-energy labelling seen.
  /// `hierarchy` coarser message-passing problems (2x2 data sums) are
  /// solved first and their messages seed this one.
  DisplacementField run(int iterations, int hierarchy) {
    const std::size_t n = static_cast<std::size_t>(h_) * w_;
    std::vector<int> lab[2] = {std::vector<int>(n), std::vector<int>(n)};
    DisplacementField best(h_, w_);
    double best_energy = std::numeric_limits<double>::infinity();
    if (hierarchy > 0 && std::min(h_, w_) >= 4 && uniform_offsets()) {
      DualLayerBp parent = coarser();
      parent.run(kHierarchyIterations, hierarchy - 1);
      adopt_messages(parent);
    } else {
      // Without a coarser start the displacement prior, amplified around
      // grid loops, would lock the field before any data arrives.
      for (std::size_t p = 0; p < n; ++p) {
        send_dual(p, 0);
        send_dual(p, 1);
      }
    }
    for (int count = 0; count < iterations; ++count) {
      sweep(count);
      for (int c = 0; c < 2; ++c) decode(c, lab[c]);
      const double e = labelling_energy(lab[0], lab[1]);
      if (e < best_energy) {
        best_energy = e;
        for (std::size_t i = 0; i < n; ++i) {
          best.dx[i] = off_[0][i] + lab[0][i] - r_;
          best.dy[i] = off_[1][i] + lab[1][i] - r_;
        }
      }
    }
    return best;
  }

 private:
  static constexpr int kHierarchyIterations = 20;

  bool uniform_offsets() const {
    for (int c = 0; c < 2; ++c)
      if (std::any_of(off_[c].begin(), off_[c].end(), [&](int o) { return o != off_[c][0]; })) return false;
    return true;
  }

  DualLayerBp coarser() const {
    const int ch = (h_ + 1) / 2, cw = (w_ + 1) / 2, ss = s_ * s_;
    const std::size_t cn = static_cast<std::size_t>(ch) * cw;
    std::vector<float> data(cn * ss, 0.0f);
    for (int y = 0; y < h_; ++y)
      for (int x = 0; x < w_; ++x) {
        const float* src = data_.data() + idx(x, y) * ss;
        float* dst = data.data() + (static_cast<std::size_t>(y / 2) * cw + x / 2) * ss;
        for (int l = 0; l < ss; ++l) dst[l] += src[l];
      }
    return DualLayerBp(ch, cw, r_, std::vector<int>(cn, off_[0][0]), std::vector<int>(cn, off_[1][0]),
                       std::move(data), p_);
  }

  void adopt_messages(const DualLayerBp& parent) {
    for (int y = 0; y < h_; ++y)
      for (int x = 0; x < w_; ++x) {
        const std::size_t p = idx(x, y), q = static_cast<std::size_t>(y / 2) * parent.w_ + x / 2;
        for (int c = 0; c < 2; ++c) {
          std::copy_n(parent.spatial_[c].data() + q * 4 * s_, 4 * s_, spatial_[c].data() + p * 4 * s_);
          std::copy_n(parent.dual_[c].data() + q * s_, s_, dual_[c].data() + p * s_);
        }
      }
  }

  std::size_t idx(int x, int y) const { return static_cast<std::size_t>(y) * w_ + x; }
  float* spatial(int c, std::size_t node, int slot) { return spatial_[c].data() + (node * 4 + slot) * s_; }

  void sweep(int count) {
    const int c = count % 2;
    const bool dual = count % 8 < 4;
    if (count % 4 < 2) {
      for (int y = 0; y < h_; ++y)
        for (int x = 0; x < w_; ++x) {
          send_spatial(x, y, c, 0);
          send_spatial(x, y, c, 2);
          if (dual) send_dual(idx(x, y), c);
        }
    } else {
      for (int y = h_ - 1; y >= 0; --y)
        for (int x = w_ - 1; x >= 0; --x) {
          send_spatial(x, y, c, 1);
          send_spatial(x, y, c, 3);
          if (dual) send_dual(idx(x, y), c);
        }
    }
  }

  // Direction 0 right, 1 left, 2 down, 3 up. The message lands in slot
  // `dir` of the receiver, so slot 0 holds what came from the left, etc.
  void send_spatial(int x, int y, int c, int dir) {
    int qx = x, qy = y;
    switch (dir) {
      case 0: if (x == w_ - 1) return; ++qx; break;
      case 1: if (x == 0) return; --qx; break;
      case 2: if (y == h_ - 1) return; ++qy; break;
      default: if (y == 0) return; --qy; break;
    }
    static constexpr int kOpposite[4] = {1, 0, 3, 2};
    const std::size_t p = idx(x, y), q = idx(qx, qy);
    const float* du = dual_[c].data() + p * s_;
    const float* rg = range_[c].data() + p * s_;
    for (int l = 0; l < s_; ++l) buf_[l] = du[l] + rg[l];
    for (int slot = 0; slot < 4; ++slot) {
      if (slot == kOpposite[dir]) continue;
      const float* m = spatial(c, p, slot);
      for (int l = 0; l < s_; ++l) buf_[l] += m[l];
    }
    const float alpha = static_cast<float>(p_.alpha);
    const float cap = *std::min_element(buf_.begin(), buf_.end()) + static_cast<float>(p_.smooth_truncation);
    for (int l = 1; l < s_; ++l) buf_[l] = std::min(buf_[l], buf_[l - 1] + alpha);
    for (int l = s_ - 2; l >= 0; --l) buf_[l] = std::min(buf_[l], buf_[l + 1] + alpha);

    const int shift = off_[c][q] - off_[c][p];
    float* msg = spatial(c, q, dir);
    for (int l = 0; l < s_; ++l) {
      const int i = shift + l - r_;
      const int ic = std::clamp(i, -r_, r_);
      msg[l] = std::min(buf_[ic + r_] + alpha * static_cast<float>(std::abs(i - ic)), cap);
    }
    const float mn = *std::min_element(msg, msg + s_);
    for (int l = 0; l < s_; ++l) msg[l] -= mn;
  }

  void send_dual(std::size_t p, int c) {
    const float* rg = range_[c].data() + p * s_;
    for (int l = 0; l < s_; ++l) buf_[l] = rg[l];
    for (int slot = 0; slot < 4; ++slot) {
      const float* m = spatial(c, p, slot);
      for (int l = 0; l < s_; ++l) buf_[l] += m[l];
    }
    const float* d = data_.data() + p * s_ * s_;
    float* msg = dual_[1 - c].data() + p * s_;
    for (int l = 0; l < s_; ++l) {
      float best = std::numeric_limits<float>::infinity();
      for (int k = 0; k < s_; ++k) {
        // data is indexed [v][u]; plane 0 is u.
        const float cost = c == 0 ? d[l * s_ + k] : d[k * s_ + l];
        best = std::min(best, buf_[k] + cost);
      }
      msg[l] = best;
    }
    const float mn = *std::min_element(msg, msg + s_);
    for (int l = 0; l < s_; ++l) msg[l] -= mn;
  }

  void decode(int c, std::vector<int>& lab) {
    for (std::size_t p = 0; p < lab.size(); ++p) {
      const float* du = dual_[c].data() + p * s_;
      const float* rg = range_[c].data() + p * s_;
      int arg = 0;
      float best = std::numeric_limits<float>::infinity();
      for (int l = 0; l < s_; ++l) {
        float b = du[l] + rg[l];
        for (int slot = 0; slot < 4; ++slot) b += spatial(c, p, slot)[l];
        if (b < best) {
          best = b;
          arg = l;
        }
      }
      lab[p] = arg;
    }
  }

  double labelling_energy(const std::vector<int>& lu, const std::vector<int>& lv) const {
    double e = 0.0;
    for (int y = 0; y < h_; ++y)
      for (int x = 0; x < w_; ++x) {
        const std::size_t p = idx(x, y);
        const int u = off_[0][p] + lu[p] - r_, v = off_[1][p] + lv[p] - r_;
        e += data_[p * s_ * s_ + lv[p] * s_ + lu[p]] + p_.eta * (std::abs(u) + std::abs(v));
        if (x + 1 < w_) e += smooth(p, idx(x + 1, y), lu, lv);
        if (y + 1 < h_) e += smooth(p, idx(x, y + 1), lu, lv);
      }
    return e;
  }

  double smooth(std::size_t p, std::size_t q, const std::vector<int>& lu, const std::vector<int>& lv) const {
    const int du = (off_[0][p] + lu[p]) - (off_[0][q] + lu[q]);
    const int dv = (off_[1][p] + lv[p]) - (off_[1][q] + lv[q]);
    return std::min(p_.alpha * std::abs(du), p_.smooth_truncation) + std::min(p_.alpha * std::abs(dv), p_.smooth_truncation);
  }

  int h_, w_, r_, s_;
  const SiftFlowParams& p_;
  std::vector<float> data_;
  std::vector<int> off_[2];
  std::vector<float> range_[2];
  std::vector<float> spatial_[2];
  std::vector<float> dual_[2];
  std::vector<float> buf_;
};

int level_count(int h, int w, int min_size) {
  int levels = 1;
  while (std::min((h + 1) / 2, (w + 1) / 2) >= min_size) {
    h = (h + 1) / 2;
    w = (w + 1) / 2;
    ++levels;
  }
  return levels;
}

// Twice the bilinearly interpolated coarse displacement, fine pixel 2i
// sitting on coarse pixel i.
std::vector<int> propagate(const std::vector<int>& coarse, int ch, int cw, int h, int w) {
  std::vector<int> out(static_cast<std::size_t>(h) * w);
  for (int y = 0; y < h; ++y) {
    const int y0 = std::min(y / 2, ch - 1), y1 = std::min(y0 + (y % 2), ch - 1);
    for (int x = 0; x < w; ++x) {
      const int x0 = std::min(x / 2, cw - 1), x1 = std::min(x0 + (x % 2), cw - 1);
      const long sum = static_cast<long>(coarse[static_cast<std::size_t>(y0) * cw + x0]) +
                       coarse[static_cast<std::size_t>(y0) * cw + x1] + coarse[static_cast<std::size_t>(y1) * cw + x0] +
                       coarse[static_cast<std::size_t>(y1) * cw + x1];
      out[static_cast<std::size_t>(y) * w + x] = static_cast<int>(std::lround(sum / 2.0));
    }
  }
  return out;
}

}  // namespace

DescriptorGrid dense_sift(const ImagePlane& img, const SiftParams& params) {
  const int cs = params.cell_size;
  if (cs < 1) throw ParameterError("dense_sift: cell size must be >= 1");
  if (img.height < kCells * cs || img.width < kCells * cs) {
    std::ostringstream os;
    os << "dense_sift: image " << img.height << "x" << img.width << " is smaller than the " << kCells * cs << "x"
       << kCells * cs << " descriptor window";
    throw ShapeError(os.str());
  }
  const ImagePlane gray = to_gray(img);
  const int h = gray.height, w = gray.width;
  const std::size_t n = gray.pixel_count();

  std::vector<std::vector<float>> planes(kBins, std::vector<float>(n, 0.0f));
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const float gx = 0.5f * (gray.at(y, std::min(x + 1, w - 1)) - gray.at(y, std::max(x - 1, 0)));
      const float gy = 0.5f * (gray.at(std::min(y + 1, h - 1), x) - gray.at(std::max(y - 1, 0), x));
      const float mag = std::sqrt(gx * gx + gy * gy);
      if (mag == 0.0f) continue;
      double theta = std::atan2(static_cast<double>(gy), static_cast<double>(gx));
      if (theta < 0) theta += 2 * std::numbers::pi;
      const double pos = theta / (2 * std::numbers::pi) * kBins;
      const int b0 = static_cast<int>(std::floor(pos)) % kBins;
      const float frac = static_cast<float>(pos - std::floor(pos));
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      planes[b0][i] += mag * (1.0f - frac);
      planes[(b0 + 1) % kBins][i] += mag * frac;
    }
  }
  for (auto& p : planes) p = triangle_pool(p, h, w, cs);

  int offsets[kCells];
  for (int j = 0; j < kCells; ++j) offsets[j] = static_cast<int>(std::floor((j - (kCells - 1) / 2.0) * cs));

  DescriptorGrid out{h, w, std::vector<float>(n * kSiftDim)};
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      float* d = out.at(y, x);
      for (int cy = 0; cy < kCells; ++cy) {
        const std::size_t row = static_cast<std::size_t>(std::clamp(y + offsets[cy], 0, h - 1)) * w;
        for (int cx = 0; cx < kCells; ++cx) {
          const std::size_t at = row + std::clamp(x + offsets[cx], 0, w - 1);
          for (int b = 0; b < kBins; ++b) d[(cy * kCells + cx) * kBins + b] = planes[b][at];
        }
      }
      normalize_descriptor(d);
    }
  }
  return out;
}

DescriptorGrid downsample_descriptors(const DescriptorGrid& g) {
  if (g.height < 2 || g.width < 2) throw ShapeError("downsample_descriptors: grid must be at least 2x2");
  std::vector<float> rows;
  blur_rows(g.data, rows, g.height, g.width, kSiftDim);
  const int oh = (g.height + 1) / 2, ow = (g.width + 1) / 2;
  static constexpr float k[5] = {1 / 16.f, 4 / 16.f, 6 / 16.f, 4 / 16.f, 1 / 16.f};
  DescriptorGrid out{oh, ow, std::vector<float>(static_cast<std::size_t>(oh) * ow * kSiftDim, 0.0f)};
  for (int y = 0; y < oh; ++y) {
    for (int x = 0; x < ow; ++x) {
      float* dst = out.at(y, x);
      for (int t = -2; t <= 2; ++t) {
        const int yy = std::clamp(2 * y + t, 0, g.height - 1);
        const float* src = rows.data() + (static_cast<std::size_t>(yy) * g.width + 2 * x) * kSiftDim;
        for (int c = 0; c < kSiftDim; ++c) dst[c] += k[t + 2] * src[c];
      }
    }
  }
  return out;
}

double sift_flow_energy(const DescriptorGrid& a, const DescriptorGrid& b, const DisplacementField& f,
                        const SiftFlowParams& p) {
  if (f.height != a.height || f.width != a.width) throw ShapeError("sift_flow_energy: field and grid differ in size");
  double e = 0.0;
  auto smooth = [&](std::size_t i, std::size_t j) {
    return std::min(p.alpha * std::abs(f.dx[i] - f.dx[j]), p.smooth_truncation) +
           std::min(p.alpha * std::abs(f.dy[i] - f.dy[j]), p.smooth_truncation);
  };
  for (int y = 0; y < a.height; ++y)
    for (int x = 0; x < a.width; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * a.width + x;
      e += descriptor_cost(a, b, y, x, f.dx[i], f.dy[i], p) + p.eta * (std::abs(f.dx[i]) + std::abs(f.dy[i]));
      if (x + 1 < a.width) e += smooth(i, i + 1);
      if (y + 1 < a.height) e += smooth(i, i + a.width);
    }
  return e;
}

int max_displacement(int height, int width, const SiftFlowParams& p) {
  const int levels = level_count(height, width, p.min_level_size);
  const int scale = 1 << (levels - 1);
  return p.top_radius * scale + p.radius * (scale - 1);
}

DisplacementField sift_flow_match(const DescriptorGrid& a, const DescriptorGrid& b, const SiftFlowParams& p) {
  if (a.height != b.height || a.width != b.width) {
    std::ostringstream os;
    os << "sift_flow_match: grids are " << a.height << "x" << a.width << " and " << b.height << "x" << b.width;
    throw ShapeError(os.str());
  }
  if (a.height < 1 || a.width < 1) throw ParameterError("sift_flow_match: empty descriptor grid");
  if (p.top_radius < 0 || p.radius < 0 || p.iterations < 1 || p.hierarchy < 0) throw ParameterError("sift_flow_match: invalid parameters");

  const int levels = level_count(a.height, a.width, p.min_level_size);
  std::vector<DescriptorGrid> pa, pb;
  pa.reserve(levels - 1);
  pb.reserve(levels - 1);
  for (int l = 1; l < levels; ++l) {
    pa.push_back(downsample_descriptors(l == 1 ? a : pa.back()));
    pb.push_back(downsample_descriptors(l == 1 ? b : pb.back()));
  }
  auto grid_a = [&](int l) -> const DescriptorGrid& { return l == 0 ? a : pa[l - 1]; };
  auto grid_b = [&](int l) -> const DescriptorGrid& { return l == 0 ? b : pb[l - 1]; };

  DisplacementField field;
  for (int l = levels - 1; l >= 0; --l) {
    const DescriptorGrid& ga = grid_a(l);
    const std::size_t n = static_cast<std::size_t>(ga.height) * ga.width;
    std::vector<int> ox(n, 0), oy(n, 0);
    int radius = p.top_radius;
    if (l != levels - 1) {
      ox = propagate(field.dx, field.height, field.width, ga.height, ga.width);
      oy = propagate(field.dy, field.height, field.width, ga.height, ga.width);
      radius = p.radius;
    }
    DualLayerBp bp = DualLayerBp::from_grids(ga, grid_b(l), radius, std::move(ox), std::move(oy), p);
    field = bp.run(p.iterations, p.hierarchy);
    // Free the coarser grids as soon as they are no longer needed.
    if (l >= 1) {
      pa[l - 1] = {};
      pb[l - 1] = {};
    }
  }

  const DisplacementField zero(a.height, a.width);
  if (sift_flow_energy(a, b, zero, p) < sift_flow_energy(a, b, field, p)) return zero;
  return field;
}

std::vector<std::uint8_t> encode_displacement(const DisplacementField& f) {
  DsflRecord r;
  r.version = 2;
  r.direction = FlowDirection::forward;
  r.semantics = DsflSemantics::displacement;
  r.height = static_cast<std::uint32_t>(f.height);
  r.width = static_cast<std::uint32_t>(f.width);
  r.pairs.resize(2 * f.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    r.pairs[2 * i] = static_cast<float>(f.dx[i]);
    r.pairs[2 * i + 1] = static_cast<float>(f.dy[i]);
  }
  return encode_dsfl(r);
}

DisplacementField decode_displacement(std::span<const std::uint8_t> bytes) {
  const DsflRecord r = decode_dsfl(bytes);
  if (r.semantics != DsflSemantics::displacement)
    throw FormatError("DSFL field 'semantics': expected displacements, got absolute coordinates");
  DisplacementField f(static_cast<int>(r.height), static_cast<int>(r.width));
  for (std::size_t i = 0; i < f.size(); ++i) {
    f.dx[i] = static_cast<int>(std::lround(r.pairs[2 * i]));
    f.dy[i] = static_cast<int>(std::lround(r.pairs[2 * i + 1]));
  }
  return f;
}

void write_displacement(const std::filesystem::path& path, const DisplacementField& field) {
  write_file(path, encode_displacement(field));
}

}  // namespace docrect
