#include "docrect/flow.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "docrect/error.hpp"

namespace docrect {

const char* to_string(FlowDirection d) {
  return d == FlowDirection::backward ? "backward" : "forward";
}

FlowField::FlowField(int h, int w, FlowDirection dir, int src_h, int src_w)
    : height(h), width(w), direction(dir), source_height(src_h), source_width(src_w) {
  if (h < 1 || w < 1) throw ShapeError("flow field needs at least 1x1 pixels");
  u.assign(size(), 0.0f);
  v.assign(size(), 0.0f);
}

bool ResidualFlow::all_finite() const {
  auto finite = [](float f) { return std::isfinite(f); };
  return std::all_of(du.begin(), du.end(), finite) && std::all_of(dv.begin(), dv.end(), finite);
}

FlowField identity_flow(int height, int width) {
  if (height < 1 || width < 1) throw ParameterError("identity_flow needs height, width >= 1");
  FlowField f(height, width, FlowDirection::backward, height, width);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      f.u[f.index(y, x)] = static_cast<float>(x);
      f.v[f.index(y, x)] = static_cast<float>(y);
    }
  }
  return f;
}

namespace {

struct BilinearTap {
  std::size_t i00, i01, i10, i11;
  float fx, fy;
};

BilinearTap make_tap(int height, int width, float x, float y) {
  if (!std::isfinite(x)) x = 0.0f;
  if (!std::isfinite(y)) y = 0.0f;
  x = std::clamp(x, 0.0f, static_cast<float>(width - 1));
  y = std::clamp(y, 0.0f, static_cast<float>(height - 1));
  const int x0 = static_cast<int>(std::floor(x));
  const int y0 = static_cast<int>(std::floor(y));
  const int x1 = std::min(x0 + 1, width - 1);
  const int y1 = std::min(y0 + 1, height - 1);
  const auto w = static_cast<std::size_t>(width);
  return {y0 * w + x0, y0 * w + x1, y1 * w + x0, y1 * w + x1, x - x0, y - y0};
}

inline float blend(float p00, float p01, float p10, float p11, float fx, float fy) {
  const float top = p00 + (p01 - p00) * fx;
  const float bot = p10 + (p11 - p10) * fx;
  return top + (bot - top) * fy;
}

// Bilinear on a scalar grid, continuing the edge gradient linearly outside.
float sample_extrapolated(const std::vector<float>& grid, int height, int width, double x, double y) {
  auto locate = [](double p, int n, int& i0, double& t) {
    if (n == 1) {
      i0 = 0;
      t = 0.0;
      return;
    }
    i0 = std::clamp(static_cast<int>(std::floor(p)), 0, n - 2);
    t = p - i0;
  };
  int x0, y0;
  double tx, ty;
  locate(x, width, x0, tx);
  locate(y, height, y0, ty);
  const int x1 = std::min(x0 + 1, width - 1);
  const int y1 = std::min(y0 + 1, height - 1);
  auto at = [&](int yy, int xx) { return static_cast<double>(grid[static_cast<std::size_t>(yy) * width + xx]); };
  const double top = at(y0, x0) + (at(y0, x1) - at(y0, x0)) * tx;
  const double bot = at(y1, x0) + (at(y1, x1) - at(y1, x0)) * tx;
  return static_cast<float>(top + (bot - top) * ty);
}

void require_backward(const FlowField& flow, const char* op) {
  if (flow.direction != FlowDirection::backward) {
    std::ostringstream os;
    os << op << ": flow direction must be backward";
    throw SemanticsError(os.str());
  }
}

}  // namespace

float bilinear_sample(std::span<const float> grid, int height, int width, float x, float y) {
  if (height < 1 || width < 1 || grid.size() != static_cast<std::size_t>(height) * width)
    throw ShapeError("bilinear_sample: grid size mismatch");
  const BilinearTap t = make_tap(height, width, x, y);
  return blend(grid[t.i00], grid[t.i01], grid[t.i10], grid[t.i11], t.fx, t.fy);
}

void bilinear_sample(const ImagePlane& plane, float x, float y, std::span<float> out) {
  if (plane.empty()) throw ShapeError("bilinear_sample: empty plane");
  const BilinearTap t = make_tap(plane.height, plane.width, x, y);
  const int c = plane.channels;
  for (int k = 0; k < c; ++k) {
    out[k] = blend(plane.data[t.i00 * c + k], plane.data[t.i01 * c + k], plane.data[t.i10 * c + k],
                   plane.data[t.i11 * c + k], t.fx, t.fy);
  }
}

std::vector<float> bilinear_sample(const ImagePlane& plane, float x, float y) {
  std::vector<float> out(static_cast<std::size_t>(plane.channels));
  bilinear_sample(plane, x, y, out);
  return out;
}

float bilinear_sample(const FeatureMap& map, int channel, float x, float y) {
  if (map.data.empty()) throw ShapeError("bilinear_sample: empty feature map");
  const BilinearTap t = make_tap(map.height, map.width, x, y);
  const float* p = map.plane(channel);
  return blend(p[t.i00], p[t.i01], p[t.i10], p[t.i11], t.fx, t.fy);
}

ImagePlane apply_backward_flow(const ImagePlane& src, const FlowField& flow) {
  require_backward(flow, "apply_backward_flow");
  if (src.empty()) throw ShapeError("apply_backward_flow: empty source image");
  if (flow.source_height != src.height || flow.source_width != src.width) {
    std::ostringstream os;
    os << "apply_backward_flow: flow indexes a " << flow.source_height << "x" << flow.source_width
       << " grid but the source image is " << src.height << "x" << src.width;
    throw SemanticsError(os.str());
  }
  ImagePlane out(flow.height, flow.width, src.channels);
  const int c = src.channels;
  for (int y = 0; y < flow.height; ++y) {
    for (int x = 0; x < flow.width; ++x) {
      const std::size_t i = flow.index(y, x);
      const BilinearTap t = make_tap(src.height, src.width, flow.u[i], flow.v[i]);
      for (int k = 0; k < c; ++k) {
        out.data[i * c + k] = blend(src.data[t.i00 * c + k], src.data[t.i01 * c + k], src.data[t.i10 * c + k],
                                    src.data[t.i11 * c + k], t.fx, t.fy);
      }
    }
  }
  return out;
}

FeatureMap warp_features(const FeatureMap& features, const FlowField& flow) {
  require_backward(flow, "warp_features");
  if (flow.source_height != features.height || flow.source_width != features.width) {
    std::ostringstream os;
    os << "warp_features: flow is in units of a " << flow.source_height << "x" << flow.source_width
       << " grid but the features are " << features.height << "x" << features.width;
    throw SemanticsError(os.str());
  }
  FeatureMap out(features.channels, flow.height, flow.width);
  std::vector<BilinearTap> taps(flow.size());
  for (std::size_t i = 0; i < flow.size(); ++i) taps[i] = make_tap(features.height, features.width, flow.u[i], flow.v[i]);
  for (int c = 0; c < features.channels; ++c) {
    const float* src = features.plane(c);
    float* dst = out.plane(c);
    for (std::size_t i = 0; i < taps.size(); ++i) {
      const BilinearTap& t = taps[i];
      dst[i] = blend(src[t.i00], src[t.i01], src[t.i10], src[t.i11], t.fx, t.fy);
    }
  }
  return out;
}

FlowField downsample_flow(const FlowField& flow, int factor) {
  require_backward(flow, "downsample_flow");
  if (factor < 1) throw ParameterError("downsample_flow: factor must be >= 1");
  const int h = (flow.height + factor - 1) / factor;
  const int w = (flow.width + factor - 1) / factor;
  const int sh = (flow.source_height + factor - 1) / factor;
  const int sw = (flow.source_width + factor - 1) / factor;
  FlowField out(h, w, FlowDirection::backward, sh, sw);
  const float inv = 1.0f / static_cast<float>(factor);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t src = flow.index(y * factor, x * factor);
      out.u[out.index(y, x)] = flow.u[src] * inv;
      out.v[out.index(y, x)] = flow.v[src] * inv;
    }
  }
  return out;
}

FlowField upsample_flow(const FlowField& coarse, int factor, int height, int width) {
  require_backward(coarse, "upsample_flow");
  if (factor < 1) throw ParameterError("upsample_flow: factor must be >= 1");
  if (height < 1 || width < 1) throw ParameterError("upsample_flow: target must be at least 1x1");
  FlowField out(height, width, FlowDirection::backward, coarse.source_height * factor, coarse.source_width * factor);
  const double inv = 1.0 / factor;
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const std::size_t i = out.index(y, x);
      out.u[i] = sample_extrapolated(coarse.u, coarse.height, coarse.width, x * inv, y * inv) * static_cast<float>(factor);
      out.v[i] = sample_extrapolated(coarse.v, coarse.height, coarse.width, x * inv, y * inv) * static_cast<float>(factor);
    }
  }
  return out;
}

FlowField resize_flow(const FlowField& flow, int height, int width, int source_height, int source_width) {
  require_backward(flow, "resize_flow");
  if (height < 1 || width < 1 || source_height < 1 || source_width < 1)
    throw ParameterError("resize_flow: target extents must be at least 1x1");
  FlowField out(height, width, FlowDirection::backward, source_height, source_width);
  const double gx = static_cast<double>(flow.width) / width;
  const double gy = static_cast<double>(flow.height) / height;
  const double sx = static_cast<double>(source_width) / flow.source_width;
  const double sy = static_cast<double>(source_height) / flow.source_height;
  for (int y = 0; y < height; ++y) {
    const double py = (y + 0.5) * gy - 0.5;
    for (int x = 0; x < width; ++x) {
      const double px = (x + 0.5) * gx - 0.5;
      const double u = sample_extrapolated(flow.u, flow.height, flow.width, px, py);
      const double v = sample_extrapolated(flow.v, flow.height, flow.width, px, py);
      out.u[out.index(y, x)] = static_cast<float>((u + 0.5) * sx - 0.5);
      out.v[out.index(y, x)] = static_cast<float>((v + 0.5) * sy - 0.5);
    }
  }
  return out;
}

void update_flow_inplace(FlowField& flow, const ResidualFlow& delta) {
  if (flow.height != delta.height || flow.width != delta.width) {
    std::ostringstream os;
    os << "update_flow: flow is " << flow.height << "x" << flow.width << " but residual is " << delta.height << "x"
       << delta.width;
    throw ShapeError(os.str());
  }
  for (std::size_t i = 0; i < flow.size(); ++i) {
    flow.u[i] += delta.du[i];
    flow.v[i] += delta.dv[i];
  }
}

FlowField update_flow(const FlowField& flow, const ResidualFlow& delta) {
  FlowField out = flow;
  update_flow_inplace(out, delta);
  return out;
}

InversionResult forward_to_backward(const FlowField& forward, const InversionOptions& options) {
  if (forward.direction != FlowDirection::forward)
    throw SemanticsError("forward_to_backward: flow direction must be forward");
  const int th = forward.source_height;
  const int tw = forward.source_width;
  if (th < 1 || tw < 1) throw ShapeError("forward_to_backward: empty target grid");

  const std::size_t n = static_cast<std::size_t>(th) * tw;
  std::vector<double> weight(n, 0.0), sum_u(n, 0.0), sum_v(n, 0.0);
  float min_x = INFINITY, max_x = -INFINITY, min_y = INFINITY, max_y = -INFINITY;

  for (int y0 = 0; y0 < forward.height; ++y0) {
    for (int x0 = 0; x0 < forward.width; ++x0) {
      const std::size_t i = forward.index(y0, x0);
      const float tx = forward.u[i], ty = forward.v[i];
      if (!std::isfinite(tx) || !std::isfinite(ty)) continue;
      min_x = std::min(min_x, tx);
      max_x = std::max(max_x, tx);
      min_y = std::min(min_y, ty);
      max_y = std::max(max_y, ty);
      const double fx = std::floor(tx), fy = std::floor(ty);
      const double ax = tx - fx, ay = ty - fy;
      const int ix = static_cast<int>(fx), iy = static_cast<int>(fy);
      const double wts[4] = {(1 - ax) * (1 - ay), ax * (1 - ay), (1 - ax) * ay, ax * ay};
      const int dx[4] = {0, 1, 0, 1}, dy[4] = {0, 0, 1, 1};
      for (int k = 0; k < 4; ++k) {
        const int px = ix + dx[k], py = iy + dy[k];
        if (wts[k] <= 0.0 || px < 0 || py < 0 || px >= tw || py >= th) continue;
        const std::size_t t = static_cast<std::size_t>(py) * tw + px;
        weight[t] += wts[k];
        sum_u[t] += wts[k] * x0;
        sum_v[t] += wts[k] * y0;
      }
    }
  }

  constexpr double kMinWeight = 1e-3;
  FlowField back(th, tw, FlowDirection::backward, forward.height, forward.width);
  std::vector<std::uint8_t> known(n, 0);
  std::size_t covered = 0;
  for (std::size_t t = 0; t < n; ++t) {
    if (weight[t] > kMinWeight) {
      back.u[t] = static_cast<float>(sum_u[t] / weight[t]);
      back.v[t] = static_cast<float>(sum_v[t] / weight[t]);
      known[t] = 1;
      ++covered;
    }
  }
  InversionResult result;
  result.coverage = static_cast<double>(covered) / static_cast<double>(n);
  const bool collapsed = !(max_x - min_x >= 1e-6f) || !(max_y - min_y >= 1e-6f);
  if (covered == 0 || result.coverage < options.min_coverage || (collapsed && forward.size() > 1)) {
    std::ostringstream os;
    os << "forward_to_backward: degenerate forward flow, coverage " << result.coverage * 100.0 << "% of the "
       << th << "x" << tw << " target grid";
    throw ConversionError(os.str());
  }

  // Jacobi sweeps: each hole with known 4-neighbours takes their mean.
  std::size_t holes = n - covered;
  std::vector<std::uint8_t> next_known = known;
  int sweeps = 0;
  while (holes > 0) {
    if (sweeps == options.max_fill_sweeps) {
      std::ostringstream os;
      os << "forward_to_backward: " << holes << " holes left after " << sweeps << " fill sweeps (coverage "
         << result.coverage * 100.0 << "%)";
      throw ConversionError(os.str());
    }
    ++sweeps;
    for (int y = 0; y < th; ++y) {
      for (int x = 0; x < tw; ++x) {
        const std::size_t t = static_cast<std::size_t>(y) * tw + x;
        if (known[t]) continue;
        double su = 0.0, sv = 0.0;
        int cnt = 0;
        auto take = [&](int yy, int xx) {
          if (xx < 0 || yy < 0 || xx >= tw || yy >= th) return;
          const std::size_t s = static_cast<std::size_t>(yy) * tw + xx;
          if (!known[s]) return;
          su += back.u[s];
          sv += back.v[s];
          ++cnt;
        };
        take(y, x - 1);
        take(y, x + 1);
        take(y - 1, x);
        take(y + 1, x);
        if (cnt > 0) {
          back.u[t] = static_cast<float>(su / cnt);
          back.v[t] = static_cast<float>(sv / cnt);
          next_known[t] = 1;
          --holes;
        }
      }
    }
    known = next_known;
  }
  result.fill_sweeps = sweeps;
  result.backward = std::move(back);
  return result;
}

}  // namespace docrect
