#include "docrect/rectnet.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "docrect/error.hpp"
#include "docrect/layers.hpp"

namespace docrect {

namespace {

struct BlockSpec {
  int in, out, stride;
};

// One residual block per 3x3 row of the encoder table.
constexpr BlockSpec kBlocks[] = {{64, 64, 1}, {64, 64, 1}, {64, 96, 1}, {96, 96, 2}, {96, 128, 1}, {128, 128, 2}};

constexpr int kUpCells = kFeatureStride * kFeatureStride;  // 64
constexpr int kZChannels = kHiddenDim - 2;

std::string block_name(int i) { return "encoder.block" + std::to_string(i + 1); }

void add_conv(LayerManifest& m, const std::string& name, int in, int out, int k) {
  m.push_back({name + ".weight", {out, in, k, k}});
  m.push_back({name + ".bias", {out}});
}

LayerManifest build_manifest() {
  LayerManifest m;
  add_conv(m, "encoder.stem", 3, 64, 7);
  for (int i = 0; i < 6; ++i) {
    const auto& b = kBlocks[i];
    add_conv(m, block_name(i) + ".conv1", b.in, b.out, 3);
    add_conv(m, block_name(i) + ".conv2", b.out, b.out, 3);
    if (b.in != b.out || b.stride != 1) add_conv(m, block_name(i) + ".proj", b.in, b.out, 1);
  }
  add_conv(m, "encoder.head", 128, 2 * kHiddenDim, 1);
  add_conv(m, "gen.q1", kHiddenDim, 224, 1);
  add_conv(m, "gen.q2", 224, 192, 3);
  add_conv(m, "gen.v1", 2, 128, 7);
  add_conv(m, "gen.v2", 128, 64, 3);
  add_conv(m, "gen.z", 192 + 64, kZChannels, 3);
  for (const char* g : {"gru.z", "gru.r", "gru.h"}) add_conv(m, g, 3 * kHiddenDim, kHiddenDim, 3);
  add_conv(m, "head.conv1", kHiddenDim, 256, 3);
  add_conv(m, "head.conv2", 256, 2, 3);
  add_conv(m, "upsample.conv1", kHiddenDim, 256, 3);
  add_conv(m, "upsample.conv2", 256, kUpCells * 9, 1);
  return m;
}

FeatureMap relu(FeatureMap m) {
  relu_inplace(m);
  return m;
}

FeatureMap flow_channels(const FlowField& f) {
  FeatureMap out(2, f.height, f.width);
  std::copy(f.u.begin(), f.u.end(), out.plane(0));
  std::copy(f.v.begin(), f.v.end(), out.plane(1));
  return out;
}

void require_hidden(const FeatureMap& h, const char* what) {
  if (h.channels != kHiddenDim) {
    std::ostringstream os;
    os << what << ": hidden state has " << h.channels << " channels, expected " << kHiddenDim;
    throw ShapeError(os.str());
  }
}

}  // namespace

const LayerManifest& rectnet_manifest() {
  static const LayerManifest manifest = build_manifest();
  return manifest;
}

EncoderOutput encode(const ImagePlane& img, const WeightStore& w) {
  if (img.height % kFeatureStride != 0 || img.width % kFeatureStride != 0 || img.empty()) {
    std::ostringstream os;
    os << "encode: input " << img.height << "x" << img.width << " is not divisible by " << kFeatureStride;
    throw ShapeError(os.str());
  }
  FeatureMap x = to_feature_map(img);
  if (x.channels == 1) x = concat_channels({&x, &x, &x});
  x = conv2d(x, "encoder.stem", 2, w);
  for (int i = 0; i < 6; ++i) {
    const auto& b = kBlocks[i];
    const std::string name = block_name(i);
    FeatureMap act = relu(x);
    FeatureMap y = conv2d(act, name + ".conv1", b.stride, w);
    relu_inplace(y);
    y = conv2d(y, name + ".conv2", 1, w);
    const bool project = b.in != b.out || b.stride != 1;
    const FeatureMap skip = project ? conv2d(act, name + ".proj", b.stride, w) : std::move(x);
    for (std::size_t j = 0; j < y.data.size(); ++j) y.data[j] += skip.data[j];
    x = std::move(y);
  }
  relu_inplace(x);
  FeatureMap head = conv2d(x, "encoder.head", 1, w);
  EncoderOutput out{slice_channels(head, 0, kHiddenDim), slice_channels(head, kHiddenDim, kHiddenDim)};
  relu_inplace(out.c0);
  tanh_inplace(out.h0);
  return out;
}

FeatureMap gen_rect_features(const FeatureMap& c0, const FlowField& flow_m, const WeightStore& w) {
  if (flow_m.height != c0.height || flow_m.width != c0.width || flow_m.source_height != c0.height ||
      flow_m.source_width != c0.width) {
    std::ostringstream os;
    os << "gen_rect_features: flow " << flow_m.height << "x" << flow_m.width << " (source " << flow_m.source_height
       << "x" << flow_m.source_width << ") does not match features " << c0.height << "x" << c0.width;
    throw ShapeError(os.str());
  }
  const FeatureMap warped = warp_features(c0, flow_m);
  FeatureMap q = conv2d(warped, "gen.q1", 1, w);
  relu_inplace(q);
  q = conv2d(q, "gen.q2", 1, w);
  relu_inplace(q);

  const FeatureMap fm = flow_channels(flow_m);
  FeatureMap v = conv2d(fm, "gen.v1", 1, w);
  relu_inplace(v);
  v = conv2d(v, "gen.v2", 1, w);
  relu_inplace(v);

  FeatureMap z = conv2d(concat_channels({&q, &v}), "gen.z", 1, w);
  relu_inplace(z);
  return concat_channels({&z, &fm});
}

HiddenState convgru_step(const HiddenState& h, const FeatureMap& x, const WeightStore& w) {
  require_hidden(h, "convgru_step");
  if (x.channels != 2 * kHiddenDim || x.height != h.height || x.width != h.width) {
    std::ostringstream os;
    os << "convgru_step: input is " << x.channels << "x" << x.height << "x" << x.width << ", expected "
       << 2 * kHiddenDim << "x" << h.height << "x" << h.width;
    throw ShapeError(os.str());
  }
  const FeatureMap hx = concat_channels({&h, &x});
  FeatureMap z = conv2d(hx, "gru.z", 1, w);
  FeatureMap r = conv2d(hx, "gru.r", 1, w);
  sigmoid_inplace(z);
  sigmoid_inplace(r);

  FeatureMap rh = h;
  for (std::size_t i = 0; i < rh.data.size(); ++i) rh.data[i] *= r.data[i];
  FeatureMap cand = conv2d(concat_channels({&rh, &x}), "gru.h", 1, w);
  tanh_inplace(cand);

  HiddenState out(h.channels, h.height, h.width);
  constexpr float lim = 1.0f - 0x1p-24f;
  for (std::size_t i = 0; i < out.data.size(); ++i) {
    const float v = (1.0f - z.data[i]) * h.data[i] + z.data[i] * cand.data[i];
    out.data[i] = std::clamp(v, -lim, lim);
  }
  return out;
}

ResidualFlow predict_residual(const HiddenState& h, const WeightStore& w) {
  require_hidden(h, "predict_residual");
  FeatureMap t = conv2d(h, "head.conv1", 1, w);
  relu_inplace(t);
  t = conv2d(t, "head.conv2", 1, w);
  if (t.channels != 2) throw ManifestError("tensor 'head.conv2.weight' must produce 2 channels");
  ResidualFlow out(h.height, h.width);
  std::copy(t.plane(0), t.plane(0) + t.plane_size(), out.du.begin());
  std::copy(t.plane(1), t.plane(1) + t.plane_size(), out.dv.begin());
  return out;
}

FeatureMap upsample_logits(const HiddenState& h, const WeightStore& w) {
  require_hidden(h, "upsample_logits");
  FeatureMap t = conv2d(h, "upsample.conv1", 1, w);
  relu_inplace(t);
  return conv2d(t, "upsample.conv2", 1, w);
}

ResidualFlow convex_upsample(const ResidualFlow& d, const FeatureMap& logits) {
  if (logits.channels != 9 * kUpCells || logits.height != d.height || logits.width != d.width) {
    std::ostringstream os;
    os << "convex_upsample: logits are " << logits.channels << "x" << logits.height << "x" << logits.width
       << ", expected " << 9 * kUpCells << "x" << d.height << "x" << d.width;
    throw ShapeError(os.str());
  }
  const int h = d.height, wd = d.width, s = kFeatureStride;
  ResidualFlow out(h * s, wd * s);
  float nu[9], nv[9], wt[9];
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < wd; ++x) {
      for (int k = 0; k < 9; ++k) {
        const int yy = std::clamp(y + k / 3 - 1, 0, h - 1);
        const int xx = std::clamp(x + k % 3 - 1, 0, wd - 1);
        nu[k] = d.du[static_cast<std::size_t>(yy) * wd + xx];
        nv[k] = d.dv[static_cast<std::size_t>(yy) * wd + xx];
      }
      for (int sy = 0; sy < s; ++sy) {
        for (int sx = 0; sx < s; ++sx) {
          const int cell = sy * s + sx;
          float mx = -INFINITY;
          for (int k = 0; k < 9; ++k) {
            wt[k] = logits.at(k * kUpCells + cell, y, x);
            mx = std::max(mx, wt[k]);
          }
          float sum = 0.0f;
          for (int k = 0; k < 9; ++k) sum += (wt[k] = std::exp(wt[k] - mx));
          // Mixing offsets from the centre keeps constant fields exact.
          float au = 0.0f, av = 0.0f;
          for (int k = 0; k < 9; ++k) {
            const float wk = wt[k] / sum;
            au += wk * (nu[k] - nu[4]);
            av += wk * (nv[k] - nv[4]);
          }
          const std::size_t o = static_cast<std::size_t>(y * s + sy) * out.width + (x * s + sx);
          out.du[o] = static_cast<float>(s) * (nu[4] + au);
          out.dv[o] = static_cast<float>(s) * (nv[4] + av);
        }
      }
    }
  }
  return out;
}

ResidualFlow learnable_upsample(const ResidualFlow& delta_m, const HiddenState& h, const WeightStore& w) {
  if (delta_m.height != h.height || delta_m.width != h.width) throw ShapeError("learnable_upsample: residual and hidden state differ in size");
  return convex_upsample(delta_m, upsample_logits(h, w));
}

MaskedImage apply_document_mask(const ImagePlane& img, const ConfidenceMap& conf, float tau) {
  if (!(tau > 0.0f && tau < 1.0f)) throw ParameterError("tau must lie in (0,1), got " + std::to_string(tau));
  if (conf.height != img.height || conf.width != img.width) {
    std::ostringstream os;
    os << "confidence map is " << conf.height << "x" << conf.width << " but the image is " << img.height << "x"
       << img.width;
    throw ShapeError(os.str());
  }
  MaskedImage out{img, Mask{img.height, img.width, std::vector<std::uint8_t>(img.pixel_count(), 0)}};
  for (std::size_t i = 0; i < img.pixel_count(); ++i) {
    const bool keep = conf.data[i] >= tau;
    out.mask.data[i] = keep ? 1 : 0;
    if (!keep)
      for (int c = 0; c < img.channels; ++c) out.image.data[i * img.channels + c] = 0.0f;
  }
  return out;
}

RectifyTrace progressive_rectify(const ImagePlane& img_masked, const ImagePlane& img_original,
                                 const WeightStore& w, int iterations, const IterationObserver& observer,
                                 bool keep_flows) {
  if (iterations < 1) throw ParameterError("iteration count must be >= 1, got " + std::to_string(iterations));
  if (img_masked.height != img_original.height || img_masked.width != img_original.width)
    throw ShapeError("progressive_rectify: masked and original images differ in size");

  const EncoderOutput enc = encode(img_masked, w);
  HiddenState h = enc.h0;
  FlowField flow = identity_flow(img_masked.height, img_masked.width);
  RectifyTrace trace;
  if (keep_flows) trace.flows.reserve(static_cast<std::size_t>(iterations));

  ResidualFlow applied(flow.height, flow.width);
  for (int k = 1; k <= iterations; ++k) {
    const FlowField flow_m = downsample_flow(flow, kFeatureStride);
    const FeatureMap f = gen_rect_features(enc.c0, flow_m, w);
    h = convgru_step(h, concat_channels({&enc.c0, &f}), w);
    const ResidualFlow delta = learnable_upsample(predict_residual(h, w), h, w);
    // Report the increment as actually stored, so f^k - f^{k-1} reproduces it
    // bit for bit.
    for (std::size_t i = 0; i < flow.size(); ++i) {
      const float u = flow.u[i] + delta.du[i];
      const float v = flow.v[i] + delta.dv[i];
      applied.du[i] = u - flow.u[i];
      applied.dv[i] = v - flow.v[i];
      flow.u[i] = u;
      flow.v[i] = v;
    }
    if (observer) observer(k, flow, applied);
    if (keep_flows) trace.flows.push_back(flow);
  }
  if (!keep_flows) trace.flows.push_back(flow);
  trace.rectified = apply_backward_flow(img_original, flow);
  return trace;
}

RectifyResult rectify_image(const ImagePlane& img, const std::optional<ConfidenceMap>& conf, const WeightStore& w,
                            const RectifyOptions& opt) {
  if (img.empty()) throw ParameterError("rectify_image: empty image");
  RectifyResult res;
  ImagePlane masked;
  if (conf) {
    MaskedImage m = apply_document_mask(img, *conf, opt.tau);
    masked = std::move(m.image);
    res.mask = std::move(m.mask);
  } else {
    masked = img;
    res.mask = Mask{img.height, img.width, std::vector<std::uint8_t>(img.pixel_count(), 1)};
  }
  const ImagePlane net_masked = resize_bilinear(masked, kInferenceSize, kInferenceSize);
  const ImagePlane net_original = resize_bilinear(opt.warp_masked ? masked : img, kInferenceSize, kInferenceSize);
  res.trace = progressive_rectify(net_masked, net_original, w, opt.iterations, opt.observer, opt.keep_flows);
  res.flow = resize_flow(res.trace.flows.back(), img.height, img.width, img.height, img.width);
  res.rectified = apply_backward_flow(opt.warp_masked ? masked : img, res.flow);
  return res;
}

}  // namespace docrect
