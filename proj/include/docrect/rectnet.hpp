#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "docrect/flow.hpp"
#include "docrect/image.hpp"
#include "docrect/tensor.hpp"
#include "docrect/weights.hpp"

namespace docrect {

/// Width of c0, h_k and F_k.
inline constexpr int kHiddenDim = 128;
/// Spatial reduction between the network input and its feature grid.
inline constexpr int kFeatureStride = 8;
/// Side of the square image the network runs on.
inline constexpr int kInferenceSize = 288;

/// Every tensor the network reads, with its shape. Convolutions are stored as
/// `<layer>.weight` [out, in, kh, kw] and `<layer>.bias` [out].
const LayerManifest& rectnet_manifest();

struct EncoderOutput {
  FeatureMap c0;   // 128 channels, ReLU
  HiddenState h0;  // 128 channels, tanh
};

/// Stem conv, six pre-activation residual blocks and a 1x1 head; the head's
/// 256 channels are split into c0 and h0. Throws ShapeError unless both
/// sides are divisible by 8.
EncoderOutput encode(const ImagePlane& img, const WeightStore& weights);

/// F_k = concat(Z(concat(Q(warp(c0, flow_m)), V(flow_m))), flow_m).
/// flow_m is a backward flow on the feature grid, in feature-grid pixels.
FeatureMap gen_rect_features(const FeatureMap& c0, const FlowField& flow_m, const WeightStore& weights);

/// One ConvGRU update; x_k must carry 2 * 128 channels.
HiddenState convgru_step(const HiddenState& h_prev, const FeatureMap& x_k, const WeightStore& weights);

/// Two-conv residual head, output in feature-grid pixels.
ResidualFlow predict_residual(const HiddenState& h, const WeightStore& weights);

/// Logits for the convex upsampler: 8*8*9 channels on the feature grid.
FeatureMap upsample_logits(const HiddenState& h, const WeightStore& weights);

/// Each of the 8x8 sub-pixels of a coarse cell is a softmax-weighted mix of
/// the cell's 3x3 coarse neighbourhood (edges replicated), scaled by 8.
/// Logit channel (k*64 + sy*8 + sx) weights neighbour k = (dy+1)*3 + (dx+1)
/// for sub-pixel (sy, sx).
ResidualFlow convex_upsample(const ResidualFlow& delta_m, const FeatureMap& logits);

ResidualFlow learnable_upsample(const ResidualFlow& delta_m, const HiddenState& h, const WeightStore& weights);

struct MaskedImage {
  ImagePlane image;
  Mask mask;
};

/// Mask = conf >= tau; image zeroed outside the mask.
MaskedImage apply_document_mask(const ImagePlane& img, const ConfidenceMap& conf, float tau);

/// Called after iteration k (1-based) with the updated flow and the increment
/// that produced it.
using IterationObserver = std::function<void(int k, const FlowField& flow, const ResidualFlow& delta)>;

struct RectifyTrace {
  std::vector<FlowField> flows;  // f^1 .. f^K at the input resolution
  ImagePlane rectified;
};

/// K refinement iterations starting from the identity flow. The returned
/// image is img_original warped by f^K. When keep_flows is false only f^K is
/// stored, so memory does not grow with K.
RectifyTrace progressive_rectify(const ImagePlane& img_masked, const ImagePlane& img_original,
                                 const WeightStore& weights, int iterations, const IterationObserver& observer = {},
                                 bool keep_flows = true);

struct RectifyOptions {
  int iterations = 12;
  float tau = 0.5f;
  /// Warp the masked image instead of the original one.
  bool warp_masked = false;
  bool keep_flows = true;
  IterationObserver observer;
};

struct RectifyResult {
  RectifyTrace trace;  // flows on the 288x288 inference grid
  FlowField flow;      // f^K rescaled to the input image
  ImagePlane rectified;
  Mask mask;
};

/// Full pipeline for an arbitrary-size image: optional masking, resize to
/// 288x288, progressive_rectify, then the final flow is rescaled to the
/// input size and applied to the full-resolution image.
RectifyResult rectify_image(const ImagePlane& img, const std::optional<ConfidenceMap>& conf,
                            const WeightStore& weights, const RectifyOptions& options);

}  // namespace docrect
