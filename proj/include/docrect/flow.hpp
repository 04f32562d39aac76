#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "docrect/image.hpp"
#include "docrect/tensor.hpp"

namespace docrect {

enum class FlowDirection : std::uint8_t { backward = 0, forward = 1 };

const char* to_string(FlowDirection d);

/// Dense map of absolute pixel coordinates. (0,0) is the centre of the
/// top-left pixel, u runs along the width axis and v along the height axis.
///
/// A backward flow lives on the output (rectified) grid and stores, for each
/// output pixel, where to sample the source (distorted) image. A forward flow
/// lives on the distorted grid and stores where each pixel lands in the
/// rectified image. source_height/source_width give the extent of the grid
/// the coordinates index into.
struct FlowField {
  int height = 0;
  int width = 0;
  FlowDirection direction = FlowDirection::backward;
  int source_height = 0;
  int source_width = 0;
  std::vector<float> u;
  std::vector<float> v;

  FlowField() = default;
  FlowField(int h, int w, FlowDirection dir, int src_h, int src_w);

  std::size_t size() const { return static_cast<std::size_t>(height) * width; }
  std::size_t index(int y, int x) const { return static_cast<std::size_t>(y) * width + x; }
};

/// Per-pixel displacement (in pixels of the grid it is applied to).
struct ResidualFlow {
  int height = 0;
  int width = 0;
  std::vector<float> du;
  std::vector<float> dv;

  ResidualFlow() = default;
  ResidualFlow(int h, int w) : height(h), width(w), du(std::size_t(h) * w, 0.0f), dv(std::size_t(h) * w, 0.0f) {}

  std::size_t size() const { return static_cast<std::size_t>(height) * width; }
  bool all_finite() const;
};

/// Backward flow with u(x,y) = x, v(x,y) = y.
FlowField identity_flow(int height, int width);

/// Bilinear interpolation on a single scalar grid; coordinates outside
/// [0,W-1] x [0,H-1] are clamped to the border first.
float bilinear_sample(std::span<const float> grid, int height, int width, float x, float y);

/// Samples every channel of an interleaved image at (x, y).
void bilinear_sample(const ImagePlane& plane, float x, float y, std::span<float> out);
std::vector<float> bilinear_sample(const ImagePlane& plane, float x, float y);

/// Samples one channel of a planar feature map at (x, y).
float bilinear_sample(const FeatureMap& map, int channel, float x, float y);

/// out(x0,y0) = src sampled at (u(x0,y0), v(x0,y0)).
ImagePlane apply_backward_flow(const ImagePlane& src, const FlowField& flow);

/// Unwarps planar features with a flow expressed in the feature grid's units.
FeatureMap warp_features(const FeatureMap& features, const FlowField& flow);

/// Resamples a full-resolution backward flow onto the ceil(H/f) x ceil(W/f)
/// grid (coarse pixel i sits on fine pixel f*i) and divides the coordinate
/// values by f so they index the coarse grid.
FlowField downsample_flow(const FlowField& flow, int factor = 8);

/// Inverse of downsample_flow for smooth fields: bilinear interpolation with
/// linear extrapolation past the last coarse sample, values multiplied by f.
/// Affine fields survive a down/up round trip exactly.
FlowField upsample_flow(const FlowField& coarse, int factor, int height, int width);

/// Rescales a backward flow to a new output size and a new source size using
/// pixel-centre alignment on both grids. Affine fields map to affine fields.
FlowField resize_flow(const FlowField& flow, int height, int width, int source_height, int source_width);

/// u' = u + du, v' = v + dv.
FlowField update_flow(const FlowField& flow, const ResidualFlow& delta);
void update_flow_inplace(FlowField& flow, const ResidualFlow& delta);

struct InversionOptions {
  int max_fill_sweeps = 1000;
  /// Conversion fails when fewer than this fraction of target pixels receive
  /// a splatted sample.
  double min_coverage = 0.01;
};

struct InversionResult {
  FlowField backward;
  double coverage = 0.0;  // fraction of target pixels hit by the splat
  int fill_sweeps = 0;    // neighbour-averaging sweeps needed to close holes
};

/// Inverts a forward flow by bilinear splatting of the source coordinates
/// into the target grid, weight normalisation, and 4-neighbour iterative
/// hole filling.
InversionResult forward_to_backward(const FlowField& forward, const InversionOptions& options = {});

}  // namespace docrect
