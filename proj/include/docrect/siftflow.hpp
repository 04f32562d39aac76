#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "docrect/image.hpp"

namespace docrect {

inline constexpr int kSiftDim = 128;

/// One 128-d descriptor per pixel, stored pixel-major.
struct DescriptorGrid {
  int height = 0;
  int width = 0;
  std::vector<float> data;

  const float* at(int y, int x) const { return data.data() + (static_cast<std::size_t>(y) * width + x) * kSiftDim; }
  float* at(int y, int x) { return data.data() + (static_cast<std::size_t>(y) * width + x) * kSiftDim; }
};

/// Integer displacement from grid a to grid b: a(p) matches b(p + (dx, dy)).
struct DisplacementField {
  int height = 0;
  int width = 0;
  std::vector<int> dx;
  std::vector<int> dy;

  DisplacementField() = default;
  DisplacementField(int h, int w) : height(h), width(w), dx(std::size_t(h) * w, 0), dy(std::size_t(h) * w, 0) {}
  std::size_t size() const { return static_cast<std::size_t>(height) * width; }
};

struct SiftParams {
  int cell_size = 3;
};

struct SiftFlowParams {
  /// Descriptor distances are multiplied by this before the data term.
  double descriptor_scale = 255.0;
  /// Same cap as the smoothness term. At 2 * 255 every candidate saturates
  /// when a level's true shift falls between integer labels.
  double data_truncation = 40 * 255.0;
  double eta = 0.005 * 255.0;
  double alpha = 2 * 255.0;
  double smooth_truncation = 40 * 255.0;
  int top_radius = 5;
  int radius = 1;
  int iterations = 60;
  /// Coarser message-passing passes that seed a level whose search window
  /// is the same at every pixel (the coarsest level).
  int hierarchy = 2;
  /// Coarsest pyramid level keeps min(height, width) >= this.
  int min_level_size = 16;
};

/// Dense SIFT on luma: 4x4 cells of 8 orientation bins, magnitudes split
/// linearly between neighbouring bins and pooled with a triangular kernel.
/// Each descriptor is L2-normalised, clamped at 0.2 and renormalised; a
/// gradient-free neighbourhood yields the all-equal unit vector. Throws
/// ShapeError for images smaller than 4 cells on either side.
DescriptorGrid dense_sift(const ImagePlane& img, const SiftParams& params = {});

/// Binomial low-pass and 2x decimation of every descriptor channel.
DescriptorGrid downsample_descriptors(const DescriptorGrid& grid);

/// Energy the matcher minimises, evaluated for an arbitrary field.
double sift_flow_energy(const DescriptorGrid& a, const DescriptorGrid& b, const DisplacementField& field,
                        const SiftFlowParams& params = {});

/// Coarse-to-fine dual-layer belief propagation. Never returns a field with
/// higher energy than the zero field.
DisplacementField sift_flow_match(const DescriptorGrid& a, const DescriptorGrid& b, const SiftFlowParams& params = {});

/// Largest |dx| or |dy| sift_flow_match can produce for a grid of this size.
int max_displacement(int height, int width, const SiftFlowParams& params = {});

/// DSFL version 2 record with displacement semantics.
std::vector<std::uint8_t> encode_displacement(const DisplacementField& field);
DisplacementField decode_displacement(std::span<const std::uint8_t> bytes);
void write_displacement(const std::filesystem::path& path, const DisplacementField& field);

}  // namespace docrect
