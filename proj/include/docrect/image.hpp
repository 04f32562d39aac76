#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace docrect {

/// Row-major, channel-interleaved image with samples in [0,1].
struct ImagePlane {
  int height = 0;
  int width = 0;
  int channels = 0;
  std::vector<float> data;

  ImagePlane() = default;
  ImagePlane(int h, int w, int c, float fill = 0.0f);

  /// Builds a plane from existing samples; throws if sizes disagree or a
  /// sample falls outside [0,1].
  static ImagePlane from_data(int h, int w, int c, std::vector<float> samples);

  bool empty() const { return data.empty(); }
  std::size_t pixel_count() const { return static_cast<std::size_t>(height) * width; }

  float& at(int y, int x, int c = 0) {
    return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  float at(int y, int x, int c = 0) const {
    return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
};

/// Per-pixel foreground probability, values in [0,1].
struct ConfidenceMap {
  int height = 0;
  int width = 0;
  std::vector<float> data;

  static ConfidenceMap from_data(int h, int w, std::vector<float> values);
  static ConfidenceMap from_image(const ImagePlane& img);

  float at(int y, int x) const { return data[static_cast<std::size_t>(y) * width + x]; }
};

/// Binary document-region mask; 1 marks foreground.
struct Mask {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> data;

  std::uint8_t at(int y, int x) const { return data[static_cast<std::size_t>(y) * width + x]; }
};

/// Luma conversion (0.299 R + 0.587 G + 0.114 B). Single-channel input is
/// returned unchanged.
ImagePlane to_gray(const ImagePlane& img);

/// Bilinear resize with pixel-center alignment and edge replication.
ImagePlane resize_bilinear(const ImagePlane& img, int out_height, int out_width);

/// Output dimensions chosen by resize_to_area: round(H*s) x round(W*s) with
/// s = sqrt(target_area / (H*W)).
struct Extent {
  int height = 0;
  int width = 0;
};
Extent area_normalized_extent(int height, int width, long long target_area);

/// Resizes so the pixel area is as close to target_area as the aspect ratio
/// allows. Inputs that already have the target extent are returned unchanged.
ImagePlane resize_to_area(const ImagePlane& img, long long target_area);

/// One pyramid step: separable [1 4 6 4 1]/16 low-pass with edge replication,
/// then keep every second row and column. Output is ceil(H/2) x ceil(W/2).
ImagePlane gaussian_downsample(const ImagePlane& img);

/// Clamps every sample into [0,1].
void clamp_unit(ImagePlane& img);

}  // namespace docrect
