#pragma once

#include <cstddef>
#include <vector>

namespace docrect {

/// Planar (channel-major) feature map: element (c, y, x) lives at
/// (c * height + y) * width + x. Used for encoder features, hidden states
/// and every intermediate activation of the rectification network.
struct FeatureMap {
  int channels = 0;
  int height = 0;
  int width = 0;
  std::vector<float> data;

  FeatureMap() = default;
  FeatureMap(int c, int h, int w, float fill = 0.0f)
      : channels(c), height(h), width(w), data(static_cast<std::size_t>(c) * h * w, fill) {}

  std::size_t plane_size() const { return static_cast<std::size_t>(height) * width; }

  float* plane(int c) { return data.data() + c * plane_size(); }
  const float* plane(int c) const { return data.data() + c * plane_size(); }

  float& at(int c, int y, int x) { return data[(static_cast<std::size_t>(c) * height + y) * width + x]; }
  float at(int c, int y, int x) const { return data[(static_cast<std::size_t>(c) * height + y) * width + x]; }
};

/// Hidden state of the recurrent updater; same layout as FeatureMap.
using HiddenState = FeatureMap;

}  // namespace docrect
