#pragma once

#include <string>
#include <vector>

#include "docrect/image.hpp"
#include "docrect/tensor.hpp"
#include "docrect/weights.hpp"

namespace docrect {

/// Cross-correlation with the kernel `<name>.weight` (OIHW) plus the per
/// output-channel bias `<name>.bias`. Zero padding of k/2 on each side, so a
/// stride-1 pass keeps the spatial size. Output size is ceil(H/stride).
///
/// Throws ManifestError naming the tensor when it is missing, oddly shaped or
/// its input depth differs from the input's channel count.
FeatureMap conv2d(const FeatureMap& input, const std::string& name, int stride, const WeightStore& weights);

void relu_inplace(FeatureMap& map);
/// tanh, clamped so every value stays strictly inside (-1, 1) in float.
void tanh_inplace(FeatureMap& map);
/// Logistic function, clamped so every value stays strictly inside (0, 1).
void sigmoid_inplace(FeatureMap& map);

float bounded_tanh(float x);
float bounded_sigmoid(float x);

/// Stacks maps of equal spatial size along the channel axis.
FeatureMap concat_channels(const std::vector<const FeatureMap*>& parts);
FeatureMap slice_channels(const FeatureMap& map, int first, int count);

/// Interleaved image to planar feature map.
FeatureMap to_feature_map(const ImagePlane& img);

}  // namespace docrect
