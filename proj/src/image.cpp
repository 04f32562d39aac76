#include "docrect/image.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "docrect/error.hpp"

namespace docrect {

ImagePlane::ImagePlane(int h, int w, int c, float fill)
    : height(h), width(w), channels(c) {
  if (h < 0 || w < 0 || (c != 1 && c != 3))
    throw ShapeError("image plane needs non-negative size and 1 or 3 channels");
  data.assign(static_cast<std::size_t>(h) * w * c, fill);
}

ImagePlane ImagePlane::from_data(int h, int w, int c, std::vector<float> samples) {
  ImagePlane img;
  if (h < 0 || w < 0 || (c != 1 && c != 3))
    throw ShapeError("image plane needs non-negative size and 1 or 3 channels");
  if (samples.size() != static_cast<std::size_t>(h) * w * c) {
    std::ostringstream os;
    os << "image data length " << samples.size() << " does not match " << h << "x" << w << "x" << c;
    throw ShapeError(os.str());
  }
  for (float v : samples) {
    if (!(v >= 0.0f && v <= 1.0f)) throw ParameterError("image samples must lie in [0,1]");
  }
  img.height = h;
  img.width = w;
  img.channels = c;
  img.data = std::move(samples);
  return img;
}

ConfidenceMap ConfidenceMap::from_data(int h, int w, std::vector<float> values) {
  if (h < 0 || w < 0 || values.size() != static_cast<std::size_t>(h) * w)
    throw ShapeError("confidence map data length does not match its size");
  for (float v : values) {
    if (!(v >= 0.0f && v <= 1.0f)) throw ParameterError("confidence values must lie in [0,1]");
  }
  ConfidenceMap m;
  m.height = h;
  m.width = w;
  m.data = std::move(values);
  return m;
}

ConfidenceMap ConfidenceMap::from_image(const ImagePlane& img) {
  ImagePlane gray = to_gray(img);
  return from_data(gray.height, gray.width, std::move(gray.data));
}

ImagePlane to_gray(const ImagePlane& img) {
  if (img.channels == 1) return img;
  ImagePlane out(img.height, img.width, 1);
  for (std::size_t i = 0; i < img.pixel_count(); ++i) {
    const float* p = &img.data[i * 3];
    out.data[i] = std::clamp(0.299f * p[0] + 0.587f * p[1] + 0.114f * p[2], 0.0f, 1.0f);
  }
  return out;
}

namespace {

// Source taps for one output coordinate under pixel-center alignment.
struct Tap {
  int i0, i1;
  float w1;
};

std::vector<Tap> resize_taps(int in_size, int out_size) {
  std::vector<Tap> taps(out_size);
  const double scale = static_cast<double>(in_size) / out_size;
  for (int o = 0; o < out_size; ++o) {
    double s = (o + 0.5) * scale - 0.5;
    s = std::clamp(s, 0.0, static_cast<double>(in_size - 1));
    int i0 = static_cast<int>(std::floor(s));
    int i1 = std::min(i0 + 1, in_size - 1);
    taps[o] = {i0, i1, static_cast<float>(s - i0)};
  }
  return taps;
}

}  // namespace

ImagePlane resize_bilinear(const ImagePlane& img, int out_height, int out_width) {
  if (img.empty()) throw ShapeError("cannot resize an empty image");
  if (out_height < 1 || out_width < 1) throw ParameterError("resize target must be at least 1x1");
  if (out_height == img.height && out_width == img.width) return img;

  const auto ty = resize_taps(img.height, out_height);
  const auto tx = resize_taps(img.width, out_width);
  const int c = img.channels;
  ImagePlane out(out_height, out_width, c);
  for (int y = 0; y < out_height; ++y) {
    const Tap& a = ty[y];
    for (int x = 0; x < out_width; ++x) {
      const Tap& b = tx[x];
      for (int k = 0; k < c; ++k) {
        // a + (b - a) * t keeps constant regions bit-exact
        float p00 = img.at(a.i0, b.i0, k), p01 = img.at(a.i0, b.i1, k);
        float p10 = img.at(a.i1, b.i0, k), p11 = img.at(a.i1, b.i1, k);
        float top = p00 + (p01 - p00) * b.w1;
        float bot = p10 + (p11 - p10) * b.w1;
        out.at(y, x, k) = std::clamp(top + (bot - top) * a.w1, 0.0f, 1.0f);
      }
    }
  }
  return out;
}

Extent area_normalized_extent(int height, int width, long long target_area) {
  if (height < 1 || width < 1) throw ShapeError("cannot area-normalize an empty image");
  if (target_area < 1) throw ParameterError("target area must be at least 1");
  const double s = std::sqrt(static_cast<double>(target_area) /
                             (static_cast<double>(height) * static_cast<double>(width)));
  Extent e;
  e.height = std::max(1, static_cast<int>(std::lround(height * s)));
  e.width = std::max(1, static_cast<int>(std::lround(width * s)));
  return e;
}

ImagePlane resize_to_area(const ImagePlane& img, long long target_area) {
  const Extent e = area_normalized_extent(img.height, img.width, target_area);
  return resize_bilinear(img, e.height, e.width);
}

ImagePlane gaussian_downsample(const ImagePlane& img) {
  if (img.height < 2 || img.width < 2) {
    std::ostringstream os;
    os << "gaussian_downsample needs at least 2x2, got " << img.height << "x" << img.width;
    throw ShapeError(os.str());
  }
  static constexpr std::array<float, 5> kernel{1.0f / 16, 4.0f / 16, 6.0f / 16, 4.0f / 16, 1.0f / 16};
  const int h = img.height, w = img.width, c = img.channels;
  const int oh = (h + 1) / 2, ow = (w + 1) / 2;

  // horizontal pass only at the kept columns
  ImagePlane tmp(h, ow, c);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < ow; ++x) {
      for (int k = 0; k < c; ++k) {
        float acc = 0.0f;
        for (int t = -2; t <= 2; ++t) {
          int sx = std::clamp(2 * x + t, 0, w - 1);
          acc += kernel[t + 2] * img.at(y, sx, k);
        }
        tmp.at(y, x, k) = acc;
      }
    }
  }
  ImagePlane out(oh, ow, c);
  for (int y = 0; y < oh; ++y) {
    for (int x = 0; x < ow; ++x) {
      for (int k = 0; k < c; ++k) {
        float acc = 0.0f;
        for (int t = -2; t <= 2; ++t) {
          int sy = std::clamp(2 * y + t, 0, h - 1);
          acc += kernel[t + 2] * tmp.at(sy, x, k);
        }
        out.at(y, x, k) = std::clamp(acc, 0.0f, 1.0f);
      }
    }
  }
  return out;
}

void clamp_unit(ImagePlane& img) {
  for (float& v : img.data) v = std::clamp(v, 0.0f, 1.0f);
}

}  // namespace docrect
