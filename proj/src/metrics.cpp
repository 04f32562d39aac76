#include "docrect/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "docrect/error.hpp"

namespace docrect {

namespace {

void require_field(const DisplacementField& f, const char* what) {
  if (f.size() == 0) throw ParameterError(std::string(what) + ": empty displacement field");
}

std::vector<double> gaussian_kernel(int size, double sigma) {
  std::vector<double> k(size);
  const double c = (size - 1) / 2.0;
  double sum = 0.0;
  for (int i = 0; i < size; ++i) sum += (k[i] = std::exp(-(i - c) * (i - c) / (2 * sigma * sigma)));
  for (double& v : k) v /= sum;
  return k;
}

// Valid-mode separable filtering of a row-major h x w array.
std::vector<double> filter_valid(const std::vector<double>& in, int h, int w, const std::vector<double>& k) {
  const int n = static_cast<int>(k.size());
  const int oh = h - n + 1, ow = w - n + 1;
  std::vector<double> tmp(static_cast<std::size_t>(h) * ow), out(static_cast<std::size_t>(oh) * ow);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < ow; ++x) {
      double s = 0.0;
      for (int t = 0; t < n; ++t) s += k[t] * in[static_cast<std::size_t>(y) * w + x + t];
      tmp[static_cast<std::size_t>(y) * ow + x] = s;
    }
  for (int y = 0; y < oh; ++y)
    for (int x = 0; x < ow; ++x) {
      double s = 0.0;
      for (int t = 0; t < n; ++t) s += k[t] * tmp[static_cast<std::size_t>(y + t) * ow + x];
      out[static_cast<std::size_t>(y) * ow + x] = s;
    }
  return out;
}

struct SsimTerms {
  double cs = 0.0;
  double ssim = 0.0;
};

SsimTerms ssim_level(const ImagePlane& a, const ImagePlane& b, const MsSsimParams& p) {
  const int h = a.height, w = a.width;
  const int size = std::min({p.window, h, w});
  const auto k = gaussian_kernel(size, p.sigma);
  const std::size_t n = a.pixel_count();
  std::vector<double> va(n), vb(n), aa(n), bb(n), ab(n);
  for (std::size_t i = 0; i < n; ++i) {
    va[i] = a.data[i];
    vb[i] = b.data[i];
    aa[i] = va[i] * va[i];
    bb[i] = vb[i] * vb[i];
    ab[i] = va[i] * vb[i];
  }
  const auto mu_a = filter_valid(va, h, w, k), mu_b = filter_valid(vb, h, w, k);
  const auto e_aa = filter_valid(aa, h, w, k), e_bb = filter_valid(bb, h, w, k), e_ab = filter_valid(ab, h, w, k);
  const double c1 = (p.k1 * p.dynamic_range) * (p.k1 * p.dynamic_range);
  const double c2 = (p.k2 * p.dynamic_range) * (p.k2 * p.dynamic_range);
  SsimTerms t;
  for (std::size_t i = 0; i < mu_a.size(); ++i) {
    const double saa = e_aa[i] - mu_a[i] * mu_a[i];
    const double sbb = e_bb[i] - mu_b[i] * mu_b[i];
    const double sab = e_ab[i] - mu_a[i] * mu_b[i];
    const double cs = (2 * sab + c2) / (saa + sbb + c2);
    const double lum = (2 * mu_a[i] * mu_b[i] + c1) / (mu_a[i] * mu_a[i] + mu_b[i] * mu_b[i] + c1);
    t.cs += cs;
    t.ssim += lum * cs;
  }
  t.cs /= static_cast<double>(mu_a.size());
  t.ssim /= static_cast<double>(mu_a.size());
  return t;
}

}  // namespace

double local_distortion(const DisplacementField& f) {
  require_field(f, "local_distortion");
  double sum = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) sum += std::hypot(static_cast<double>(f.dx[i]), static_cast<double>(f.dy[i]));
  return sum / static_cast<double>(f.size());
}

double line_distortion(const DisplacementField& f) {
  require_field(f, "line_distortion");
  auto pstd = [](auto&& get, int n) {
    double mean = 0.0;
    for (int i = 0; i < n; ++i) mean += get(i);
    mean /= n;
    double var = 0.0;
    for (int i = 0; i < n; ++i) var += (get(i) - mean) * (get(i) - mean);
    return std::sqrt(var / n);
  };
  double sum = 0.0;
  for (int x = 0; x < f.width; ++x)
    sum += pstd([&](int y) { return static_cast<double>(f.dx[static_cast<std::size_t>(y) * f.width + x]); }, f.height);
  for (int y = 0; y < f.height; ++y)
    sum += pstd([&](int x) { return static_cast<double>(f.dy[static_cast<std::size_t>(y) * f.width + x]); }, f.width);
  return sum / (f.width + f.height);
}

double ms_ssim(const ImagePlane& a_in, const ImagePlane& b_in, const MsSsimParams& p) {
  if (a_in.height != b_in.height || a_in.width != b_in.width) {
    std::ostringstream os;
    os << "ms_ssim: images are " << a_in.height << "x" << a_in.width << " and " << b_in.height << "x" << b_in.width;
    throw ShapeError(os.str());
  }
  ImagePlane a = to_gray(a_in), b = to_gray(b_in);
  const int levels = static_cast<int>(p.weights.size());
  double result = 1.0;
  for (int l = 0; l < levels; ++l) {
    const SsimTerms t = ssim_level(a, b, p);
    if (l + 1 < levels) {
      result *= std::pow(std::max(t.cs, 0.0), p.weights[l]);
      a = gaussian_downsample(a);
      b = gaussian_downsample(b);
    } else {
      result *= std::pow(std::max(t.ssim, 0.0), p.weights[l]);
    }
  }
  return std::clamp(result, 0.0, 1.0);
}

MetricRow evaluate_pair(const ImagePlane& gt, const ImagePlane& rect, const std::optional<std::string>& gt_text,
                        const std::optional<std::string>& hyp_text, const EvalParams& p) {
  MetricRow row;
  const ImagePlane g = resize_to_area(to_gray(gt), p.target_area);
  const ImagePlane r = resize_bilinear(to_gray(rect), g.height, g.width);
  row.ms_ssim = ms_ssim(g, r, p.ssim);
  {
    const DescriptorGrid da = dense_sift(g, p.sift);
    const DescriptorGrid db = dense_sift(r, p.sift);
    const DisplacementField field = sift_flow_match(da, db, p.flow);
    row.ld = local_distortion(field);
    row.li_d = line_distortion(field);
  }
  if (gt_text && hyp_text) {
    const auto ref = normalize_text(*gt_text);
    const auto hyp = normalize_text(*hyp_text);
    row.ed = edit_distance(hyp, ref);
    row.cer = cer(hyp, ref);
  }
  return row;
}

MetricAggregate aggregate(const std::vector<MetricRow>& rows) {
  MetricAggregate m;
  for (const auto& r : rows) {
    if (r.error) {
      ++m.failed;
      continue;
    }
    ++m.images;
    m.ms_ssim += r.ms_ssim;
    m.ld += r.ld;
    m.li_d += r.li_d;
    if (r.ed && r.cer) {
      ++m.text_images;
      m.ed += static_cast<double>(r.ed->distance);
      m.cer += *r.cer;
    }
  }
  if (m.images) {
    m.ms_ssim /= m.images;
    m.ld /= m.images;
    m.li_d /= m.images;
  }
  if (m.text_images) {
    m.ed /= m.text_images;
    m.cer /= m.text_images;
  }
  return m;
}

}  // namespace docrect
