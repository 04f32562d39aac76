#include "docrect/losses.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "docrect/error.hpp"

namespace docrect {

double bce_loss(const ConfidenceMap& conf, const Mask& gt) {
  if (conf.height != gt.height || conf.width != gt.width) throw ShapeError("bce_loss: confidence map and mask differ in size");
  double sum = 0.0;
  for (std::size_t i = 0; i < conf.data.size(); ++i) {
    const double p = std::clamp(static_cast<double>(conf.data[i]), kBceEpsilon, 1.0 - kBceEpsilon);
    sum -= gt.data[i] ? std::log(p) : std::log(1.0 - p);
  }
  return sum;
}

double l1_flow_loss(const FlowField& pred, const FlowField& gt) {
  if (pred.height != gt.height || pred.width != gt.width) {
    std::ostringstream os;
    os << "l1_flow_loss: prediction is " << pred.height << "x" << pred.width << " but ground truth is " << gt.height
       << "x" << gt.width;
    throw ShapeError(os.str());
  }
  if (pred.direction != gt.direction) throw SemanticsError("l1_flow_loss: flows have different directions");
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i)
    sum += std::fabs(static_cast<double>(pred.u[i]) - gt.u[i]) + std::fabs(static_cast<double>(pred.v[i]) - gt.v[i]);
  return sum;
}

FlowField round_trip_coordinates(const FlowField& pred, const FlowField& fwd) {
  if (pred.direction != FlowDirection::backward) throw SemanticsError("circle_line_loss: prediction must be a backward flow");
  if (fwd.direction != FlowDirection::forward) throw SemanticsError("circle_line_loss: ground truth must be a forward flow");
  if (fwd.height != pred.source_height || fwd.width != pred.source_width) {
    std::ostringstream os;
    os << "circle_line_loss: prediction samples a " << pred.source_height << "x" << pred.source_width
       << " grid but the forward flow is " << fwd.height << "x" << fwd.width;
    throw SemanticsError(os.str());
  }
  FlowField out(pred.height, pred.width, FlowDirection::backward, fwd.source_height, fwd.source_width);
  for (std::size_t i = 0; i < pred.size(); ++i) {
    out.u[i] = bilinear_sample(fwd.u, fwd.height, fwd.width, pred.u[i], pred.v[i]);
    out.v[i] = bilinear_sample(fwd.v, fwd.height, fwd.width, pred.u[i], pred.v[i]);
  }
  return out;
}

double line_straightness(const FlowField& c) {
  if (c.size() == 0) return 0.0;
  double rows = 0.0;
  for (int y = 0; y < c.height; ++y) {
    double mean = 0.0;
    for (int x = 0; x < c.width; ++x) mean += c.v[c.index(y, x)];
    mean /= c.width;
    double var = 0.0;
    for (int x = 0; x < c.width; ++x) {
      const double d = c.v[c.index(y, x)] - mean;
      var += d * d;
    }
    rows += var / c.width;
  }
  double cols = 0.0;
  for (int x = 0; x < c.width; ++x) {
    double mean = 0.0;
    for (int y = 0; y < c.height; ++y) mean += c.u[c.index(y, x)];
    mean /= c.height;
    double var = 0.0;
    for (int y = 0; y < c.height; ++y) {
      const double d = c.u[c.index(y, x)] - mean;
      var += d * d;
    }
    cols += var / c.height;
  }
  return rows / c.height + cols / c.width;
}

double circle_line_loss(const FlowField& pred_backward, const FlowField& gt_forward) {
  return line_straightness(round_trip_coordinates(pred_backward, gt_forward));
}

LossBreakdown total_loss(const std::vector<LossTerms>& terms, double lambda, double alpha) {
  if (terms.empty()) throw ParameterError("total_loss: no iterations given");
  if (!(lambda > 0.0 && lambda <= 1.0)) throw ParameterError("total_loss: lambda must lie in (0,1]");
  LossBreakdown out;
  out.lambda = lambda;
  out.alpha = alpha;
  const int K = static_cast<int>(terms.size());
  for (int k = 1; k <= K; ++k) {
    const auto& t = terms[k - 1];
    IterationLoss it{t.l_f, t.l_line, t.l_f + alpha * t.l_line};
    out.total += std::pow(lambda, K - k) * it.combined;
    out.iterations.push_back(it);
  }
  return out;
}

}  // namespace docrect
