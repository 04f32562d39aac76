#pragma once

#include <vector>

#include "docrect/flow.hpp"
#include "docrect/image.hpp"

namespace docrect {

inline constexpr double kBceEpsilon = 1e-7;

/// Binary cross-entropy summed over all pixels; predictions are clamped to
/// [eps, 1 - eps].
double bce_loss(const ConfidenceMap& conf, const Mask& gt_mask);

/// Sum of |du| + |dv| over every pixel.
double l1_flow_loss(const FlowField& pred, const FlowField& gt);

/// Rectified-grid coordinates reached by following pred_backward into the
/// distorted image and gt_forward back out of it. The result has
/// pred_backward's extent, u and v holding the round-tripped x and y.
FlowField round_trip_coordinates(const FlowField& pred_backward, const FlowField& gt_forward);

/// Population variance of y along every row plus population variance of x
/// along every column, each averaged over its line count.
double line_straightness(const FlowField& coords);

double circle_line_loss(const FlowField& pred_backward, const FlowField& gt_forward);

struct IterationLoss {
  double l_f = 0.0;
  double l_line = 0.0;
  double combined = 0.0;  // l_f + alpha * l_line
};

struct LossBreakdown {
  std::vector<IterationLoss> iterations;
  double total = 0.0;  // sum of lambda^(K-k) * combined_k
  double lambda = 0.0;
  double alpha = 0.0;
};

struct LossTerms {
  double l_f = 0.0;
  double l_line = 0.0;
};

LossBreakdown total_loss(const std::vector<LossTerms>& per_iteration, double lambda, double alpha);

}  // namespace docrect
