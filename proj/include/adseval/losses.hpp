// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <span>
#include <vector>

#include "adseval/mono_decode.hpp"
#include "adseval/shape_labels.hpp"
#include "adseval/types.hpp"

namespace adseval {

// Probabilities are clamped into [kProbEps, 1 - kProbEps] before any log.
// Where the clamp is active the gradient with respect to that probability is 0.
inline constexpr double kProbEps = 1e-7;

struct SegLossResult {
  double value = 0.0;
  std::vector<double> grad_probs;
  double grad_log_sigma = 0.0;
};

// Uncertainty-weighted mask cross-entropy:
//   L = -1/(s^2 sigma^2) * sum[y=1 log p + y=0 log(1-p)] + log(sigma)/s^2 * #{y != -1}
// with sigma = exp(log_sigma). Unknown cells contribute to neither term.
SegLossResult seg_loss(std::span<const double> probs, const MaskGrid& labels, double log_sigma);

// sigma = exp(log_sigma) that minimizes seg_loss for fixed probabilities.
// Returns +inf when there is no known cell, and 0 when every known cell is
// predicted perfectly.
double seg_loss_optimal_log_sigma(std::span<const double> probs, const MaskGrid& labels);

struct LaplacianLossResult {
  double value = 0.0;
  double grad_z = 0.0;
  double grad_z_gt = 0.0;
  double grad_log_sigma = 0.0;
};

// (sqrt(2) / sigma) * |z - z_gt| + log(sigma), sigma = exp(log_sigma).
LaplacianLossResult laplacian_depth_loss(double z, double z_gt, double log_sigma);

struct DimLossResult {
  double value = 0.0;
  std::array<double, 3> grad_deltas{};
};

// sum over (h, w, l) of |mean * exp(delta) - gt|.
DimLossResult dim_loss(const std::array<double, 3>& deltas, const Dims& gt, const Dims& class_mean);

struct GiouResult {
  double value = 0.0;
  std::array<double, 4> grad_a{};  // d giou / d (left, top, right, bottom) of `a`
};

// IoU - (enclosing - union) / enclosing. Throws DomainError on degenerate boxes.
double giou(const Box2D& a, const Box2D& b);
GiouResult giou_with_gradient(const Box2D& a, const Box2D& b);

struct FocalLossResult {
  double value = 0.0;
  std::vector<double> grad_probs;
};

// Penalty-reduced focal loss over a heatmap. Cells with target == 1 add
// -(1-p)^alpha log p, the rest -(1-t)^beta p^alpha log(1-p); the sum is
// divided by the number of positive cells (or 1 when there are none).
FocalLossResult focal_loss(std::span<const double> probs, std::span<const double> targets, double alpha = 2.0,
                           double beta = 4.0);

struct MultibinLossResult {
  double value = 0.0;
  std::vector<double> grad_logits;
  std::vector<Vec2> grad_sincos;
};

// Softmax cross-entropy on the ground-truth bin plus the L1 distance between
// that bin's (sin, cos) output and (sin, cos) of the true residual.
MultibinLossResult multibin_loss(const BinOutputs& outputs, double gt_alpha);

}  // namespace adseval
