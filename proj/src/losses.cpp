// SPDX-License-Identifier: Apache-2.0
#include "adseval/losses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "adseval/errors.hpp"

namespace adseval {
namespace {

struct Clamped {
  double p;
  double dp;  // derivative of the clamp
};

Clamped clamp_prob(double p) {
  if (p < kProbEps) return {kProbEps, 0.0};
  if (p > 1.0 - kProbEps) return {1.0 - kProbEps, 0.0};
  return {p, 1.0};
}

double sign(double v) { return (v > 0.0) - (v < 0.0); }

}  // namespace

SegLossResult seg_loss(std::span<const double> probs, const MaskGrid& labels, double log_sigma) {
  const std::size_t n = labels.cells.size();
  if (probs.size() != n) throw std::invalid_argument("seg_loss: probability grid does not match label grid");
  const double s2 = static_cast<double>(n);
  const double inv_var = std::exp(-2.0 * log_sigma);

  SegLossResult out;
  out.grad_probs.assign(n, 0.0);
  if (n == 0) return out;
  double data = 0.0;
  double known = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto y = labels.cells[i];
    if (y == kMaskUnknown) continue;
    known += 1.0;
    const Clamped c = clamp_prob(probs[i]);
    if (y == kMaskForeground) {
      data += std::log(c.p);
      out.grad_probs[i] = -inv_var / s2 * (1.0 / c.p) * c.dp;
    } else {
      data += std::log1p(-c.p);
      out.grad_probs[i] = -inv_var / s2 * (-1.0 / (1.0 - c.p)) * c.dp;
    }
  }
  out.value = -inv_var / s2 * data + log_sigma / s2 * known;
  out.grad_log_sigma = 2.0 * inv_var / s2 * data + known / s2;
  return out;
}

double seg_loss_optimal_log_sigma(std::span<const double> probs, const MaskGrid& labels) {
  double data = 0.0;
  double known = 0.0;
  for (std::size_t i = 0; i < labels.cells.size(); ++i) {
    const auto y = labels.cells[i];
    if (y == kMaskUnknown) continue;
    known += 1.0;
    const double p = clamp_prob(probs[i]).p;
    data += y == kMaskForeground ? std::log(p) : std::log1p(-p);
  }
  if (known == 0.0) return std::numeric_limits<double>::infinity();
  if (data == 0.0) return -std::numeric_limits<double>::infinity();
  // d/d(log sigma) = 2 data e^{-2 log sigma} + known = 0
  return 0.5 * std::log(-2.0 * data / known);
}

LaplacianLossResult laplacian_depth_loss(double z, double z_gt, double log_sigma) {
  const double scale = std::numbers::sqrt2 * std::exp(-log_sigma);
  const double diff = z - z_gt;
  LaplacianLossResult out;
  out.value = scale * std::fabs(diff) + log_sigma;
  out.grad_z = scale * sign(diff);
  out.grad_z_gt = -out.grad_z;
  out.grad_log_sigma = 1.0 - scale * std::fabs(diff);
  return out;
}

DimLossResult dim_loss(const std::array<double, 3>& deltas, const Dims& gt, const Dims& class_mean) {
  const std::array<double, 3> means = {class_mean.h, class_mean.w, class_mean.l};
  const std::array<double, 3> target = {gt.h, gt.w, gt.l};
  DimLossResult out;
  for (int k = 0; k < 3; ++k) {
    const double pred = means[k] * std::exp(deltas[k]);
    const double r = pred - target[k];
    out.value += std::fabs(r);
    out.grad_deltas[k] = sign(r) * pred;
  }
  return out;
}

GiouResult giou_with_gradient(const Box2D& a, const Box2D& b) {
  if (a.degenerate() || b.degenerate()) throw DomainError("giou: degenerate box");
  const double aw = a.width(), ah = a.height();
  const double area_a = aw * ah;
  const double area_b = b.area();

  const double iw_raw = std::min(a.right, b.right) - std::max(a.left, b.left);
  const double ih_raw = std::min(a.bottom, b.bottom) - std::max(a.top, b.top);
  const bool overlap = iw_raw > 0.0 && ih_raw > 0.0;
  const double iw = overlap ? iw_raw : 0.0;
  const double ih = overlap ? ih_raw : 0.0;
  const double inter = iw * ih;
  const double uni = area_a + area_b - inter;

  const double ew = std::max(a.right, b.right) - std::min(a.left, b.left);
  const double eh = std::max(a.bottom, b.bottom) - std::min(a.top, b.top);
  const double encl = ew * eh;

  GiouResult out;
  out.value = inter / uni - (encl - uni) / encl;

  // Partial derivatives with respect to (left, top, right, bottom) of a.
  const std::array<double, 4> d_area = {-ah, -aw, ah, aw};
  std::array<double, 4> d_inter{};
  if (overlap) {
    d_inter[0] = a.left > b.left ? -ih : 0.0;
    d_inter[1] = a.top > b.top ? -iw : 0.0;
    d_inter[2] = a.right < b.right ? ih : 0.0;
    d_inter[3] = a.bottom < b.bottom ? iw : 0.0;
  }
  const std::array<double, 4> d_encl = {
      a.left < b.left ? -eh : 0.0,
      a.top < b.top ? -ew : 0.0,
      a.right > b.right ? eh : 0.0,
      a.bottom > b.bottom ? ew : 0.0,
  };
  for (int k = 0; k < 4; ++k) {
    const double d_uni = d_area[k] - d_inter[k];
    // giou = I/U - 1 + U/E
    out.grad_a[k] = d_inter[k] / uni - inter * d_uni / (uni * uni) + d_uni / encl - uni * d_encl[k] / (encl * encl);
  }
  return out;
}

double giou(const Box2D& a, const Box2D& b) { return giou_with_gradient(a, b).value; }

FocalLossResult focal_loss(std::span<const double> probs, std::span<const double> targets, double alpha,
                           double beta) {
  if (probs.size() != targets.size()) throw std::invalid_argument("focal_loss: size mismatch");
  const auto positives = std::count(targets.begin(), targets.end(), 1.0);
  const double norm = positives > 0 ? static_cast<double>(positives) : 1.0;

  FocalLossResult out;
  out.grad_probs.assign(probs.size(), 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const Clamped c = clamp_prob(probs[i]);
    const double p = c.p;
    if (targets[i] == 1.0) {
      const double w = std::pow(1.0 - p, alpha);
      total += -w * std::log(p);
      const double dw = -alpha * std::pow(1.0 - p, alpha - 1.0);
      out.grad_probs[i] = -(dw * std::log(p) + w / p) / norm * c.dp;
    } else {
      const double neg = std::pow(1.0 - targets[i], beta);
      const double w = std::pow(p, alpha);
      const double l1p = std::log1p(-p);
      total += -neg * w * l1p;
      const double dw = alpha * std::pow(p, alpha - 1.0);
      out.grad_probs[i] = -neg * (dw * l1p - w / (1.0 - p)) / norm * c.dp;
    }
  }
  out.value = total / norm;
  return out;
}

MultibinLossResult multibin_loss(const BinOutputs& outputs, double gt_alpha) {
  const int n = static_cast<int>(outputs.logits.size());
  if (n < 2) throw std::invalid_argument("multibin_loss: need at least two bins");
  if (outputs.sincos.size() != outputs.logits.size()) {
    throw std::invalid_argument("multibin_loss: logits and sin/cos pairs differ in count");
  }
  const MultibinTarget target = multibin_encode(gt_alpha, n);

  const double max_logit = *std::max_element(outputs.logits.begin(), outputs.logits.end());
  double denom = 0.0;
  for (double l : outputs.logits) denom += std::exp(l - max_logit);
  const double log_z = max_logit + std::log(denom);

  MultibinLossResult out;
  out.grad_logits.resize(n);
  out.grad_sincos.assign(n, Vec2{});
  for (int k = 0; k < n; ++k) out.grad_logits[k] = std::exp(outputs.logits[k] - log_z) - (k == target.bin ? 1.0 : 0.0);
  const double ce = log_z - outputs.logits[target.bin];

  const Vec2 pred = outputs.sincos[target.bin];
  const double ds = pred.x - std::sin(target.residual);
  const double dc = pred.y - std::cos(target.residual);
  out.grad_sincos[target.bin] = {sign(ds), sign(dc)};
  out.value = ce + std::fabs(ds) + std::fabs(dc);
  return out;
}

}  // namespace adseval
