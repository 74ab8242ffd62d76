// SPDX-License-Identifier: Apache-2.0
#include "adseval/testkit/gradients.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "adseval/losses.hpp"
#include "adseval/testkit/oracles.hpp"

namespace adseval::oracle {

std::string_view to_string(LossKind kind) {
  switch (kind) {
    case LossKind::Segmentation: return "seg_loss";
    case LossKind::Laplacian: return "laplacian_depth_loss";
    case LossKind::Dimension: return "dim_loss";
    case LossKind::Giou: return "giou";
    case LossKind::Focal: return "focal_loss";
    case LossKind::Multibin: return "multibin_loss";
  }
  return "?";
}

namespace {

using Rng = std::mt19937_64;
using Fn = std::function<double(std::span<const double>)>;

double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

struct Problem {
  std::vector<double> x;
  Fn value;
  std::vector<double> grad;
};

Problem segmentation(Rng& rng) {
  const int s = std::uniform_int_distribution<int>(2, 6)(rng);
  auto labels = std::make_shared<MaskGrid>(s);
  for (auto& c : labels->cells) c = static_cast<std::int8_t>(std::uniform_int_distribution<int>(-1, 1)(rng));
  Problem p;
  for (int i = 0; i < s * s; ++i) p.x.push_back(uniform(rng, 0.02, 0.98));
  p.x.push_back(uniform(rng, -1.0, 1.0));
  p.value = [labels](std::span<const double> x) {
    return seg_loss(x.first(x.size() - 1), *labels, x.back()).value;
  };
  const auto r = seg_loss(std::span<const double>(p.x).first(p.x.size() - 1), *labels, p.x.back());
  p.grad = r.grad_probs;
  p.grad.push_back(r.grad_log_sigma);
  return p;
}

Problem laplacian(Rng& rng) {
  Problem p;
  const double z_gt = uniform(rng, 5, 60);
  double z;
  do z = z_gt + uniform(rng, -5, 5);
  while (std::fabs(z - z_gt) < 1e-3);
  p.x = {z, z_gt, uniform(rng, -2, 2)};
  p.value = [](std::span<const double> x) { return laplacian_depth_loss(x[0], x[1], x[2]).value; };
  const auto r = laplacian_depth_loss(p.x[0], p.x[1], p.x[2]);
  p.grad = {r.grad_z, r.grad_z_gt, r.grad_log_sigma};
  return p;
}

Problem dimension(Rng& rng) {
  const Dims mean{uniform(rng, 0.5, 2), uniform(rng, 0.5, 2), uniform(rng, 0.5, 4)};
  Dims gt;
  std::array<double, 3> d{};
  for (;;) {
    gt = {uniform(rng, 0.5, 2), uniform(rng, 0.5, 2), uniform(rng, 0.5, 4)};
    for (auto& v : d) v = uniform(rng, -0.5, 0.5);
    const double r[3] = {mean.h * std::exp(d[0]) - gt.h, mean.w * std::exp(d[1]) - gt.w, mean.l * std::exp(d[2]) - gt.l};
    if (std::fabs(r[0]) > 1e-3 && std::fabs(r[1]) > 1e-3 && std::fabs(r[2]) > 1e-3) break;
  }
  Problem p;
  p.x = {d[0], d[1], d[2]};
  p.value = [mean, gt](std::span<const double> x) { return dim_loss({x[0], x[1], x[2]}, gt, mean).value; };
  const auto r = dim_loss(d, gt, mean);
  p.grad.assign(r.grad_deltas.begin(), r.grad_deltas.end());
  return p;
}

Problem giou_problem(Rng& rng) {
  Box2D a, b;
  for (;;) {
    auto box = [&] {
      const double x = uniform(rng, 0, 30), y = uniform(rng, 0, 30);
      return Box2D{x, y, x + uniform(rng, 2, 25), y + uniform(rng, 2, 25)};
    };
    a = box(), b = box();
    const double xs[] = {a.left, a.right}, xb[] = {b.left, b.right};
    const double ys[] = {a.top, a.bottom}, yb[] = {b.top, b.bottom};
    bool far = true;
    for (double u : xs)
      for (double v : xb) far &= std::fabs(u - v) > 1e-3;
    for (double u : ys)
      for (double v : yb) far &= std::fabs(u - v) > 1e-3;
    if (far) break;
  }
  Problem p;
  p.x = {a.left, a.top, a.right, a.bottom};
  p.value = [b](std::span<const double> x) { return giou({x[0], x[1], x[2], x[3]}, b); };
  const auto r = giou_with_gradient(a, b);
  p.grad.assign(r.grad_a.begin(), r.grad_a.end());
  return p;
}

Problem focal(Rng& rng) {
  const int n = std::uniform_int_distribution<int>(4, 30)(rng);
  auto targets = std::make_shared<std::vector<double>>();
  Problem p;
  for (int i = 0; i < n; ++i) {
    targets->push_back(uniform(rng, 0, 1) < 0.2 ? 1.0 : uniform(rng, 0.0, 0.95));
    p.x.push_back(uniform(rng, 0.02, 0.98));
  }
  p.value = [targets](std::span<const double> x) { return focal_loss(x, *targets).value; };
  p.grad = focal_loss(p.x, *targets).grad_probs;
  return p;
}

Problem multibin(Rng& rng) {
  const int n = std::uniform_int_distribution<int>(2, 8)(rng);
  const double alpha = uniform(rng, -3.1, 3.1);
  const auto target = multibin_encode(alpha, n);
  Problem p;
  for (int k = 0; k < n; ++k) p.x.push_back(uniform(rng, -3, 3));
  for (int k = 0; k < n; ++k) {
    for (double truth : {std::sin(target.residual), std::cos(target.residual)}) {
      double v;
      do v = uniform(rng, -1.2, 1.2);
      while (k == target.bin && std::fabs(v - truth) < 1e-3);
      p.x.push_back(v);
    }
  }
  auto unpack = [n](std::span<const double> x) {
    BinOutputs o;
    o.logits.assign(x.begin(), x.begin() + n);
    for (int k = 0; k < n; ++k) o.sincos.push_back({x[n + 2 * k], x[n + 2 * k + 1]});
    return o;
  };
  p.value = [unpack, alpha](std::span<const double> x) { return multibin_loss(unpack(x), alpha).value; };
  const auto r = multibin_loss(unpack(p.x), alpha);
  p.grad = r.grad_logits;
  for (const auto& g : r.grad_sincos) p.grad.push_back(g.x), p.grad.push_back(g.y);
  return p;
}

}  // namespace

GradientCheck check_gradients(LossKind kind, int points, std::uint64_t seed, double h) {
  Rng rng(seed);
  GradientCheck out;
  for (int i = 0; i < points; ++i) {
    Problem p;
    switch (kind) {
      case LossKind::Segmentation: p = segmentation(rng); break;
      case LossKind::Laplacian: p = laplacian(rng); break;
      case LossKind::Dimension: p = dimension(rng); break;
      case LossKind::Giou: p = giou_problem(rng); break;
      case LossKind::Focal: p = focal(rng); break;
      case LossKind::Multibin: p = multibin(rng); break;
    }
    for (std::size_t k = 0; k < p.x.size(); ++k) {
      const double numeric = central_difference(p.value, p.x, k, h);
      const double scale = std::max({std::fabs(p.grad[k]), std::fabs(numeric), 1e-4});
      out.max_rel_error = std::max(out.max_rel_error, std::fabs(p.grad[k] - numeric) / scale);
      ++out.components;
    }
  }
  return out;
}

}  // namespace adseval::oracle
