#include <doctest.h>

#include <cmath>
#include <random>

#include "adseval/errors.hpp"
#include "adseval/geom3d.hpp"
#include "adseval/losses.hpp"
#include "adseval/testkit/gradients.hpp"

using namespace adseval;

TEST_CASE("seg_loss examples") {
  MaskGrid unknown(3);
  const std::vector<double> probs(9, 0.3);
  CHECK(seg_loss(probs, unknown, 0.7).value == 0.0);
  CHECK(seg_loss(probs, unknown, -2.0).grad_log_sigma == 0.0);
  MaskGrid one(1);
  one.cells[0] = kMaskForeground;
  const std::vector<double> p = {std::exp(-1.0)};
  CHECK(seg_loss(p, one, 0.0).value == doctest::Approx(1.0).epsilon(1e-14));
  CHECK_THROWS_AS(seg_loss(probs, one, 0.0), std::invalid_argument);
}

TEST_CASE("seg_loss follows the literal formula") {
  // s = 2: labels 1, 0, -1, 1 with probabilities 0.8, 0.3, 0.5, 0.6 and sigma = e^0.4.
  MaskGrid g(2);
  g.cells = {1, 0, -1, 1};
  const std::vector<double> probs = {0.8, 0.3, 0.5, 0.6};
  const double ls = 0.4;
  const double sum = std::log(0.8) + std::log(0.7) + std::log(0.6);
  const double expected = -sum / (4.0 * std::exp(2 * ls)) + ls / 4.0 * 3.0;
  CHECK(seg_loss(probs, g, ls).value == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("seg_loss ignores probabilities at unknown cells") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.01, 0.99);
  MaskGrid g(5);
  for (std::size_t i = 0; i < g.cells.size(); ++i) g.cells[i] = static_cast<std::int8_t>(int(i % 3) - 1);
  std::vector<double> probs(25);
  for (auto& v : probs) v = u(rng);
  const double before = seg_loss(probs, g, 0.2).value;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (g.cells[i] == kMaskUnknown) probs[i] = u(rng);
  }
  CHECK(seg_loss(probs, g, 0.2).value == before);
}

TEST_CASE("seg_loss is minimized over sigma at the stationary point") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.01, 0.99);
  for (int trial = 0; trial < 20; ++trial) {
    MaskGrid g(4);
    for (auto& c : g.cells) c = static_cast<std::int8_t>(std::uniform_int_distribution<int>(-1, 1)(rng));
    g.cells[0] = 1;
    std::vector<double> probs(16);
    for (auto& v : probs) v = u(rng);
    const double best = seg_loss_optimal_log_sigma(probs, g);
    const double at_best = seg_loss(probs, g, best).value;
    CHECK(std::fabs(seg_loss(probs, g, best).grad_log_sigma) < 1e-12);
    for (double ls = best - 3.0; ls <= best + 3.0; ls += 0.01) CHECK(seg_loss(probs, g, ls).value >= at_best - 1e-14);
  }
  MaskGrid unknown(2);
  CHECK(std::isinf(seg_loss_optimal_log_sigma(std::vector<double>(4, 0.5), unknown)));
}

TEST_CASE("probability clamp zeroes the gradient") {
  MaskGrid g(1);
  g.cells[0] = 1;
  const std::vector<double> zero = {0.0};
  const auto r = seg_loss(zero, g, 0.0);
  CHECK(std::isfinite(r.value));
  CHECK(r.value == doctest::Approx(-std::log(kProbEps)));
  CHECK(r.grad_probs[0] == 0.0);
  const std::vector<double> targets = {1.0};
  const auto f = focal_loss(zero, targets);
  CHECK(std::isfinite(f.value));
  CHECK(f.grad_probs[0] == 0.0);
}

TEST_CASE("laplacian_depth_loss examples") {
  CHECK(laplacian_depth_loss(20.0, 20.0, 0.0).value == 0.0);
  CHECK(laplacian_depth_loss(21.0, 20.0, 0.0).value == doctest::Approx(1.414214).epsilon(1e-6));
  CHECK(laplacian_depth_loss(19.0, 20.0, 0.0).value == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("laplacian_depth_loss is minimized at sigma = sqrt(2)|delta|") {
  for (double delta : {0.1, 0.7, 2.5, 9.0}) {
    const double best_ls = std::log(std::sqrt(2.0) * delta);
    const double best = laplacian_depth_loss(10.0 + delta, 10.0, best_ls).value;
    CHECK(best == doctest::Approx(1.0 + std::log(std::sqrt(2.0) * delta)).epsilon(1e-12));
    for (double ls = -5.0; ls <= 5.0; ls += 0.01) CHECK(laplacian_depth_loss(10.0 + delta, 10.0, ls).value >= best - 1e-12);
  }
}

TEST_CASE("dim_loss examples") {
  const Dims mean{1.5, 1.6, 3.9};
  const Dims gt{1.4, 1.8, 4.2};
  CHECK(dim_loss({std::log(1.4 / 1.5), std::log(1.8 / 1.6), std::log(4.2 / 3.9)}, gt, mean).value ==
        doctest::Approx(0.0).scale(1.0));
  CHECK(dim_loss({0, 0, 0}, {2, 2, 2}, {1, 1, 1}).value == 3.0);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-2, 2);
  for (int i = 0; i < 100; ++i) CHECK(dim_loss({u(rng), u(rng), u(rng)}, gt, mean).value >= 0.0);
}

TEST_CASE("giou examples and bounds") {
  const Box2D a{0, 0, 1, 1};
  CHECK(giou(a, a) == 1.0);
  CHECK(giou(a, {2, 0, 3, 1}) == doctest::Approx(-1.0 / 3.0));
  CHECK_THROWS_AS(giou(a, {1, 1, 1, 2}), DomainError);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0, 20), w(0.5, 10);
  for (int i = 0; i < 1000; ++i) {
    const double x0 = u(rng), y0 = u(rng), x1 = u(rng), y1 = u(rng);
    const Box2D p{x0, y0, x0 + w(rng), y0 + w(rng)}, q{x1, y1, x1 + w(rng), y1 + w(rng)};
    const double g = giou(p, q);
    CHECK(g <= iou_2d(p, q) + 1e-15);
    CHECK(g > -1.0);
    CHECK(g <= 1.0);
  }
}

TEST_CASE("focal_loss examples") {
  const std::vector<double> p = {std::exp(-1.0)};
  const std::vector<double> t = {1.0};
  CHECK(focal_loss(p, t).value == doctest::Approx(0.399576).epsilon(1e-6));
  const std::vector<double> targets = {1.0, 0.0, 0.5, 1.0, 0.9};
  double prev = 1e9;
  for (double eps : {1e-2, 1e-3, 1e-4, 1e-5}) {
    const std::vector<double> probs = {1 - eps, eps, eps, 1 - eps, eps};
    const double v = focal_loss(probs, targets).value;
    CHECK(v >= 0.0);
    CHECK(v < prev);
    prev = v;
  }
  CHECK(prev < 1e-8);
  // No positives: normalized by 1.
  const std::vector<double> neg_t = {0.0, 0.0};
  const std::vector<double> neg_p = {0.5, 0.25};
  const double expected = -(0.25 * std::log(0.5)) - (0.0625 * std::log(0.75));
  CHECK(focal_loss(neg_p, neg_t).value == doctest::Approx(expected));
}

TEST_CASE("multibin_loss examples") {
  const double alpha = 0.9;
  const auto target = multibin_encode(alpha, 4);
  BinOutputs o;
  o.logits.assign(4, -40.0);
  o.logits[target.bin] = 40.0;
  o.sincos.assign(4, Vec2{0.0, 1.0});
  o.sincos[target.bin] = {std::sin(target.residual), std::cos(target.residual)};
  CHECK(multibin_loss(o, alpha).value < 1e-12);
  o.sincos[target.bin].x += 0.2;
  o.sincos[target.bin].y -= 0.05;
  CHECK(multibin_loss(o, alpha).value == doctest::Approx(0.25).epsilon(1e-9));
  BinOutputs one;
  one.logits = {1.0};
  one.sincos = {{0, 1}};
  CHECK_THROWS_AS(multibin_loss(one, 0.0), std::invalid_argument);
}

TEST_CASE("non-negative losses") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.01, 0.99);
  for (int i = 0; i < 100; ++i) {
    std::vector<double> probs(9), targets(9);
    MaskGrid g(3);
    for (std::size_t k = 0; k < 9; ++k) {
      probs[k] = u(rng);
      targets[k] = k % 4 == 0 ? 1.0 : u(rng);
      g.cells[k] = static_cast<std::int8_t>(int(k % 3) - 1);
    }
    CHECK(focal_loss(probs, targets).value >= 0.0);
    CHECK(seg_loss(probs, g, 0.0).value >= 0.0);
  }
}

TEST_CASE("analytic gradients match central differences") {
  for (auto kind : oracle::kAllLosses) {
    CAPTURE(oracle::to_string(kind));
    const auto r = oracle::check_gradients(kind, 100, 17);
    CHECK(r.components > 0);
    CHECK(r.max_rel_error <= 1e-4);
  }
}
