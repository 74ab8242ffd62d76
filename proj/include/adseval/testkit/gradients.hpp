// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>

namespace adseval::oracle {

enum class LossKind { Segmentation, Laplacian, Dimension, Giou, Focal, Multibin };
inline constexpr LossKind kAllLosses[] = {LossKind::Segmentation, LossKind::Laplacian, LossKind::Dimension,
                                          LossKind::Giou,         LossKind::Focal,     LossKind::Multibin};
std::string_view to_string(LossKind kind);

struct GradientCheck {
  double max_rel_error = 0.0;
  std::size_t components = 0;
};

// Compares every analytic partial derivative of `kind` with a central
// difference of step h at `points` random inputs drawn away from kinks.
// Relative error is |analytic - numeric| / max(|analytic|, |numeric|, 1e-4).
GradientCheck check_gradients(LossKind kind, int points, std::uint64_t seed, double h = 1e-6);

}  // namespace adseval::oracle
