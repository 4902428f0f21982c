#pragma once

#include <cstddef>
#include <cstdint>

namespace modalign {

struct GradCheckReport {
  std::size_t instances = 0;
  std::size_t parameters = 0;  // total parameters compared
  double max_rel_error = 0;
  bool passed = false;
};

/// |a - b| / max(|a|, |b|, 1e-6). The floor keeps numerically-zero
/// gradients (dead units) from dividing rounding noise by zero.
double relative_error(double analytic, double numeric);

/// Compares analytic gradients of the weighted contrastive loss w.r.t. both
/// heads' parameters against central differences on random small instances
/// (dims <= 16, batch <= 4, 1-3 layer graph head).
GradCheckReport run_gradient_check(std::size_t instances, std::uint64_t seed, double step = 1e-4,
                                   double tolerance = 1e-4);

}  // namespace modalign
