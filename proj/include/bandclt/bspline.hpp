#pragma once

#include <cmath>
#include <vector>

namespace bandclt {

/// Values N_order(frac + i), i = 0..order-1, of the cardinal B-spline of the
/// given order (the order-fold convolution of the unit box on [0,1)).
/// Uses the Cox-de Boor recursion, which only adds non-negative terms and so
/// stays accurate for orders where the truncated-power formula cancels badly.
/// Requires order >= 1 and 0 <= frac < 1.
inline std::vector<double> cardinal_bspline_values(int order, double frac) {
  std::vector<double> cur{1.0};
  std::vector<double> next;
  for (int k = 2; k <= order; ++k) {
    next.assign(static_cast<std::size_t>(k), 0.0);
    const double inv = 1.0 / static_cast<double>(k - 1);
    for (int i = 0; i < k; ++i) {
      const double t = frac + i;
      double v = 0.0;
      if (i < k - 1) v += t * cur[static_cast<std::size_t>(i)];
      if (i > 0) v += (k - t) * cur[static_cast<std::size_t>(i - 1)];
      next[static_cast<std::size_t>(i)] = v * inv;
    }
    cur.swap(next);
  }
  return cur;
}

/// N_order(t) for arbitrary real t; zero outside [0, order).
inline double cardinal_bspline(int order, double t) {
  if (!(t >= 0.0) || t >= order) return 0.0;
  const double base = std::floor(t);
  const auto values = cardinal_bspline_values(order, t - base);
  return values[static_cast<std::size_t>(base)];
}

}  // namespace bandclt
