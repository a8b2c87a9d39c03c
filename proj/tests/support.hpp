#pragma once

#include <cmath>
#include <functional>
#include <random>

#include "topam/grid.hpp"

namespace topam::testing {

inline Vector random_vector(int n, unsigned seed, double lo = 0.1, double hi = 0.9) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> dist(lo, hi);
  Vector v(n);
  for (int i = 0; i < n; ++i) v[i] = dist(gen);
  return v;
}

/// Fourth-order central difference, (-f(x+2h) + 8 f(x+h) - 8 f(x-h) + f(x-2h)) / 12h.
inline Vector central_difference(const std::function<double(const Vector&)>& f, const Vector& x, double h = 1e-3) {
  Vector g(x.size());
  for (int i = 0; i < x.size(); ++i) {
    auto at = [&](double step) {
      Vector y = x;
      y[i] += step;
      return f(y);
    };
    g[i] = (-at(2 * h) + 8.0 * at(h) - 8.0 * at(-h) + at(-2 * h)) / (12.0 * h);
  }
  return g;
}

/// Largest relative error over entries whose magnitude exceeds `floor`.
inline double max_relative_error(const Vector& analytic, const Vector& numeric, double floor = 1e-8) {
  double worst = 0.0;
  for (int i = 0; i < analytic.size(); ++i) {
    const double scale = std::max(std::abs(analytic[i]), std::abs(numeric[i]));
    if (scale <= floor) continue;
    worst = std::max(worst, std::abs(analytic[i] - numeric[i]) / scale);
  }
  return worst;
}

}  // namespace topam::testing
