#pragma once

#include <cstdint>
#include <vector>

#include "axg/random.h"
#include "axg/tensor.h"

namespace axg::testutil {

inline Tensor random_tensor(Shape shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
  Tensor t(std::move(shape));
  for (auto& v : t.data) v = static_cast<float>(rng.uniform(lo, hi));
  return t;
}

// Values with |v| in [gap, 1], for ops with a kink at zero.
inline Tensor random_tensor_away_from_zero(Shape shape, Rng& rng, double gap = 0.05) {
  Tensor t(std::move(shape));
  for (auto& v : t.data) {
    const double m = rng.uniform(gap, 1.0);
    v = static_cast<float>(rng.uniform() < 0.5 ? -m : m);
  }
  return t;
}

inline double dot(const std::vector<float>& a, const std::vector<float>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += static_cast<double>(a[i]) * b[i];
  return s;
}

}  // namespace axg::testutil
