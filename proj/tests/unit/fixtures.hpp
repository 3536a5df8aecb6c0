#pragma once

#include <vector>

#include "pdmp/model.hpp"

namespace fx {

inline pdmp::PatchClass class_of(double c) {
  if (c > 0) return pdmp::PatchClass::Source;
  if (c < 0) return pdmp::PatchClass::Sink;
  return pdmp::PatchClass::Neutral;
}

// Two patches, constant growth, constant rates both ways, uniform fractions.
inline pdmp::NetworkModel two_patch(double c1, double c2, double t12 = 1.0, double t21 = 1.0) {
  pdmp::NetworkModel m(2);
  m.set_patch(0, class_of(c1), pdmp::ConstantGrowth{c1});
  m.set_patch(1, class_of(c2), pdmp::ConstantGrowth{c2});
  if (t12 > 0) m.set_transfer({0, 1}, pdmp::ConstantRate{t12}, pdmp::UniformFraction{});
  if (t21 > 0) m.set_transfer({1, 0}, pdmp::ConstantRate{t21}, pdmp::UniformFraction{});
  return m;
}

inline pdmp::NetworkModel frozen(std::size_t n) {
  pdmp::NetworkModel m(n);
  for (std::size_t i = 0; i < n; ++i) m.set_patch(i, pdmp::PatchClass::Neutral, pdmp::ConstantGrowth{0.0});
  return m;
}

inline double l1(const std::vector<double>& x) {
  double s = 0;
  for (double v : x) s += v;
  return s;
}

}  // namespace fx
