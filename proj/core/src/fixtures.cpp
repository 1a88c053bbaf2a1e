#include "rse/fixtures.hpp"

#include <cmath>

namespace rse {

VectorMap make_polar_map() {
  return VectorMap(
      "polar", 2, BlockLayout({2, 1, 1}),
      [](const Vector& x) -> Vector {
        const double r = x[0], th = x[1];
        Vector out(4);
        out << r * std::cos(th), r * std::sin(th), std::tan(th), th;
        return out;
      },
      [](const Vector& x) -> Matrix {
        const double r = x[0], th = x[1];
        Matrix J(4, 2);
        J << std::cos(th), -r * std::sin(th),
             std::sin(th),  r * std::cos(th),
             0.0, 1.0 / (std::cos(th) * std::cos(th)),
             0.0, 1.0;
        return J;
      });
}

VectorMap make_projected_polar_map() {
  return VectorMap(
      "polar_projected", 2, BlockLayout({2, 1, 1}),
      [](const Vector& x) -> Vector {
        const double th = x[1];
        Vector out(4);
        out << std::cos(th), std::sin(th), std::tan(th), th;
        return out;
      },
      [](const Vector& x) -> Matrix {
        const double th = x[1];
        Matrix J(4, 2);
        J << 0.0, -std::sin(th),
             0.0,  std::cos(th),
             0.0, 1.0 / (std::cos(th) * std::cos(th)),
             0.0, 1.0;
        return J;
      });
}

CompactSetSpec polar_domain() {
  Vector lo(2), hi(2);
  lo << 1.0, 0.0;
  hi << 2.0, M_PI / 4.0;
  return CompactSetSpec::box(lo, hi);
}

}  // namespace rse
