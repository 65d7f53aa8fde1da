#ifndef GLRU_INTERVAL_HPP
#define GLRU_INTERVAL_HPP

#include <algorithm>
#include <limits>

namespace glru {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Closed extended-real interval [lo, hi]; either endpoint may be infinite.
struct interval {
  double lo = 0.0;
  double hi = 0.0;

  static constexpr interval point(double v) { return {v, v}; }
  static constexpr interval whole() { return {-kInf, kInf}; }

  constexpr bool contains(double v) const { return lo <= v && v <= hi; }
  constexpr bool contains(const interval &o) const {
    return lo <= o.lo && o.hi <= hi;
  }
  constexpr bool is_point() const { return lo == hi; }
  constexpr bool bounded() const { return lo > -kInf && hi < kInf; }
  constexpr double width() const { return hi - lo; }

  constexpr interval intersect(const interval &o) const {
    return {std::max(lo, o.lo), std::min(hi, o.hi)};
  }

  friend constexpr bool operator==(const interval &, const interval &) = default;
};

}  // namespace glru

#endif  // GLRU_INTERVAL_HPP
