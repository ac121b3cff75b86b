// Copyright 2026 The plexpand Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
// Interval arithmetic for range enclosures.  Bounds are widened outward by
// a few ulps after every operation; overestimation only loosens the
// certificates built on top, never invalidates them.  This is not a
// directed-rounding implementation.

#ifndef PLEXPAND_INTERVAL_HPP
#define PLEXPAND_INTERVAL_HPP

#include <algorithm>
#include <cmath>
#include <limits>

#include "plexpand/errors.hpp"

namespace plexpand {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  bool contains(double v) const { return lo <= v && v <= hi; }
  double width() const { return hi - lo; }
  double mag() const { return std::fmax(std::fabs(lo), std::fabs(hi)); }
  // Smallest absolute value over the interval.
  double mig() const {
    if (lo <= 0.0 && 0.0 <= hi) return 0.0;
    return std::fmin(std::fabs(lo), std::fabs(hi));
  }
};

inline Interval outward(Interval v) {
  v.lo = std::nextafter(std::nextafter(v.lo, -INFINITY), -INFINITY);
  v.hi = std::nextafter(std::nextafter(v.hi, INFINITY), INFINITY);
  return v;
}

inline Interval ipoint(double v) { return outward({v, v}); }

inline Interval iadd(Interval a, Interval b) {
  return outward({a.lo + b.lo, a.hi + b.hi});
}

inline Interval isub(Interval a, Interval b) {
  return outward({a.lo - b.hi, a.hi - b.lo});
}

inline Interval ineg(Interval a) { return {-a.hi, -a.lo}; }

inline Interval imul(Interval a, Interval b) {
  const double p1 = a.lo * b.lo, p2 = a.lo * b.hi;
  const double p3 = a.hi * b.lo, p4 = a.hi * b.hi;
  return outward({std::min(std::min(p1, p2), std::min(p3, p4)),
                  std::max(std::max(p1, p2), std::max(p3, p4))});
}

inline Interval irecip(Interval a, int node = -1) {
  if (a.lo <= 0.0 && 0.0 <= a.hi) {
    throw DomainError("reciprocal of interval containing zero", node);
  }
  return outward({1.0 / a.hi, 1.0 / a.lo});
}

inline Interval idiv(Interval a, Interval b, int node = -1) {
  return imul(a, irecip(b, node));
}

inline Interval iabs(Interval a) {
  return outward({a.mig(), a.mag()});
}

inline Interval imin(Interval a, Interval b) {
  return outward({std::fmin(a.lo, b.lo), std::fmin(a.hi, b.hi)});
}

inline Interval imax(Interval a, Interval b) {
  return outward({std::fmax(a.lo, b.lo), std::fmax(a.hi, b.hi)});
}

inline Interval iexp(Interval a) {
  return outward({std::exp(a.lo), std::exp(a.hi)});
}

inline Interval ilog(Interval a, int node = -1) {
  if (a.lo <= 0.0) {
    throw DomainError("log of interval reaching zero", node);
  }
  return outward({std::log(a.lo), std::log(a.hi)});
}

inline Interval isqrt(Interval a, int node = -1) {
  if (a.lo < 0.0) {
    throw DomainError("sqrt of interval with negative part", node);
  }
  return outward({std::sqrt(a.lo), std::sqrt(a.hi)});
}

inline Interval isquare(Interval a) {
  const double m = a.mag();
  const double lo = a.mig();
  return outward({lo * lo, m * m});
}

inline Interval ipowint(Interval a, int n) {
  if (n % 2 == 0) {
    const double m = a.mag();
    const double lo = a.mig();
    double plo = 1.0, phi = 1.0;
    for (int k = 0; k < n; ++k) {
      plo *= lo;
      phi *= m;
    }
    return outward({plo, phi});
  }
  // Odd powers are monotone.
  double plo = 1.0, phi = 1.0;
  for (int k = 0; k < n; ++k) {
    plo *= a.lo;
    phi *= a.hi;
  }
  return outward({plo, phi});
}

namespace detail {

// True if the interval contains a point of the form (offset + k*period).
inline bool contains_grid_point(Interval a, double offset, double period) {
  const double k_lo = std::ceil((a.lo - offset) / period);
  return offset + k_lo * period <= a.hi;
}

}  // namespace detail

inline Interval isin(Interval a) {
  constexpr double kPi = 3.14159265358979323846;
  if (a.width() >= 2.0 * kPi) return {-1.0, 1.0};
  double lo = std::fmin(std::sin(a.lo), std::sin(a.hi));
  double hi = std::fmax(std::sin(a.lo), std::sin(a.hi));
  // Interior extrema at pi/2 + 2k*pi (max) and -pi/2 + 2k*pi (min).
  if (detail::contains_grid_point(a, kPi / 2.0, 2.0 * kPi)) hi = 1.0;
  if (detail::contains_grid_point(a, -kPi / 2.0, 2.0 * kPi)) lo = -1.0;
  return outward({std::fmax(lo, -1.0), std::fmin(hi, 1.0)});
}

inline Interval icos(Interval a) {
  constexpr double kPi = 3.14159265358979323846;
  if (a.width() >= 2.0 * kPi) return {-1.0, 1.0};
  double lo = std::fmin(std::cos(a.lo), std::cos(a.hi));
  double hi = std::fmax(std::cos(a.lo), std::cos(a.hi));
  if (detail::contains_grid_point(a, 0.0, 2.0 * kPi)) hi = 1.0;
  if (detail::contains_grid_point(a, kPi, 2.0 * kPi)) lo = -1.0;
  return outward({std::fmax(lo, -1.0), std::fmin(hi, 1.0)});
}

}  // namespace plexpand

#endif  // PLEXPAND_INTERVAL_HPP
