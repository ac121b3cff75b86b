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
// Singularity-free secant kernels in midpoint-radius form.
//
// A pair of traces (v_check, v_hat) is carried per tape node as
// mid = (v_check + v_hat)/2 and rad = (v_hat - v_check)/2; the radius is
// signed and may be negative.  Each kernel maps the argument pair to the
// result pair together with the secant slope, written so that no division
// by the radius occurs.  At rad == 0 every kernel reduces exactly to the
// tangent value/derivative, which makes the secant model coalesce with the
// tangent model without any exception handling.

#ifndef PLEXPAND_KERNELS_HPP
#define PLEXPAND_KERNELS_HPP

#include <cmath>
#include <vector>

#include "plexpand/errors.hpp"

namespace plexpand {

// Midpoint/signed-radius representation of a pair of values.
struct MidRad {
  double mid = 0.0;
  double rad = 0.0;

  double lo() const { return mid - rad; }  // v_check
  double hi() const { return mid + rad; }  // v_hat
};

// Below this threshold the four-term even series of sinc/sinhc/artanhc is
// correct to < 1e-17 relative; above it the closed form has no cancellation.
inline constexpr double kKernelSeriesCutoff = 1.220703125e-4;  // 2^-13

// sin(t)/t with the removable singularity handled by series.
inline double sinc(double t) {
  if (std::fabs(t) < kKernelSeriesCutoff) {
    const double t2 = t * t;
    return 1.0 - t2 / 6.0 * (1.0 - t2 / 20.0 * (1.0 - t2 / 42.0));
  }
  return std::sin(t) / t;
}

// sinh(t)/t.
inline double sinhc(double t) {
  if (std::fabs(t) < kKernelSeriesCutoff) {
    const double t2 = t * t;
    return 1.0 + t2 / 6.0 * (1.0 + t2 / 20.0 * (1.0 + t2 / 42.0));
  }
  return std::sinh(t) / t;
}

// artanh(t)/t, defined for |t| < 1.
inline double artanhc(double t) {
  if (std::fabs(t) >= 1.0) {
    throw DomainError("artanhc requires |t| < 1");
  }
  if (std::fabs(t) < kKernelSeriesCutoff) {
    const double t2 = t * t;
    return 1.0 + t2 * (1.0 / 3.0 + t2 * (1.0 / 5.0 + t2 / 7.0));
  }
  return std::atanh(t) / t;
}

// Result of a univariate kernel: output pair plus the secant slope c with
// rad_out == c * rad_in (exactly in real arithmetic).
struct UnaryKernel {
  MidRad out;
  double slope = 0.0;
};

// Result of a binary kernel: output pair plus one slope per argument.
struct BinaryKernel {
  MidRad out;
  double slope_lhs = 0.0;
  double slope_rhs = 0.0;
};

inline BinaryKernel secant_add(MidRad a, MidRad b) {
  return {{a.mid + b.mid, a.rad + b.rad}, 1.0, 1.0};
}

inline BinaryKernel secant_sub(MidRad a, MidRad b) {
  return {{a.mid - b.mid, a.rad - b.rad}, 1.0, -1.0};
}

inline BinaryKernel secant_mul(MidRad a, MidRad b) {
  return {{a.mid * b.mid + a.rad * b.rad, a.rad * b.mid + a.mid * b.rad},
          b.mid,
          a.mid};
}

// Division via the reciprocal: the denominator (mid-rad)(mid+rad) is the
// product of the two endpoint values and vanishes only if an endpoint
// divides by zero.
inline BinaryKernel secant_div(MidRad a, MidRad b) {
  const double den = b.lo() * b.hi();
  return {{(a.mid * b.mid - a.rad * b.rad) / den,
           (a.rad * b.mid - a.mid * b.rad) / den},
          b.mid / den,
          -a.mid / den};
}

inline UnaryKernel secant_neg(MidRad u) { return {{-u.mid, -u.rad}, -1.0}; }

inline UnaryKernel secant_recip(MidRad u) {
  const double den = u.lo() * u.hi();
  return {{u.mid / den, -u.rad / den}, -1.0 / den};
}

inline UnaryKernel secant_sin(MidRad u) {
  return {{std::sin(u.mid) * std::cos(u.rad), std::cos(u.mid) * std::sin(u.rad)},
          std::cos(u.mid) * sinc(u.rad)};
}

inline UnaryKernel secant_cos(MidRad u) {
  return {{std::cos(u.mid) * std::cos(u.rad), -std::sin(u.mid) * std::sin(u.rad)},
          -std::sin(u.mid) * sinc(u.rad)};
}

inline UnaryKernel secant_exp(MidRad u) {
  const double e = std::exp(u.mid);
  return {{e * std::cosh(u.rad), e * std::sinh(u.rad)}, e * sinhc(u.rad)};
}

// Requires both endpoint values positive, i.e. mid > |rad|.
inline UnaryKernel secant_log(MidRad u) {
  const double prod = u.lo() * u.hi();
  const double t = u.rad / u.mid;
  return {{0.5 * std::log(prod), std::atanh(t)}, artanhc(t) / u.mid};
}

inline UnaryKernel secant_square(MidRad u) {
  return {{u.mid * u.mid + u.rad * u.rad, 2.0 * u.mid * u.rad}, 2.0 * u.mid};
}

// Integer monomial u^n via the binomial split into even/odd powers of the
// radius; valid for any base sign.
inline UnaryKernel secant_powint(MidRad u, int n) {
  // mid_pow[k] = mid^k, rad_pow[k] = rad^k built by plain products.
  std::vector<double> mid_pow(static_cast<size_t>(n) + 1, 1.0);
  std::vector<double> rad_pow(static_cast<size_t>(n) + 1, 1.0);
  for (int k = 1; k <= n; ++k) {
    mid_pow[k] = mid_pow[k - 1] * u.mid;
    rad_pow[k] = rad_pow[k - 1] * u.rad;
  }
  double even = 0.0, odd = 0.0, slope = 0.0;
  double binom = 1.0;  // C(n, k)
  for (int k = 0; k <= n; ++k) {
    const double term = binom * mid_pow[n - k] * rad_pow[k];
    if (k % 2 == 0) {
      even += term;
    } else {
      odd += term;
      slope += binom * mid_pow[n - k] * rad_pow[k - 1];
    }
    binom = binom * (n - k) / (k + 1);
  }
  return {{even, odd}, slope};
}

// General power u^c through exp(c*log(u)); requires positive endpoints.
// Each stage is singularity free, so the composite is as well.
inline UnaryKernel secant_power(MidRad u, double c) {
  const UnaryKernel lg = secant_log(u);
  const MidRad scaled{c * lg.out.mid, c * lg.out.rad};
  const UnaryKernel ex = secant_exp(scaled);
  return {ex.out, ex.slope * c * lg.slope};
}

inline UnaryKernel secant_sqrt(MidRad u) { return secant_power(u, 0.5); }

// Series kernel for a custom univariate elemental that supplies
// derivatives phi^(k); truncation order 8.
inline UnaryKernel secant_series(const std::vector<double>& derivs_at_mid,
                                 double rad) {
  double even = 0.0, odd = 0.0, slope = 0.0;
  double factorial = 1.0;
  double rad_prev = 0.0;  // rad^(k-1)
  double rad_pow = 1.0;   // rad^k
  for (size_t k = 0; k < derivs_at_mid.size(); ++k) {
    if (k > 0) {
      factorial *= static_cast<double>(k);
      rad_prev = rad_pow;
      rad_pow *= rad;
    }
    const double coeff = derivs_at_mid[k] / factorial;
    if (k % 2 == 0) {
      even += coeff * rad_pow;
    } else {
      odd += coeff * rad_pow;
      slope += coeff * rad_prev;
    }
  }
  return {{even, odd}, slope};
}

}  // namespace plexpand

#endif  // PLEXPAND_KERNELS_HPP
