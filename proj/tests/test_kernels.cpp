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

#include "plexpand/kernels.hpp"

#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <random>

using namespace plexpand;

namespace {

// Extended-precision references, independent of the double kernels.
long double sinc_ref(long double t) {
  if (t == 0.0L) return 1.0L;
  if (std::fabs(t) < 1e-4L) {
    const long double t2 = t * t;
    return 1.0L - t2 / 6.0L + t2 * t2 / 120.0L - t2 * t2 * t2 / 5040.0L;
  }
  return std::sin(t) / t;
}

long double sinhc_ref(long double t) {
  if (t == 0.0L) return 1.0L;
  if (std::fabs(t) < 1e-4L) {
    const long double t2 = t * t;
    return 1.0L + t2 / 6.0L + t2 * t2 / 120.0L + t2 * t2 * t2 / 5040.0L;
  }
  return std::sinh(t) / t;
}

long double artanhc_ref(long double t) {
  if (t == 0.0L) return 1.0L;
  if (std::fabs(t) < 1e-4L) {
    const long double t2 = t * t;
    return 1.0L + t2 / 3.0L + t2 * t2 / 5.0L + t2 * t2 * t2 / 7.0L;
  }
  return std::atanh(t) / t;
}

double rel_err(double got, long double want) {
  return static_cast<double>(std::fabs(static_cast<long double>(got) - want) /
                             std::fabs(want));
}

// Raw secant slope (phi(hi) - phi(lo)) / (hi - lo); only used at well
// separated endpoints where cancellation is harmless.
template <typename F>
double raw_slope(F phi, MidRad u) {
  return (phi(u.hi()) - phi(u.lo())) / (u.hi() - u.lo());
}

}  // namespace

TEST_CASE("removable singularities") {
  CHECK(sinc(0.0) == 1.0);
  CHECK(sinhc(0.0) == 1.0);
  CHECK(artanhc(0.0) == 1.0);
  CHECK(std::fabs(sinc(3.14159265358979323846)) < 1e-15);
  CHECK_THROWS_AS(artanhc(1.0), DomainError);
  CHECK_THROWS_AS(artanhc(-1.5), DomainError);
}

TEST_CASE("tiny arguments have no cancellation") {
  CHECK(rel_err(sinhc(1e-8), sinhc_ref(1e-8L)) < 1e-14);
  CHECK(rel_err(sinc(1e-8), sinc_ref(1e-8L)) < 1e-14);
  CHECK(rel_err(artanhc(1e-8), artanhc_ref(1e-8L)) < 1e-14);
  CHECK(sinhc(1e-300) == 1.0);
  CHECK(sinc(-1e-300) == 1.0);
}

TEST_CASE("stable functions vs extended precision sweep") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> expo(-300.0, 1.0);
  for (int k = 0; k < 2000; ++k) {
    const double mag = std::pow(10.0, expo(rng));
    const double t = (k % 2 ? -1 : 1) * mag;
    CAPTURE(t);
    CHECK(rel_err(sinc(t), sinc_ref(t)) < 1e-14);
    CHECK(rel_err(sinhc(t), sinhc_ref(t)) < 1e-14);
    if (std::fabs(t) <= 0.9) {
      CHECK(rel_err(artanhc(t), artanhc_ref(t)) < 1e-14);
    }
  }
  // sinc/sinhc are also needed at moderate arguments.
  for (int k = 1; k <= 100; ++k) {
    const double t = 10.0 * k / 100.0;
    CHECK(rel_err(sinhc(t), sinhc_ref(t)) < 1e-14);
  }
}

TEST_CASE("square kernel matches its closed form") {
  // endpoints 1 and 3: midpoint value 5, slope 4
  const UnaryKernel k = secant_square({2.0, 1.0});
  CHECK(k.out.mid == 5.0);
  CHECK(k.out.rad == 4.0);
  CHECK(k.slope == 4.0);
}

TEST_CASE("log kernel reproduces the difference quotient") {
  // endpoints 1 and e^2: slope (2 - 0) / (e^2 - 1)
  const double e2 = std::exp(2.0);
  const MidRad u{(1.0 + e2) / 2.0, (e2 - 1.0) / 2.0};
  const UnaryKernel k = secant_log(u);
  const double expected = 2.0 / (e2 - 1.0);
  CHECK(k.slope == Catch::Approx(expected).epsilon(1e-14));
  CHECK(k.out.mid == Catch::Approx(1.0).epsilon(1e-14));  // (log 1 + log e^2)/2
  CHECK(k.out.rad == Catch::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("unary kernels agree with raw quotients at separated endpoints") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> mid_d(-2.0, 2.0);
  std::uniform_real_distribution<double> rad_d(1e-3, 1.0);
  for (int k = 0; k < 500; ++k) {
    const MidRad u{mid_d(rng), rad_d(rng) * (k % 2 ? -1 : 1)};
    CAPTURE(u.mid, u.rad);
    CHECK(secant_sin(u).slope ==
          Catch::Approx(raw_slope([](double t) { return std::sin(t); }, u))
              .margin(1e-10));
    CHECK(secant_cos(u).slope ==
          Catch::Approx(raw_slope([](double t) { return std::cos(t); }, u))
              .margin(1e-10));
    CHECK(secant_exp(u).slope ==
          Catch::Approx(raw_slope([](double t) { return std::exp(t); }, u))
              .epsilon(1e-10));
    const MidRad pos{4.0 + mid_d(rng), u.rad};
    CHECK(secant_log(pos).slope ==
          Catch::Approx(raw_slope([](double t) { return std::log(t); }, pos))
              .epsilon(1e-10));
    CHECK(secant_sqrt(pos).slope ==
          Catch::Approx(raw_slope([](double t) { return std::sqrt(t); }, pos))
              .epsilon(1e-10));
    CHECK(secant_powint(u, 5).slope ==
          Catch::Approx(raw_slope([](double t) { return t * t * t * t * t; }, u))
              .epsilon(1e-9));
  }
}

TEST_CASE("kernels reduce to tangent data at radius zero") {
  const double v = 0.7;
  CHECK(secant_sin({v, 0.0}).slope == std::cos(v));
  CHECK(secant_cos({v, 0.0}).slope == -std::sin(v));
  CHECK(secant_exp({v, 0.0}).slope == std::exp(v));
  CHECK(secant_exp({0.0, 0.0}).slope == 1.0);
  CHECK(secant_log({v, 0.0}).slope == 1.0 / v);
  CHECK(secant_square({v, 0.0}).slope == 2.0 * v);
  CHECK(secant_powint({v, 0.0}, 3).slope == 3.0 * v * v);
  CHECK(secant_recip({v, 0.0}).slope == -1.0 / (v * v));
  const UnaryKernel sq = secant_sqrt({v, 0.0});
  CHECK(sq.slope == Catch::Approx(0.5 / std::sqrt(v)).epsilon(1e-14));
  CHECK(sq.out.rad == 0.0);
}

TEST_CASE("binary kernels propagate pairs exactly") {
  const MidRad a{1.3, 0.4};
  const MidRad b{-0.7, 0.25};
  const BinaryKernel mul = secant_mul(a, b);
  CHECK(mul.out.lo() == Catch::Approx(a.lo() * b.lo()).epsilon(1e-14));
  CHECK(mul.out.hi() == Catch::Approx(a.hi() * b.hi()).epsilon(1e-14));
  const BinaryKernel div = secant_div(a, b);
  CHECK(div.out.lo() == Catch::Approx(a.lo() / b.lo()).epsilon(1e-14));
  CHECK(div.out.hi() == Catch::Approx(a.hi() / b.hi()).epsilon(1e-14));
  // interpolation condition: slopes applied to the radii give the radius
  CHECK(div.slope_lhs * a.rad + div.slope_rhs * b.rad ==
        Catch::Approx(div.out.rad).epsilon(1e-13));
}

TEST_CASE("powint kernel interpolates endpoints for any base sign") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> d(-3.0, 3.0);
  for (int k = 0; k < 200; ++k) {
    const MidRad u{d(rng), d(rng)};
    for (int n : {2, 3, 4, 7}) {
      const UnaryKernel kk = secant_powint(u, n);
      const double lo = std::pow(u.lo(), n);
      const double hi = std::pow(u.hi(), n);
      CHECK(kk.out.lo() == Catch::Approx(lo).margin(1e-9 * (1 + std::fabs(lo))));
      CHECK(kk.out.hi() == Catch::Approx(hi).margin(1e-9 * (1 + std::fabs(hi))));
    }
  }
}

TEST_CASE("series kernel matches closed forms for exp") {
  // derivatives of exp at mid are all exp(mid)
  const double mid = 0.3, rad = 0.01;
  std::vector<double> derivs(9, std::exp(mid));
  const UnaryKernel s = secant_series(derivs, rad);
  const UnaryKernel e = secant_exp({mid, rad});
  CHECK(s.out.mid == Catch::Approx(e.out.mid).epsilon(1e-14));
  CHECK(s.out.rad == Catch::Approx(e.out.rad).epsilon(1e-12));
  CHECK(s.slope == Catch::Approx(e.slope).epsilon(1e-14));
}
