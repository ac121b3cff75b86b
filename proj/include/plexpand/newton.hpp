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
// Generalized Newton methods by successive piecewise linearization.
//
// Tangent mode linearizes at the current iterate, secant mode through the
// last two iterates; the next iterate is the root of the piecewise linear
// model closest to the development point (midpoint in secant mode).  There
// is no globalization: divergence and undefined steps are reported, not
// repaired.

#ifndef PLEXPAND_NEWTON_HPP
#define PLEXPAND_NEWTON_HPP

#include <cmath>
#include <iomanip>
#include <limits>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "plexpand/abs_normal.hpp"
#include "plexpand/linearize.hpp"
#include "plexpand/plsolve.hpp"

namespace plexpand {

struct NewtonOptions {
  int max_iterations = 50;
  double residual_tolerance = 1e-13;
  double step_tolerance = 0.0;  // 0 disables the step-size stop
  SolveOptions solve;
  enum class Solver { kEnumeration, kModulusThenEnumeration };
  Solver solver = Solver::kEnumeration;
};

enum class NewtonStatus { kConverged, kNoRoot, kMaxIterations, kDomainError };

inline const char* to_string(NewtonStatus s) {
  switch (s) {
    case NewtonStatus::kConverged: return "converged";
    case NewtonStatus::kNoRoot: return "no-root";
    case NewtonStatus::kMaxIterations: return "max-iterations";
    case NewtonStatus::kDomainError: return "domain-error";
  }
  return "?";
}

struct NewtonReport {
  LinMode mode = LinMode::kTangent;
  std::vector<std::vector<double>> iterates;
  std::vector<double> residual_norms;  // ||F(x_k)||_inf, aligned with iterates
  NewtonStatus status = NewtonStatus::kMaxIterations;
  int failure_index = -1;  // iterate index for no-root / domain-error
  int solves = 0;          // linearization + inner-solve steps taken
  std::optional<double> rate_estimate;
};

// Empirical convergence order from the step lengths d_k = ||x_{k+1}-x_k||:
//   log(d_{n+1}/d_n) / log(d_n/d_{n-1})
// at the last index where all three steps sit above the roundoff floor.
inline double rate_estimate(const std::vector<std::vector<double>>& iterates) {
  if (iterates.size() < 4) {
    throw InsufficientDataError("rate estimate needs at least 4 iterates");
  }
  const double floor = 1e2 * std::numeric_limits<double>::epsilon();
  std::vector<double> d;
  d.reserve(iterates.size() - 1);
  for (size_t k = 0; k + 1 < iterates.size(); ++k) {
    double step = 0;
    for (size_t j = 0; j < iterates[k].size(); ++j) {
      step = std::fmax(step, std::fabs(iterates[k + 1][j] - iterates[k][j]));
    }
    d.push_back(step);
  }
  for (size_t n = d.size() - 2; n >= 1; --n) {
    if (d[n - 1] > floor && d[n] > floor && d[n + 1] > floor &&
        d[n] != d[n - 1]) {
      const double denom = std::log(d[n] / d[n - 1]);
      if (denom != 0.0) return std::log(d[n + 1] / d[n]) / denom;
    }
    if (n == 1) break;
  }
  throw InsufficientDataError("no step triple above the roundoff floor");
}

namespace detail {

inline NewtonReport run_newton(const ProcedurePtr& proc,
                               std::vector<std::vector<double>> start,
                               LinMode mode, const NewtonOptions& opt) {
  if (proc->input_dim() != proc->output_dim()) {
    throw Error("Newton iteration requires a square system");
  }
  NewtonReport rep;
  rep.mode = mode;
  const std::vector<double> target(static_cast<size_t>(proc->output_dim()), 0.0);

  const auto residual_at = [&](std::span<const double> x) {
    return inf_norm(evaluate(*proc, x).outputs);
  };

  // Residuals of the starting points; a domain failure here is recorded,
  // not thrown.
  for (const auto& x : start) {
    rep.iterates.push_back(x);
    try {
      rep.residual_norms.push_back(residual_at(x));
    } catch (const DomainError&) {
      rep.status = NewtonStatus::kDomainError;
      rep.failure_index = static_cast<int>(rep.iterates.size()) - 1;
      return rep;
    }
    if (rep.residual_norms.back() <= opt.residual_tolerance) {
      rep.status = NewtonStatus::kConverged;
      return rep;
    }
  }

  for (int it = 0; it < opt.max_iterations; ++it) {
    const size_t last = rep.iterates.size() - 1;
    std::vector<double> next;
    try {
      PLModel model;
      std::vector<double> center;
      if (mode == LinMode::kTangent) {
        center = rep.iterates[last];
        model = tangent(proc, center);
      } else {
        model = secant(proc, rep.iterates[last - 1], rep.iterates[last]);
        center = model.center;
      }
      const AbsNormalForm anf = abs_normal(model);
      ++rep.solves;
      if (opt.solver == NewtonOptions::Solver::kModulusThenEnumeration) {
        auto fast = modulus_iteration(anf, target);
        if (fast) next = std::move(*fast);
      }
      if (next.empty()) {
        next = min_norm_root(anf, center, target, opt.solve);
      }
    } catch (const DomainError&) {
      rep.status = NewtonStatus::kDomainError;
      rep.failure_index = static_cast<int>(last);
      return rep;
    } catch (const NoRootError&) {
      rep.status = NewtonStatus::kNoRoot;
      rep.failure_index = static_cast<int>(last);
      return rep;
    }

    rep.iterates.push_back(next);
    try {
      rep.residual_norms.push_back(residual_at(next));
    } catch (const DomainError&) {
      rep.status = NewtonStatus::kDomainError;
      rep.failure_index = static_cast<int>(rep.iterates.size()) - 1;
      return rep;
    }
    const double res = rep.residual_norms.back();
    if (res <= opt.residual_tolerance) {
      rep.status = NewtonStatus::kConverged;
      break;
    }
    if (opt.step_tolerance > 0.0) {
      double step = 0;
      for (size_t j = 0; j < next.size(); ++j) {
        step = std::fmax(step, std::fabs(next[j] - rep.iterates[last][j]));
      }
      if (step <= opt.step_tolerance) break;
    }
    // Roundoff floor: one ulp at the iterate scale is the best a residual
    // can resolve.  Stop when the residual reaches that floor or when two
    // consecutive residuals agree to 4 such ulps.
    const double scale_ulp =
        std::numeric_limits<double>::epsilon() * (1.0 + inf_norm(next));
    if (res <= 32.0 * scale_ulp) break;
    const size_t nr = rep.residual_norms.size();
    if (nr >= 2 &&
        std::fabs(rep.residual_norms[nr - 2] - res) <= 4.0 * scale_ulp) {
      break;
    }
  }
  if (rep.status != NewtonStatus::kConverged) {
    rep.status = NewtonStatus::kMaxIterations;
  }
  try {
    rep.rate_estimate = rate_estimate(rep.iterates);
  } catch (const InsufficientDataError&) {
    rep.rate_estimate = std::nullopt;
  }
  return rep;
}

}  // namespace detail

inline NewtonReport newton_tangent(const ProcedurePtr& proc,
                                   std::span<const double> x0,
                                   const NewtonOptions& opt = {}) {
  NewtonReport rep = detail::run_newton(
      proc, {std::vector<double>(x0.begin(), x0.end())}, LinMode::kTangent,
      opt);
  return rep;
}

// Two starting points.  Coinciding starts silently degrade to the tangent
// iteration (the coalescent secant model is the tangent model).
inline NewtonReport newton_secant(const ProcedurePtr& proc,
                                  std::span<const double> x0,
                                  std::span<const double> x1,
                                  const NewtonOptions& opt = {}) {
  std::vector<double> a(x0.begin(), x0.end());
  std::vector<double> b(x1.begin(), x1.end());
  NewtonReport rep =
      a == b ? detail::run_newton(proc, {std::move(a)}, LinMode::kTangent, opt)
             : detail::run_newton(proc, {std::move(a), std::move(b)},
                                  LinMode::kSecant, opt);
  rep.mode = LinMode::kSecant;
  return rep;
}

// Aligned two-column text table: iteration index and residual norm.
inline std::string format_report_table(const NewtonReport& rep) {
  std::ostringstream os;
  os << "iteration | residual\n";
  os << "----------+----------------------\n";
  for (size_t k = 0; k < rep.residual_norms.size(); ++k) {
    os << std::setw(9) << k << " | " << std::setprecision(12)
       << rep.residual_norms[k] << "\n";
  }
  os << "status: " << to_string(rep.status);
  if (rep.failure_index >= 0) os << " at iterate " << rep.failure_index;
  os << "\n";
  if (rep.rate_estimate) {
    os << "rate estimate: " << std::setprecision(6) << *rep.rate_estimate
       << "\n";
  }
  return os.str();
}

inline nlohmann::json to_json(const NewtonReport& rep) {
  nlohmann::json j;
  j["mode"] = rep.mode == LinMode::kTangent ? "tangent" : "secant";
  j["status"] = to_string(rep.status);
  if (rep.failure_index >= 0) j["failure_index"] = rep.failure_index;
  j["iterates"] = rep.iterates;
  j["residuals"] = rep.residual_norms;
  j["solves"] = rep.solves;
  if (rep.rate_estimate) j["rate_estimate"] = *rep.rate_estimate;
  return j;
}

}  // namespace plexpand

#endif  // PLEXPAND_NEWTON_HPP
