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
// Piecewise linear tangent and secant models of evaluation procedures.
//
// Both modes propagate a midpoint/radius pair per node through the stable
// kernels; tangent mode is the radius-zero case, so a secant model built
// from two coinciding points is bit-identical to the tangent model.  Smooth
// elementals are replaced by their (secant) slopes while abs stays a true
// abs on the shifted argument, which keeps the model piecewise linear and
// continuous and reproduces the endpoint values exactly.

#ifndef PLEXPAND_LINEARIZE_HPP
#define PLEXPAND_LINEARIZE_HPP

#include <cmath>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "plexpand/kernels.hpp"
#include "plexpand/tape.hpp"

namespace plexpand {

enum class LinMode { kTangent, kSecant };

// Relative radius threshold below which the per-argument difference
// quotient of a custom elemental falls back to the partial derivative at
// the midpoint.
inline constexpr double kCustomSlopeCutoff = 1e-7;

struct PLModel {
  struct NodeModel {
    bool is_abs = false;
    // Linear nodes: one slope per predecessor (empty for input/const).
    std::vector<double> coeff;
    // Abs nodes: increment = |anchor_arg + dv_pred| - anchor_out.
    double anchor_arg = 0.0;
    double anchor_out = 0.0;
  };

  LinMode mode = LinMode::kTangent;
  ProcedurePtr proc;
  std::vector<double> point_lo;   // x_check (== center in tangent mode)
  std::vector<double> point_hi;   // x_hat
  std::vector<double> center;     // (x_check + x_hat) / 2
  std::vector<double> ref_output; // model value at the center
  std::vector<MidRad> ref;        // per-node reference pair
  std::vector<NodeModel> nodes;
};

namespace detail {

inline PLModel linearize_impl(const ProcedurePtr& proc,
                              std::span<const double> xlo,
                              std::span<const double> xhi, LinMode mode) {
  if (proc->has_minmax()) {
    throw TapeError("procedure contains min/max; call lower_minmax first");
  }
  // Evaluating at the endpoints validates the domain and fails early with
  // the offending node.
  evaluate(*proc, xlo);
  if (mode == LinMode::kSecant) evaluate(*proc, xhi);

  PLModel model;
  model.mode = mode;
  model.proc = proc;
  model.point_lo.assign(xlo.begin(), xlo.end());
  model.point_hi.assign(xhi.begin(), xhi.end());
  model.center.resize(xlo.size());
  for (size_t k = 0; k < xlo.size(); ++k) {
    model.center[k] = 0.5 * (xlo[k] + xhi[k]);
  }
  model.ref.resize(proc->nodes().size());
  model.nodes.resize(proc->nodes().size());

  std::vector<double> args_lo, args_hi, args_mid, probe;
  for (size_t i = 0; i < proc->nodes().size(); ++i) {
    const TapeNode& nd = proc->nodes()[i];
    const auto in = [&](int k) {
      return model.ref[static_cast<size_t>(nd.preds[static_cast<size_t>(k)])];
    };
    MidRad out;
    PLModel::NodeModel nm;
    switch (nd.op.kind) {
      case OpKind::kInput: {
        const size_t slot = static_cast<size_t>(nd.op.slot);
        out.mid = 0.5 * (xlo[slot] + xhi[slot]);
        out.rad = 0.5 * (xhi[slot] - xlo[slot]);
        break;
      }
      case OpKind::kConst:
        out = {nd.op.value, 0.0};
        break;
      case OpKind::kAdd: {
        const BinaryKernel k = secant_add(in(0), in(1));
        out = k.out;
        nm.coeff = {k.slope_lhs, k.slope_rhs};
        break;
      }
      case OpKind::kSub: {
        const BinaryKernel k = secant_sub(in(0), in(1));
        out = k.out;
        nm.coeff = {k.slope_lhs, k.slope_rhs};
        break;
      }
      case OpKind::kMul: {
        const BinaryKernel k = secant_mul(in(0), in(1));
        out = k.out;
        nm.coeff = {k.slope_lhs, k.slope_rhs};
        break;
      }
      case OpKind::kDiv: {
        const BinaryKernel k = secant_div(in(0), in(1));
        out = k.out;
        nm.coeff = {k.slope_lhs, k.slope_rhs};
        break;
      }
      case OpKind::kNeg: {
        const UnaryKernel k = secant_neg(in(0));
        out = k.out;
        nm.coeff = {k.slope};
        break;
      }
      case OpKind::kAbs: {
        const MidRad u = in(0);
        const double alo = std::fabs(u.lo());
        const double ahi = std::fabs(u.hi());
        nm.is_abs = true;
        nm.anchor_arg = u.mid;
        nm.anchor_out = 0.5 * (alo + ahi);
        out.mid = nm.anchor_out;
        out.rad = 0.5 * (ahi - alo);
        break;
      }
      case OpKind::kSin: {
        const UnaryKernel k = secant_sin(in(0));
        out = k.out;
        nm.coeff = {k.slope};
        break;
      }
      case OpKind::kCos: {
        const UnaryKernel k = secant_cos(in(0));
        out = k.out;
        nm.coeff = {k.slope};
        break;
      }
      case OpKind::kExp: {
        const UnaryKernel k = secant_exp(in(0));
        out = k.out;
        nm.coeff = {k.slope};
        break;
      }
      case OpKind::kLog: {
        const UnaryKernel k = secant_log(in(0));
        out = k.out;
        nm.coeff = {k.slope};
        break;
      }
      case OpKind::kSqrt: {
        const MidRad u = in(0);
        if (u.lo() <= 0.0 || u.hi() <= 0.0) {
          throw DerivativeDomainError("sqrt slope undefined at non-positive value",
                                      static_cast<int>(i));
        }
        const UnaryKernel k = secant_sqrt(u);
        out = k.out;
        nm.coeff = {k.slope};
        break;
      }
      case OpKind::kSquare: {
        const UnaryKernel k = secant_square(in(0));
        out = k.out;
        nm.coeff = {k.slope};
        break;
      }
      case OpKind::kPowInt: {
        const UnaryKernel k = secant_powint(in(0), nd.op.exponent);
        out = k.out;
        nm.coeff = {k.slope};
        break;
      }
      case OpKind::kRecip: {
        const UnaryKernel k = secant_recip(in(0));
        out = k.out;
        nm.coeff = {k.slope};
        break;
      }
      case OpKind::kMin:
      case OpKind::kMax:
        throw TapeError("min/max reached linearization");  // guarded above
      case OpKind::kCustom: {
        const CustomElemental& elem = proc->elemental(nd.op.custom);
        const size_t arity = nd.preds.size();
        if (elem.use_series_kernel && elem.higher_derivative && arity == 1) {
          const MidRad u = in(0);
          std::vector<double> derivs(9);
          for (int k = 0; k <= 8; ++k) {
            derivs[static_cast<size_t>(k)] = elem.higher_derivative(k, u.mid);
          }
          const UnaryKernel k = secant_series(derivs, u.rad);
          out = k.out;
          nm.coeff = {k.slope};
          break;
        }
        args_lo.resize(arity);
        args_hi.resize(arity);
        args_mid.resize(arity);
        for (size_t k = 0; k < arity; ++k) {
          const MidRad u = model.ref[static_cast<size_t>(nd.preds[k])];
          args_lo[k] = u.lo();
          args_hi[k] = u.hi();
          args_mid[k] = u.mid;
        }
        const double vlo = elem.value(args_lo);
        const double vhi = elem.value(args_hi);
        out.mid = 0.5 * (vlo + vhi);
        out.rad = 0.5 * (vhi - vlo);
        // Per-argument secant slope: vary one argument over its endpoint
        // values with the others frozen at their midpoints; fall back to
        // the midpoint partial when the spread is too small.  Periodic
        // values difference through the nearest branch.
        nm.coeff.resize(arity);
        probe = args_mid;
        for (size_t k = 0; k < arity; ++k) {
          const MidRad u = model.ref[static_cast<size_t>(nd.preds[k])];
          if (std::fabs(u.rad) >
              kCustomSlopeCutoff * (1.0 + std::fabs(u.mid))) {
            probe[k] = u.hi();
            const double fhi = elem.value(probe);
            probe[k] = u.lo();
            const double flo = elem.value(probe);
            double diff = fhi - flo;
            if (elem.value_period > 0.0) {
              diff -= elem.value_period * std::round(diff / elem.value_period);
            }
            nm.coeff[k] = diff / (2.0 * u.rad);
          } else {
            nm.coeff[k] = elem.partials[k](args_mid);
          }
          probe[k] = args_mid[k];
        }
        break;
      }
    }
    if (!std::isfinite(out.mid) || !std::isfinite(out.rad)) {
      throw DerivativeDomainError(
          "non-finite reference pair from " +
              std::string(opcode_name(nd.op.kind)),
          static_cast<int>(i));
    }
    for (double c : nm.coeff) {
      if (!std::isfinite(c)) {
        throw DerivativeDomainError(
            "non-finite slope from " + std::string(opcode_name(nd.op.kind)),
            static_cast<int>(i));
      }
    }
    model.ref[i] = out;
    model.nodes[i] = std::move(nm);
  }

  model.ref_output.reserve(proc->outputs().size());
  for (int o : proc->outputs()) {
    model.ref_output.push_back(model.ref[static_cast<size_t>(o)].mid);
  }
  return model;
}

}  // namespace detail

inline PLModel tangent(const ProcedurePtr& proc, std::span<const double> x0) {
  return detail::linearize_impl(proc, x0, x0, LinMode::kTangent);
}

inline PLModel secant(const ProcedurePtr& proc, std::span<const double> xlo,
                      std::span<const double> xhi) {
  return detail::linearize_impl(proc, xlo, xhi, LinMode::kSecant);
}

// Increment function dx -> dF(dx); globally defined, continuous and
// piecewise linear.
inline std::vector<double> eval_increment(const PLModel& model,
                                          std::span<const double> dx) {
  const EvalProcedure& proc = *model.proc;
  std::vector<double> dv(proc.nodes().size());
  for (size_t i = 0; i < proc.nodes().size(); ++i) {
    const TapeNode& nd = proc.nodes()[i];
    const PLModel::NodeModel& nm = model.nodes[i];
    if (nd.op.kind == OpKind::kInput) {
      dv[i] = dx[static_cast<size_t>(nd.op.slot)];
    } else if (nd.op.kind == OpKind::kConst) {
      dv[i] = 0.0;
    } else if (nm.is_abs) {
      dv[i] = std::fabs(nm.anchor_arg + dv[static_cast<size_t>(nd.preds[0])]) -
              nm.anchor_out;
    } else {
      double acc = 0.0;
      for (size_t k = 0; k < nd.preds.size(); ++k) {
        acc += nm.coeff[k] * dv[static_cast<size_t>(nd.preds[k])];
      }
      dv[i] = acc;
    }
  }
  std::vector<double> out;
  out.reserve(proc.outputs().size());
  for (int o : proc.outputs()) out.push_back(dv[static_cast<size_t>(o)]);
  return out;
}

// Nonincremental form: reference output plus the increment at x - center.
inline std::vector<double> eval_model(const PLModel& model,
                                      std::span<const double> x) {
  std::vector<double> dx(x.size());
  for (size_t k = 0; k < x.size(); ++k) dx[k] = x[k] - model.center[k];
  std::vector<double> y = eval_increment(model, dx);
  for (size_t o = 0; o < y.size(); ++o) y[o] += model.ref_output[o];
  return y;
}

}  // namespace plexpand

#endif  // PLEXPAND_LINEARIZE_HPP
