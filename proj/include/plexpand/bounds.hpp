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
// Computable Lipschitz certificates over a box.
//
// For every node v the constants satisfy, over the box K,
//
//   |v(x) - v(x~)|            <= beta_v  ||x - x~||_inf
//   |v(x) - model_v(x)|       <= gamma_v/2 ||x - x_check|| ||x - x_hat||
//
// by the recurrences: inputs carry beta = 1, constants 0, additions add,
// abs passes through, and a smooth univariate phi multiplies beta by
// sup|phi'| and maps gamma to sup|phi'| gamma + sup|phi''| beta^2, with the
// suprema taken over an interval enclosure of the argument.  General
// products are first rewritten by the Apollonius identity
// u*w = ((u+w)^2 - (u-w)^2)/4 so only those three shapes remain.

#ifndef PLEXPAND_BOUNDS_HPP
#define PLEXPAND_BOUNDS_HPP

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "plexpand/abs_normal.hpp"
#include "plexpand/interval.hpp"
#include "plexpand/linalg.hpp"
#include "plexpand/tape.hpp"

namespace plexpand {

struct BoxK {
  std::vector<double> lower;
  std::vector<double> upper;

  void validate(int dim) const {
    if (static_cast<int>(lower.size()) != dim ||
        static_cast<int>(upper.size()) != dim) {
      throw CertError("box dimension does not match procedure");
    }
    for (size_t k = 0; k < lower.size(); ++k) {
      if (!(lower[k] <= upper[k]) || !std::isfinite(lower[k]) ||
          !std::isfinite(upper[k])) {
        throw CertError("box must be nonempty and bounded");
      }
    }
  }
};

struct NodeCert {
  Interval enclosure;
  double beta = 0.0;
  double gamma = 0.0;
};

struct LipschitzCerts {
  BoxK box;
  std::vector<NodeCert> per_node;  // indexed by the nodes of the input tape
  double beta_F = 0.0;
  double gamma_F = 0.0;
  // False when a sampled fallback (custom elementals) was involved.
  bool rigorous = true;
};

namespace detail {

inline constexpr int kSampleCount = 10000;

// sup |sin| over an interval: 1 if the interval contains pi/2 + k*pi.
inline double sup_abs_sin(Interval a) {
  constexpr double kPi = 3.14159265358979323846;
  if (a.width() >= kPi || contains_grid_point(a, kPi / 2.0, kPi)) return 1.0;
  return std::fmax(std::fabs(std::sin(a.lo)), std::fabs(std::sin(a.hi)));
}

inline double sup_abs_cos(Interval a) {
  constexpr double kPi = 3.14159265358979323846;
  if (a.width() >= kPi || contains_grid_point(a, 0.0, kPi)) return 1.0;
  return std::fmax(std::fabs(std::cos(a.lo)), std::fabs(std::cos(a.hi)));
}

// Dense-sampling fallback for custom univariate elementals; marks the
// certificate as non-rigorous.
inline double sampled_sup(const std::function<double(std::span<const double>)>& f,
                          Interval range) {
  double best = 0.0;
  double arg[1];
  for (int k = 0; k <= kSampleCount; ++k) {
    arg[0] = range.lo + (range.hi - range.lo) * k / kSampleCount;
    best = std::fmax(best, std::fabs(f(std::span<const double>(arg, 1))));
  }
  return best * 1.02;
}

inline double sampled_lipschitz(
    const std::function<double(std::span<const double>)>& f, Interval range) {
  double best = 0.0;
  double prev = 0.0;
  double arg[1];
  const double step = (range.hi - range.lo) / kSampleCount;
  for (int k = 0; k <= kSampleCount; ++k) {
    arg[0] = range.lo + step * k;
    const double v = f(std::span<const double>(arg, 1));
    if (k > 0 && step > 0) {
      best = std::fmax(best, std::fabs(v - prev) / step);
    }
    prev = v;
  }
  return best * 1.05;
}

inline Interval sampled_enclosure(
    const std::function<double(std::span<const double>)>& f, Interval range) {
  double lo = INFINITY, hi = -INFINITY;
  double arg[1];
  for (int k = 0; k <= kSampleCount; ++k) {
    arg[0] = range.lo + (range.hi - range.lo) * k / kSampleCount;
    const double v = f(std::span<const double>(arg, 1));
    lo = std::fmin(lo, v);
    hi = std::fmax(hi, v);
  }
  const double slack = 0.01 * (hi - lo) + 1e-12;
  return {lo - slack, hi + slack};
}

}  // namespace detail

// Outward-rounded range enclosure per node.  Requires a min/max-lowered
// tape.  Custom univariate elementals are enclosed by dense sampling (the
// caller's certificate is then flagged non-rigorous); multivariate custom
// elementals are not supported here.
inline std::vector<Interval> interval_evaluate(const EvalProcedure& proc,
                                               const BoxK& box) {
  box.validate(proc.input_dim());
  if (proc.has_minmax()) {
    throw TapeError("interval evaluation requires a min/max-lowered tape");
  }
  std::vector<Interval> enc(proc.nodes().size());
  for (size_t i = 0; i < proc.nodes().size(); ++i) {
    const TapeNode& nd = proc.nodes()[i];
    const auto in = [&](int k) {
      return enc[static_cast<size_t>(nd.preds[static_cast<size_t>(k)])];
    };
    const int node = static_cast<int>(i);
    switch (nd.op.kind) {
      case OpKind::kInput:
        enc[i] = {box.lower[static_cast<size_t>(nd.op.slot)],
                  box.upper[static_cast<size_t>(nd.op.slot)]};
        break;
      case OpKind::kConst: enc[i] = ipoint(nd.op.value); break;
      case OpKind::kAdd: enc[i] = iadd(in(0), in(1)); break;
      case OpKind::kSub: enc[i] = isub(in(0), in(1)); break;
      case OpKind::kMul: enc[i] = imul(in(0), in(1)); break;
      case OpKind::kDiv: enc[i] = idiv(in(0), in(1), node); break;
      case OpKind::kNeg: enc[i] = ineg(in(0)); break;
      case OpKind::kAbs: enc[i] = iabs(in(0)); break;
      case OpKind::kSin: enc[i] = isin(in(0)); break;
      case OpKind::kCos: enc[i] = icos(in(0)); break;
      case OpKind::kExp: enc[i] = iexp(in(0)); break;
      case OpKind::kLog: enc[i] = ilog(in(0), node); break;
      case OpKind::kSqrt: enc[i] = isqrt(in(0), node); break;
      case OpKind::kSquare: enc[i] = isquare(in(0)); break;
      case OpKind::kPowInt: enc[i] = ipowint(in(0), nd.op.exponent); break;
      case OpKind::kRecip: enc[i] = irecip(in(0), node); break;
      case OpKind::kMin:
      case OpKind::kMax:
        throw TapeError("min/max reached interval evaluation");
      case OpKind::kCustom: {
        const CustomElemental& elem = proc.elemental(nd.op.custom);
        if (elem.arity != 1) {
          throw CertError("no enclosure rule for multivariate elemental '" +
                          elem.name + "'");
        }
        enc[i] = detail::sampled_enclosure(elem.value, in(0));
        break;
      }
    }
    if (!std::isfinite(enc[i].lo) || !std::isfinite(enc[i].hi)) {
      throw DomainError("unbounded enclosure", node);
    }
  }
  return enc;
}

namespace detail {

// Apollonius rewriting with an index map from original to new nodes.
// Multiplications with a literal-constant operand stay multiplications
// (they are linear); divisions become reciprocal-then-product.
inline std::pair<ProcedurePtr, std::vector<int>> lower_multiplication_impl(
    const EvalProcedure& proc) {
  TapeBuilder tb(proc.input_dim());
  for (const auto& elem : proc.elementals()) tb.register_custom(*elem);
  std::vector<int> remap(proc.nodes().size());
  int quarter = -1;

  const auto is_const = [&proc](int orig_pred) {
    return proc.nodes()[static_cast<size_t>(orig_pred)].op.kind ==
           OpKind::kConst;
  };
  const auto apollonius = [&](int u, int w) {
    const int sum = tb.add(u, w);
    const int ssq = tb.square(sum);
    const int dif = tb.sub(u, w);
    const int dsq = tb.square(dif);
    const int num = tb.sub(ssq, dsq);
    if (quarter < 0) quarter = tb.constant(0.25);
    return tb.mul(num, quarter);
  };

  for (size_t i = 0; i < proc.nodes().size(); ++i) {
    const TapeNode& nd = proc.nodes()[i];
    if (nd.op.kind == OpKind::kMul &&
        !(is_const(nd.preds[0]) || is_const(nd.preds[1]))) {
      remap[i] = apollonius(remap[static_cast<size_t>(nd.preds[0])],
                            remap[static_cast<size_t>(nd.preds[1])]);
    } else if (nd.op.kind == OpKind::kDiv) {
      const int r = tb.recip(remap[static_cast<size_t>(nd.preds[1])]);
      const int u = remap[static_cast<size_t>(nd.preds[0])];
      remap[i] = is_const(nd.preds[0]) ? tb.mul(u, r) : apollonius(u, r);
    } else {
      std::vector<int> preds;
      preds.reserve(nd.preds.size());
      for (int p : nd.preds) preds.push_back(remap[static_cast<size_t>(p)]);
      remap[i] = tb.append(nd.op, std::move(preds));
    }
  }
  for (int o : proc.outputs()) tb.mark_output(remap[static_cast<size_t>(o)]);
  return {tb.finalize(), std::move(remap)};
}

}  // namespace detail

inline ProcedurePtr multiplication_lowering(const EvalProcedure& proc) {
  return detail::lower_multiplication_impl(proc).first;
}

inline ProcedurePtr multiplication_lowering(const ProcedurePtr& proc) {
  return multiplication_lowering(*proc);
}

inline LipschitzCerts beta_gamma(const EvalProcedure& proc, const BoxK& box) {
  box.validate(proc.input_dim());
  if (proc.has_minmax()) {
    throw TapeError("certificates require a min/max-lowered tape");
  }
  const auto [low, remap] = detail::lower_multiplication_impl(proc);
  const std::vector<Interval> enc = interval_evaluate(*low, box);

  std::vector<double> beta(low->nodes().size(), 0.0);
  std::vector<double> gamma(low->nodes().size(), 0.0);
  bool rigorous = true;

  const auto univariate = [&](size_t i, double sup_d1, double sup_d2) {
    const size_t j = static_cast<size_t>(low->nodes()[i].preds[0]);
    beta[i] = beta[j] * sup_d1;
    gamma[i] = sup_d1 * gamma[j] + sup_d2 * beta[j] * beta[j];
  };

  for (size_t i = 0; i < low->nodes().size(); ++i) {
    const TapeNode& nd = low->nodes()[i];
    const auto pred = [&](int k) {
      return static_cast<size_t>(nd.preds[static_cast<size_t>(k)]);
    };
    const auto arg_enc = [&](int k) { return enc[pred(k)]; };
    switch (nd.op.kind) {
      case OpKind::kInput:
        beta[i] = 1.0;
        break;
      case OpKind::kConst:
        break;
      case OpKind::kAdd:
      case OpKind::kSub:
        beta[i] = beta[pred(0)] + beta[pred(1)];
        gamma[i] = gamma[pred(0)] + gamma[pred(1)];
        break;
      case OpKind::kNeg:
      case OpKind::kAbs:
        beta[i] = beta[pred(0)];
        gamma[i] = gamma[pred(0)];
        break;
      case OpKind::kMul: {
        // After lowering only scalings by a constant subtree remain.
        size_t const_side = pred(0), other = pred(1);
        if (beta[const_side] != 0.0 || gamma[const_side] != 0.0) {
          std::swap(const_side, other);
        }
        if (beta[const_side] != 0.0 || gamma[const_side] != 0.0) {
          throw CertError("general product survived lowering");
        }
        const double scale = enc[const_side].mag();
        beta[i] = scale * beta[other];
        gamma[i] = scale * gamma[other];
        break;
      }
      case OpKind::kDiv:
        throw CertError("division survived lowering");
      case OpKind::kSin:
        univariate(i, detail::sup_abs_cos(arg_enc(0)),
                   detail::sup_abs_sin(arg_enc(0)));
        break;
      case OpKind::kCos:
        univariate(i, detail::sup_abs_sin(arg_enc(0)),
                   detail::sup_abs_cos(arg_enc(0)));
        break;
      case OpKind::kExp: {
        const double e = std::exp(arg_enc(0).hi);
        univariate(i, e, e);
        break;
      }
      case OpKind::kLog: {
        const double lo = arg_enc(0).lo;  // > 0 per interval_evaluate
        univariate(i, 1.0 / lo, 1.0 / (lo * lo));
        break;
      }
      case OpKind::kSqrt: {
        const double lo = arg_enc(0).lo;
        if (lo <= 0.0) {
          throw CertError("sqrt slope unbounded over enclosure reaching zero");
        }
        univariate(i, 0.5 / std::sqrt(lo), 0.25 / (lo * std::sqrt(lo)));
        break;
      }
      case OpKind::kSquare: {
        const double m = arg_enc(0).mag();
        univariate(i, 2.0 * m, 2.0);
        break;
      }
      case OpKind::kPowInt: {
        const int p = nd.op.exponent;
        const double m = arg_enc(0).mag();
        double m1 = 1.0, m2 = 1.0;
        for (int k = 0; k < p - 1; ++k) m1 *= m;
        for (int k = 0; k < p - 2; ++k) m2 *= m;
        univariate(i, p * m1, static_cast<double>(p) * (p - 1) * m2);
        break;
      }
      case OpKind::kRecip: {
        const double m = arg_enc(0).mig();  // > 0 per interval_evaluate
        univariate(i, 1.0 / (m * m), 2.0 / (m * m * m));
        break;
      }
      case OpKind::kMin:
      case OpKind::kMax:
        throw TapeError("min/max reached certificate recurrence");
      case OpKind::kCustom: {
        const CustomElemental& elem = low->elemental(nd.op.custom);
        if (elem.arity != 1) {
          throw CertError("no certificate rule for multivariate elemental '" +
                          elem.name + "'");
        }
        rigorous = false;
        const double sup_d1 = detail::sampled_sup(elem.partials[0], arg_enc(0));
        const double sup_d2 =
            elem.deriv_lipschitz_hint.empty()
                ? detail::sampled_lipschitz(elem.partials[0], arg_enc(0))
                : elem.deriv_lipschitz_hint[0];
        univariate(i, sup_d1, sup_d2);
        break;
      }
    }
    if (!std::isfinite(beta[i]) || !std::isfinite(gamma[i]) || beta[i] < 0 ||
        gamma[i] < 0) {
      throw CertError("unbounded Lipschitz constant at node " +
                      std::to_string(i));
    }
  }

  LipschitzCerts certs;
  certs.box = box;
  certs.rigorous = rigorous;
  certs.per_node.resize(proc.nodes().size());
  for (size_t i = 0; i < proc.nodes().size(); ++i) {
    const size_t li = static_cast<size_t>(remap[i]);
    // Nudge pulled-back enclosures outward: the rewritten product equals
    // the original only up to roundoff.
    certs.per_node[i] = {outward(enc[li]), beta[li], gamma[li]};
  }
  for (int o : proc.outputs()) {
    certs.beta_F = std::fmax(certs.beta_F, certs.per_node[static_cast<size_t>(o)].beta);
    certs.gamma_F = std::fmax(certs.gamma_F, certs.per_node[static_cast<size_t>(o)].gamma);
  }
  return certs;
}

inline LipschitzCerts beta_gamma(const ProcedurePtr& proc, const BoxK& box) {
  return beta_gamma(*proc, box);
}

struct StabilityReport {
  double rho = 0.0;      // min over pieces of 1/||A_sigma^{-1}||_inf
  double radius = 0.0;   // rho / gamma_F
  bool unbounded = false;  // gamma_F == 0: every development point works
};

// Degree-constancy radius: all linearizations developed within
// B(center, radius) share the mapping degree of the base model.
inline StabilityReport stability_radius(const AbsNormalForm& anf,
                                        const LipschitzCerts& certs,
                                        int enumeration_cap = 16) {
  if (anf.n != anf.m) {
    throw Error("stability radius requires a square system");
  }
  if (anf.s > enumeration_cap) {
    throw EnumerationCapError(anf.s, enumeration_cap);
  }
  const int n = anf.n, s = anf.s;
  double rho = INFINITY;
  std::vector<int> sigma(static_cast<size_t>(s), 1);
  for (long mask = 0; mask < (1L << s); ++mask) {
    for (int k = 0; k < s; ++k) {
      sigma[static_cast<size_t>(k)] = (mask >> k) & 1 ? 1 : -1;
    }
    // X = (I - L diag(sigma))^{-1} Z by forward substitution.
    Matrix x = anf.Z;
    for (int r = 0; r < s; ++r) {
      for (int c = 0; c < n; ++c) {
        double acc = anf.Z(r, c);
        for (int k = 0; k < r; ++k) {
          acc += anf.L(r, k) * sigma[static_cast<size_t>(k)] * x(k, c);
        }
        x(r, c) = acc;
      }
    }
    Matrix a = anf.J;
    for (int r = 0; r < n; ++r) {
      for (int c = 0; c < n; ++c) {
        double acc = a(r, c);
        for (int k = 0; k < s; ++k) {
          acc += anf.Y(r, k) * sigma[static_cast<size_t>(k)] * x(k, c);
        }
        a(r, c) = acc;
      }
    }
    const LuFactors f = lu_factor(a);
    if (f.singular) throw SingularPieceError(sigma);
    rho = std::fmin(rho, 1.0 / lu_inverse(f).inf_norm());
  }

  StabilityReport rep;
  rep.rho = rho;
  if (certs.gamma_F > 0) {
    rep.radius = rho / certs.gamma_F;
  } else {
    rep.radius = INFINITY;
    rep.unbounded = true;
  }
  return rep;
}

inline nlohmann::json to_json(const LipschitzCerts& certs) {
  nlohmann::json j;
  j["K"] = {{"lower", certs.box.lower}, {"upper", certs.box.upper}};
  nlohmann::json nodes = nlohmann::json::array();
  for (const NodeCert& c : certs.per_node) {
    nodes.push_back({{"lo", c.enclosure.lo},
                     {"hi", c.enclosure.hi},
                     {"beta", c.beta},
                     {"gamma", c.gamma}});
  }
  j["per_node"] = std::move(nodes);
  j["beta_F"] = certs.beta_F;
  j["gamma_F"] = certs.gamma_F;
  j["rigorous"] = certs.rigorous;
  return j;
}

}  // namespace plexpand

#endif  // PLEXPAND_BOUNDS_HPP
