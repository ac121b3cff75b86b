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
// Random tape generator for property tests.  Generation is steered by
// interval enclosures over the safe box so that every domain-restricted
// elemental receives a safely bounded argument: the resulting procedures
// evaluate (and certify) without domain errors anywhere in the box.

#ifndef PLEXPAND_TESTS_SUPPORT_RANDOM_TAPE_HPP
#define PLEXPAND_TESTS_SUPPORT_RANDOM_TAPE_HPP

#include <cmath>
#include <random>
#include <vector>

#include "plexpand/bounds.hpp"
#include "plexpand/interval.hpp"
#include "plexpand/tape.hpp"

namespace testsupport {

enum class TapeFamily {
  kPolynomial,     // add/sub/mul/neg/square/powint
  kTrig,           // polynomial plus sin/cos/exp
  kAbsHeavy,       // polynomial plus many abs/min/max
  kSmooth,         // everything smooth incl. div/log/sqrt/recip, no abs
  kPiecewiseLinear,  // add/sub/const-mul/abs only
  kFull,           // everything, including min/max and a custom elemental
};

struct RandomTape {
  plexpand::ProcedurePtr proc;
  plexpand::BoxK safe_box;
};

inline std::vector<double> random_point(std::mt19937_64& rng,
                                        const plexpand::BoxK& box) {
  std::vector<double> x(box.lower.size());
  for (size_t k = 0; k < x.size(); ++k) {
    std::uniform_real_distribution<double> d(box.lower[k], box.upper[k]);
    x[k] = d(rng);
  }
  return x;
}

namespace detail {

// tanh as the stock custom univariate; its derivative has Lipschitz
// constant 4/(3*sqrt(3)) < 0.7699.
inline plexpand::CustomElemental tanh_elemental() {
  plexpand::CustomElemental e;
  e.name = "tanh";
  e.arity = 1;
  e.value = [](std::span<const double> a) { return std::tanh(a[0]); };
  e.partials = {[](std::span<const double> a) {
    const double c = std::cosh(a[0]);
    return 1.0 / (c * c);
  }};
  e.deriv_lipschitz_hint = {0.7699};
  return e;
}

}  // namespace detail

inline RandomTape random_tape(std::mt19937_64& rng, TapeFamily family,
                              int max_ops, int want_n = 0, int want_m = 0) {
  using namespace plexpand;
  const int n = want_n > 0 ? want_n
                           : 1 + static_cast<int>(rng() % 3);
  const int m = want_m > 0 ? want_m
                           : 1 + static_cast<int>(rng() % 2);

  BoxK box;
  box.lower.assign(static_cast<size_t>(n), -0.9);
  box.upper.assign(static_cast<size_t>(n), 0.9);

  TapeBuilder tb(n);
  int tanh_id = -1;
  if (family == TapeFamily::kFull) {
    tanh_id = tb.register_custom(detail::tanh_elemental());
  }

  std::vector<int> pool;
  std::vector<Interval> enc;  // enclosure over the box, per node in `pool`
  std::vector<Interval> node_enc;  // per tape node

  const auto push = [&](int id, Interval e) {
    node_enc.resize(static_cast<size_t>(id) + 1);
    node_enc[static_cast<size_t>(id)] = e;
    pool.push_back(id);
    enc.push_back(e);
  };

  std::uniform_real_distribution<double> cdist(-1.5, 1.5);
  for (int k = 0; k < n; ++k) {
    push(tb.input(k), Interval{box.lower[static_cast<size_t>(k)],
                               box.upper[static_cast<size_t>(k)]});
  }
  for (int k = 0; k < 2; ++k) {
    const double c = cdist(rng);
    push(tb.constant(c), ipoint(c));
  }

  const auto pick = [&](void) -> size_t { return rng() % pool.size(); };

  // Keeps a candidate argument inside [-bound, bound] by scaling.
  const auto bounded = [&](int id, double bound) {
    Interval e = node_enc[static_cast<size_t>(id)];
    if (e.mag() <= bound) return id;
    const double scale = bound / (e.mag() * 1.25);
    const int c = tb.constant(scale);
    const int out = tb.mul(id, c);
    const Interval eo = imul(e, ipoint(scale));
    node_enc.resize(static_cast<size_t>(out) + 1);
    node_enc[static_cast<size_t>(out)] = eo;
    return out;
  };

  // Turns a candidate argument into one strictly positive over the box.
  const auto positive = [&](int id) {
    const int b = bounded(id, 30.0);
    const int sq = tb.square(b);
    const Interval esq = isquare(node_enc[static_cast<size_t>(b)]);
    std::uniform_real_distribution<double> off(0.3, 1.2);
    const double c = off(rng);
    const int cst = tb.constant(c);
    const int out = tb.add(sq, cst);
    node_enc.resize(static_cast<size_t>(out) + 1);
    node_enc[static_cast<size_t>(out)] = iadd(esq, ipoint(c));
    return out;
  };

  enum Op {
    kOpAdd, kOpSub, kOpMulC, kOpAbs,                      // PL core
    kOpMul, kOpNeg, kOpSquare, kOpPow,                    // polynomial
    kOpSin, kOpCos, kOpExp,                               // trig
    kOpDiv, kOpLog, kOpSqrt, kOpRecip,                    // guarded
    kOpMin, kOpMax, kOpCustom,
  };
  std::vector<Op> menu;
  switch (family) {
    case TapeFamily::kPiecewiseLinear:
      menu = {kOpAdd, kOpSub, kOpMulC, kOpAbs, kOpAbs};
      break;
    case TapeFamily::kPolynomial:
      menu = {kOpAdd, kOpSub, kOpMulC, kOpMul, kOpNeg, kOpSquare, kOpPow};
      break;
    case TapeFamily::kTrig:
      menu = {kOpAdd, kOpSub, kOpMul, kOpSin, kOpCos, kOpExp, kOpSquare};
      break;
    case TapeFamily::kAbsHeavy:
      menu = {kOpAdd, kOpSub, kOpMulC, kOpMul, kOpAbs, kOpAbs, kOpAbs,
              kOpSquare, kOpSin};
      break;
    case TapeFamily::kSmooth:
      menu = {kOpAdd, kOpSub, kOpMul, kOpNeg, kOpSquare, kOpPow,
              kOpSin, kOpCos, kOpExp, kOpDiv, kOpLog, kOpSqrt, kOpRecip};
      break;
    case TapeFamily::kFull:
      menu = {kOpAdd, kOpSub, kOpMulC, kOpMul, kOpNeg, kOpSquare, kOpPow,
              kOpSin, kOpCos, kOpExp, kOpDiv, kOpLog, kOpSqrt, kOpRecip,
              kOpAbs, kOpMin, kOpMax, kOpCustom};
      break;
  }

  const int ops = 2 + static_cast<int>(rng() % static_cast<unsigned>(max_ops));
  for (int step = 0; step < ops; ++step) {
    const Op op = menu[rng() % menu.size()];
    const size_t ia = pick();
    const size_t ib = pick();
    const int a = pool[ia], b = pool[ib];
    const Interval ea = enc[ia], eb = enc[ib];
    switch (op) {
      case kOpAdd: push(tb.add(a, b), iadd(ea, eb)); break;
      case kOpSub: push(tb.sub(a, b), isub(ea, eb)); break;
      case kOpNeg: push(tb.neg(a), ineg(ea)); break;
      case kOpAbs: push(tb.abs(a), iabs(ea)); break;
      case kOpMin: push(tb.min(a, b), imin(ea, eb)); break;
      case kOpMax: push(tb.max(a, b), imax(ea, eb)); break;
      case kOpMulC: {
        const double c = cdist(rng);
        const int cn = tb.constant(c);
        push(tb.mul(a, cn), imul(ea, ipoint(c)));
        break;
      }
      case kOpMul: {
        const int aa = bounded(a, 100.0);
        const int bb = bounded(b, 100.0);
        push(tb.mul(aa, bb), imul(node_enc[static_cast<size_t>(aa)],
                                  node_enc[static_cast<size_t>(bb)]));
        break;
      }
      case kOpSquare: {
        const int aa = bounded(a, 100.0);
        push(tb.square(aa), isquare(node_enc[static_cast<size_t>(aa)]));
        break;
      }
      case kOpPow: {
        const int e = 2 + static_cast<int>(rng() % 4);
        const int aa = bounded(a, 8.0);
        push(tb.pow_int(aa, e), ipowint(node_enc[static_cast<size_t>(aa)], e));
        break;
      }
      case kOpSin: {
        const int aa = bounded(a, 20.0);
        push(tb.sin(aa), isin(node_enc[static_cast<size_t>(aa)]));
        break;
      }
      case kOpCos: {
        const int aa = bounded(a, 20.0);
        push(tb.cos(aa), icos(node_enc[static_cast<size_t>(aa)]));
        break;
      }
      case kOpExp: {
        const int aa = bounded(a, 4.0);
        push(tb.exp(aa), iexp(node_enc[static_cast<size_t>(aa)]));
        break;
      }
      case kOpDiv: {
        const int aa = bounded(a, 100.0);
        const int den = positive(b);
        push(tb.div(aa, den), idiv(node_enc[static_cast<size_t>(aa)],
                                   node_enc[static_cast<size_t>(den)]));
        break;
      }
      case kOpLog: {
        const int arg = positive(a);
        push(tb.log(arg), ilog(node_enc[static_cast<size_t>(arg)]));
        break;
      }
      case kOpSqrt: {
        const int arg = positive(a);
        push(tb.sqrt(arg), isqrt(node_enc[static_cast<size_t>(arg)]));
        break;
      }
      case kOpRecip: {
        const int arg = positive(a);
        push(tb.recip(arg), irecip(node_enc[static_cast<size_t>(arg)]));
        break;
      }
      case kOpCustom: {
        const int aa = bounded(a, 20.0);
        const Interval e = node_enc[static_cast<size_t>(aa)];
        push(tb.custom(tanh_id, {aa}),
             Interval{std::tanh(e.lo), std::tanh(e.hi)});
        break;
      }
    }
  }

  // Outputs: always the last node, then random earlier pool entries.
  tb.mark_output(pool.back());
  for (int o = 1; o < m; ++o) {
    tb.mark_output(pool[pick()]);
  }
  return RandomTape{tb.finalize(), std::move(box)};
}

}  // namespace testsupport

#endif  // PLEXPAND_TESTS_SUPPORT_RANDOM_TAPE_HPP
