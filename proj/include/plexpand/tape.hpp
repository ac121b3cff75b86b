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
// Straight-line evaluation procedures over an elemental library.
//
// A procedure is a topologically ordered list of nodes, each applying one
// elemental operation to earlier nodes.  There is no control flow.  min and
// max are first-class opcodes at construction time and are rewritten in
// terms of abs by lower_minmax(); linearization accepts only lowered tapes.

#ifndef PLEXPAND_TAPE_HPP
#define PLEXPAND_TAPE_HPP

#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "plexpand/errors.hpp"

namespace plexpand {

enum class OpKind {
  kInput,
  kConst,
  kAdd,
  kSub,
  kMul,
  kDiv,
  kNeg,
  kAbs,
  kMin,
  kMax,
  kSin,
  kCos,
  kExp,
  kLog,
  kSqrt,
  kSquare,
  kPowInt,
  kRecip,
  kCustom,
};

struct Opcode {
  OpKind kind = OpKind::kConst;
  int slot = -1;      // kInput: independent-variable index
  double value = 0;   // kConst
  int exponent = 0;   // kPowInt, >= 2
  int custom = -1;    // kCustom: index into the procedure's elemental table
};

// A user-supplied elemental.  The value function and its partial
// derivatives must be total on the domain the procedure is used on.
// deriv_lipschitz_hint optionally bounds the Lipschitz constant of the
// partial derivative per argument (used by the certificate module).
// For univariate elementals, higher_derivative(k, u) = phi^(k)(u) enables
// the optional series-based secant kernel when use_series_kernel is set.
// A circle-valued elemental (e.g. a polar angle) sets value_period; its
// secant difference quotients are then taken modulo the period, so a
// branch cut between the two sample points does not produce jump slopes.
struct CustomElemental {
  std::string name;
  int arity = 1;
  std::function<double(std::span<const double>)> value;
  std::vector<std::function<double(std::span<const double>)>> partials;
  std::vector<double> deriv_lipschitz_hint;
  std::function<double(int, double)> higher_derivative;
  bool use_series_kernel = false;
  double value_period = 0.0;  // 0 disables the modular quotient
};

struct TapeNode {
  Opcode op;
  std::vector<int> preds;
};

// Number of predecessors an opcode takes; custom opcodes declare their own.
inline int opcode_arity(OpKind kind) {
  switch (kind) {
    case OpKind::kInput:
    case OpKind::kConst:
      return 0;
    case OpKind::kAdd:
    case OpKind::kSub:
    case OpKind::kMul:
    case OpKind::kDiv:
    case OpKind::kMin:
    case OpKind::kMax:
      return 2;
    case OpKind::kCustom:
      return -1;
    default:
      return 1;
  }
}

inline const char* opcode_name(OpKind kind) {
  switch (kind) {
    case OpKind::kInput: return "input";
    case OpKind::kConst: return "const";
    case OpKind::kAdd: return "add";
    case OpKind::kSub: return "sub";
    case OpKind::kMul: return "mul";
    case OpKind::kDiv: return "div";
    case OpKind::kNeg: return "neg";
    case OpKind::kAbs: return "abs";
    case OpKind::kMin: return "min";
    case OpKind::kMax: return "max";
    case OpKind::kSin: return "sin";
    case OpKind::kCos: return "cos";
    case OpKind::kExp: return "exp";
    case OpKind::kLog: return "log";
    case OpKind::kSqrt: return "sqrt";
    case OpKind::kSquare: return "sqr";
    case OpKind::kPowInt: return "pow";
    case OpKind::kRecip: return "recip";
    case OpKind::kCustom: return "custom";
  }
  return "?";
}

class TapeBuilder;

// Immutable straight-line program for F: R^n -> R^m.  Safe to share across
// threads; evaluation allocates its own trace.
class EvalProcedure {
 public:
  int input_dim() const { return n_; }
  int output_dim() const { return static_cast<int>(outputs_.size()); }
  int abs_count() const { return s_; }
  int size() const { return static_cast<int>(nodes_.size()); }

  const std::vector<TapeNode>& nodes() const { return nodes_; }
  const TapeNode& node(int i) const { return nodes_[static_cast<size_t>(i)]; }
  const std::vector<int>& outputs() const { return outputs_; }

  const CustomElemental& elemental(int id) const {
    return *elementals_[static_cast<size_t>(id)];
  }
  const std::vector<std::shared_ptr<const CustomElemental>>& elementals()
      const {
    return elementals_;
  }

  bool has_minmax() const {
    for (const TapeNode& nd : nodes_) {
      if (nd.op.kind == OpKind::kMin || nd.op.kind == OpKind::kMax) {
        return true;
      }
    }
    return false;
  }

 private:
  friend class TapeBuilder;
  EvalProcedure() = default;

  int n_ = 0;
  int s_ = 0;
  std::vector<TapeNode> nodes_;
  std::vector<int> outputs_;
  std::vector<std::shared_ptr<const CustomElemental>> elementals_;
};

using ProcedurePtr = std::shared_ptr<const EvalProcedure>;

// Incremental tape construction; validates topological order and arity on
// every append so a finished procedure can never read an unwritten value.
class TapeBuilder {
 public:
  explicit TapeBuilder(int input_dim) : n_(input_dim) {
    if (input_dim < 0) throw TapeError("negative input dimension");
  }

  int input(int slot) {
    if (slot < 0 || slot >= n_) {
      throw TapeError("input slot " + std::to_string(slot) +
                      " out of range for dimension " + std::to_string(n_));
    }
    Opcode op;
    op.kind = OpKind::kInput;
    op.slot = slot;
    return append(op, {});
  }

  int constant(double v) {
    Opcode op;
    op.kind = OpKind::kConst;
    op.value = v;
    return append(op, {});
  }

  int add(int a, int b) { return binary(OpKind::kAdd, a, b); }
  int sub(int a, int b) { return binary(OpKind::kSub, a, b); }
  int mul(int a, int b) { return binary(OpKind::kMul, a, b); }
  int div(int a, int b) { return binary(OpKind::kDiv, a, b); }
  int min(int a, int b) { return binary(OpKind::kMin, a, b); }
  int max(int a, int b) { return binary(OpKind::kMax, a, b); }

  int neg(int a) { return unary(OpKind::kNeg, a); }
  int abs(int a) { return unary(OpKind::kAbs, a); }
  int sin(int a) { return unary(OpKind::kSin, a); }
  int cos(int a) { return unary(OpKind::kCos, a); }
  int exp(int a) { return unary(OpKind::kExp, a); }
  int log(int a) { return unary(OpKind::kLog, a); }
  int sqrt(int a) { return unary(OpKind::kSqrt, a); }
  int square(int a) { return unary(OpKind::kSquare, a); }
  int recip(int a) { return unary(OpKind::kRecip, a); }

  int pow_int(int a, int exponent) {
    if (exponent < 2) {
      throw TapeError("integer power requires exponent >= 2");
    }
    Opcode op;
    op.kind = OpKind::kPowInt;
    op.exponent = exponent;
    return append(op, {a});
  }

  // Registers a custom elemental under its name; returns its id.
  int register_custom(CustomElemental elem) {
    for (const auto& e : elementals_) {
      if (e->name == elem.name) {
        throw DuplicateElementalError("elemental '" + elem.name +
                                      "' already registered");
      }
    }
    if (elem.arity < 1) throw TapeError("custom elemental arity must be >= 1");
    if (static_cast<int>(elem.partials.size()) != elem.arity) {
      throw TapeError("custom elemental '" + elem.name + "' declares " +
                      std::to_string(elem.partials.size()) +
                      " partials for arity " + std::to_string(elem.arity));
    }
    elementals_.push_back(
        std::make_shared<const CustomElemental>(std::move(elem)));
    return static_cast<int>(elementals_.size()) - 1;
  }

  int custom(int id, std::vector<int> args) {
    if (id < 0 || id >= static_cast<int>(elementals_.size())) {
      throw TapeError("unknown custom elemental id " + std::to_string(id));
    }
    if (static_cast<int>(args.size()) != elementals_[id]->arity) {
      throw TapeError("elemental '" + elementals_[id]->name + "' expects " +
                      std::to_string(elementals_[id]->arity) + " arguments");
    }
    Opcode op;
    op.kind = OpKind::kCustom;
    op.custom = id;
    return append(op, std::move(args));
  }

  // Low-level append used by tape-to-tape transforms.
  int append(Opcode op, std::vector<int> preds) {
    const int arity = opcode_arity(op.kind);
    if (arity >= 0 && static_cast<int>(preds.size()) != arity) {
      throw TapeError(std::string(opcode_name(op.kind)) + " expects " +
                      std::to_string(arity) + " predecessors");
    }
    if (op.kind == OpKind::kPowInt && op.exponent < 2) {
      throw TapeError("integer power requires exponent >= 2");
    }
    const int self = static_cast<int>(nodes_.size());
    for (int p : preds) {
      if (p < 0 || p >= self) {
        throw TapeError("node " + std::to_string(self) +
                        " references predecessor " + std::to_string(p) +
                        " out of topological order");
      }
    }
    nodes_.push_back(TapeNode{op, std::move(preds)});
    return self;
  }

  void mark_output(int node) {
    if (node < 0 || node >= static_cast<int>(nodes_.size())) {
      throw TapeError("output index out of range");
    }
    outputs_.push_back(node);
  }

  int current_size() const { return static_cast<int>(nodes_.size()); }

  ProcedurePtr finalize() {
    if (outputs_.empty()) throw TapeError("procedure has no outputs");
    auto proc = std::shared_ptr<EvalProcedure>(new EvalProcedure());
    proc->n_ = n_;
    proc->nodes_ = std::move(nodes_);
    proc->outputs_ = std::move(outputs_);
    proc->elementals_ = std::move(elementals_);
    proc->s_ = 0;
    for (const TapeNode& nd : proc->nodes_) {
      if (nd.op.kind == OpKind::kAbs) ++proc->s_;
    }
    return proc;
  }

 private:
  int binary(OpKind kind, int a, int b) {
    Opcode op;
    op.kind = kind;
    return append(op, {a, b});
  }
  int unary(OpKind kind, int a) {
    Opcode op;
    op.kind = kind;
    return append(op, {a});
  }

  int n_;
  std::vector<TapeNode> nodes_;
  std::vector<int> outputs_;
  std::vector<std::shared_ptr<const CustomElemental>> elementals_;
};

// One value per node plus the output vector; evaluation fails rather than
// store a non-finite value.
struct EvalTrace {
  std::vector<double> values;
  std::vector<double> outputs;
};

inline EvalTrace evaluate(const EvalProcedure& proc, std::span<const double> x) {
  if (static_cast<int>(x.size()) != proc.input_dim()) {
    throw TapeError("evaluation point has dimension " +
                    std::to_string(x.size()) + ", procedure expects " +
                    std::to_string(proc.input_dim()));
  }
  EvalTrace trace;
  trace.values.resize(proc.nodes().size());
  std::vector<double> args;
  for (size_t i = 0; i < proc.nodes().size(); ++i) {
    const TapeNode& nd = proc.nodes()[i];
    const auto pred = [&](int k) {
      return trace.values[static_cast<size_t>(nd.preds[static_cast<size_t>(k)])];
    };
    double v = 0;
    switch (nd.op.kind) {
      case OpKind::kInput:
        v = x[static_cast<size_t>(nd.op.slot)];
        break;
      case OpKind::kConst:
        v = nd.op.value;
        break;
      case OpKind::kAdd:
        v = pred(0) + pred(1);
        break;
      case OpKind::kSub:
        v = pred(0) - pred(1);
        break;
      case OpKind::kMul:
        v = pred(0) * pred(1);
        break;
      case OpKind::kDiv:
        if (pred(1) == 0.0) {
          throw DomainError("division by zero", static_cast<int>(i));
        }
        v = pred(0) / pred(1);
        break;
      case OpKind::kNeg:
        v = -pred(0);
        break;
      case OpKind::kAbs:
        v = std::fabs(pred(0));
        break;
      case OpKind::kMin:
        v = std::fmin(pred(0), pred(1));
        break;
      case OpKind::kMax:
        v = std::fmax(pred(0), pred(1));
        break;
      case OpKind::kSin:
        v = std::sin(pred(0));
        break;
      case OpKind::kCos:
        v = std::cos(pred(0));
        break;
      case OpKind::kExp:
        v = std::exp(pred(0));
        break;
      case OpKind::kLog:
        if (pred(0) <= 0.0) {
          throw DomainError("log of non-positive value", static_cast<int>(i));
        }
        v = std::log(pred(0));
        break;
      case OpKind::kSqrt:
        if (pred(0) < 0.0) {
          throw DomainError("sqrt of negative value", static_cast<int>(i));
        }
        v = std::sqrt(pred(0));
        break;
      case OpKind::kSquare:
        v = pred(0) * pred(0);
        break;
      case OpKind::kPowInt: {
        // Exponentiation by plain repeated product keeps integer powers
        // bit-reproducible across platforms.
        double base = pred(0);
        v = 1.0;
        for (int k = 0; k < nd.op.exponent; ++k) v *= base;
        break;
      }
      case OpKind::kRecip:
        if (pred(0) == 0.0) {
          throw DomainError("reciprocal of zero", static_cast<int>(i));
        }
        v = 1.0 / pred(0);
        break;
      case OpKind::kCustom: {
        const CustomElemental& elem = proc.elemental(nd.op.custom);
        args.resize(nd.preds.size());
        for (size_t k = 0; k < nd.preds.size(); ++k) {
          args[k] = trace.values[static_cast<size_t>(nd.preds[k])];
        }
        v = elem.value(args);
        break;
      }
    }
    if (!std::isfinite(v)) {
      throw DomainError("non-finite value from " +
                            std::string(opcode_name(nd.op.kind)),
                        static_cast<int>(i));
    }
    trace.values[i] = v;
  }
  trace.outputs.reserve(proc.outputs().size());
  for (int o : proc.outputs()) {
    trace.outputs.push_back(trace.values[static_cast<size_t>(o)]);
  }
  return trace;
}

// Rewrites max(u,w) as (u+w+abs(u-w))/2 and min(u,w) as (u+w-abs(u-w))/2.
// Values are preserved wherever both operands are finite; the abs count
// grows by exactly the number of rewritten nodes.
inline ProcedurePtr lower_minmax(const EvalProcedure& proc) {
  TapeBuilder tb(proc.input_dim());
  for (const auto& elem : proc.elementals()) {
    // Transfer registered elementals verbatim (ids are preserved).
    tb.register_custom(*elem);
  }
  std::vector<int> remap(proc.nodes().size());
  int half = -1;  // shared 0.5 constant, created on first use
  for (size_t i = 0; i < proc.nodes().size(); ++i) {
    const TapeNode& nd = proc.nodes()[i];
    if (nd.op.kind == OpKind::kMin || nd.op.kind == OpKind::kMax) {
      const int u = remap[static_cast<size_t>(nd.preds[0])];
      const int w = remap[static_cast<size_t>(nd.preds[1])];
      const int sum = tb.add(u, w);
      const int dif = tb.sub(u, w);
      const int mag = tb.abs(dif);
      const int comb = nd.op.kind == OpKind::kMax ? tb.add(sum, mag)
                                                  : tb.sub(sum, mag);
      if (half < 0) half = tb.constant(0.5);
      remap[i] = tb.mul(comb, half);
    } else {
      std::vector<int> preds;
      preds.reserve(nd.preds.size());
      for (int p : nd.preds) preds.push_back(remap[static_cast<size_t>(p)]);
      remap[i] = tb.append(nd.op, std::move(preds));
    }
  }
  for (int o : proc.outputs()) {
    tb.mark_output(remap[static_cast<size_t>(o)]);
  }
  return tb.finalize();
}

inline ProcedurePtr lower_minmax(const ProcedurePtr& proc) {
  return lower_minmax(*proc);
}

}  // namespace plexpand

#endif  // PLEXPAND_TAPE_HPP
