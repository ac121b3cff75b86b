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
// Abs-normal matrix form of a piecewise linear model:
//
//   z  = c + Z dx + L |z|      (L strictly lower triangular)
//   dy = b + J dx + Y |z|
//
// The switching vector z is resolvable in one forward sweep.  This is the
// solver-facing representation and the JSON wire format of the toolkit.

#ifndef PLEXPAND_ABS_NORMAL_HPP
#define PLEXPAND_ABS_NORMAL_HPP

#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "plexpand/linalg.hpp"
#include "plexpand/linearize.hpp"

namespace plexpand {

struct AbsNormalForm {
  int n = 0;  // input dimension
  int m = 0;  // output dimension
  int s = 0;  // switching variables
  std::vector<double> c;       // s
  std::vector<double> b;       // m
  Matrix Z;                    // s x n
  Matrix L;                    // s x s, strictly lower triangular
  Matrix J;                    // m x n
  Matrix Y;                    // m x s
  std::vector<double> center;  // development midpoint
  std::vector<double> offset;  // model value at the center
};

// Forward accumulation over the linearized tape.  Every node carries an
// affine form  dv = d + a.dx + y.|z|;  abs nodes define the next switching
// variable from their argument's form.
inline AbsNormalForm abs_normal(const PLModel& model) {
  const EvalProcedure& proc = *model.proc;
  const int n = proc.input_dim();
  const int m = proc.output_dim();
  const int s = proc.abs_count();

  AbsNormalForm anf;
  anf.n = n;
  anf.m = m;
  anf.s = s;
  anf.c.assign(static_cast<size_t>(s), 0.0);
  anf.b.assign(static_cast<size_t>(m), 0.0);
  anf.Z = Matrix(s, n);
  anf.L = Matrix(s, s);
  anf.J = Matrix(m, n);
  anf.Y = Matrix(m, s);
  anf.center = model.center;
  anf.offset = model.ref_output;

  const size_t width = static_cast<size_t>(n) + static_cast<size_t>(s);
  // Affine form per node: [a_0..a_{n-1}, y_0..y_{s-1}] plus constant.
  std::vector<std::vector<double>> form(proc.nodes().size(),
                                        std::vector<double>(width, 0.0));
  std::vector<double> constant(proc.nodes().size(), 0.0);

  int abs_index = 0;
  for (size_t i = 0; i < proc.nodes().size(); ++i) {
    const TapeNode& nd = proc.nodes()[i];
    const PLModel::NodeModel& nm = model.nodes[i];
    if (nd.op.kind == OpKind::kInput) {
      form[i][static_cast<size_t>(nd.op.slot)] = 1.0;
    } else if (nd.op.kind == OpKind::kConst) {
      // zero form
    } else if (nm.is_abs) {
      const size_t j = static_cast<size_t>(nd.preds[0]);
      const int k = abs_index++;
      anf.c[static_cast<size_t>(k)] = nm.anchor_arg + constant[j];
      for (int col = 0; col < n; ++col) {
        anf.Z(k, col) = form[j][static_cast<size_t>(col)];
      }
      for (int col = 0; col < s; ++col) {
        anf.L(k, col) = form[j][static_cast<size_t>(n + col)];
      }
      form[i][static_cast<size_t>(n) + static_cast<size_t>(k)] = 1.0;
      constant[i] = -nm.anchor_out;
    } else {
      for (size_t p = 0; p < nd.preds.size(); ++p) {
        const size_t j = static_cast<size_t>(nd.preds[p]);
        const double w = nm.coeff[p];
        if (w == 0.0) continue;
        constant[i] += w * constant[j];
        for (size_t col = 0; col < width; ++col) {
          form[i][col] += w * form[j][col];
        }
      }
    }
  }

  for (int o = 0; o < m; ++o) {
    const size_t node = static_cast<size_t>(proc.outputs()[static_cast<size_t>(o)]);
    anf.b[static_cast<size_t>(o)] = constant[node];
    for (int col = 0; col < n; ++col) {
      anf.J(o, col) = form[node][static_cast<size_t>(col)];
    }
    for (int col = 0; col < s; ++col) {
      anf.Y(o, col) = form[node][static_cast<size_t>(n + col)];
    }
  }
  return anf;
}

// Switching values for a given increment, by the forward sweep.
inline std::vector<double> switching_values(const AbsNormalForm& anf,
                                            std::span<const double> dx) {
  std::vector<double> z(static_cast<size_t>(anf.s), 0.0);
  for (int k = 0; k < anf.s; ++k) {
    double acc = anf.c[static_cast<size_t>(k)];
    for (int col = 0; col < anf.n; ++col) {
      acc += anf.Z(k, col) * dx[static_cast<size_t>(col)];
    }
    for (int col = 0; col < k; ++col) {
      acc += anf.L(k, col) * std::fabs(z[static_cast<size_t>(col)]);
    }
    z[static_cast<size_t>(k)] = acc;
  }
  return z;
}

// Increment dy for a given dx (matches eval_increment on the source model).
inline std::vector<double> eval_abs_normal(const AbsNormalForm& anf,
                                           std::span<const double> dx) {
  const std::vector<double> z = switching_values(anf, dx);
  std::vector<double> y(anf.b);
  for (int o = 0; o < anf.m; ++o) {
    double acc = y[static_cast<size_t>(o)];
    for (int col = 0; col < anf.n; ++col) {
      acc += anf.J(o, col) * dx[static_cast<size_t>(col)];
    }
    for (int col = 0; col < anf.s; ++col) {
      acc += anf.Y(o, col) * std::fabs(z[static_cast<size_t>(col)]);
    }
    y[static_cast<size_t>(o)] = acc;
  }
  return y;
}

// Nonincremental evaluation: offset + increment at x - center.
inline std::vector<double> eval_abs_normal_at(const AbsNormalForm& anf,
                                              std::span<const double> x) {
  std::vector<double> dx(static_cast<size_t>(anf.n));
  for (int k = 0; k < anf.n; ++k) {
    dx[static_cast<size_t>(k)] = x[static_cast<size_t>(k)] - anf.center[static_cast<size_t>(k)];
  }
  std::vector<double> y = eval_abs_normal(anf, dx);
  for (int o = 0; o < anf.m; ++o) {
    y[static_cast<size_t>(o)] += anf.offset[static_cast<size_t>(o)];
  }
  return y;
}

namespace detail {

inline nlohmann::json matrix_to_json(const Matrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (int r = 0; r < m.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (int c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Matrix matrix_from_json(const nlohmann::json& j, int rows, int cols,
                               const char* name) {
  Matrix m(rows, cols);
  if (static_cast<int>(j.size()) != rows) {
    throw Error(std::string("abs-normal JSON: field ") + name +
                " has wrong row count");
  }
  for (int r = 0; r < rows; ++r) {
    const auto& row = j[static_cast<size_t>(r)];
    if (static_cast<int>(row.size()) != cols) {
      throw Error(std::string("abs-normal JSON: field ") + name +
                  " has wrong column count");
    }
    for (int c = 0; c < cols; ++c) m(r, c) = row[static_cast<size_t>(c)].get<double>();
  }
  return m;
}

}  // namespace detail

inline nlohmann::json to_json(const AbsNormalForm& anf) {
  nlohmann::json j;
  j["n"] = anf.n;
  j["m"] = anf.m;
  j["s"] = anf.s;
  j["center"] = anf.center;
  j["offset"] = anf.offset;
  j["c"] = anf.c;
  j["b"] = anf.b;
  j["Z"] = detail::matrix_to_json(anf.Z);
  j["L"] = detail::matrix_to_json(anf.L);
  j["J"] = detail::matrix_to_json(anf.J);
  j["Y"] = detail::matrix_to_json(anf.Y);
  return j;
}

inline AbsNormalForm abs_normal_from_json(const nlohmann::json& j) {
  AbsNormalForm anf;
  anf.n = j.at("n").get<int>();
  anf.m = j.at("m").get<int>();
  anf.s = j.at("s").get<int>();
  anf.center = j.at("center").get<std::vector<double>>();
  anf.offset = j.at("offset").get<std::vector<double>>();
  anf.c = j.at("c").get<std::vector<double>>();
  anf.b = j.at("b").get<std::vector<double>>();
  anf.Z = detail::matrix_from_json(j.at("Z"), anf.s, anf.n, "Z");
  anf.L = detail::matrix_from_json(j.at("L"), anf.s, anf.s, "L");
  anf.J = detail::matrix_from_json(j.at("J"), anf.m, anf.n, "J");
  anf.Y = detail::matrix_from_json(j.at("Y"), anf.m, anf.s, "Y");
  if (static_cast<int>(anf.center.size()) != anf.n ||
      static_cast<int>(anf.offset.size()) != anf.m ||
      static_cast<int>(anf.c.size()) != anf.s ||
      static_cast<int>(anf.b.size()) != anf.m) {
    throw Error("abs-normal JSON: inconsistent dimensions");
  }
  for (int r = 0; r < anf.s; ++r) {
    for (int cidx = r; cidx < anf.s; ++cidx) {
      if (anf.L(r, cidx) != 0.0) {
        throw Error("abs-normal JSON: L must be strictly lower triangular");
      }
    }
  }
  return anf;
}

}  // namespace plexpand

#endif  // PLEXPAND_ABS_NORMAL_HPP
