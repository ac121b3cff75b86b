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
// Row-major dense matrices and LU factorization with partial pivoting for
// the small systems that arise from piece enumeration (n + s <= a few
// dozen).  Determinant signs come from the pivot sequence.

#ifndef PLEXPAND_LINALG_HPP
#define PLEXPAND_LINALG_HPP

#include <cmath>
#include <span>
#include <vector>

#include "plexpand/errors.hpp"

namespace plexpand {

class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols)
      : rows_(rows), cols_(cols),
        a_(static_cast<size_t>(rows) * static_cast<size_t>(cols), 0.0) {}

  static Matrix identity(int n) {
    Matrix m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }

  double& operator()(int r, int c) {
    return a_[static_cast<size_t>(r) * cols_ + c];
  }
  double operator()(int r, int c) const {
    return a_[static_cast<size_t>(r) * cols_ + c];
  }

  std::vector<double>& data() { return a_; }
  const std::vector<double>& data() const { return a_; }

  std::vector<double> apply(std::span<const double> x) const {
    std::vector<double> y(static_cast<size_t>(rows_), 0.0);
    for (int r = 0; r < rows_; ++r) {
      double acc = 0;
      for (int c = 0; c < cols_; ++c) acc += (*this)(r, c) * x[static_cast<size_t>(c)];
      y[static_cast<size_t>(r)] = acc;
    }
    return y;
  }

  // Induced infinity norm: max absolute row sum.
  double inf_norm() const {
    double best = 0;
    for (int r = 0; r < rows_; ++r) {
      double sum = 0;
      for (int c = 0; c < cols_; ++c) sum += std::fabs((*this)(r, c));
      best = std::fmax(best, sum);
    }
    return best;
  }

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> a_;
};

// Compact LU with partial pivoting.  singular is set when a pivot falls
// below pivot_tol relative to the largest entry of the input.
struct LuFactors {
  Matrix lu;
  std::vector<int> perm;
  int perm_sign = 1;
  bool singular = false;
  double scale = 0.0;
};

inline LuFactors lu_factor(Matrix a, double pivot_tol = 1e-13) {
  const int n = a.rows();
  LuFactors f;
  f.perm.resize(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) f.perm[static_cast<size_t>(i)] = i;
  for (double v : a.data()) f.scale = std::fmax(f.scale, std::fabs(v));
  const double tiny = pivot_tol * (f.scale > 0 ? f.scale : 1.0);

  for (int k = 0; k < n; ++k) {
    int piv = k;
    double best = std::fabs(a(k, k));
    for (int r = k + 1; r < n; ++r) {
      const double mag = std::fabs(a(r, k));
      if (mag > best) {
        best = mag;
        piv = r;
      }
    }
    if (best <= tiny) {
      f.singular = true;
      f.lu = std::move(a);
      return f;
    }
    if (piv != k) {
      for (int c = 0; c < n; ++c) std::swap(a(k, c), a(piv, c));
      std::swap(f.perm[static_cast<size_t>(k)], f.perm[static_cast<size_t>(piv)]);
      f.perm_sign = -f.perm_sign;
    }
    for (int r = k + 1; r < n; ++r) {
      const double m = a(r, k) / a(k, k);
      a(r, k) = m;
      for (int c = k + 1; c < n; ++c) a(r, c) -= m * a(k, c);
    }
  }
  f.lu = std::move(a);
  return f;
}

inline std::vector<double> lu_solve(const LuFactors& f,
                                    std::span<const double> rhs) {
  if (f.singular) throw SingularMatrixError("solve with singular factors");
  const int n = f.lu.rows();
  std::vector<double> x(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    x[static_cast<size_t>(i)] = rhs[static_cast<size_t>(f.perm[static_cast<size_t>(i)])];
  }
  for (int i = 0; i < n; ++i) {
    double acc = x[static_cast<size_t>(i)];
    for (int j = 0; j < i; ++j) acc -= f.lu(i, j) * x[static_cast<size_t>(j)];
    x[static_cast<size_t>(i)] = acc;
  }
  for (int i = n - 1; i >= 0; --i) {
    double acc = x[static_cast<size_t>(i)];
    for (int j = i + 1; j < n; ++j) acc -= f.lu(i, j) * x[static_cast<size_t>(j)];
    x[static_cast<size_t>(i)] = acc / f.lu(i, i);
  }
  return x;
}

inline int det_sign(const LuFactors& f) {
  if (f.singular) return 0;
  int sign = f.perm_sign;
  for (int i = 0; i < f.lu.rows(); ++i) {
    if (f.lu(i, i) < 0) sign = -sign;
  }
  return sign;
}

inline Matrix lu_inverse(const LuFactors& f) {
  if (f.singular) throw SingularMatrixError("inverse of singular matrix");
  const int n = f.lu.rows();
  Matrix inv(n, n);
  std::vector<double> e(static_cast<size_t>(n), 0.0);
  for (int c = 0; c < n; ++c) {
    e[static_cast<size_t>(c)] = 1.0;
    const std::vector<double> col = lu_solve(f, e);
    for (int r = 0; r < n; ++r) inv(r, c) = col[static_cast<size_t>(r)];
    e[static_cast<size_t>(c)] = 0.0;
  }
  return inv;
}

inline double inf_norm(std::span<const double> v) {
  double best = 0;
  for (double x : v) best = std::fmax(best, std::fabs(x));
  return best;
}

}  // namespace plexpand

#endif  // PLEXPAND_LINALG_HPP
