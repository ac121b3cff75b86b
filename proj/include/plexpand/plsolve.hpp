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
// Solvers for piecewise linear systems in abs-normal form.
//
// Piece enumeration walks every signature sigma in {-1,+1}^s, solves the
// coupled (n+s) linear system with |z| replaced by diag(sigma) z and keeps
// solutions whose switching variables are sign consistent.  Roots on piece
// boundaries are found by both adjacent signatures and deduplicated, so
// kink roots are not lost.  The merged root set is ordered by signature
// regardless of how the enumeration was scheduled.

#ifndef PLEXPAND_PLSOLVE_HPP
#define PLEXPAND_PLSOLVE_HPP

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <thread>
#include <vector>

#include <json.hpp>

#include "plexpand/abs_normal.hpp"
#include "plexpand/linalg.hpp"

namespace plexpand {

struct SolveOptions {
  int enumeration_cap = 16;
  int jobs = 1;
  // Sign-consistency slack: sigma_k z_k >= -sign_tol_scale * (1 + ||z||).
  double sign_tol_scale = 1e-12;
  // Roots closer than dedup_tol * (1 + ||x||) coincide.
  double dedup_tol = 1e-9;
};

struct PlRoot {
  std::vector<double> x;      // root in original coordinates
  std::vector<int> sigma;     // owning signature
  int det_sign = 0;           // sign of det of the piece Jacobian
  std::vector<double> z;      // switching values at the root
  long signature_index = 0;   // sigma as a bit mask, for deterministic order
};

struct RootSet {
  std::vector<PlRoot> roots;
  int skipped_singular = 0;
};

namespace detail {

// Piece Jacobian in x-space: A = J + Y diag(sigma) (I - L diag(sigma))^{-1} Z.
inline Matrix piece_matrix(const AbsNormalForm& anf,
                           const std::vector<int>& sigma) {
  const int n = anf.n, s = anf.s;
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
  return a;
}

// Solves one signature; returns the root when it is sign consistent.
inline std::optional<PlRoot> solve_signature(const AbsNormalForm& anf,
                                             std::span<const double> target,
                                             long mask,
                                             const SolveOptions& opt,
                                             bool& singular) {
  const int n = anf.n, s = anf.s;
  std::vector<int> sigma(static_cast<size_t>(s));
  for (int k = 0; k < s; ++k) {
    sigma[static_cast<size_t>(k)] = (mask >> k) & 1 ? 1 : -1;
  }

  // Coupled system in (dx, z):
  //   J dx + Y diag(sigma) z          = target - offset - b
  //  -Z dx + (I - L diag(sigma)) z    = c
  const int dim = n + s;
  Matrix sys(dim, dim);
  std::vector<double> rhs(static_cast<size_t>(dim), 0.0);
  for (int r = 0; r < n; ++r) {
    for (int c2 = 0; c2 < n; ++c2) sys(r, c2) = anf.J(r, c2);
    for (int k = 0; k < s; ++k) {
      sys(r, n + k) = anf.Y(r, k) * sigma[static_cast<size_t>(k)];
    }
    rhs[static_cast<size_t>(r)] = target[static_cast<size_t>(r)] -
                                  anf.offset[static_cast<size_t>(r)] -
                                  anf.b[static_cast<size_t>(r)];
  }
  for (int r = 0; r < s; ++r) {
    for (int c2 = 0; c2 < n; ++c2) sys(n + r, c2) = -anf.Z(r, c2);
    for (int k = 0; k < s; ++k) {
      sys(n + r, n + k) = (r == k ? 1.0 : 0.0) -
                          anf.L(r, k) * sigma[static_cast<size_t>(k)];
    }
    rhs[static_cast<size_t>(n + r)] = anf.c[static_cast<size_t>(r)];
  }

  const LuFactors f = lu_factor(sys);
  if (f.singular) {
    singular = true;
    return std::nullopt;
  }
  const std::vector<double> sol = lu_solve(f, rhs);

  PlRoot root;
  root.z.assign(sol.begin() + n, sol.end());
  const double tol = opt.sign_tol_scale * (1.0 + inf_norm(root.z));
  for (int k = 0; k < s; ++k) {
    if (sigma[static_cast<size_t>(k)] * root.z[static_cast<size_t>(k)] < -tol) {
      return std::nullopt;
    }
  }
  root.x.resize(static_cast<size_t>(n));
  for (int k = 0; k < n; ++k) {
    root.x[static_cast<size_t>(k)] =
        anf.center[static_cast<size_t>(k)] + sol[static_cast<size_t>(k)];
  }
  root.sigma = std::move(sigma);
  root.signature_index = mask;
  root.det_sign = det_sign(lu_factor(piece_matrix(anf, root.sigma)));
  return root;
}

}  // namespace detail

// All roots of (model == target) by signature enumeration.  Requires a
// square system and s within the enumeration cap.
inline RootSet enumerate_roots(const AbsNormalForm& anf,
                               std::span<const double> target,
                               const SolveOptions& opt = {}) {
  if (anf.n != anf.m) {
    throw Error("piece enumeration requires a square system");
  }
  if (anf.s > opt.enumeration_cap) {
    throw EnumerationCapError(anf.s, opt.enumeration_cap);
  }
  const long total = 1L << anf.s;
  const int jobs = std::max(1, std::min<int>(opt.jobs, static_cast<int>(total)));

  std::vector<std::vector<PlRoot>> found(static_cast<size_t>(jobs));
  std::vector<int> singular_counts(static_cast<size_t>(jobs), 0);

  const auto worker = [&](int w) {
    for (long mask = w; mask < total; mask += jobs) {
      bool singular = false;
      auto root = detail::solve_signature(anf, target, mask, opt, singular);
      if (singular) ++singular_counts[static_cast<size_t>(w)];
      if (root) found[static_cast<size_t>(w)].push_back(std::move(*root));
    }
  };
  if (jobs == 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(jobs));
    for (int w = 0; w < jobs; ++w) pool.emplace_back(worker, w);
    for (auto& t : pool) t.join();
  }

  RootSet rs;
  for (int w = 0; w < jobs; ++w) {
    rs.skipped_singular += singular_counts[static_cast<size_t>(w)];
    for (auto& r : found[static_cast<size_t>(w)]) {
      rs.roots.push_back(std::move(r));
    }
  }
  std::sort(rs.roots.begin(), rs.roots.end(),
            [](const PlRoot& a, const PlRoot& b) {
              return a.signature_index < b.signature_index;
            });

  // Deduplicate boundary roots, keeping the first in signature order.
  std::vector<PlRoot> unique;
  for (auto& r : rs.roots) {
    bool dup = false;
    for (const auto& u : unique) {
      double dist = 0;
      for (size_t k = 0; k < r.x.size(); ++k) {
        dist = std::fmax(dist, std::fabs(r.x[k] - u.x[k]));
      }
      if (dist <= opt.dedup_tol * (1.0 + inf_norm(u.x))) {
        dup = true;
        break;
      }
    }
    if (!dup) unique.push_back(std::move(r));
  }
  rs.roots = std::move(unique);
  return rs;
}

// The root closest to `center` in the infinity norm; ties break by the
// Euclidean distance, then lexicographically.  This is the inner step of
// the generalized Newton methods.
inline std::vector<double> min_norm_root(const AbsNormalForm& anf,
                                         std::span<const double> center,
                                         std::span<const double> target,
                                         const SolveOptions& opt = {}) {
  const RootSet rs = enumerate_roots(anf, target, opt);
  if (rs.roots.empty()) {
    throw NoRootError("piecewise linear system has no root");
  }
  const auto dist_inf = [&](const PlRoot& r) {
    double d = 0;
    for (size_t k = 0; k < r.x.size(); ++k) {
      d = std::fmax(d, std::fabs(r.x[k] - center[k]));
    }
    return d;
  };
  const auto dist_two = [&](const PlRoot& r) {
    double d = 0;
    for (size_t k = 0; k < r.x.size(); ++k) {
      const double e = r.x[k] - center[k];
      d += e * e;
    }
    return d;
  };
  const PlRoot* best = &rs.roots.front();
  for (const PlRoot& r : rs.roots) {
    if (&r == best) continue;
    const double di = dist_inf(r), db = dist_inf(*best);
    if (di < db) {
      best = &r;
    } else if (di == db) {
      const double ti = dist_two(r), tb = dist_two(*best);
      if (ti < tb || (ti == tb && r.x < best->x)) best = &r;
    }
  }
  return best->x;
}

// Mapping degree at a regular value: the sum of determinant signs over all
// preimages of y.
inline int degree(const AbsNormalForm& anf, std::span<const double> y,
                  const SolveOptions& opt = {}) {
  const RootSet rs = enumerate_roots(anf, y, opt);
  int deg = 0;
  for (const PlRoot& r : rs.roots) {
    const double tol = opt.sign_tol_scale * (1.0 + inf_norm(r.z));
    for (double zk : r.z) {
      if (std::fabs(zk) <= tol) {
        throw RegularityError(
            "root lies on a piece boundary; target is not a regular value");
      }
    }
    if (r.det_sign == 0) {
      throw RegularityError("singular piece Jacobian at a root");
    }
    deg += r.det_sign;
  }
  return deg;
}

// Cheap fixed-point pass: alternate the switching sweep with a Newton step
// on the smooth part.  Returns a root when the residual drops below tol
// within maxit sweeps, otherwise nothing (callers fall back to
// enumeration).
inline std::optional<std::vector<double>> modulus_iteration(
    const AbsNormalForm& anf, std::span<const double> target, int maxit = 100,
    double tol = 1e-13) {
  if (anf.n != anf.m) {
    throw Error("modulus iteration requires a square system");
  }
  const LuFactors jf = lu_factor(anf.J);
  if (jf.singular) throw SingularMatrixError("smooth part J is singular");

  const int n = anf.n;
  std::vector<double> dx(static_cast<size_t>(n), 0.0);
  std::vector<double> rhs(static_cast<size_t>(n), 0.0);
  for (int it = 0; it < maxit; ++it) {
    const std::vector<double> z = switching_values(anf, dx);
    // rhs = b + Y|z| - (target - offset)
    double residual = 0;
    for (int r = 0; r < n; ++r) {
      double acc = anf.b[static_cast<size_t>(r)];
      for (int k = 0; k < anf.s; ++k) {
        acc += anf.Y(r, k) * std::fabs(z[static_cast<size_t>(k)]);
      }
      acc -= target[static_cast<size_t>(r)] - anf.offset[static_cast<size_t>(r)];
      rhs[static_cast<size_t>(r)] = acc;
      double full = acc;
      for (int c = 0; c < n; ++c) full += anf.J(r, c) * dx[static_cast<size_t>(c)];
      residual = std::fmax(residual, std::fabs(full));
    }
    if (residual <= tol * (1.0 + inf_norm(target))) {
      std::vector<double> x(static_cast<size_t>(n));
      for (int k = 0; k < n; ++k) {
        x[static_cast<size_t>(k)] =
            anf.center[static_cast<size_t>(k)] + dx[static_cast<size_t>(k)];
      }
      return x;
    }
    const std::vector<double> step = lu_solve(jf, rhs);
    for (int k = 0; k < n; ++k) dx[static_cast<size_t>(k)] = -step[static_cast<size_t>(k)];
    if (!std::isfinite(inf_norm(dx))) return std::nullopt;
  }
  return std::nullopt;
}

inline nlohmann::json to_json(const RootSet& rs,
                              std::optional<int> deg = std::nullopt) {
  nlohmann::json j;
  nlohmann::json roots = nlohmann::json::array();
  for (const PlRoot& r : rs.roots) {
    roots.push_back({{"x", r.x}, {"sigma", r.sigma}, {"det_sign", r.det_sign}});
  }
  j["roots"] = std::move(roots);
  j["skipped_singular"] = rs.skipped_singular;
  if (deg) j["degree"] = *deg;
  return j;
}

}  // namespace plexpand

#endif  // PLEXPAND_PLSOLVE_HPP
