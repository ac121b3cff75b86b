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

#include "plexpand/bounds.hpp"

#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <random>

#include "plexpand/parser.hpp"
#include "support/random_tape.hpp"

using namespace plexpand;

namespace {

std::vector<double> vec(std::initializer_list<double> v) { return v; }

double dist_inf(std::span<const double> a, std::span<const double> b) {
  double d = 0;
  for (size_t k = 0; k < a.size(); ++k) d = std::fmax(d, std::fabs(a[k] - b[k]));
  return d;
}

double diff_inf(std::span<const double> a, std::span<const double> b) {
  return dist_inf(a, b);
}

// Slack absorbing floating-point noise in otherwise mathematical bounds.
bool holds(double lhs, double rhs) {
  return lhs <= rhs * (1.0 + 1e-9) + 1e-13;
}

}  // namespace

TEST_CASE("interval enclosures for simple ranges") {
  const BoxK box{{-1.0}, {2.0}};
  const auto enc = interval_evaluate(*parse_expression("sqr(x1)", 1), box);
  CHECK(enc.back().lo <= 0.0);
  CHECK(enc.back().hi >= 4.0);

  const BoxK box2{{-3.0}, {1.0}};
  const auto enc2 = interval_evaluate(*parse_expression("abs(x1)", 1), box2);
  CHECK(enc2.back().lo <= 0.0);
  CHECK(enc2.back().hi >= 3.0);

  const BoxK box3{{0.0}, {10.0}};
  const auto enc3 = interval_evaluate(*parse_expression("sin(x1)", 1), box3);
  CHECK(enc3.back().lo <= -1.0);
  CHECK(enc3.back().hi >= 1.0);
}

TEST_CASE("interval evaluation flags domain boundary contact") {
  const BoxK box{{-0.5}, {2.0}};
  CHECK_THROWS_AS(interval_evaluate(*parse_expression("log(x1)", 1), box),
                  DomainError);
  CHECK_THROWS_AS(interval_evaluate(*parse_expression("recip(x1)", 1), box),
                  DomainError);
  CHECK_THROWS_AS(interval_evaluate(*parse_expression("sqrt(x1)", 1), box),
                  DomainError);
}

TEST_CASE("enclosures contain sampled node values") {
  std::mt19937_64 rng(61);
  for (int t = 0; t < 40; ++t) {
    const auto rt = testsupport::random_tape(rng, testsupport::TapeFamily::kSmooth, 10);
    const auto enc = interval_evaluate(*rt.proc, rt.safe_box);
    for (int k = 0; k < 100; ++k) {
      const std::vector<double> x = testsupport::random_point(rng, rt.safe_box);
      const EvalTrace tr = evaluate(*rt.proc, x);
      for (size_t i = 0; i < tr.values.size(); ++i) {
        CHECK(enc[i].contains(tr.values[i]));
      }
    }
  }
}

TEST_CASE("hand-checked constants for the sum") {
  const BoxK box{{0.0, 0.0}, {1.0, 1.0}};
  const LipschitzCerts certs =
      beta_gamma(*parse_expression("x1 + x2", 2), box);
  CHECK(certs.beta_F == 2.0);
  CHECK(certs.gamma_F == 0.0);
  CHECK(certs.rigorous);
}

TEST_CASE("hand-checked constants for the square") {
  const BoxK box{{-1.0}, {2.0}};
  const LipschitzCerts certs = beta_gamma(*parse_expression("sqr(x1)", 1), box);
  CHECK(certs.beta_F == Catch::Approx(4.0).epsilon(1e-12));
  CHECK(certs.gamma_F == Catch::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("hand-checked constants for abs of sine") {
  const BoxK box{{0.0}, {3.14159265358979323846}};
  const LipschitzCerts certs =
      beta_gamma(*parse_expression("abs(sin(x1))", 1), box);
  CHECK(certs.beta_F == Catch::Approx(1.0).epsilon(1e-12));
  CHECK(certs.gamma_F == Catch::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("certificates refuse unbounded suprema") {
  const BoxK box{{0.0}, {1.0}};
  CHECK_THROWS_AS(beta_gamma(*parse_expression("sqrt(x1)", 1), box), CertError);
}

TEST_CASE("multiplication lowering preserves values") {
  const ProcedurePtr proc = parse_expression("x1 * x2", 2);
  const ProcedurePtr low = multiplication_lowering(*proc);
  for (const TapeNode& nd : low->nodes()) {
    if (nd.op.kind == OpKind::kMul) {
      // only the by-constant scaling of the Apollonius form may remain
      const bool lhs_const =
          low->nodes()[static_cast<size_t>(nd.preds[0])].op.kind == OpKind::kConst;
      const bool rhs_const =
          low->nodes()[static_cast<size_t>(nd.preds[1])].op.kind == OpKind::kConst;
      CHECK((lhs_const || rhs_const));
    }
    CHECK(nd.op.kind != OpKind::kDiv);
  }
  CHECK(evaluate(*low, vec({3.0, 4.0})).outputs[0] == 12.0);

  std::mt19937_64 rng(67);
  for (int t = 0; t < 200; ++t) {
    const auto rt = testsupport::random_tape(rng, testsupport::TapeFamily::kSmooth, 10);
    const ProcedurePtr lowered = multiplication_lowering(*rt.proc);
    const std::vector<double> x = testsupport::random_point(rng, rt.safe_box);
    const EvalTrace a = evaluate(*rt.proc, x);
    const EvalTrace b = evaluate(*lowered, x);
    for (size_t o = 0; o < a.outputs.size(); ++o) {
      CHECK(std::fabs(a.outputs[o] - b.outputs[o]) <=
            1e-12 * (1.0 + std::fabs(a.outputs[o])));
    }
  }
}

TEST_CASE("secant model of the lowered product matches the closed form") {
  const ProcedurePtr low = multiplication_lowering(*parse_expression("x1 * x2", 2));
  std::mt19937_64 rng(71);
  std::uniform_real_distribution<double> d(-2.0, 2.0);
  for (int t = 0; t < 100; ++t) {
    const std::vector<double> a{d(rng), d(rng)};
    const std::vector<double> b{d(rng), d(rng)};
    const PLModel model = secant(low, a, b);
    const double umid = 0.5 * (a[0] + b[0]), wmid = 0.5 * (a[1] + b[1]);
    const std::vector<double> x{d(rng), d(rng)};
    const double closed = 0.5 * (b[0] * b[1] + a[0] * a[1]) +
                          wmid * (x[0] - umid) + umid * (x[1] - wmid);
    CHECK(eval_model(model, x)[0] == Catch::Approx(closed).margin(1e-12));
  }
}

TEST_CASE("soundness of bound (i): function and model Lipschitz") {
  std::mt19937_64 rng(73);
  for (auto family : {testsupport::TapeFamily::kPolynomial,
                      testsupport::TapeFamily::kTrig,
                      testsupport::TapeFamily::kAbsHeavy}) {
    for (int t = 0; t < 12; ++t) {
      const auto rt = testsupport::random_tape(rng, family, 10);
      const ProcedurePtr low = lower_minmax(rt.proc);
      const LipschitzCerts certs = beta_gamma(low, rt.safe_box);
      const std::vector<double> p = testsupport::random_point(rng, rt.safe_box);
      const std::vector<double> q = testsupport::random_point(rng, rt.safe_box);
      const PLModel tan = tangent(low, p);
      const PLModel sec = secant(low, p, q);
      for (int k = 0; k < 25; ++k) {
        const std::vector<double> x = testsupport::random_point(rng, rt.safe_box);
        const std::vector<double> y = testsupport::random_point(rng, rt.safe_box);
        const double rhs = certs.beta_F * dist_inf(x, y);
        CHECK(holds(diff_inf(evaluate(*low, x).outputs,
                             evaluate(*low, y).outputs), rhs));
        CHECK(holds(diff_inf(eval_model(tan, x), eval_model(tan, y)), rhs));
        CHECK(holds(diff_inf(eval_model(sec, x), eval_model(sec, y)), rhs));
      }
    }
  }
}

TEST_CASE("soundness of bound (ii): second-order model error") {
  std::mt19937_64 rng(79);
  for (auto family : {testsupport::TapeFamily::kPolynomial,
                      testsupport::TapeFamily::kTrig,
                      testsupport::TapeFamily::kAbsHeavy}) {
    for (int t = 0; t < 12; ++t) {
      const auto rt = testsupport::random_tape(rng, family, 10);
      const ProcedurePtr low = lower_minmax(rt.proc);
      const LipschitzCerts certs = beta_gamma(low, rt.safe_box);
      const std::vector<double> p = testsupport::random_point(rng, rt.safe_box);
      const std::vector<double> q = testsupport::random_point(rng, rt.safe_box);
      const PLModel tan = tangent(low, p);
      const PLModel sec = secant(low, p, q);
      for (int k = 0; k < 25; ++k) {
        const std::vector<double> x = testsupport::random_point(rng, rt.safe_box);
        const std::vector<double> fx = evaluate(*low, x).outputs;
        CHECK(holds(diff_inf(fx, eval_model(sec, x)),
                    0.5 * certs.gamma_F * dist_inf(x, p) * dist_inf(x, q)));
        const double dt = dist_inf(x, p);
        CHECK(holds(diff_inf(fx, eval_model(tan, x)),
                    0.5 * certs.gamma_F * dt * dt));
      }
    }
  }
}

TEST_CASE("soundness of bound (iii): model variation in the base points") {
  std::mt19937_64 rng(83);
  for (auto family : {testsupport::TapeFamily::kPolynomial,
                      testsupport::TapeFamily::kTrig,
                      testsupport::TapeFamily::kAbsHeavy}) {
    for (int t = 0; t < 10; ++t) {
      const auto rt = testsupport::random_tape(rng, family, 10);
      const ProcedurePtr low = lower_minmax(rt.proc);
      const LipschitzCerts certs = beta_gamma(low, rt.safe_box);
      for (int k = 0; k < 20; ++k) {
        const auto ylo = testsupport::random_point(rng, rt.safe_box);
        const auto yhi = testsupport::random_point(rng, rt.safe_box);
        const auto zlo = testsupport::random_point(rng, rt.safe_box);
        const auto zhi = testsupport::random_point(rng, rt.safe_box);
        const PLModel my = secant(low, ylo, yhi);
        const PLModel mz = secant(low, zlo, zhi);
        // evaluation point may leave the box
        std::vector<double> x = testsupport::random_point(rng, rt.safe_box);
        for (auto& v : x) v *= 1.5;
        const double rhs =
            certs.gamma_F *
            std::fmax(
                dist_inf(zhi, yhi) * std::fmax(dist_inf(x, ylo), dist_inf(x, zlo)),
                dist_inf(zlo, ylo) * std::fmax(dist_inf(x, yhi), dist_inf(x, zhi)));
        CHECK(holds(diff_inf(eval_model(mz, x), eval_model(my, x)), rhs));

        // tangent specialization
        const PLModel ty = tangent(low, ylo);
        const PLModel tz = tangent(low, zlo);
        const double rhs_t = certs.gamma_F * dist_inf(zlo, ylo) *
                             std::fmax(dist_inf(x, ylo), dist_inf(x, zlo));
        CHECK(holds(diff_inf(eval_model(tz, x), eval_model(ty, x)), rhs_t));
      }
    }
  }
}

TEST_CASE("soundness of bound (iv): increment variation") {
  std::mt19937_64 rng(89);
  for (auto family : {testsupport::TapeFamily::kPolynomial,
                      testsupport::TapeFamily::kTrig,
                      testsupport::TapeFamily::kAbsHeavy}) {
    for (int t = 0; t < 10; ++t) {
      const auto rt = testsupport::random_tape(rng, family, 10);
      const ProcedurePtr low = lower_minmax(rt.proc);
      const LipschitzCerts certs = beta_gamma(low, rt.safe_box);
      const size_t n = rt.safe_box.lower.size();
      for (int k = 0; k < 20; ++k) {
        const auto ylo = testsupport::random_point(rng, rt.safe_box);
        const auto yhi = testsupport::random_point(rng, rt.safe_box);
        const auto zlo = testsupport::random_point(rng, rt.safe_box);
        const auto zhi = testsupport::random_point(rng, rt.safe_box);
        const PLModel my = secant(low, ylo, yhi);
        const PLModel mz = secant(low, zlo, zhi);
        // small increment keeping midpoint + dx inside the box
        std::vector<double> dx(n);
        std::uniform_real_distribution<double> dd(-0.05, 0.05);
        for (auto& v : dx) v = dd(rng);
        const double norm_dx = inf_norm(dx);
        const double dzy = dist_inf(mz.center, my.center);
        const double wy = dist_inf(yhi, ylo);
        const double wz = dist_inf(zhi, zlo);
        const double rhs =
            2.0 * certs.beta_F * dzy +
            0.5 * certs.gamma_F * std::pow(dzy + std::fmax(wy, wz), 2) +
            certs.gamma_F * (dzy + 0.5 * (wy + wz)) * norm_dx;
        CHECK(holds(diff_inf(eval_increment(mz, dx), eval_increment(my, dx)),
                    rhs));
      }
    }
  }
}

TEST_CASE("refinement bound against a tangent base model") {
  std::mt19937_64 rng(97);
  for (int t = 0; t < 25; ++t) {
    const auto rt =
        testsupport::random_tape(rng, testsupport::TapeFamily::kTrig, 10);
    const ProcedurePtr low = lower_minmax(rt.proc);
    const LipschitzCerts certs = beta_gamma(low, rt.safe_box);
    for (int k = 0; k < 20; ++k) {
      const auto y0 = testsupport::random_point(rng, rt.safe_box);
      const auto zlo = testsupport::random_point(rng, rt.safe_box);
      const auto zhi = testsupport::random_point(rng, rt.safe_box);
      const auto x = testsupport::random_point(rng, rt.safe_box);
      const PLModel base = tangent(low, y0);
      const PLModel sec = secant(low, zlo, zhi);
      const double rhs =
          certs.gamma_F *
          (std::fmax(dist_inf(zhi, y0), dist_inf(zlo, y0)) * dist_inf(x, y0) +
           0.5 * dist_inf(zhi, y0) * dist_inf(zlo, y0));
      CHECK(holds(diff_inf(eval_model(sec, x), eval_model(base, x)), rhs));
    }
  }
}

TEST_CASE("shrinking the box never increases the constants") {
  std::mt19937_64 rng(101);
  for (int t = 0; t < 40; ++t) {
    const auto rt = testsupport::random_tape(rng, testsupport::TapeFamily::kSmooth, 10);
    const LipschitzCerts big = beta_gamma(rt.proc, rt.safe_box);
    BoxK small = rt.safe_box;
    for (size_t k = 0; k < small.lower.size(); ++k) {
      small.lower[k] *= 0.5;
      small.upper[k] *= 0.5;
    }
    const LipschitzCerts c2 = beta_gamma(rt.proc, small);
    CHECK(c2.beta_F <= big.beta_F);
    CHECK(c2.gamma_F <= big.gamma_F);
  }
}

TEST_CASE("custom univariates certify with the non-rigorous flag") {
  TapeBuilder tb(1);
  tb.register_custom(testsupport::detail::tanh_elemental());
  tb.mark_output(tb.custom(0, {tb.input(0)}));
  const ProcedurePtr proc = tb.finalize();
  const BoxK box{{-1.0}, {2.0}};
  const LipschitzCerts certs = beta_gamma(*proc, box);
  CHECK_FALSE(certs.rigorous);
  CHECK(certs.beta_F >= 1.0);     // sup sech^2 = 1 at 0
  CHECK(certs.beta_F <= 1.1);
  CHECK(certs.gamma_F >= 0.7698);  // the declared derivative Lipschitz hint
}

TEST_CASE("stability radius of the identity is unbounded") {
  const ProcedurePtr proc = parse_expression("x1; x2", 2);
  const BoxK box{{-1.0, -1.0}, {1.0, 1.0}};
  const LipschitzCerts certs = beta_gamma(*proc, box);
  const AbsNormalForm anf = abs_normal(tangent(proc, vec({0.0, 0.0})));
  const StabilityReport rep = stability_radius(anf, certs);
  CHECK(rep.rho == Catch::Approx(1.0));
  CHECK(rep.unbounded);
  CHECK(std::isinf(rep.radius));
}

TEST_CASE("stability radius of abs has unit piece bound") {
  const ProcedurePtr proc = parse_expression("abs(x1)", 1);
  const BoxK box{{-1.0}, {1.0}};
  const LipschitzCerts certs = beta_gamma(*proc, box);
  const AbsNormalForm anf = abs_normal(tangent(proc, vec({0.3})));
  const StabilityReport rep = stability_radius(anf, certs);
  CHECK(rep.rho == Catch::Approx(1.0));
  CHECK(rep.unbounded);  // abs is piecewise linear: gamma_F = 0
}

TEST_CASE("stability radius matches brute-force piece enumeration") {
  std::mt19937_64 rng(103);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  for (int t = 0; t < 50; ++t) {
    AbsNormalForm anf;
    anf.n = anf.m = 2;
    anf.s = 2;
    anf.center = {0.0, 0.0};
    anf.offset = {0.0, 0.0};
    anf.c = {d(rng), d(rng)};
    anf.b = {0.0, 0.0};
    anf.Z = Matrix(2, 2);
    anf.L = Matrix(2, 2);
    anf.J = Matrix(2, 2);
    anf.Y = Matrix(2, 2);
    anf.J(0, 0) = 2.0 + d(rng);
    anf.J(1, 1) = 2.0 + d(rng);
    anf.J(0, 1) = 0.3 * d(rng);
    anf.J(1, 0) = 0.3 * d(rng);
    for (int r = 0; r < 2; ++r) {
      for (int c2 = 0; c2 < 2; ++c2) {
        anf.Z(r, c2) = 0.3 * d(rng);
        anf.Y(r, c2) = 0.3 * d(rng);
      }
    }
    anf.L(1, 0) = 0.3 * d(rng);

    // independent brute force over the four signatures
    double want = INFINITY;
    for (int s0 : {-1, 1}) {
      for (int s1 : {-1, 1}) {
        // z-elimination for s = 2 by hand
        double x00 = anf.Z(0, 0), x01 = anf.Z(0, 1);
        double x10 = anf.Z(1, 0) + anf.L(1, 0) * s0 * x00;
        double x11 = anf.Z(1, 1) + anf.L(1, 0) * s0 * x01;
        double a00 = anf.J(0, 0) + anf.Y(0, 0) * s0 * x00 + anf.Y(0, 1) * s1 * x10;
        double a01 = anf.J(0, 1) + anf.Y(0, 0) * s0 * x01 + anf.Y(0, 1) * s1 * x11;
        double a10 = anf.J(1, 0) + anf.Y(1, 0) * s0 * x00 + anf.Y(1, 1) * s1 * x10;
        double a11 = anf.J(1, 1) + anf.Y(1, 0) * s0 * x01 + anf.Y(1, 1) * s1 * x11;
        const double det = a00 * a11 - a01 * a10;
        // inverse by adjugate, infinity norm = max abs row sum
        const double r0 = std::fabs(a11 / det) + std::fabs(a01 / det);
        const double r1 = std::fabs(a10 / det) + std::fabs(a00 / det);
        want = std::fmin(want, 1.0 / std::fmax(r0, r1));
      }
    }
    LipschitzCerts fake;
    fake.gamma_F = 2.0;
    const StabilityReport rep = stability_radius(anf, fake);
    CHECK(rep.rho == Catch::Approx(want).epsilon(1e-12));
    CHECK(rep.radius == Catch::Approx(want / 2.0).epsilon(1e-12));
  }
}

TEST_CASE("certificates serialize to JSON") {
  const BoxK box{{-1.0}, {2.0}};
  const LipschitzCerts certs = beta_gamma(*parse_expression("sqr(x1)", 1), box);
  const nlohmann::json j = to_json(certs);
  CHECK(j["beta_F"].get<double>() == certs.beta_F);
  CHECK(j["rigorous"].get<bool>());
  CHECK(j["per_node"].size() == 2);
  CHECK(j["K"]["lower"][0].get<double>() == -1.0);
}
