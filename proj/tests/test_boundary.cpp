// Copyright 2026 The BoundaryFlow Authors
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

#include <cmath>
#include <numbers>
#include <vector>

#include "boundaryflow/boundary.hpp"
#include "boundaryflow/cloud.hpp"
#include "doctest.h"

using namespace boundaryflow;

namespace {

Vector vec2(double a, double b) { return (Vector(2) << a, b).finished(); }

StabilityCertificate unit_cert() {
  StabilityCertificate c;
  c.K = 1.0;
  c.gamma = 1.0;
  return c;
}

StabilityCertificate example_cert() {
  return fit_certificate(paper_example_field(), TimeInterval::make(-50, 50), 1000, IntegratorConfig{});
}

const LinearField& minus_identity() {
  static const auto f = LinearField::constant(-Matrix::Identity(2, 2));
  return f;
}

const LinearField& diag12() {
  static const auto f = LinearField::diagonal(vec2(-1, -2));
  return f;
}

ReconstructionConfig rconfig(int normals, double horizon) {
  ReconstructionConfig r;
  r.normal_count = normals;
  r.horizon = horizon;
  return r;
}

// Composite Simpson rule for rho * int_{tau-T}^{tau} |n Psi(tau, s)| ds. The
// rows n Psi(tau, s_k) come from composing independent transition-matrix
// solves over the quadrature cells.
std::vector<double> supports_by_quadrature(const LinearField& field, double rho, double tau, double horizon,
                                           const std::vector<Vector>& normals, int panels) {
  IntegratorConfig cfg;
  cfg.step = 1e-4;
  const double h = horizon / panels;
  std::vector<double> sums(normals.size(), 0.0);
  Matrix psi = Matrix::Identity(2, 2);  // Psi(tau, s_k), k running down from panels
  for (int k = panels; k >= 0; --k) {
    const double s = tau - horizon + k * h;
    if (k < panels) psi = psi * transition_matrix(field.entries(), 2, s, s + h, cfg).matrix;
    const double w = (k == 0 || k == panels) ? 1.0 : (k % 2 == 1 ? 4.0 : 2.0);
    for (std::size_t i = 0; i < normals.size(); ++i) sums[i] += w * (normals[i].transpose() * psi).norm();
  }
  for (auto& v : sums) v *= rho * h / 3.0;
  return sums;
}

}  // namespace

TEST_CASE("boundary_rhs examples") {
  const BoundaryField decay(linear_system(minus_identity(), 1.0));
  auto d = boundary_rhs(decay, 0.0, BoundaryState{vec2(2, 0), vec2(1, 0)});
  CHECK(d.dx == vec2(-1, 0));
  CHECK(d.dn.norm() == 0.0);

  const BoundaryField diag(linear_system(diag12(), 1.0));
  d = boundary_rhs(diag, 0.0, BoundaryState{vec2(0, 0), vec2(1, 0)});
  CHECK(d.dx == vec2(1, 0));
  CHECK(d.dn.norm() == 0.0);

  // Hand evaluation: L^T n = -(1, 2)/sqrt2, <n, L^T n> = -3/2, so
  // dn = (1, 2)/sqrt2 - 3/2 (1, 1)/sqrt2 = (-1/2, 1/2)/sqrt2.
  const Vector n = vec2(1, 1) / std::sqrt(2.0);
  d = boundary_rhs(diag, 0.0, BoundaryState{vec2(0, 0), n});
  CHECK((d.dn - vec2(-0.5, 0.5) / std::sqrt(2.0)).norm() <= 1e-15);

  // Finite difference of the normalized adjoint flow eta' = -L^T eta.
  const double h = 1e-6;
  const Matrix lt = diag12()(0.0).transpose();
  const Vector eta_p = n - h * lt * n, eta_m = n + h * lt * n;
  const Vector fd = (eta_p.normalized() - eta_m.normalized()) / (2 * h);
  CHECK((d.dn - fd).norm() <= 1e-8);

  CHECK_THROWS_AS(boundary_rhs(decay, 0.0, BoundaryState{vec2(0, 0), vec2(2, 0)}), ConfigError);
}

TEST_CASE("integrate_boundary closed forms") {
  const BoundaryField decay(linear_system(minus_identity(), 1.0));
  IntegratorConfig cfg;
  const double at20[] = {20.0};
  auto traj = integrate_boundary(decay, BoundaryState{vec2(0, 0), vec2(1, 0)}, TimeInterval::make(0, 20),
                                 Direction::Forward, cfg, at20);
  CHECK((traj.states.front().second.x - vec2(1, 0)).norm() <= 1e-6);
  CHECK(traj.states.front().second.n == vec2(1, 0));
  CHECK(traj.max_norm_drift <= 1e-12);

  const double outs[] = {-5.0, -2.0};
  traj = integrate_boundary(decay, BoundaryState{vec2(1, 0), vec2(1, 0)}, TimeInterval::make(-5, 0),
                            Direction::Backward, cfg, outs);
  REQUIRE(traj.states.size() == 2);
  CHECK(traj.states[0].first == -5.0);
  for (const auto& [t, s] : traj.states) {
    CHECK((s.x - vec2(1, 0)).norm() <= 1e-12);
    CHECK((s.n - vec2(1, 0)).norm() <= 1e-12);
  }
}

TEST_CASE("sphere invariance and agreement with the normalized adjoint") {
  const auto field = paper_example_field();
  const BoundaryField bf(linear_system(field, 1.0));
  IntegratorConfig cfg;
  const std::vector<double> outs{-1.0, -0.6, -0.2};
  const Vector n_end = vec2(0.6, -0.8);
  const auto traj = integrate_boundary(bf, BoundaryState{vec2(0.01, 0.02), n_end}, TimeInterval::make(-1, 0),
                                       Direction::Backward, cfg, outs);
  CHECK(traj.max_norm_drift <= 1e-10);
  IntegratorConfig fine;
  fine.step = 2.5e-4;
  CHECK(integrate_boundary(bf, BoundaryState{vec2(0.01, 0.02), n_end}, TimeInterval::make(-1, 0), Direction::Backward,
                           fine, outs)
            .max_norm_drift <= 1e-12);
  const auto eta = adjoint_solution(field.entries(), n_end, 0.0, -1.0, cfg, outs);
  for (std::size_t k = 0; k < outs.size(); ++k) {
    CHECK(std::abs(traj.states[k].second.n.norm() - 1.0) <= 1e-10);
    CHECK((traj.states[k].second.n - eta[k].second.normalized()).norm() <= 1e-8);
  }
}

TEST_CASE("backward boundary trajectory stays on earlier fibres (short depth)") {
  // Backward integration of x amplifies errors like |Psi(tau, tau - depth)|^-1,
  // so the check is made over a depth where that factor stays moderate.
  const auto field = paper_example_field();
  const auto cert = example_cert();
  const auto rcfg = rconfig(64, 10.0);
  IntegratorConfig cfg;
  const auto at0 = reconstruct_fibre(field, 1.0, 0.0, cert, rcfg, cfg);
  const double depth = 0.5;
  const auto earlier = reconstruct_fibre(field, 1.0, -depth, cert, rcfg, cfg);
  const auto poly = convex_hull_2d(earlier.points());
  const BoundaryField bf(linear_system(field, 1.0));
  const double out[] = {-depth};
  for (std::size_t i = 0; i < at0.entries.size(); i += 8) {
    const auto& e = at0.entries[i];
    const auto traj = integrate_boundary(bf, BoundaryState{e.x, e.n}, TimeInterval::make(-depth, 0),
                                         Direction::Backward, cfg, out);
    CHECK(std::abs(signed_distance_to_polygon(poly, traj.states.front().second.x)) <= 1e-3);
  }
}

TEST_CASE("normal grid") {
  const auto g = normal_grid_2d(6);
  REQUIRE(g.size() == 6);
  for (int k = 0; k < 3; ++k) CHECK(g[k + 3] == -g[k]);
  CHECK(g[0] == vec2(1, 0));
  CHECK(std::abs(g[1](0) - 0.5) <= 1e-15);
}

TEST_CASE("circle: -I reconstructs the unit circle") {
  IntegratorConfig cfg;
  const auto fibre = reconstruct_fibre(minus_identity(), 1.0, 3.0, unit_cert(), rconfig(64, 40.0), cfg);
  REQUIRE(fibre.entries.size() == 64);
  CHECK(fibre.time == 3.0);
  for (const auto& e : fibre.entries) {
    CHECK(std::abs(e.x.norm() - 1.0) <= 1e-6);
    CHECK((e.x - e.n).norm() <= 1e-6);
  }
}

TEST_CASE("diag(-1,-2): extreme points and quadrature support values") {
  IntegratorConfig cfg;
  const auto fibre = reconstruct_fibre(diag12(), 1.0, 0.0, unit_cert(), rconfig(64, 40.0), cfg);
  int found = 0;
  for (const auto& e : fibre.entries) {
    for (const auto& [n, x] : {std::pair{vec2(1, 0), vec2(1, 0)}, std::pair{vec2(-1, 0), vec2(-1, 0)},
                               std::pair{vec2(0, 1), vec2(0, 0.5)}, std::pair{vec2(0, -1), vec2(0, -0.5)}}) {
      if ((e.n - n).norm() <= 1e-12) {
        ++found;
        CHECK((e.x - x).norm() <= 1e-6);
      }
    }
  }
  CHECK(found == 4);

  // Closed-form support: int_0^inf sqrt(n1^2 e^{-2u} + n2^2 e^{-4u}) du.
  for (std::size_t i = 0; i < fibre.entries.size(); i += 5) {
    const auto& e = fibre.entries[i];
    const int m = 4000;
    const double upper = 40.0, h = upper / m;
    double sum = 0.0;
    for (int k = 0; k <= m; ++k) {
      const double u = k * h;
      const double w = (k == 0 || k == m) ? 1.0 : (k % 2 == 1 ? 4.0 : 2.0);
      sum += w * std::hypot(e.n(0) * std::exp(-u), e.n(1) * std::exp(-2 * u));
    }
    CHECK(std::abs(e.n.dot(e.x) - sum * h / 3.0) <= 1e-7);
  }
}

TEST_CASE("example field: support values match quadrature of |n Psi|") {
  const auto field = paper_example_field();
  IntegratorConfig cfg;
  const auto rcfg = rconfig(12, 3.0);
  const auto fibre = reconstruct_fibre(field, 1.0, 0.0, example_cert(), rcfg, cfg);
  std::vector<Vector> normals;
  for (const auto& e : fibre.entries) normals.push_back(e.n);
  const auto q = supports_by_quadrature(field, 1.0, 0.0, rcfg.horizon, normals, 3000);
  for (std::size_t i = 0; i < normals.size(); ++i) {
    const auto& e = fibre.entries[i];
    CHECK(std::abs(e.n.dot(e.x) - q[i]) <= 1e-7 * q[i]);
  }
}

TEST_CASE("batched points agree with per-normal boundary trajectories") {
  const auto field = paper_example_field();
  IntegratorConfig cfg;
  const auto rcfg = rconfig(12, 6.0);
  const auto normals = normal_grid_2d(12);
  const auto batch = boundary_points(field, 1.0, 2.5, normals, rcfg, cfg);
  REQUIRE(batch.size() == normals.size());
  for (std::size_t i = 0; i < normals.size(); ++i) {
    const auto single = boundary_point(field, 1.0, 2.5, normals[i], rcfg, cfg);
    CHECK((single.x - batch[i].x).norm() <= 1e-9);
    CHECK((single.n - batch[i].n).norm() <= 1e-14);
  }
  // Unsorted input keeps its order.
  const std::vector<Vector> two{normals[5], normals[1]};
  const auto pair = boundary_points(field, 1.0, 2.5, two, rcfg, cfg);
  CHECK((pair[0].x - batch[5].x).norm() <= 1e-12);
  CHECK((pair[1].x - batch[1].x).norm() <= 1e-12);
  const std::vector<Vector> bad{Vector::Ones(2)};
  CHECK_THROWS_AS(boundary_points(field, 1.0, 0.0, bad, rcfg, cfg), ConfigError);
}

TEST_CASE("reconstruction is symmetric, scales with rho and ignores the seed") {
  const auto field = paper_example_field();
  const auto cert = example_cert();
  IntegratorConfig cfg;
  auto rcfg = rconfig(40, 10.0);
  const auto f1 = reconstruct_fibre(field, 1.0, 20.0, cert, rcfg, cfg);
  const auto f2 = reconstruct_fibre(field, 2.0, 20.0, cert, rcfg, cfg);
  const auto& e1 = f1.entries;
  const auto& e2 = f2.entries;
  for (std::size_t i = 0; i < e1.size(); ++i) {
    CHECK((e2[i].x - 2.0 * e1[i].x).norm() <= 1e-8 * e2[i].x.norm());
    const auto j = (i + e1.size() / 2) % e1.size();
    CHECK((e1[j].n + e1[i].n).norm() <= 1e-12);
    CHECK((e1[j].x + e1[i].x).norm() <= 1e-8);
  }
  rcfg.seed_point = vec2(3.0, -4.0);
  const auto seeded = reconstruct_fibre(field, 1.0, 20.0, cert, rcfg, cfg);
  CHECK(hausdorff_distance(seeded.points(), f1.points()) <= 1e-9);
}

TEST_CASE("reconstruction errors") {
  IntegratorConfig cfg;
  StabilityCertificate bad;
  bad.gamma = 0.0;
  CHECK_THROWS_AS(reconstruct_fibre(minus_identity(), 1.0, 0.0, bad, rconfig(8, 1.0), cfg), NotStableError);
  CHECK_THROWS_AS(reconstruct_fibre(LinearField::constant(-Matrix::Identity(3, 3)), 1.0, 0.0, unit_cert(),
                                    rconfig(8, 1.0), cfg),
                  UnsupportedError);
  CHECK_THROWS_AS(reconstruct_fibre(minus_identity(), 1.0, 0.0, unit_cert(), rconfig(2, 1.0), cfg), ConfigError);
}

TEST_CASE("pullback_converge") {
  IntegratorConfig cfg;
  const auto r = pullback_converge(minus_identity(), 1.0, 0.0, unit_cert(), rconfig(16, 5.0), cfg, 1e-8);
  CHECK(r.horizon <= 40.0);
  CHECK(r.achieved_delta <= 1e-8);

  const auto zero = pullback_converge(minus_identity(), 0.0, 0.0, unit_cert(), rconfig(16, 5.0), cfg, 1e-8);
  for (const auto& e : zero.fibre.entries) CHECK(e.x.norm() == 0.0);

  CHECK_THROWS_AS(pullback_converge(minus_identity(), 1.0, 0.0, unit_cert(), rconfig(8, 1.0), cfg, 1e-30, 8.0),
                  NonConvergenceError);
}

TEST_CASE("pullback_converge on the example field") {
  IntegratorConfig cfg;
  const auto r = pullback_converge(paper_example_field(), 1.0, 0.0, example_cert(), rconfig(24, 2.5), cfg, 1e-6);
  CHECK(r.achieved_delta <= 1e-6);
  CHECK(r.horizon <= 20.0);
}
