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
#include <random>
#include <vector>

#include "boundaryflow/integrate.hpp"
#include "boundaryflow/linear.hpp"
#include "doctest.h"

using namespace boundaryflow;

namespace {

Vector scalar(double v) { return Vector::Constant(1, v); }

IntegratorConfig rk4(double h) {
  IntegratorConfig cfg;
  cfg.step = h;
  return cfg;
}

double exp_error(double h) {
  const OdeField grow = [](double, const Vector& y, Vector& dy) { dy = y; };
  const double out[] = {1.0};
  const auto traj = integrate_ode(grow, scalar(1.0), TimeInterval::make(0, 1), rk4(h), out);
  return std::abs(traj.front().second[0] - std::exp(1.0));
}

}  // namespace

TEST_CASE("integrate_ode closed forms") {
  const OdeField grow = [](double, const Vector& y, Vector& dy) { dy = y; };
  const double at1[] = {1.0};
  auto traj = integrate_ode(grow, scalar(1.0), TimeInterval::make(0, 1), rk4(1e-3), at1);
  CHECK(std::abs(traj.front().second[0] - 2.718281828459045) <= 1e-10);

  const OdeField zero = [](double, const Vector& y, Vector& dy) { dy = Vector::Zero(y.size()); };
  traj = integrate_ode(zero, scalar(0.37), TimeInterval::make(0, 3), rk4(1e-2), std::vector<double>{3.0});
  CHECK(traj.front().second[0] == 0.37);

  const OdeField relax = [](double, const Vector& y, Vector& dy) { dy = -y + Vector::Ones(y.size()); };
  traj = integrate_ode(relax, scalar(0.0), TimeInterval::make(0, 10), rk4(1e-3), std::vector<double>{10.0});
  CHECK(std::abs(traj.front().second[0] - (1.0 - std::exp(-10.0))) <= 1e-9);
}

TEST_CASE("rk4 order: halving h divides the error by about 16") {
  const double e1 = exp_error(1e-2), e2 = exp_error(5e-3), e3 = exp_error(2.5e-3);
  CHECK(e1 / e2 >= 14.0);
  CHECK(e1 / e2 <= 18.0);
  CHECK(e2 / e3 >= 14.0);
  CHECK(e2 / e3 <= 18.0);
}

TEST_CASE("adaptive method meets its tolerance") {
  IntegratorConfig cfg;
  cfg.method = Method::Rk45Adaptive;
  cfg.step = 0.1;
  cfg.rel_tol = 1e-11;
  cfg.abs_tol = 1e-13;
  const OdeField relax = [](double, const Vector& y, Vector& dy) { dy = -y + Vector::Ones(y.size()); };
  const std::vector<double> outs{0.0, 2.5, 10.0};
  const auto traj = integrate_ode(relax, scalar(0.0), TimeInterval::make(0, 10), cfg, outs);
  REQUIRE(traj.size() == 3);
  CHECK(traj[0].second[0] == 0.0);
  CHECK(std::abs(traj[1].second[0] - (1.0 - std::exp(-2.5))) <= 1e-9);
  CHECK(std::abs(traj[2].second[0] - (1.0 - std::exp(-10.0))) <= 1e-9);
}

TEST_CASE("outputs are returned in order, including the start time") {
  const OdeField grow = [](double, const Vector& y, Vector& dy) { dy = y; };
  const std::vector<double> outs{0.0, 0.25, 0.25, 1.0};
  const auto traj = integrate_ode(grow, scalar(1.0), TimeInterval::make(0, 1), rk4(1e-3), outs);
  REQUIRE(traj.size() == 4);
  for (std::size_t i = 0; i < outs.size(); ++i) {
    CHECK(traj[i].first == outs[i]);
    CHECK(traj[i].second[0] == doctest::Approx(std::exp(outs[i])).epsilon(1e-12));
  }
  CHECK_THROWS_AS(integrate_ode(grow, scalar(1.0), TimeInterval::make(0, 1), rk4(1e-3), std::vector<double>{2.0}),
                  ConfigError);
}

TEST_CASE("piecewise forcing keeps RK4 exact across breakpoints") {
  // y' = u(t) with u = 1 on [0, 0.5) and -1 afterwards; y(1) = 0 exactly.
  const ControlSignal u({0.0, 0.5, 1.0}, {Vector::Constant(1, 1.0), Vector::Constant(1, -1.0)});
  const OdeField f = [&u](double t, const Vector&, Vector& dy) { dy = u(t); };
  const double bps[] = {0.0, 0.5, 1.0};
  OdeOptions opts;
  opts.breakpoints = bps;
  IntegratorConfig cfg = rk4(0.3);
  const std::vector<double> outs{0.5, 1.0};
  const auto traj = integrate_ode(f, scalar(0.0), TimeInterval::make(0, 1), cfg, outs, opts);
  CHECK(traj[0].second[0] == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(std::abs(traj[1].second[0]) <= 1e-14);

  cfg.method = Method::Rk45Adaptive;
  const auto adaptive = integrate_ode(f, scalar(0.0), TimeInterval::make(0, 1), cfg, outs, opts);
  CHECK(std::abs(adaptive[1].second[0]) <= 1e-13);
}

TEST_CASE("integration errors") {
  IntegratorConfig cfg = rk4(1e-3);
  cfg.max_steps = 10;
  const OdeField grow = [](double, const Vector& y, Vector& dy) { dy = y; };
  CHECK_THROWS_AS(integrate_ode(grow, scalar(1.0), TimeInterval::make(0, 1), cfg, std::vector<double>{1.0}),
                  DivergenceError);
  const OdeField blow = [](double, const Vector& y, Vector& dy) { dy = y.array().square().matrix() * 1e200; };
  CHECK_THROWS_AS(integrate_ode(blow, scalar(1e200), TimeInterval::make(0, 1), rk4(0.1), std::vector<double>{1.0}),
                  BlowUpError);
  CHECK_THROWS_AS(rk4(-1.0).validate(), ConfigError);
}

TEST_CASE("backward integration by time reversal") {
  const OdeField relax = [](double, const Vector& y, Vector& dy) { dy = -y; };
  const std::vector<double> outs{-2.0, -1.0};
  const auto traj = integrate_ode_backward(relax, scalar(1.0), TimeInterval::make(-2, 0), rk4(1e-3), outs);
  REQUIRE(traj.size() == 2);
  CHECK(traj[0].first == -2.0);
  CHECK(traj[0].second[0] == doctest::Approx(std::exp(2.0)).epsilon(1e-11));
  CHECK(traj[1].second[0] == doctest::Approx(std::exp(1.0)).epsilon(1e-11));
}

TEST_CASE("transition matrix closed forms") {
  const CoefficientFn minus_identity = [](double) { return Matrix(-Matrix::Identity(2, 2)); };
  const auto psi = transition_matrix(minus_identity, 2, 0.0, 1.0, rk4(1e-3)).matrix;
  CHECK((psi - std::exp(-1.0) * Matrix::Identity(2, 2)).norm() <= 1e-9);

  CHECK(transition_matrix(paper_example_field().entries(), 2, 3.0, 3.0, rk4(1e-3)).matrix == Matrix::Identity(2, 2));

  const CoefficientFn diag = [](double) { return Matrix(Vector((Vector(2) << -1, -2).finished()).asDiagonal()); };
  const auto pd = transition_matrix(diag, 2, 0.0, 1.0, rk4(1e-3)).matrix;
  CHECK(std::abs(pd(0, 0) - std::exp(-1.0)) <= 1e-9);
  CHECK(std::abs(pd(1, 1) - std::exp(-2.0)) <= 1e-9);
  CHECK(std::abs(pd(0, 1)) + std::abs(pd(1, 0)) == 0.0);

  // Backward (t < s) is the inverse of the forward map.
  const auto back = transition_matrix(diag, 2, 1.0, 0.0, rk4(1e-3)).matrix;
  CHECK((back * pd - Matrix::Identity(2, 2)).norm() <= 1e-12);
}

TEST_CASE("cocycle property on the example field") {
  const auto field = paper_example_field();
  const auto cfg = rk4(1e-3);
  const Matrix a = transition_matrix(field.entries(), 2, 0.0, 5.0, cfg).matrix;
  const Matrix b = transition_matrix(field.entries(), 2, -5.0, 0.0, cfg).matrix;
  const Matrix c = transition_matrix(field.entries(), 2, -5.0, 5.0, cfg).matrix;
  // Entries are around e^-100; compare relative to the result's scale.
  CHECK((a * b - c).norm() <= 1e-8 * c.norm());
  CHECK((a * b - c).norm() <= 1e-8);
}

TEST_CASE("adjoint closed forms") {
  const CoefficientFn minus_identity = [](double) { return Matrix(-Matrix::Identity(2, 2)); };
  Vector eta_end(2);
  eta_end << 1, 0;
  const auto traj = adjoint_solution(minus_identity, eta_end, 0.0, -1.0, rk4(1e-3), std::vector<double>{-1.0});
  CHECK(std::abs(traj.front().second[0] - std::exp(-1.0)) <= 1e-9);
  CHECK(traj.front().second[1] == 0.0);

  const CoefficientFn zero = [](double) { return Matrix(Matrix::Zero(2, 2)); };
  const auto still = adjoint_solution(zero, eta_end, 0.0, -4.0, rk4(1e-2), std::vector<double>{-4.0, -2.0});
  CHECK(still[0].second == eta_end);
  CHECK(still[1].second == eta_end);
  CHECK_THROWS_AS(adjoint_solution(zero, eta_end, 0.0, 1.0, rk4(1e-2), std::vector<double>{}), ConfigError);
}

TEST_CASE("adjoint duality: <eta, v> is constant along v' = L v") {
  std::mt19937_64 gen(2024);
  std::normal_distribution<double> g;
  const auto cfg = rk4(1e-3);
  std::vector<double> outs;
  for (int k = 0; k <= 20; ++k) outs.push_back(-10.0 + k);
  for (int trial = 0; trial < 5; ++trial) {
    Matrix l(2, 2);
    l << g(gen), g(gen), g(gen), g(gen);
    l *= 0.3;
    const CoefficientFn coeff = [l](double) { return l; };
    Vector eta_end(2), v0(2);
    eta_end << g(gen), g(gen);
    v0 << g(gen), g(gen);
    const auto eta = adjoint_solution(coeff, eta_end, 10.0, -10.0, cfg, outs);
    const OdeField vf = [&l](double, const Vector& v, Vector& dv) { dv = l * v; };
    const auto v = integrate_ode(vf, v0, TimeInterval::make(-10, 10), cfg, outs);
    const double ref = eta.front().second.dot(v.front().second);
    for (std::size_t k = 0; k < outs.size(); ++k) {
      CHECK(std::abs(eta[k].second.dot(v[k].second) - ref) <= 1e-8 * std::max(1.0, std::abs(ref)));
    }
  }
}

TEST_CASE("adjoint duality on the time-varying example field") {
  const auto field = paper_example_field();
  const auto cfg = rk4(1e-3);
  const std::vector<double> outs{-1.0, -0.5, 0.0};
  Vector eta_end(2), v0(2);
  eta_end << 0.6, -0.8;
  v0 << 1.0, 2.0;
  const auto eta = adjoint_solution(field.entries(), eta_end, 0.0, -1.0, cfg, outs);
  const CoefficientFn entries = field.entries();
  const OdeField vf = [&entries](double t, const Vector& v, Vector& dv) { dv = entries(t) * v; };
  const auto v = integrate_ode(vf, v0, TimeInterval::make(-1, 0), cfg, outs);
  const double ref = eta.back().second.dot(v.back().second);
  for (std::size_t k = 0; k < outs.size(); ++k) {
    CHECK(std::abs(eta[k].second.dot(v[k].second) - ref) <= 1e-8 * std::abs(ref));
  }
}

TEST_CASE("fixed_step_nodes hits every cut exactly") {
  const double cuts[] = {0.25, 0.7, 2.0};
  const auto nodes = fixed_step_nodes(TimeInterval::make(0, 1), 0.1, cuts);
  CHECK(nodes.front() == 0.0);
  CHECK(nodes.back() == 1.0);
  CHECK(std::find(nodes.begin(), nodes.end(), 0.25) != nodes.end());
  CHECK(std::find(nodes.begin(), nodes.end(), 0.7) != nodes.end());
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    CHECK(nodes[i] > nodes[i - 1]);
    CHECK(nodes[i] - nodes[i - 1] <= 0.1 + 1e-15);
  }
}
