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

#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "boundaryflow/core.hpp"

namespace boundaryflow {

enum class Method { Rk4Fixed, Rk45Adaptive };

struct IntegratorConfig {
  Method method = Method::Rk4Fixed;
  double step = 1e-3;  // fixed step, and initial step for the adaptive method
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  std::int64_t max_steps = 200'000'000;

  void validate() const;
};

/// In-place vector field: writes dy/dt at (t, y) into `dydt`.
using OdeField = std::function<void(double t, const Vector& y, Vector& dydt)>;

/// Runs after every accepted step and may project the state in place.
using StepHook = std::function<void(double t, Vector& y)>;

using CoefficientFn = std::function<Matrix(double)>;

struct OdeOptions {
  /// Times where the field may be discontinuous; no step straddles one.
  std::span<const double> breakpoints;
  StepHook on_step;
};

using Trajectory = std::vector<std::pair<double, Vector>>;

/// Step nodes used by the fixed-step method on `interval`: the interval is cut
/// at every entry of `cuts` strictly inside it and each piece is split into
/// ceil(length / h) equal steps. Shared by the ensemble integrator so that
/// batched and single-trajectory runs see identical grids.
std::vector<double> fixed_step_nodes(TimeInterval interval, double h, std::span<const double> cuts);

/// Integrates y' = field(t, y) from y(interval.t0) = y0. Returns the state at
/// every entry of `output_times` (sorted, inside the interval), in that order.
Trajectory integrate_ode(const OdeField& field, const Vector& y0, TimeInterval interval,
                         const IntegratorConfig& cfg, std::span<const double> output_times,
                         const OdeOptions& options = {});

/// Same as integrate_ode but starts from y(interval.t1) = y_end and runs toward
/// interval.t0, by reversing time in the field. Outputs are returned in the
/// (ascending) order of `output_times`; the hook sees physical time.
Trajectory integrate_ode_backward(const OdeField& field, const Vector& y_end, TimeInterval interval,
                                  const IntegratorConfig& cfg, std::span<const double> output_times,
                                  const OdeOptions& options = {});

struct TransitionMatrix {
  double t = 0.0;
  double s = 0.0;
  Matrix matrix;
};

/// Principal matrix solution Psi(t, s) of x' = L(tau) x. Either ordering of s
/// and t is accepted.
TransitionMatrix transition_matrix(const CoefficientFn& coefficients, int dim, double s, double t,
                                   const IntegratorConfig& cfg);

/// Row-vector solution of eta' = -eta L(t), eta(t_end) = eta_end, integrated
/// backward to t_start < t_end. Entries are returned as column vectors.
Trajectory adjoint_solution(const CoefficientFn& coefficients, const Vector& eta_end, double t_end,
                            double t_start, const IntegratorConfig& cfg,
                            std::span<const double> output_times);

}  // namespace boundaryflow
