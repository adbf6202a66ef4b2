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

#include <span>
#include <utility>
#include <vector>

#include "boundaryflow/core.hpp"
#include "boundaryflow/integrate.hpp"
#include "boundaryflow/linear.hpp"

namespace boundaryflow {

/// The boundary system on R^d x S^{d-1}:
///   x' = f(t, x) + rho n
///   n' = -Df(t, x)^T n + <n, Df(t, x)^T n> n
class BoundaryField {
 public:
  explicit BoundaryField(SystemSpec base);
  const SystemSpec& base() const { return base_; }
  int dim() const { return base_.dim; }

 private:
  SystemSpec base_;
};

struct BoundaryDerivative {
  Vector dx;
  Vector dn;
};

BoundaryDerivative boundary_rhs(const BoundaryField& field, double t, const BoundaryState& state);

/// Tangential part of the normal equation for a given Jacobian.
Vector normal_rate(const Matrix& jacobian, const Vector& n);

enum class Direction { Forward, Backward };

struct BoundaryTrajectory {
  std::vector<std::pair<double, BoundaryState>> states;  // in output_times order
  double max_norm_drift = 0.0;  // largest | |n| - 1 | seen before renormalization
};

/// Integrates the 2d-dimensional boundary system. Forward runs start from
/// `init` at interval.t0, backward runs from `init` at interval.t1. n is
/// renormalized after every accepted step.
BoundaryTrajectory integrate_boundary(const BoundaryField& field, const BoundaryState& init,
                                      TimeInterval interval, Direction direction,
                                      const IntegratorConfig& cfg, std::span<const double> output_times);

struct ReconstructionConfig {
  int normal_count = 150;
  double horizon = 10.0;  // pullback depth
  Vector seed_point;      // empty means the origin
  double trunc_tol = 1e-10;

  void validate(int dim) const;
};

/// Unit normals at uniform angles 2 pi k / count. For even counts the second
/// half is the exact negation of the first, so antipodes are bitwise opposite.
std::vector<Vector> normal_grid_2d(int count);

/// Normal trajectory of the linear boundary system, obtained by integrating
/// n' = -L^T n + <n, L^T n> n backward from n(t_end). The record keeps every
/// step and is evaluated by piecewise cubic Hermite interpolation.
class NormalPath {
 public:
  static NormalPath backward(const LinearField& field, const Vector& n_end, double t_end, double t_start,
                             const IntegratorConfig& cfg);

  Vector operator()(double t) const;
  double t_start() const { return times_.front(); }
  double t_end() const { return times_.back(); }
  const Vector& at_start() const { return normals_.front(); }

 private:
  std::vector<double> times_;  // ascending
  std::vector<Vector> normals_;
  std::vector<Vector> rates_;
};

/// Forward pass of the reconstruction: integrates x' = L(s) x + rho n(s) from
/// x(path.t_start()) = seed along the recorded normal path. Returns x at each
/// output time (sorted, inside the path's span).
Trajectory drive_along_normals(const LinearField& field, double rho, const NormalPath& path,
                               const Vector& seed, const IntegratorConfig& cfg,
                               std::span<const double> output_times);

/// Boundary point of the fibre at tau whose outward normal is `normal`.
FibreEntry boundary_point(const LinearField& field, double rho, double tau, const Vector& normal,
                          const ReconstructionConfig& rcfg, const IntegratorConfig& cfg);

/// Pullback reconstruction of the attractor fibre boundary at time tau (d = 2):
/// each grid normal is transported backward by `rcfg.horizon`, then x is driven
/// forward from the seed point to tau along that normal trajectory.
/// Boundary points for many normals at once. With M(s) = Psi(tau, s),
///   x(tau) = M(tau - T) seed + rho * int_{tau-T}^{tau} M(s) n(s) ds,
///   n(s)   = M(s)^T n / |M(s)^T n|,
/// which is the boundary trajectory through n at tau. M is integrated
/// backward once and shared by all normals. Output follows input order.
std::vector<FibreEntry> boundary_points(const LinearField& field, double rho, double tau,
                                        std::span<const Vector> normals, const ReconstructionConfig& rcfg,
                                        const IntegratorConfig& cfg);

BoundaryFibre reconstruct_fibre(const LinearField& field, double rho, double tau,
                                const StabilityCertificate& cert, const ReconstructionConfig& rcfg,
                                const IntegratorConfig& cfg);

struct PullbackResult {
  BoundaryFibre fibre;
  double achieved_delta = 0.0;
  double horizon = 0.0;
};

/// Doubles the horizon until successive reconstructions are within `tol` in
/// Hausdorff distance. Throws NonConvergenceError past `horizon_cap`.
PullbackResult pullback_converge(const LinearField& field, double rho, double tau,
                                 const StabilityCertificate& cert, const ReconstructionConfig& rcfg,
                                 const IntegratorConfig& cfg, double tol,
                                 double horizon_cap = kHorizonCap);

}  // namespace boundaryflow
