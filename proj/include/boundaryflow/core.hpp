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

#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace boundaryflow {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Error hierarchy. The CLI maps each family onto an exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class ConfigError : public Error {
 public:
  using Error::Error;
};
class InvalidSystemError : public Error {
 public:
  using Error::Error;
};
class NotStableError : public Error {
 public:
  using Error::Error;
};
class IntegrationError : public Error {
 public:
  using Error::Error;
};
/// Step budget exhausted before reaching the end of the interval.
class DivergenceError : public IntegrationError {
 public:
  using IntegrationError::IntegrationError;
};
/// Non-finite state encountered during integration.
class BlowUpError : public IntegrationError {
 public:
  using IntegrationError::IntegrationError;
};
class NonConvergenceError : public Error {
 public:
  using Error::Error;
};
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

/// Tolerance for unit-norm checks on normals.
inline constexpr double kUnitNormTol = 1e-12;

struct TimeInterval {
  double t0 = 0.0;
  double t1 = 1.0;

  /// Throws ConfigError unless t0 < t1 (both finite).
  static TimeInterval make(double t0, double t1);
  double length() const { return t1 - t0; }
  bool contains(double t) const { return t >= t0 && t <= t1; }
};

/// Data of the inclusion x' in closed-ball(f(t,x), rho).
///
/// `linear_part`, when set, states that rhs(t,x) == linear_part(t) * x. Ensemble
/// integrators use it to evaluate the coefficient matrix once per stage.
struct SystemSpec {
  int dim = 2;
  std::function<Vector(double, const Vector&)> rhs;
  std::function<Matrix(double, const Vector&)> jacobian;
  double rho = 1.0;
  std::function<Matrix(double)> linear_part;

  /// Checks dim >= 2, rho > 0 (rho == 0 allowed when `allow_zero_rho`) and
  /// that both callables are set.
  void validate(bool allow_zero_rho = false) const;
};

struct BoundaryState {
  Vector x;
  Vector n;
};

/// Piecewise-constant admissible control. values[k] holds on
/// [breakpoints[k], breakpoints[k+1]); the first and last values extend
/// constantly beyond the breakpoint range.
class ControlSignal {
 public:
  ControlSignal(std::vector<double> breakpoints, std::vector<Vector> values);

  /// Signal equal to `value` for all times.
  static ControlSignal constant(const Vector& value);

  Vector operator()(double t) const;
  const Vector& value_at(double t) const;

  std::span<const double> breakpoints() const { return breakpoints_; }
  std::span<const Vector> values() const { return values_; }
  int dim() const { return static_cast<int>(values_.front().size()); }

 private:
  std::vector<double> breakpoints_;
  std::vector<Vector> values_;
};

struct FibreCloud {
  double time = 0.0;
  std::vector<Vector> points;

  static FibreCloud make(double time, std::vector<Vector> points);
};

struct FibreEntry {
  Vector x;
  Vector n;
};

/// Sampled boundary of an attractor fibre with outward normals. In 2D the
/// entries are kept sorted by the angle of n.
struct BoundaryFibre {
  double time = 0.0;
  std::vector<FibreEntry> entries;

  /// Validates unit normals and, for d = 2, sorts by normal angle and requires
  /// strictly increasing angles.
  static BoundaryFibre make(double time, std::vector<FibreEntry> entries);

  int dim() const { return entries.empty() ? 0 : static_cast<int>(entries.front().x.size()); }
  std::vector<Vector> points() const;
};

/// Angle of a planar vector in (-pi, pi].
double planar_angle(const Vector& v);

struct ValidationReport {
  double max_residual = 0.0;  // relative, max over samples and columns
  double tolerance = 1e-4;
  bool passed = true;
  std::size_t samples = 0;
};

/// Compares the supplied Jacobian against central finite differences of rhs
/// at every sample. Residual is |FD_j - Df e_j| / (1 + |Df|_2).
ValidationReport validate_system(const SystemSpec& spec,
                                 std::span<const std::pair<double, Vector>> samples,
                                 double tolerance = 1e-4);

/// Symmetric Hausdorff distance between two finite point sets.
double hausdorff_distance(std::span<const Vector> a, std::span<const Vector> b);

/// Largest singular value.
double spectral_norm(const Matrix& m);

bool all_finite(const Vector& v);
bool all_finite(const Matrix& m);

}  // namespace boundaryflow
