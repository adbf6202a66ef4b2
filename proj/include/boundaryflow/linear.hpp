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
#include <string>

#include "boundaryflow/core.hpp"
#include "boundaryflow/integrate.hpp"

namespace boundaryflow {

enum class FieldKind { Constant, Diagonal, PaperExample, Custom };

/// Time-dependent coefficient matrix L(t) of x' = L(t) x.
class LinearField {
 public:
  LinearField(int dim, CoefficientFn entries, FieldKind kind);

  static LinearField constant(const Matrix& m);
  static LinearField diagonal(const Vector& d);
  static LinearField custom(int dim, CoefficientFn entries);

  Matrix operator()(double t) const { return entries_(t); }
  int dim() const { return dim_; }
  FieldKind kind() const { return kind_; }
  const CoefficientFn& entries() const { return entries_; }

 private:
  int dim_;
  CoefficientFn entries_;
  FieldKind kind_;
};

std::string to_string(FieldKind kind);

/// The 2x2 row-dominant example field
///   [ -20 + 10 atan(0.1 t)          (1 + atan t) cos(0.1 t) ]
///   [ (1 - atan t) sin t            -15 + 5 cos(0.5 t)      ]
LinearField paper_example_field();

/// Inclusion x' in B_rho(L(t) x); the Jacobian is L(t).
SystemSpec linear_system(const LinearField& field, double rho);

struct DominanceReport {
  bool dominant = false;
  double min_margin = 0.0;  // min over grid and rows of |L_ii| - sum_{j != i} |L_ij|
};

/// Row dominance: every diagonal entry negative and larger in modulus than the
/// off-diagonal row sum, at every grid time.
DominanceReport row_dominance_check(const LinearField& field, std::span<const double> grid);

enum class CertificateMethod { RowDominance, DecayFit };

std::string to_string(CertificateMethod method);

/// Constants with |Psi(t, s)| <= K exp(-gamma (t - s)) for s <= t in `window`.
struct StabilityCertificate {
  double K = 1.0;
  double gamma = 1.0;
  TimeInterval window{};
  CertificateMethod method = CertificateMethod::DecayFit;

  /// Throws NotStableError unless K >= 1 and gamma > 0 (both finite).
  void validate() const;
  double bound(double elapsed) const;
  double log_bound(double elapsed) const;
};

/// log |Psi(t, s)|_2 for s <= t, propagated over cells of length <= cell with
/// rescaling, so it stays finite where |Psi| itself underflows.
double log_transition_norm(const LinearField& field, double s, double t, const IntegratorConfig& cfg,
                           double cell = 1.0);

/// Fits (K, gamma) from transition-matrix norms sampled on the window.
///
/// The window is covered by a uniform grid with at least `sample_pairs` node
/// pairs. Psi is propagated cell by cell, log|Psi(t_j, t_i)| is regressed on
/// t_j - t_i by least squares, gamma is minus the slope and K is the smallest
/// constant >= 1 dominating every sampled pair. K is then widened by
/// exp(max(0, gamma + mu) * 2 h), where h is the grid spacing and mu the largest
/// logarithmic 2-norm of L on the window, so the bound also covers pairs that
/// fall between grid nodes.
///
/// Throws NotStableError when the fitted slope is not negative.
StabilityCertificate fit_certificate(const LinearField& field, TimeInterval window, int sample_pairs,
                                     const IntegratorConfig& cfg);

/// Certificate from row dominance: K = sqrt(d), gamma = min margin on the grid.
StabilityCertificate row_dominance_certificate(const LinearField& field, TimeInterval window,
                                               int grid_points = 10001);

/// Largest logarithmic 2-norm lambda_max((L + L^T) / 2) over `grid`.
double max_log_norm(const LinearField& field, std::span<const double> grid);

/// Smallest T >= 0 with rho K exp(-gamma T) / gamma <= tol.
double truncation_horizon(const StabilityCertificate& cert, double rho, double tol);

inline constexpr double kHorizonCap = 1e4;

/// Bounded entire solution rho * int_{-inf}^t Psi(t, s) xi(s) ds, truncated at
/// the certificate's horizon for `trunc_tol`.
Vector hyperbolic_solution(const LinearField& field, const ControlSignal& xi, double rho, double t,
                           const StabilityCertificate& cert, double trunc_tol,
                           const IntegratorConfig& cfg);

/// Same, with an explicit horizon T (no certificate needed).
Vector hyperbolic_solution_with_horizon(const LinearField& field, const ControlSignal& xi, double rho,
                                        double t, double horizon, const IntegratorConfig& cfg);

struct AttractorBound {
  double radius = 1.0;
};

AttractorBound attractor_bound(double rho, const StabilityCertificate& cert);

}  // namespace boundaryflow
