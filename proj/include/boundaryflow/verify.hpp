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
#include <vector>

#include "boundaryflow/boundary.hpp"
#include "boundaryflow/cloud.hpp"
#include "boundaryflow/core.hpp"
#include "boundaryflow/linear.hpp"

namespace boundaryflow {

/// Outcome of one property check. passed == (metric <= tolerance).
struct PropertyReport {
  std::string name;
  bool passed = false;
  double metric = 0.0;
  double tolerance = 0.0;
  std::string details;
};

PropertyReport make_report(std::string name, double metric, double tolerance, std::string details = {});

/// Origin symmetry: max_i |x(n_i) + x(-n_i)|. Every normal needs its antipode
/// in the fibre.
PropertyReport check_symmetry(const BoundaryFibre& fibre, double tol);

/// Largest signed distance of a cloud point outside the fibre polygon.
PropertyReport check_convexity(const BoundaryFibre& fibre, const FibreCloud& cloud, double tol);

/// max_i |x_i(rho2) - (rho2 / rho1) x_i(rho1)| / |x_i(rho2)| over two reconstructions.
PropertyReport check_scaling(const LinearField& field, const StabilityCertificate& cert, double tau,
                             double rho1, double rho2, const ReconstructionConfig& rcfg,
                             const IntegratorConfig& cfg, double tol);

enum class BackwardRoute { Auto, Direct, Pullback };

/// Carries every (x_i, n_i) of `fibre` along the boundary system back to
/// tau - depth and measures the distance to an independently reconstructed
/// fibre there, plus the angle between the transported normal and the normal
/// of the nearest reconstructed point (scaled so one normal-grid cell equals
/// `tol`).
///
/// Direct integrates the boundary system backward from (x_i, n_i). Backward x
/// growth amplifies errors by |Psi(tau - depth, tau)|, so for strongly
/// contracting fields the Pullback route evaluates the same trajectory
/// forward: n is transported backward past tau - depth by rcfg.horizon and x
/// is driven forward from the seed through tau - depth to tau. Auto picks
/// Direct when the amplification is below 1e6.
PropertyReport check_backward_invariance(const LinearField& field, double rho, const StabilityCertificate& cert,
                                         const BoundaryFibre& fibre, double depth,
                                         const ReconstructionConfig& rcfg, const IntegratorConfig& cfg,
                                         double tol, BackwardRoute route = BackwardRoute::Auto);

/// Integrates the boundary system forward from each (x_i, n_i) by `delta` and
/// measures the distance to the fibre reconstructed at tau + delta.
PropertyReport check_forward_invariance(const LinearField& field, double rho, const StabilityCertificate& cert,
                                        const BoundaryFibre& fibre, double delta,
                                        const ReconstructionConfig& rcfg, const IntegratorConfig& cfg,
                                        double tol);

/// Strict monotonicity of boundary-point angles (about the centroid) as the
/// normal angle increases, with one full turn in total. metric is
/// max(0, 1e-12 - min increment) plus any winding defect; tolerance 0.
PropertyReport check_gauss_injectivity(const BoundaryFibre& fibre);

/// Fits log e_k against T_k, where e_k is the Hausdorff distance between the
/// reconstruction at horizon T_k and at the largest horizon. Passes when the
/// slope is at most -0.8 gamma.
PropertyReport check_pullback_decay(const LinearField& field, double rho, const StabilityCertificate& cert,
                                    double tau, std::span<const double> horizons,
                                    const ReconstructionConfig& rcfg, const IntegratorConfig& cfg);

/// support_function(cloud, n_i) <= <n_i, x_i> + tol for every fibre entry.
/// Hausdorff change between the fibre and a reconstruction with twice its
/// pullback horizon.
PropertyReport check_horizon_doubling(const LinearField& field, double rho, const StabilityCertificate& cert,
                                      const BoundaryFibre& fibre, const ReconstructionConfig& rcfg,
                                      const IntegratorConfig& cfg, double tol);

PropertyReport check_support_dominance(const BoundaryFibre& fibre, const FibreCloud& cloud, double tol);

}  // namespace boundaryflow
