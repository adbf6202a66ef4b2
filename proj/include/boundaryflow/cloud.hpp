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
#include <span>
#include <vector>

#include "boundaryflow/core.hpp"
#include "boundaryflow/integrate.hpp"

namespace boundaryflow {

enum class ControlLaw { UnitSphere, Ball };

std::string to_string(ControlLaw law);

struct CloudConfig {
  int trajectory_count = 500;
  double segment_length = 0.1;  // control switching period
  ControlLaw law = ControlLaw::UnitSphere;
  std::uint64_t seed = 20240601;

  void validate() const;
};

/// Value of control stream `stream` on segment `segment`. Counter based: any
/// (seed, stream, segment) triple is evaluated directly, without generator state.
Vector control_value(const CloudConfig& ccfg, int dim, std::uint64_t stream, std::uint64_t segment);

/// Piecewise-constant admissible control switching every segment_length from
/// interval.t0, drawn from stream `rng_stream`.
ControlSignal sample_control(const CloudConfig& ccfg, TimeInterval interval, int dim,
                             std::uint64_t rng_stream);

/// Raised by evolve_cloud when some trajectories fail; lists their indices.
class CloudIntegrationError : public IntegrationError {
 public:
  CloudIntegrationError(const std::string& what, std::vector<std::size_t> failed)
      : IntegrationError(what), failed_(std::move(failed)) {}
  const std::vector<std::size_t>& failed() const { return failed_; }

 private:
  std::vector<std::size_t> failed_;
};

/// Sample of the set-valued flow: trajectory i starts at start.points[i mod m]
/// at interval.t0 and is driven by control stream i. Returns one cloud per
/// output time.
std::vector<FibreCloud> evolve_cloud(const SystemSpec& spec, const CloudConfig& ccfg, const FibreCloud& start,
                                     TimeInterval interval, const IntegratorConfig& cfg,
                                     std::span<const double> output_times);

/// Convex hull, counter-clockwise from the lowest-leftmost point. Collinear
/// boundary points are dropped; degenerate inputs give 1 or 2 points.
std::vector<Vector> convex_hull_2d(std::span<const Vector> points);

/// max_p <direction, p>.
double support_function(std::span<const Vector> points, const Vector& direction);

/// Distance from p to the closed polygon boundary, negative inside (even-odd
/// rule). Polygons with fewer than 3 vertices have no interior.
double signed_distance_to_polygon(std::span<const Vector> polygon, const Vector& p);

/// Hausdorff distance between the convex hulls of two planar point sets.
double convex_hausdorff(std::span<const Vector> a, std::span<const Vector> b);

}  // namespace boundaryflow
