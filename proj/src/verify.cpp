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

#include "boundaryflow/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "boundaryflow/parallel.hpp"

namespace boundaryflow {

PropertyReport make_report(std::string name, double metric, double tolerance, std::string details) {
  PropertyReport r;
  r.name = std::move(name);
  r.metric = metric;
  r.tolerance = tolerance;
  r.passed = metric <= tolerance;  // NaN fails
  r.details = std::move(details);
  return r;
}

PropertyReport check_symmetry(const BoundaryFibre& fibre, double tol) {
  double worst = 0.0;
  for (const auto& e : fibre.entries) {
    const auto it = std::find_if(fibre.entries.begin(), fibre.entries.end(), [&](const FibreEntry& o) {
      return (o.n + e.n).norm() <= 1e-12;
    });
    if (it == fibre.entries.end()) throw ConfigError("symmetry check: fibre lacks an antipodal normal");
    worst = std::max(worst, (e.x + it->x).norm());
  }
  std::ostringstream os;
  os << "max |x(n) + x(-n)| over " << fibre.entries.size() << " normals at t = " << fibre.time;
  return make_report("symmetry", worst, tol, os.str());
}

PropertyReport check_convexity(const BoundaryFibre& fibre, const FibreCloud& cloud, double tol) {
  if (std::abs(fibre.time - cloud.time) > 1e-9) throw ConfigError("convexity check: fibre and cloud times differ");
  const auto polygon = fibre.points();
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& p : cloud.points) worst = std::max(worst, signed_distance_to_polygon(polygon, p));
  std::ostringstream os;
  os << "max signed distance of " << cloud.points.size() << " cloud points outside the fibre at t = "
     << fibre.time;
  return make_report("convexity", worst, tol, os.str());
}

PropertyReport check_scaling(const LinearField& field, const StabilityCertificate& cert, double tau,
                             double rho1, double rho2, const ReconstructionConfig& rcfg,
                             const IntegratorConfig& cfg, double tol) {
  if (!(rho1 > 0.0) || !(rho2 > 0.0)) throw ConfigError("scaling check needs positive noise radii");
  const auto a = reconstruct_fibre(field, rho1, tau, cert, rcfg, cfg);
  const auto b = reconstruct_fibre(field, rho2, tau, cert, rcfg, cfg);
  double worst = 0.0;
  for (std::size_t i = 0; i < a.entries.size(); ++i) {
    const Vector& xb = b.entries[i].x;
    const double err = (xb - (rho2 / rho1) * a.entries[i].x).norm();
    worst = std::max(worst, xb.norm() > 0.0 ? err / xb.norm() : err);
  }
  std::ostringstream os;
  os << "relative deviation from linear scaling, rho " << rho1 << " vs " << rho2 << " at t = " << tau;
  return make_report("scaling", worst, tol, os.str());
}

PropertyReport check_backward_invariance(const LinearField& field, double rho, const StabilityCertificate& cert,
                                         const BoundaryFibre& fibre, double depth,
                                         const ReconstructionConfig& rcfg, const IntegratorConfig& cfg,
                                         double tol, BackwardRoute route) {
  if (!(depth > 0.0)) throw ConfigError("backward invariance needs a positive depth");
  if (fibre.dim() != 2) throw UnsupportedError("backward invariance check is implemented for d = 2 only");
  cert.validate();
  rcfg.validate(2);
  const double tau = fibre.time;
  const double earlier = tau - depth;

  const double amplification =
      spectral_norm(transition_matrix(field.entries(), field.dim(), tau, earlier, cfg).matrix);
  if (route == BackwardRoute::Auto) {
    route = amplification <= 1e6 ? BackwardRoute::Direct : BackwardRoute::Pullback;
  }

  const BoundaryField bfield(linear_system(field, rho));
  const Vector seed = rcfg.seed_point.size() == 0 ? Vector::Zero(field.dim()) : rcfg.seed_point;

  // Each transported entry is compared with the earlier fibre point that a
  // fresh reconstruction assigns to the transported normal.
  const std::size_t count = fibre.entries.size();
  std::vector<Vector> xs_back(count), ns_back(count);
  std::vector<double> dist(count), slip(count, 0.0);
  parallel_for(fibre.entries.size(), [&](std::size_t i) {
    const auto& e = fibre.entries[i];
    Vector x_back, n_back;
    if (route == BackwardRoute::Direct) {
      const double out[] = {earlier};
      const auto traj = integrate_boundary(bfield, BoundaryState{e.x, e.n}, TimeInterval::make(earlier, tau),
                                           Direction::Backward, cfg, out);
      x_back = traj.states.front().second.x;
      n_back = traj.states.front().second.n;
    } else {
      const auto path = NormalPath::backward(field, e.n, tau, earlier - rcfg.horizon, cfg);
      const double out[] = {earlier, tau};
      const auto xs = drive_along_normals(field, rho, path, seed, cfg, out);
      x_back = xs[0].second;
      n_back = path(earlier);
      // The trajectory must also pass through the entry it was built from.
      slip[i] = (xs[1].second - e.x).norm();
    }
    xs_back[i] = std::move(x_back);
    ns_back[i] = n_back.normalized();
  });
  const auto refs = boundary_points(field, rho, earlier, ns_back, rcfg, cfg);
  for (std::size_t i = 0; i < count; ++i) dist[i] = (xs_back[i] - refs[i].x).norm();

  const double worst_dist = *std::max_element(dist.begin(), dist.end());
  const double worst_slip = *std::max_element(slip.begin(), slip.end());
  std::ostringstream os;
  os << "route " << (route == BackwardRoute::Direct ? "direct" : "pullback") << ", depth " << depth
     << ", backward amplification " << amplification << "; max distance to the fibre at t = " << earlier << ": "
     << worst_dist;
  if (route == BackwardRoute::Pullback) os << ", max slip at t = " << tau << ": " << worst_slip;
  return make_report("backward-invariance", std::max(worst_dist, worst_slip), tol, os.str());
}

PropertyReport check_forward_invariance(const LinearField& field, double rho, const StabilityCertificate& cert,
                                        const BoundaryFibre& fibre, double delta,
                                        const ReconstructionConfig& rcfg, const IntegratorConfig& cfg,
                                        double tol) {
  if (!(delta > 0.0)) throw ConfigError("forward invariance needs a positive time step");
  if (fibre.dim() != 2) throw UnsupportedError("forward invariance check is implemented for d = 2 only");
  cert.validate();
  rcfg.validate(2);
  const double tau = fibre.time;
  const BoundaryField bfield(linear_system(field, rho));
  const std::size_t count = fibre.entries.size();
  std::vector<Vector> xs(count), ns(count);
  parallel_for(count, [&](std::size_t i) {
    const auto& e = fibre.entries[i];
    const double out[] = {tau + delta};
    const auto traj = integrate_boundary(bfield, BoundaryState{e.x, e.n}, TimeInterval::make(tau, tau + delta),
                                         Direction::Forward, cfg, out);
    const auto& s = traj.states.front().second;
    xs[i] = s.x;
    ns[i] = s.n.normalized();
  });
  const auto refs = boundary_points(field, rho, tau + delta, ns, rcfg, cfg);
  std::vector<double> dist(count);
  for (std::size_t i = 0; i < count; ++i) dist[i] = (xs[i] - refs[i].x).norm();
  const double worst = *std::max_element(dist.begin(), dist.end());
  std::ostringstream os;
  os << "step " << delta << "; max distance to the fibre at t = " << tau + delta << ": " << worst;
  return make_report("forward-invariance", worst, tol, os.str());
}

PropertyReport check_gauss_injectivity(const BoundaryFibre& fibre) {
  if (fibre.dim() != 2) throw UnsupportedError("gauss-map check is implemented for d = 2 only");
  constexpr double kMinIncrement = 1e-12;
  const auto& entries = fibre.entries;
  Vector centre = Vector::Zero(2);
  for (const auto& e : entries) centre += e.x;
  centre /= static_cast<double>(entries.size());

  double min_inc = std::numeric_limits<double>::infinity();
  double total = 0.0;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const Vector a = entries[i].x - centre;
    const Vector b = entries[(i + 1) % entries.size()].x - centre;
    double inc = std::atan2(b[1], b[0]) - std::atan2(a[1], a[0]);
    if (a.norm() == 0.0 || b.norm() == 0.0) inc = 0.0;
    while (inc <= -std::numbers::pi) inc += 2.0 * std::numbers::pi;
    while (inc > std::numbers::pi) inc -= 2.0 * std::numbers::pi;
    min_inc = std::min(min_inc, inc);
    total += inc;
  }
  const double winding_defect = std::abs(total - 2.0 * std::numbers::pi);
  const double metric = std::max(0.0, kMinIncrement - min_inc) + (winding_defect > 1e-6 ? winding_defect : 0.0);
  std::ostringstream os;
  os << "min angular increment " << min_inc << " rad, total turn " << total << " rad at t = " << fibre.time;
  return make_report("gauss-injectivity", metric, 0.0, os.str());
}

PropertyReport check_pullback_decay(const LinearField& field, double rho, const StabilityCertificate& cert,
                                    double tau, std::span<const double> horizons,
                                    const ReconstructionConfig& rcfg, const IntegratorConfig& cfg) {
  if (horizons.size() < 3) throw ConfigError("pullback decay check needs at least 3 horizons");
  for (std::size_t i = 1; i < horizons.size(); ++i) {
    if (!(horizons[i] > horizons[i - 1])) throw ConfigError("pullback horizons must increase");
  }
  cert.validate();
  std::vector<BoundaryFibre> fibres;
  for (double h : horizons) {
    ReconstructionConfig r = rcfg;
    r.horizon = h;
    fibres.push_back(reconstruct_fibre(field, rho, tau, cert, r, cfg));
  }
  const auto last = fibres.back().points();
  double scale = 0.0;
  for (const auto& p : last) scale = std::max(scale, p.norm());
  // Distances at round-off level carry no rate information.
  const double floor = 1e-13 * std::max(1.0, scale);

  std::vector<std::pair<double, double>> samples;
  std::ostringstream os;
  os << "errors:";
  for (std::size_t k = 0; k + 1 < fibres.size(); ++k) {
    const double e = hausdorff_distance(fibres[k].points(), last);
    os << " T=" << horizons[k] << ":" << e;
    if (e > floor) samples.emplace_back(horizons[k], std::log(e));
  }
  const double required = -0.8 * cert.gamma;
  if (samples.size() < 2) {
    os << "; converged below round-off, no rate to fit";
    return make_report("pullback-decay", required, required, os.str());
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& [x, y] : samples) {
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double n = static_cast<double>(samples.size());
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  os << "; fitted log-slope " << slope << ", required <= " << required;
  return make_report("pullback-decay", slope, required, os.str());
}

PropertyReport check_horizon_doubling(const LinearField& field, double rho, const StabilityCertificate& cert,
                                      const BoundaryFibre& fibre, const ReconstructionConfig& rcfg,
                                      const IntegratorConfig& cfg, double tol) {
  ReconstructionConfig longer = rcfg;
  longer.horizon = 2.0 * rcfg.horizon;
  const auto next = reconstruct_fibre(field, rho, fibre.time, cert, longer, cfg);
  const double delta = hausdorff_distance(fibre.points(), next.points());
  std::ostringstream os;
  os << "horizon " << rcfg.horizon << " vs " << longer.horizon << " at t = " << fibre.time;
  return make_report("horizon-doubling", delta, tol, os.str());
}

PropertyReport check_support_dominance(const BoundaryFibre& fibre, const FibreCloud& cloud, double tol) {
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& e : fibre.entries) {
    worst = std::max(worst, support_function(cloud.points, e.n) - e.n.dot(e.x));
  }
  std::ostringstream os;
  os << "max over normals of h_cloud(n) - <n, x(n)> at t = " << fibre.time;
  return make_report("support-dominance", worst, tol, os.str());
}

}  // namespace boundaryflow
