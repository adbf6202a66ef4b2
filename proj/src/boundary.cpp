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

#include "boundaryflow/boundary.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>


namespace boundaryflow {

BoundaryField::BoundaryField(SystemSpec base) : base_(std::move(base)) {
  base_.validate(/*allow_zero_rho=*/true);
}

Vector normal_rate(const Matrix& jacobian, const Vector& n) {
  const Vector jt_n = jacobian.transpose() * n;
  return -jt_n + n.dot(jt_n) * n;
}

BoundaryDerivative boundary_rhs(const BoundaryField& field, double t, const BoundaryState& state) {
  const auto& spec = field.base();
  if (state.x.size() != spec.dim || state.n.size() != spec.dim) {
    throw ConfigError("boundary state has the wrong dimension");
  }
  if (std::abs(state.n.norm() - 1.0) > 1e-9) throw ConfigError("boundary normal is not a unit vector");
  BoundaryDerivative d;
  d.dx = spec.rhs(t, state.x) + spec.rho * state.n;
  d.dn = normal_rate(spec.jacobian(t, state.x), state.n);
  if (!d.dx.allFinite() || !d.dn.allFinite()) {
    throw InvalidSystemError("boundary system produced a non-finite derivative");
  }
  return d;
}

BoundaryTrajectory integrate_boundary(const BoundaryField& field, const BoundaryState& init,
                                      TimeInterval interval, Direction direction,
                                      const IntegratorConfig& cfg, std::span<const double> output_times) {
  const auto& spec = field.base();
  const int d = spec.dim;
  if (init.x.size() != d || init.n.size() != d) throw ConfigError("boundary state has the wrong dimension");
  if (std::abs(init.n.norm() - 1.0) > 1e-9) throw ConfigError("initial normal is not a unit vector");

  Vector y(2 * d);
  y.head(d) = init.x;
  y.tail(d) = init.n.normalized();

  const OdeField ode = [&spec, d](double t, const Vector& s, Vector& ds) {
    ds.resize(2 * d);
    const auto x = s.head(d);
    const auto n = s.tail(d);
    const Vector xv = x;
    ds.head(d) = spec.rhs(t, xv) + spec.rho * n;
    const Matrix jac = spec.jacobian(t, xv);
    const Vector jt_n = jac.transpose() * n;
    ds.tail(d) = -jt_n + n.dot(jt_n) * n;
  };

  BoundaryTrajectory result;
  OdeOptions opts;
  opts.on_step = [&result, d](double, Vector& s) {
    const double norm = s.tail(d).norm();
    result.max_norm_drift = std::max(result.max_norm_drift, std::abs(norm - 1.0));
    s.tail(d) /= norm;
  };
  const auto traj = direction == Direction::Forward
                        ? integrate_ode(ode, y, interval, cfg, output_times, opts)
                        : integrate_ode_backward(ode, y, interval, cfg, output_times, opts);
  result.states.reserve(traj.size());
  for (const auto& [t, s] : traj) {
    result.states.emplace_back(t, BoundaryState{s.head(d), s.tail(d)});
  }
  return result;
}

void ReconstructionConfig::validate(int dim) const {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw ConfigError("reconstruction horizon must be positive");
  if (normal_count < (dim == 2 ? 3 : 1)) throw ConfigError("reconstruction needs at least 3 normals");
  if (seed_point.size() != 0 && seed_point.size() != dim) throw ConfigError("seed point has the wrong dimension");
  if (!(trunc_tol > 0.0)) throw ConfigError("truncation tolerance must be positive");
}

std::vector<Vector> normal_grid_2d(int count) {
  if (count < 1) throw ConfigError("normal grid needs a positive count");
  std::vector<Vector> normals(static_cast<std::size_t>(count), Vector(2));
  const int half = count % 2 == 0 ? count / 2 : count;
  for (int k = 0; k < half; ++k) {
    const double angle = 2.0 * std::numbers::pi * k / count;
    normals[k] << std::cos(angle), std::sin(angle);
  }
  for (int k = half; k < count; ++k) normals[k] = -normals[k - half];
  return normals;
}

NormalPath NormalPath::backward(const LinearField& field, const Vector& n_end, double t_end, double t_start,
                                const IntegratorConfig& cfg) {
  if (n_end.size() != field.dim()) throw ConfigError("normal has the wrong dimension");
  if (std::abs(n_end.norm() - 1.0) > 1e-9) throw ConfigError("normal is not a unit vector");
  const CoefficientFn entries = field.entries();
  const OdeField ode = [&entries](double t, const Vector& n, Vector& dn) {
    const Vector lt_n = entries(t).transpose() * n;
    dn = -lt_n + n.dot(lt_n) * n;
  };

  NormalPath path;
  path.times_.push_back(t_end);
  path.normals_.push_back(n_end.normalized());
  OdeOptions opts;
  opts.on_step = [&path](double t, Vector& n) {
    n.normalize();
    path.times_.push_back(t);
    path.normals_.push_back(n);
  };
  const double out[] = {t_start};
  integrate_ode_backward(ode, path.normals_.front(), TimeInterval::make(t_start, t_end), cfg, out, opts);

  std::reverse(path.times_.begin(), path.times_.end());
  std::reverse(path.normals_.begin(), path.normals_.end());
  path.rates_.reserve(path.times_.size());
  for (std::size_t i = 0; i < path.times_.size(); ++i) {
    path.rates_.push_back(normal_rate(entries(path.times_[i]), path.normals_[i]));
  }
  return path;
}

Vector NormalPath::operator()(double t) const {
  if (t <= times_.front()) return normals_.front();
  if (t >= times_.back()) return normals_.back();
  const auto it = std::upper_bound(times_.begin(), times_.end(), t);
  const auto b = static_cast<std::size_t>(it - times_.begin());
  const auto a = b - 1;
  const double h = times_[b] - times_[a];
  const double s = (t - times_[a]) / h;
  const double s2 = s * s, s3 = s2 * s;
  const double h00 = 2 * s3 - 3 * s2 + 1, h10 = s3 - 2 * s2 + s;
  const double h01 = -2 * s3 + 3 * s2, h11 = s3 - s2;
  Vector n = h00 * normals_[a] + (h10 * h) * rates_[a] + h01 * normals_[b] + (h11 * h) * rates_[b];
  n.normalize();
  return n;
}

Trajectory drive_along_normals(const LinearField& field, double rho, const NormalPath& path,
                               const Vector& seed, const IntegratorConfig& cfg,
                               std::span<const double> output_times) {
  if (seed.size() != field.dim()) throw ConfigError("seed point has the wrong dimension");
  const CoefficientFn entries = field.entries();
  const OdeField ode = [&entries, &path, rho](double s, const Vector& x, Vector& dx) {
    dx.noalias() = entries(s) * x;
    dx += rho * path(s);
  };
  return integrate_ode(ode, seed, TimeInterval::make(path.t_start(), path.t_end()), cfg, output_times);
}

FibreEntry boundary_point(const LinearField& field, double rho, double tau, const Vector& normal,
                          const ReconstructionConfig& rcfg, const IntegratorConfig& cfg) {
  const int d = field.dim();
  rcfg.validate(d);
  const Vector seed = rcfg.seed_point.size() == 0 ? Vector::Zero(d) : rcfg.seed_point;
  const auto path = NormalPath::backward(field, normal, tau, tau - rcfg.horizon, cfg);
  const double out[] = {tau};
  auto x = drive_along_normals(field, rho, path, seed, cfg, out).front().second;
  return FibreEntry{std::move(x), normal};
}

std::vector<FibreEntry> boundary_points(const LinearField& field, double rho, double tau,
                                        std::span<const Vector> normals, const ReconstructionConfig& rcfg,
                                        const IntegratorConfig& cfg) {
  const int d = field.dim();
  rcfg.validate(d);
  for (const auto& n : normals) {
    if (n.size() != d) throw ConfigError("normal has the wrong dimension");
    if (std::abs(n.norm() - 1.0) > 1e-9) throw ConfigError("normal is not a unit vector");
  }
  const auto count = static_cast<Eigen::Index>(normals.size());
  Matrix dirs(d, count);
  for (Eigen::Index i = 0; i < count; ++i) dirs.col(i) = normals[static_cast<std::size_t>(i)];

  // State: M (d x d) followed by the accumulated integrals X (d x count).
  const CoefficientFn entries = field.entries();
  const Eigen::Index msize = static_cast<Eigen::Index>(d) * d;
  const OdeField ode = [&](double s, const Vector& y, Vector& dy) {
    dy.resize(y.size());
    const Eigen::Map<const Matrix> m(y.data(), d, d);
    Eigen::Map<Matrix> dm(dy.data(), d, d);
    Eigen::Map<Matrix> dx(dy.data() + msize, d, count);
    dm.noalias() = -m * entries(s);
    const Matrix w = m.transpose() * dirs;  // unnormalized transported normals
    dx.noalias() = m * w;
    for (Eigen::Index i = 0; i < count; ++i) {
      const double len = w.col(i).norm();
      dx.col(i) *= len > 0.0 ? -rho / len : 0.0;
    }
  };

  Vector y = Vector::Zero(msize + d * count);
  Eigen::Map<Matrix>(y.data(), d, d).setIdentity();
  const double start = tau - rcfg.horizon;
  const double out[] = {start};
  const Vector end = integrate_ode_backward(ode, y, TimeInterval::make(start, tau), cfg, out).front().second;

  const Eigen::Map<const Matrix> m(end.data(), d, d);
  const Eigen::Map<const Matrix> x(end.data() + msize, d, count);
  const Vector seed = rcfg.seed_point.size() == 0 ? Vector::Zero(d) : rcfg.seed_point;
  const Vector base = m * seed;
  std::vector<FibreEntry> result;
  result.reserve(normals.size());
  for (Eigen::Index i = 0; i < count; ++i) {
    result.push_back(FibreEntry{base + x.col(i), normals[static_cast<std::size_t>(i)]});
  }
  return result;
}

BoundaryFibre reconstruct_fibre(const LinearField& field, double rho, double tau,
                                const StabilityCertificate& cert, const ReconstructionConfig& rcfg,
                                const IntegratorConfig& cfg) {
  if (field.dim() != 2) throw UnsupportedError("fibre reconstruction is implemented for d = 2 only");
  cert.validate();
  rcfg.validate(2);
  cfg.validate();
  if (!(rho >= 0.0) || !std::isfinite(rho)) throw ConfigError("noise radius must be non-negative");
  const auto normals = normal_grid_2d(rcfg.normal_count);
  return BoundaryFibre::make(tau, boundary_points(field, rho, tau, normals, rcfg, cfg));
}

PullbackResult pullback_converge(const LinearField& field, double rho, double tau,
                                 const StabilityCertificate& cert, const ReconstructionConfig& rcfg,
                                 const IntegratorConfig& cfg, double tol, double horizon_cap) {
  if (!(tol > 0.0)) throw ConfigError("pullback tolerance must be positive");
  ReconstructionConfig current = rcfg;
  auto previous = reconstruct_fibre(field, rho, tau, cert, current, cfg);
  for (;;) {
    current.horizon *= 2.0;
    if (current.horizon > horizon_cap) {
      std::ostringstream os;
      os << "pullback reconstruction did not converge to " << tol << " before horizon " << horizon_cap;
      throw NonConvergenceError(os.str());
    }
    auto next = reconstruct_fibre(field, rho, tau, cert, current, cfg);
    const auto a = previous.points();
    const auto b = next.points();
    const double delta = hausdorff_distance(a, b);
    if (delta <= tol) return PullbackResult{std::move(next), delta, current.horizon};
    previous = std::move(next);
  }
}

}  // namespace boundaryflow
