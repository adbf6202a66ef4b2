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

#include "boundaryflow/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace boundaryflow {

TimeInterval TimeInterval::make(double t0, double t1) {
  if (!std::isfinite(t0) || !std::isfinite(t1) || !(t0 < t1)) {
    std::ostringstream os;
    os << "time interval requires t0 < t1, got [" << t0 << ", " << t1 << "]";
    throw ConfigError(os.str());
  }
  return TimeInterval{t0, t1};
}

void SystemSpec::validate(bool allow_zero_rho) const {
  if (dim < 2) throw ConfigError("system dimension must be at least 2");
  if (!std::isfinite(rho) || rho < 0.0 || (rho == 0.0 && !allow_zero_rho)) {
    throw ConfigError("noise radius rho must be positive");
  }
  if (!rhs || !jacobian) throw ConfigError("system requires both rhs and jacobian");
}

ControlSignal::ControlSignal(std::vector<double> breakpoints, std::vector<Vector> values)
    : breakpoints_(std::move(breakpoints)), values_(std::move(values)) {
  if (breakpoints_.size() < 2 || values_.size() + 1 != breakpoints_.size()) {
    throw ConfigError("control signal needs k+1 breakpoints for k values (k >= 1)");
  }
  for (std::size_t i = 1; i < breakpoints_.size(); ++i) {
    if (!(breakpoints_[i - 1] < breakpoints_[i])) {
      throw ConfigError("control breakpoints must be strictly increasing");
    }
  }
  const auto d = values_.front().size();
  for (const auto& v : values_) {
    if (v.size() != d) throw ConfigError("control values must share one dimension");
    // Admissible set: sup norm of the control at most one.
    if (!all_finite(v) || v.norm() > 1.0 + 1e-12) {
      throw ConfigError("control value outside the closed unit ball");
    }
  }
}

ControlSignal ControlSignal::constant(const Vector& value) {
  return ControlSignal({0.0, 1.0}, {value});
}

const Vector& ControlSignal::value_at(double t) const {
  // Right-closed convention: a breakpoint belongs to the interval it opens.
  const auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), t);
  auto k = static_cast<std::ptrdiff_t>(it - breakpoints_.begin()) - 1;
  k = std::clamp<std::ptrdiff_t>(k, 0, static_cast<std::ptrdiff_t>(values_.size()) - 1);
  return values_[static_cast<std::size_t>(k)];
}

Vector ControlSignal::operator()(double t) const { return value_at(t); }

FibreCloud FibreCloud::make(double time, std::vector<Vector> points) {
  if (points.empty()) throw ConfigError("fibre cloud must hold at least one point");
  return FibreCloud{time, std::move(points)};
}

double planar_angle(const Vector& v) { return std::atan2(v[1], v[0]); }

BoundaryFibre BoundaryFibre::make(double time, std::vector<FibreEntry> entries) {
  if (entries.empty()) throw ConfigError("boundary fibre must hold at least one entry");
  const auto d = entries.front().x.size();
  for (const auto& e : entries) {
    if (e.x.size() != d || e.n.size() != d) throw ConfigError("fibre entries must share one dimension");
    if (std::abs(e.n.norm() - 1.0) > kUnitNormTol) throw ConfigError("fibre normal is not a unit vector");
  }
  if (d == 2) {
    std::sort(entries.begin(), entries.end(), [](const FibreEntry& a, const FibreEntry& b) {
      return planar_angle(a.n) < planar_angle(b.n);
    });
    for (std::size_t i = 1; i < entries.size(); ++i) {
      if (!(planar_angle(entries[i - 1].n) < planar_angle(entries[i].n))) {
        throw ConfigError("fibre normals must have distinct angles");
      }
    }
  }
  return BoundaryFibre{time, std::move(entries)};
}

std::vector<Vector> BoundaryFibre::points() const {
  std::vector<Vector> out;
  out.reserve(entries.size());
  for (const auto& e : entries) out.push_back(e.x);
  return out;
}

bool all_finite(const Vector& v) { return v.allFinite(); }
bool all_finite(const Matrix& m) { return m.allFinite(); }

double spectral_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  if (m.rows() == 2 && m.cols() == 2) {
    const double f2 = m.squaredNorm();
    const double det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
    const double disc = std::max(0.0, f2 * f2 - 4.0 * det * det);
    return std::sqrt(0.5 * (f2 + std::sqrt(disc)));
  }
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

ValidationReport validate_system(const SystemSpec& spec,
                                 std::span<const std::pair<double, Vector>> samples,
                                 double tolerance) {
  if (samples.empty()) throw ConfigError("validate_system needs at least one sample");
  spec.validate(/*allow_zero_rho=*/true);
  // Power of two keeps x + eps exact for moderate x.
  const double eps = std::ldexp(1.0, -17);
  ValidationReport report;
  report.tolerance = tolerance;
  report.samples = samples.size();
  for (const auto& [t, x] : samples) {
    if (x.size() != spec.dim) throw ConfigError("sample state has the wrong dimension");
    const Matrix jac = spec.jacobian(t, x);
    const Vector f0 = spec.rhs(t, x);
    if (!all_finite(jac) || !all_finite(f0) || jac.rows() != spec.dim || jac.cols() != spec.dim) {
      throw InvalidSystemError("non-finite or malformed rhs/jacobian at a validation sample");
    }
    const double scale = 1.0 + spectral_norm(jac);
    for (int j = 0; j < spec.dim; ++j) {
      Vector xp = x, xm = x;
      xp[j] += eps;
      xm[j] -= eps;
      const Vector fp = spec.rhs(t, xp);
      const Vector fm = spec.rhs(t, xm);
      if (!all_finite(fp) || !all_finite(fm)) {
        throw InvalidSystemError("non-finite rhs near a validation sample");
      }
      const Vector fd = (fp - fm) / (xp[j] - xm[j]);
      report.max_residual = std::max(report.max_residual, (fd - jac.col(j)).norm() / scale);
    }
  }
  report.passed = report.max_residual <= tolerance;
  return report;
}

namespace {

double directed_distance(std::span<const Vector> from, std::span<const Vector> to) {
  double worst = 0.0;
  for (const auto& p : from) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& q : to) best = std::min(best, (p - q).squaredNorm());
    worst = std::max(worst, best);
  }
  return std::sqrt(worst);
}

}  // namespace

double hausdorff_distance(std::span<const Vector> a, std::span<const Vector> b) {
  if (a.empty() || b.empty()) throw ConfigError("hausdorff distance of an empty set");
  return std::max(directed_distance(a, b), directed_distance(b, a));
}

}  // namespace boundaryflow
