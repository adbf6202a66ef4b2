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

#include "boundaryflow/cloud.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "boundaryflow/parallel.hpp"

namespace boundaryflow {

std::string to_string(ControlLaw law) { return law == ControlLaw::UnitSphere ? "unit-sphere" : "ball"; }

void CloudConfig::validate() const {
  if (trajectory_count < 1) throw ConfigError("cloud needs at least one trajectory");
  if (!(segment_length > 0.0) || !std::isfinite(segment_length)) {
    throw ConfigError("control segment length must be positive");
  }
}

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// SplitMix64 with random access: draw `counter` of the sequence keyed by
// (seed, stream).
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream) : key_(mix64(seed ^ mix64(stream + kGolden))) {}

  double uniform(std::uint64_t counter) const {
    return static_cast<double>(mix64(key_ + (counter + 1) * kGolden) >> 11) * 0x1.0p-53;
  }

 private:
  std::uint64_t key_;
};

std::uint64_t segment_count(const CloudConfig& ccfg, TimeInterval interval) {
  return static_cast<std::uint64_t>(std::max(1.0, std::ceil(interval.length() / ccfg.segment_length - 1e-9)));
}

std::vector<double> segment_breakpoints(const CloudConfig& ccfg, TimeInterval interval) {
  const auto segments = segment_count(ccfg, interval);
  std::vector<double> bps;
  bps.reserve(segments + 1);
  for (std::uint64_t k = 0; k <= segments; ++k) {
    bps.push_back(interval.t0 + static_cast<double>(k) * ccfg.segment_length);
  }
  return bps;
}

}  // namespace

Vector control_value(const CloudConfig& ccfg, int dim, std::uint64_t stream, std::uint64_t segment) {
  const CounterRng rng(ccfg.seed, stream);
  // Every segment owns a block of draws; the last one is the radial draw of
  // the ball law. Gaussian rejection (norm 0) is practically never taken.
  const auto block = static_cast<std::uint64_t>(2 * dim + 2);
  std::uint64_t c = segment * block;
  Vector v(dim);
  if (dim == 2) {
    const double angle = 2.0 * std::numbers::pi * rng.uniform(c);
    v << std::cos(angle), std::sin(angle);
  } else {
    for (int i = 0; i < dim; i += 2) {
      const double u1 = 1.0 - rng.uniform(c++);  // (0, 1]
      const double u2 = rng.uniform(c++);
      const double r = std::sqrt(-2.0 * std::log(u1));
      v[i] = r * std::cos(2.0 * std::numbers::pi * u2);
      if (i + 1 < dim) v[i + 1] = r * std::sin(2.0 * std::numbers::pi * u2);
    }
    const double norm = v.norm();
    if (norm == 0.0) {
      v.setZero();
      v[0] = 1.0;
    } else {
      v /= norm;
    }
  }
  if (ccfg.law == ControlLaw::Ball) {
    v *= std::pow(rng.uniform(segment * block + block - 1), 1.0 / dim);
  }
  return v;
}

ControlSignal sample_control(const CloudConfig& ccfg, TimeInterval interval, int dim,
                             std::uint64_t rng_stream) {
  ccfg.validate();
  interval = TimeInterval::make(interval.t0, interval.t1);
  auto breakpoints = segment_breakpoints(ccfg, interval);
  std::vector<Vector> values;
  values.reserve(breakpoints.size() - 1);
  for (std::uint64_t k = 0; k + 1 < breakpoints.size(); ++k) {
    values.push_back(control_value(ccfg, dim, rng_stream, k));
  }
  return ControlSignal(std::move(breakpoints), std::move(values));
}

namespace {

// Fixed-step RK4 over an ensemble stored as a d x N matrix. All trajectories
// share one step grid; column j uses control stream first_stream + j. Linear
// systems evaluate L(t) once per stage for the whole ensemble.
std::vector<Matrix> evolve_ensemble_rk4(const SystemSpec& spec, const CloudConfig& ccfg, Matrix x,
                                        std::uint64_t first_stream, TimeInterval interval, double h,
                                        std::span<const double> outputs) {
  const int d = spec.dim;
  const Eigen::Index count = x.cols();
  const auto bps = segment_breakpoints(ccfg, interval);
  std::vector<double> cuts(bps.begin(), bps.end());
  cuts.insert(cuts.end(), outputs.begin(), outputs.end());
  const auto nodes = fixed_step_nodes(interval, h, cuts);

  const auto drift = [&](double t, const Matrix& state, Matrix& out) {
    if (spec.linear_part) {
      out.noalias() = spec.linear_part(t) * state;
    } else {
      for (Eigen::Index i = 0; i < count; ++i) out.col(i) = spec.rhs(t, state.col(i));
    }
  };

  Matrix u(d, count), k1(d, count), k2(d, count), k3(d, count), k4(d, count), tmp(d, count);
  std::vector<Matrix> result;
  result.reserve(outputs.size());
  std::size_t next_out = 0;
  const auto emit = [&](double t) {
    while (next_out < outputs.size() && outputs[next_out] == t) {
      result.push_back(x);
      ++next_out;
    }
  };
  emit(nodes.front());

  std::uint64_t segment = 0;
  const auto load_controls = [&] {
    for (Eigen::Index i = 0; i < count; ++i) {
      u.col(i) = spec.rho * control_value(ccfg, d, first_stream + static_cast<std::uint64_t>(i), segment);
    }
  };
  load_controls();
  for (std::size_t k = 0; k + 1 < nodes.size(); ++k) {
    const double t = nodes[k];
    // Right-closed convention: a breakpoint opens the next segment.
    while (segment + 2 < bps.size() && t >= bps[segment + 1]) {
      ++segment;
      load_controls();
    }
    const double t_next = nodes[k + 1];
    const double step = t_next - t;
    const double limit = std::nextafter(t_next, -std::numeric_limits<double>::infinity());
    const double mid = std::min(t + 0.5 * step, limit);
    drift(t, x, k1);
    k1 += u;
    tmp.noalias() = x + (0.5 * step) * k1;
    drift(mid, tmp, k2);
    k2 += u;
    tmp.noalias() = x + (0.5 * step) * k2;
    drift(mid, tmp, k3);
    k3 += u;
    tmp.noalias() = x + step * k3;
    drift(limit, tmp, k4);
    k4 += u;
    x += (step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    emit(t_next);
  }
  return result;
}

}  // namespace

std::vector<FibreCloud> evolve_cloud(const SystemSpec& spec, const CloudConfig& ccfg, const FibreCloud& start,
                                     TimeInterval interval, const IntegratorConfig& cfg,
                                     std::span<const double> output_times) {
  spec.validate(/*allow_zero_rho=*/true);
  ccfg.validate();
  cfg.validate();
  interval = TimeInterval::make(interval.t0, interval.t1);
  if (start.points.empty()) throw ConfigError("cloud start set is empty");
  for (const auto& p : start.points) {
    if (p.size() != spec.dim) throw ConfigError("cloud start point has the wrong dimension");
  }
  for (std::size_t i = 0; i < output_times.size(); ++i) {
    if (!interval.contains(output_times[i]) || (i > 0 && output_times[i] < output_times[i - 1])) {
      throw ConfigError("cloud output times must be sorted and inside the interval");
    }
  }
  const auto count = static_cast<std::size_t>(ccfg.trajectory_count);
  const int d = spec.dim;
  const auto& starts = start.points;
  std::vector<Matrix> states(output_times.size(), Matrix(d, static_cast<Eigen::Index>(count)));

  if (cfg.method == Method::Rk4Fixed) {
    const auto bps = segment_breakpoints(ccfg, interval);
    const auto planned = static_cast<std::int64_t>(fixed_step_nodes(interval, cfg.step, bps).size());
    if (planned > cfg.max_steps) throw DivergenceError("cloud integration exceeds max_steps");
    // Blocks are independent ensembles, so the split does not affect results.
    const std::size_t blocks = std::min(count, thread_budget());
    parallel_for(blocks, [&](std::size_t b) {
      const std::size_t lo = count * b / blocks, hi = count * (b + 1) / blocks;
      Matrix x0(d, static_cast<Eigen::Index>(hi - lo));
      for (std::size_t i = lo; i < hi; ++i) x0.col(static_cast<Eigen::Index>(i - lo)) = starts[i % starts.size()];
      const auto part = evolve_ensemble_rk4(spec, ccfg, std::move(x0), lo, interval, cfg.step, output_times);
      for (std::size_t k = 0; k < part.size(); ++k) {
        states[k].middleCols(static_cast<Eigen::Index>(lo), static_cast<Eigen::Index>(hi - lo)) = part[k];
      }
    });
  } else {
    std::vector<char> failed_flag(count, 0);
    parallel_for(count, [&](std::size_t i) {
      const auto control = sample_control(ccfg, interval, d, i);
      const OdeField ode = [&spec, &control](double t, const Vector& x, Vector& dx) {
        dx = spec.rhs(t, x) + spec.rho * control.value_at(t);
      };
      OdeOptions opts;
      opts.breakpoints = control.breakpoints();
      try {
        const auto traj = integrate_ode(ode, starts[i % starts.size()], interval, cfg, output_times, opts);
        for (std::size_t k = 0; k < traj.size(); ++k) states[k].col(static_cast<Eigen::Index>(i)) = traj[k].second;
      } catch (const IntegrationError&) {
        failed_flag[i] = 1;
      }
    });
    for (std::size_t i = 0; i < count; ++i) {
      if (failed_flag[i]) {
        for (auto& s : states) s.col(static_cast<Eigen::Index>(i)).setConstant(std::numeric_limits<double>::quiet_NaN());
      }
    }
  }

  std::vector<std::size_t> failed;
  for (std::size_t i = 0; i < count; ++i) {
    for (const auto& s : states) {
      if (!s.col(static_cast<Eigen::Index>(i)).allFinite()) {
        failed.push_back(i);
        break;
      }
    }
  }
  if (!failed.empty()) {
    std::ostringstream os;
    os << failed.size() << " cloud trajectories failed to integrate (first index " << failed.front() << ")";
    throw CloudIntegrationError(os.str(), std::move(failed));
  }

  std::vector<FibreCloud> clouds;
  clouds.reserve(output_times.size());
  for (std::size_t k = 0; k < output_times.size(); ++k) {
    std::vector<Vector> pts;
    pts.reserve(count);
    for (std::size_t i = 0; i < count; ++i) pts.emplace_back(states[k].col(static_cast<Eigen::Index>(i)));
    clouds.push_back(FibreCloud::make(output_times[k], std::move(pts)));
  }
  return clouds;
}

namespace {

double cross(const Vector& o, const Vector& a, const Vector& b) {
  return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
}

double segment_distance(const Vector& p, const Vector& a, const Vector& b) {
  const Eigen::Vector2d ab(b[0] - a[0], b[1] - a[1]);
  const Eigen::Vector2d ap(p[0] - a[0], p[1] - a[1]);
  const double len2 = ab.squaredNorm();
  const double s = len2 > 0.0 ? std::clamp(ap.dot(ab) / len2, 0.0, 1.0) : 0.0;
  return (ap - s * ab).norm();
}

}  // namespace

std::vector<Vector> convex_hull_2d(std::span<const Vector> points) {
  std::vector<Vector> pts(points.begin(), points.end());
  for (const auto& p : pts) {
    if (p.size() != 2) throw ConfigError("convex_hull_2d expects planar points");
  }
  std::sort(pts.begin(), pts.end(), [](const Vector& a, const Vector& b) {
    return a[0] < b[0] || (a[0] == b[0] && a[1] < b[1]);
  });
  pts.erase(std::unique(pts.begin(), pts.end(), [](const Vector& a, const Vector& b) { return a == b; }),
            pts.end());
  if (pts.size() < 3) return pts;

  std::vector<Vector> hull(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0.0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

double support_function(std::span<const Vector> points, const Vector& direction) {
  if (points.empty()) throw ConfigError("support function of an empty set");
  if (std::abs(direction.norm() - 1.0) > 1e-9) throw ConfigError("support direction must be a unit vector");
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& p : points) best = std::max(best, direction.dot(p));
  return best;
}

double signed_distance_to_polygon(std::span<const Vector> polygon, const Vector& p) {
  if (polygon.empty()) throw ConfigError("signed distance to an empty polygon");
  const std::size_t m = polygon.size();
  if (m == 1) return (p - polygon[0]).norm();
  double dist = std::numeric_limits<double>::infinity();
  bool inside = false;
  for (std::size_t i = 0, j = m - 1; i < m; j = i++) {
    const Vector& a = polygon[j];
    const Vector& b = polygon[i];
    dist = std::min(dist, segment_distance(p, a, b));
    if ((b[1] > p[1]) != (a[1] > p[1])) {
      const double x_cross = b[0] + (p[1] - b[1]) * (a[0] - b[0]) / (a[1] - b[1]);
      if (p[0] < x_cross) inside = !inside;
    }
  }
  return (inside && m >= 3) ? -dist : dist;
}

double convex_hausdorff(std::span<const Vector> a, std::span<const Vector> b) {
  const auto ha = convex_hull_2d(a);
  const auto hb = convex_hull_2d(b);
  if (ha.empty() || hb.empty()) throw ConfigError("hausdorff distance of an empty set");
  // The distance to a convex set is convex, so its maximum over a polygon is
  // attained at a vertex.
  double worst = 0.0;
  for (const auto& v : ha) worst = std::max(worst, signed_distance_to_polygon(hb, v));
  for (const auto& v : hb) worst = std::max(worst, signed_distance_to_polygon(ha, v));
  return worst;
}

}  // namespace boundaryflow
