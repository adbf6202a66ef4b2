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

#include "boundaryflow/integrate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace boundaryflow {

void IntegratorConfig::validate() const {
  if (!(step > 0.0) || !std::isfinite(step)) throw ConfigError("integrator step must be positive");
  if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) throw ConfigError("integrator tolerances must be positive");
  if (max_steps <= 0) throw ConfigError("integrator max_steps must be positive");
}

namespace {

std::int64_t segment_steps(double length, double h) {
  return std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(length / h - 1e-9)));
}

// Sorted cut points strictly inside the interval, followed by t1.
std::vector<double> segment_ends(TimeInterval interval, std::span<const double> a,
                                 std::span<const double> b) {
  std::vector<double> ends;
  ends.reserve(a.size() + b.size() + 1);
  for (auto src : {a, b}) {
    for (double c : src) {
      if (c > interval.t0 && c < interval.t1) ends.push_back(c);
    }
  }
  std::sort(ends.begin(), ends.end());
  ends.erase(std::unique(ends.begin(), ends.end()), ends.end());
  ends.push_back(interval.t1);
  return ends;
}

void check_outputs(TimeInterval interval, std::span<const double> outputs) {
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    if (outputs[i] < interval.t0 || outputs[i] > interval.t1) {
      throw ConfigError("output time outside the integration interval");
    }
    if (i > 0 && outputs[i] < outputs[i - 1]) throw ConfigError("output times must be sorted");
  }
}

class Emitter {
 public:
  Emitter(std::span<const double> outputs, Trajectory& out) : outputs_(outputs), out_(out) {}
  void at(double t, const Vector& y) {
    while (next_ < outputs_.size() && outputs_[next_] == t) {
      out_.emplace_back(t, y);
      ++next_;
    }
  }

 private:
  std::span<const double> outputs_;
  Trajectory& out_;
  std::size_t next_ = 0;
};

// Largest double below b. Fields are evaluated on [a, b) within a segment so
// piecewise-constant forcing is read from the segment's own piece.
double left_limit(double b) { return std::nextafter(b, -std::numeric_limits<double>::infinity()); }

void require_finite(const Vector& y, double t) {
  if (!y.allFinite()) {
    std::ostringstream os;
    os << "non-finite state at t = " << t;
    throw BlowUpError(os.str());
  }
}

class Rk4 {
 public:
  explicit Rk4(Eigen::Index n) : k1_(n), k2_(n), k3_(n), k4_(n), tmp_(n) {}

  // Stage times never exceed `limit`, the left limit of the segment end.
  void step(const OdeField& f, double t, double h, Vector& y, double limit) {
    f(t, y, k1_);
    tmp_.noalias() = y + (0.5 * h) * k1_;
    f(std::min(t + 0.5 * h, limit), tmp_, k2_);
    tmp_.noalias() = y + (0.5 * h) * k2_;
    f(std::min(t + 0.5 * h, limit), tmp_, k3_);
    tmp_.noalias() = y + h * k3_;
    f(std::min(t + h, limit), tmp_, k4_);
    y += (h / 6.0) * (k1_ + 2.0 * k2_ + 2.0 * k3_ + k4_);
  }

 private:
  Vector k1_, k2_, k3_, k4_, tmp_;
};

// Dormand-Prince 5(4) pair.
class Dopri5 {
 public:
  explicit Dopri5(Eigen::Index n) : k_(7, Vector(n)), tmp_(n), y5_(n), err_(n) {}

  // Attempts one step; on success y is advanced. Returns the error norm.
  double attempt(const OdeField& f, double t, double h, const Vector& y, double rtol, double atol,
                 double limit) {
    static constexpr double a21 = 1.0 / 5.0;
    static constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
    static constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
    static constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                            a54 = -212.0 / 729.0;
    static constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                            a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
    static constexpr double b1 = 35.0 / 384.0, b3 = 500.0 / 1113.0, b4 = 125.0 / 192.0,
                            b5 = -2187.0 / 6784.0, b6 = 11.0 / 84.0;
    static constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                            e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
    f(t, y, k_[0]);
    tmp_.noalias() = y + h * a21 * k_[0];
    f(std::min(t + h / 5.0, limit), tmp_, k_[1]);
    tmp_.noalias() = y + h * (a31 * k_[0] + a32 * k_[1]);
    f(std::min(t + 3.0 * h / 10.0, limit), tmp_, k_[2]);
    tmp_.noalias() = y + h * (a41 * k_[0] + a42 * k_[1] + a43 * k_[2]);
    f(std::min(t + 4.0 * h / 5.0, limit), tmp_, k_[3]);
    tmp_.noalias() = y + h * (a51 * k_[0] + a52 * k_[1] + a53 * k_[2] + a54 * k_[3]);
    f(std::min(t + 8.0 * h / 9.0, limit), tmp_, k_[4]);
    tmp_.noalias() = y + h * (a61 * k_[0] + a62 * k_[1] + a63 * k_[2] + a64 * k_[3] + a65 * k_[4]);
    f(std::min(t + h, limit), tmp_, k_[5]);
    y5_.noalias() = y + h * (b1 * k_[0] + b3 * k_[2] + b4 * k_[3] + b5 * k_[4] + b6 * k_[5]);
    f(std::min(t + h, limit), y5_, k_[6]);
    err_.noalias() = h * (e1 * k_[0] + e3 * k_[2] + e4 * k_[3] + e5 * k_[4] + e6 * k_[5] + e7 * k_[6]);
    double acc = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      const double sc = atol + rtol * std::max(std::abs(y[i]), std::abs(y5_[i]));
      const double r = err_[i] / sc;
      acc += r * r;
    }
    return std::sqrt(acc / static_cast<double>(std::max<Eigen::Index>(1, y.size())));
  }

  const Vector& proposal() const { return y5_; }

 private:
  std::vector<Vector> k_;
  Vector tmp_, y5_, err_;
};

Trajectory integrate_forward(const OdeField& field, const Vector& y0, TimeInterval interval,
                             const IntegratorConfig& cfg, std::span<const double> outputs,
                             std::span<const double> breakpoints, const StepHook& hook) {
  cfg.validate();
  interval = TimeInterval::make(interval.t0, interval.t1);
  check_outputs(interval, outputs);
  require_finite(y0, interval.t0);

  Trajectory out;
  out.reserve(outputs.size());
  Emitter emit(outputs, out);
  Vector y = y0;
  emit.at(interval.t0, y);

  const auto ends = segment_ends(interval, breakpoints, outputs);
  std::int64_t steps = 0;

  if (cfg.method == Method::Rk4Fixed) {
    std::int64_t planned = 0;
    double a = interval.t0;
    for (double b : ends) {
      planned += segment_steps(b - a, cfg.step);
      a = b;
    }
    if (planned > cfg.max_steps) throw DivergenceError("fixed-step integration exceeds max_steps");
    Rk4 rk(y.size());
    a = interval.t0;
    for (double b : ends) {
      const std::int64_t n = segment_steps(b - a, cfg.step);
      const double h = (b - a) / static_cast<double>(n);
      for (std::int64_t k = 0; k < n; ++k) {
        const double t = a + static_cast<double>(k) * h;
        const double t_next = (k + 1 == n) ? b : a + static_cast<double>(k + 1) * h;
        rk.step(field, t, t_next - t, y, left_limit(b));
        if (hook) hook(t_next, y);
        require_finite(y, t_next);
      }
      emit.at(b, y);
      a = b;
    }
    return out;
  }

  Dopri5 dp(y.size());
  double h = cfg.step;
  double t = interval.t0;
  for (double b : ends) {
    while (t < b) {
      if (++steps > cfg.max_steps) throw DivergenceError("adaptive integration exceeds max_steps");
      const bool last = t + h >= b;
      const double step = last ? b - t : h;
      const double err = dp.attempt(field, t, step, y, cfg.rel_tol, cfg.abs_tol, left_limit(b));
      if (!std::isfinite(err)) {
        h = 0.25 * step;
      } else if (err <= 1.0) {
        y = dp.proposal();
        t = last ? b : t + step;
        if (hook) hook(t, y);
        require_finite(y, t);
        const double grow = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
        h = last ? std::max(h, step * grow) : step * grow;
      } else {
        h = step * std::clamp(0.9 * std::pow(err, -0.2), 0.1, 0.9);
      }
      if (h < 1e-14 * std::max(1.0, std::abs(t))) {
        throw DivergenceError("adaptive step size underflow");
      }
    }
    emit.at(b, y);
  }
  return out;
}

}  // namespace

std::vector<double> fixed_step_nodes(TimeInterval interval, double h, std::span<const double> cuts) {
  const auto ends = segment_ends(interval, cuts, {});
  std::vector<double> nodes{interval.t0};
  double a = interval.t0;
  for (double b : ends) {
    const std::int64_t n = segment_steps(b - a, h);
    const double dt = (b - a) / static_cast<double>(n);
    for (std::int64_t k = 1; k < n; ++k) nodes.push_back(a + static_cast<double>(k) * dt);
    nodes.push_back(b);
    a = b;
  }
  return nodes;
}

Trajectory integrate_ode(const OdeField& field, const Vector& y0, TimeInterval interval,
                         const IntegratorConfig& cfg, std::span<const double> output_times,
                         const OdeOptions& options) {
  return integrate_forward(field, y0, interval, cfg, output_times, options.breakpoints, options.on_step);
}

Trajectory integrate_ode_backward(const OdeField& field, const Vector& y_end, TimeInterval interval,
                                  const IntegratorConfig& cfg, std::span<const double> output_times,
                                  const OdeOptions& options) {
  interval = TimeInterval::make(interval.t0, interval.t1);
  // sigma = -t turns the backward problem into a forward one.
  const OdeField reversed = [&field](double sigma, const Vector& y, Vector& dy) {
    field(-sigma, y, dy);
    dy = -dy;
  };
  std::vector<double> outs(output_times.rbegin(), output_times.rend());
  for (double& o : outs) o = -o;
  std::vector<double> bps(options.breakpoints.begin(), options.breakpoints.end());
  for (double& b : bps) b = -b;
  StepHook hook;
  if (options.on_step) {
    hook = [&options](double sigma, Vector& y) { options.on_step(-sigma, y); };
  }
  auto traj = integrate_forward(reversed, y_end, TimeInterval{-interval.t1, -interval.t0}, cfg, outs,
                                bps, hook);
  std::reverse(traj.begin(), traj.end());
  for (auto& entry : traj) entry.first = -entry.first;
  return traj;
}

TransitionMatrix transition_matrix(const CoefficientFn& coefficients, int dim, double s, double t,
                                   const IntegratorConfig& cfg) {
  TransitionMatrix result{t, s, Matrix::Identity(dim, dim)};
  if (t == s) return result;
  const OdeField field = [&coefficients, dim](double tau, const Vector& y, Vector& dy) {
    const Matrix l = coefficients(tau);
    Eigen::Map<const Matrix> psi(y.data(), dim, dim);
    dy.resize(y.size());
    Eigen::Map<Matrix> dpsi(dy.data(), dim, dim);
    dpsi.noalias() = l * psi;
  };
  const Vector y0 = Eigen::Map<const Vector>(result.matrix.data(), dim * dim);
  Trajectory traj;
  if (t > s) {
    const double out[] = {t};
    traj = integrate_ode(field, y0, TimeInterval::make(s, t), cfg, out);
  } else {
    const double out[] = {t};
    traj = integrate_ode_backward(field, y0, TimeInterval::make(t, s), cfg, out);
  }
  result.matrix = Eigen::Map<const Matrix>(traj.front().second.data(), dim, dim);
  return result;
}

Trajectory adjoint_solution(const CoefficientFn& coefficients, const Vector& eta_end, double t_end,
                            double t_start, const IntegratorConfig& cfg,
                            std::span<const double> output_times) {
  if (!(t_start < t_end)) throw ConfigError("adjoint_solution integrates backward: need t_start < t_end");
  const OdeField field = [&coefficients](double tau, const Vector& eta, Vector& deta) {
    deta.noalias() = -coefficients(tau).transpose() * eta;
  };
  return integrate_ode_backward(field, eta_end, TimeInterval::make(t_start, t_end), cfg, output_times);
}

}  // namespace boundaryflow
