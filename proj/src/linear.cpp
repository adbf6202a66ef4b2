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

#include "boundaryflow/linear.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

namespace boundaryflow {

LinearField::LinearField(int dim, CoefficientFn entries, FieldKind kind)
    : dim_(dim), entries_(std::move(entries)), kind_(kind) {
  if (dim_ < 1) throw ConfigError("linear field dimension must be positive");
  if (!entries_) throw ConfigError("linear field needs an entry function");
}

LinearField LinearField::constant(const Matrix& m) {
  if (m.rows() != m.cols()) throw ConfigError("constant field must be square");
  if (!m.allFinite()) throw ConfigError("constant field has non-finite entries");
  return LinearField(static_cast<int>(m.rows()), [m](double) { return m; }, FieldKind::Constant);
}

LinearField LinearField::diagonal(const Vector& d) {
  if (!d.allFinite()) throw ConfigError("diagonal field has non-finite entries");
  Matrix m = d.asDiagonal();
  return LinearField(static_cast<int>(d.size()), [m](double) { return m; }, FieldKind::Diagonal);
}

LinearField LinearField::custom(int dim, CoefficientFn entries) {
  return LinearField(dim, std::move(entries), FieldKind::Custom);
}

std::string to_string(FieldKind kind) {
  switch (kind) {
    case FieldKind::Constant: return "constant";
    case FieldKind::Diagonal: return "diagonal";
    case FieldKind::PaperExample: return "paper-example";
    case FieldKind::Custom: return "custom";
  }
  return "unknown";
}

std::string to_string(CertificateMethod method) {
  return method == CertificateMethod::RowDominance ? "row-dominance" : "decay-fit";
}

LinearField paper_example_field() {
  return LinearField(
      2,
      [](double t) {
        Matrix m(2, 2);
        m(0, 0) = -20.0 + 10.0 * std::atan(0.1 * t);
        m(0, 1) = (1.0 + std::atan(t)) * std::cos(0.1 * t);
        m(1, 0) = (1.0 - std::atan(t)) * std::sin(t);
        m(1, 1) = -15.0 + 5.0 * std::cos(0.5 * t);
        return m;
      },
      FieldKind::PaperExample);
}

SystemSpec linear_system(const LinearField& field, double rho) {
  SystemSpec spec;
  spec.dim = field.dim();
  spec.rho = rho;
  const CoefficientFn entries = field.entries();
  spec.rhs = [entries](double t, const Vector& x) -> Vector { return entries(t) * x; };
  spec.jacobian = [entries](double t, const Vector&) -> Matrix { return entries(t); };
  spec.linear_part = entries;
  return spec;
}

DominanceReport row_dominance_check(const LinearField& field, std::span<const double> grid) {
  if (grid.empty()) throw ConfigError("row dominance check needs a non-empty grid");
  DominanceReport report;
  report.min_margin = std::numeric_limits<double>::infinity();
  bool negative_diagonal = true;
  for (double t : grid) {
    const Matrix l = field(t);
    for (Eigen::Index i = 0; i < l.rows(); ++i) {
      double off = 0.0;
      for (Eigen::Index j = 0; j < l.cols(); ++j) {
        if (j != i) off += std::abs(l(i, j));
      }
      if (!(l(i, i) < 0.0)) negative_diagonal = false;
      report.min_margin = std::min(report.min_margin, std::abs(l(i, i)) - off);
    }
  }
  report.dominant = negative_diagonal && report.min_margin > 0.0;
  return report;
}

void StabilityCertificate::validate() const {
  if (!std::isfinite(K) || !std::isfinite(gamma) || K < 1.0 || !(gamma > 0.0)) {
    std::ostringstream os;
    os << "invalid stability certificate (K = " << K << ", gamma = " << gamma << ")";
    throw NotStableError(os.str());
  }
}

double StabilityCertificate::bound(double elapsed) const { return std::exp(log_bound(elapsed)); }

double StabilityCertificate::log_bound(double elapsed) const { return std::log(K) - gamma * elapsed; }

double log_transition_norm(const LinearField& field, double s, double t, const IntegratorConfig& cfg,
                           double cell) {
  if (!(t >= s)) throw ConfigError("log_transition_norm needs s <= t");
  if (!(cell > 0.0)) throw ConfigError("cell length must be positive");
  const int d = field.dim();
  const auto cells = static_cast<int>(std::max(1.0, std::ceil((t - s) / cell - 1e-9)));
  Matrix prod = Matrix::Identity(d, d);
  double log_scale = 0.0;
  for (int k = 0; k < cells; ++k) {
    const double a = s + (t - s) * k / cells;
    const double b = k + 1 == cells ? t : s + (t - s) * (k + 1) / cells;
    prod = transition_matrix(field.entries(), d, a, b, cfg).matrix * prod;
    const double mag = prod.cwiseAbs().maxCoeff();
    if (!(mag > 0.0) || !std::isfinite(mag)) throw NotStableError("transition matrix degenerated");
    prod /= mag;
    log_scale += std::log(mag);
  }
  return log_scale + std::log(spectral_norm(prod));
}

double max_log_norm(const LinearField& field, std::span<const double> grid) {
  double worst = -std::numeric_limits<double>::infinity();
  for (double t : grid) {
    const Matrix l = field(t);
    const Matrix sym = 0.5 * (l + l.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> eig(sym, Eigen::EigenvaluesOnly);
    worst = std::max(worst, eig.eigenvalues().maxCoeff());
  }
  return worst;
}

namespace {

std::vector<double> uniform_grid(TimeInterval window, std::size_t count) {
  std::vector<double> grid(count);
  const double h = window.length() / static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i) grid[i] = window.t0 + static_cast<double>(i) * h;
  grid.back() = window.t1;
  return grid;
}

}  // namespace

StabilityCertificate fit_certificate(const LinearField& field, TimeInterval window, int sample_pairs,
                                     const IntegratorConfig& cfg) {
  window = TimeInterval::make(window.t0, window.t1);
  if (window.length() < 1.0) throw ConfigError("certificate window must have length >= 1");
  if (sample_pairs < 1) throw ConfigError("certificate needs at least one sample pair");
  const auto nodes = static_cast<std::size_t>(
      std::max(3.0, std::ceil(0.5 * (1.0 + std::sqrt(1.0 + 8.0 * sample_pairs)))));
  const auto grid = uniform_grid(window, nodes);
  const double spacing = window.length() / static_cast<double>(nodes - 1);
  const int d = field.dim();

  std::vector<Matrix> cells;
  cells.reserve(nodes - 1);
  for (std::size_t i = 0; i + 1 < nodes; ++i) {
    cells.push_back(transition_matrix(field.entries(), d, grid[i], grid[i + 1], cfg).matrix);
  }

  // (elapsed, log |Psi|) for every node pair i < j. Products are rescaled as
  // they grow so that long, strongly contracting windows do not underflow.
  std::vector<std::pair<double, double>> samples;
  samples.reserve(nodes * (nodes - 1) / 2);
  for (std::size_t i = 0; i + 1 < nodes; ++i) {
    Matrix prod = Matrix::Identity(d, d);
    double log_scale = 0.0;
    for (std::size_t j = i; j + 1 < nodes; ++j) {
      prod = cells[j] * prod;
      const double mag = prod.cwiseAbs().maxCoeff();
      if (!(mag > 0.0) || !std::isfinite(mag)) {
        throw NotStableError("transition matrix degenerated while fitting the certificate");
      }
      prod /= mag;
      log_scale += std::log(mag);
      samples.emplace_back(grid[j + 1] - grid[i], log_scale + std::log(spectral_norm(prod)));
    }
  }

  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (const auto& [x, y] : samples) {
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double count = static_cast<double>(samples.size());
  const double slope = (count * sxy - sx * sy) / (count * sxx - sx * sx);
  if (!(slope < 0.0)) {
    std::ostringstream os;
    os << "fitted decay slope " << slope << " is not negative: system is not exponentially stable";
    throw NotStableError(os.str());
  }
  const double gamma = -slope;

  double log_k = 0.0;
  for (const auto& [x, y] : samples) log_k = std::max(log_k, y + gamma * x);

  const auto fine = uniform_grid(window, 8 * (nodes - 1) + 1);
  const double mu = max_log_norm(field, fine);
  log_k += std::max(0.0, gamma + mu) * 2.0 * spacing;

  StabilityCertificate cert;
  cert.K = std::exp(log_k);
  cert.gamma = gamma;
  cert.window = window;
  cert.method = CertificateMethod::DecayFit;
  cert.validate();
  return cert;
}

StabilityCertificate row_dominance_certificate(const LinearField& field, TimeInterval window,
                                               int grid_points) {
  window = TimeInterval::make(window.t0, window.t1);
  const auto grid = uniform_grid(window, static_cast<std::size_t>(std::max(2, grid_points)));
  const auto report = row_dominance_check(field, grid);
  if (!report.dominant) throw NotStableError("field is not row dominant on the window");
  StabilityCertificate cert;
  // |Psi|_inf <= exp(-margin (t - s)) and |.|_2 <= sqrt(d) |.|_inf.
  cert.K = std::sqrt(static_cast<double>(field.dim()));
  cert.gamma = report.min_margin;
  cert.window = window;
  cert.method = CertificateMethod::RowDominance;
  cert.validate();
  return cert;
}

double truncation_horizon(const StabilityCertificate& cert, double rho, double tol) {
  cert.validate();
  if (!(tol > 0.0)) throw ConfigError("truncation tolerance must be positive");
  if (rho <= 0.0) return 0.0;
  return std::max(0.0, std::log(rho * cert.K / (cert.gamma * tol)) / cert.gamma);
}

Vector hyperbolic_solution_with_horizon(const LinearField& field, const ControlSignal& xi, double rho,
                                        double t, double horizon, const IntegratorConfig& cfg) {
  if (xi.dim() != field.dim()) throw ConfigError("control and field dimensions differ");
  if (!(horizon <= kHorizonCap)) {
    std::ostringstream os;
    os << "truncation horizon " << horizon << " exceeds the cap " << kHorizonCap;
    throw NonConvergenceError(os.str());
  }
  Vector x = Vector::Zero(field.dim());
  if (horizon <= 0.0 || rho == 0.0) return x;
  const CoefficientFn entries = field.entries();
  const OdeField ode = [&entries, &xi, rho](double s, const Vector& y, Vector& dy) {
    dy.noalias() = entries(s) * y;
    dy += rho * xi.value_at(s);
  };
  const double out[] = {t};
  OdeOptions opts;
  opts.breakpoints = xi.breakpoints();
  return integrate_ode(ode, x, TimeInterval::make(t - horizon, t), cfg, out, opts).front().second;
}

Vector hyperbolic_solution(const LinearField& field, const ControlSignal& xi, double rho, double t,
                           const StabilityCertificate& cert, double trunc_tol,
                           const IntegratorConfig& cfg) {
  const double horizon = truncation_horizon(cert, rho, trunc_tol);
  return hyperbolic_solution_with_horizon(field, xi, rho, t, horizon, cfg);
}

AttractorBound attractor_bound(double rho, const StabilityCertificate& cert) {
  cert.validate();
  return AttractorBound{1.0 + rho * cert.K / cert.gamma};
}

}  // namespace boundaryflow
