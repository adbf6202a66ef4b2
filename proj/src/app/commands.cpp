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

#include "boundaryflow/app/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "boundaryflow/expression.hpp"
#include "boundaryflow/verify.hpp"

namespace boundaryflow::app {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string tag(double t) {
  std::ostringstream os;
  os << t;
  return os.str();
}

std::string fibre_name(double tau, Format f) { return "fibre_t" + tag(tau) + file_suffix(f); }
std::string cloud_name(double t, Format f) { return "cloud_t" + tag(t) + file_suffix(f); }

Method parse_method(const std::string& s) {
  if (s == "rk4") return Method::Rk4Fixed;
  if (s == "rk45") return Method::Rk45Adaptive;
  throw ConfigError("unknown integrator method '" + s + "' (rk4 | rk45)");
}

ControlLaw parse_law(const std::string& s) {
  if (s == "unit-sphere") return ControlLaw::UnitSphere;
  if (s == "ball") return ControlLaw::Ball;
  throw ConfigError("unknown control law '" + s + "' (unit-sphere | ball)");
}

Format parse_format(const std::string& s) {
  if (s == "csv") return Format::Csv;
  if (s == "json") return Format::Json;
  throw ConfigError("unknown format '" + s + "' (csv | json)");
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::istringstream is(s);
  for (std::string item; std::getline(is, item, ',');) {
    if (item.find_first_not_of(" \t") == std::string::npos) continue;
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      throw ConfigError("not a number: '" + item + "'");
    }
    if (item.find_first_not_of(" \t", used) != std::string::npos) throw ConfigError("not a number: '" + item + "'");
    out.push_back(v);
  }
  return out;
}

TimeInterval parse_window(const std::string& s) {
  const auto colon = s.find(':');
  if (colon == std::string::npos) throw ConfigError("window must look like a:b");
  const auto a = parse_list(s.substr(0, colon)), b = parse_list(s.substr(colon + 1));
  if (a.size() != 1 || b.size() != 1) throw ConfigError("window must look like a:b");
  return TimeInterval::make(a[0], b[0]);
}

json parse_matrix_text(const std::string& s) {
  try {
    return json::parse(s);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("--matrix is not valid JSON: ") + e.what());
  }
}

template <typename T>
void take(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

const json& section(const json& j, const char* key) {
  static const json empty = json::object();
  if (!j.contains(key)) return empty;
  if (!j.at(key).is_object()) throw ConfigError(std::string("config key '") + key + "' must be an object");
  return j.at(key);
}

Matrix matrix_from_json(const json& j) {
  if (!j.is_array() || j.empty()) throw ConfigError("matrix must be a non-empty array of rows");
  const auto n = static_cast<Eigen::Index>(j.size());
  Matrix m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != n) throw ConfigError("matrix must be square");
    for (Eigen::Index k = 0; k < n; ++k) {
      if (!row[static_cast<std::size_t>(k)].is_number()) throw ConfigError("matrix entries must be numbers");
      m(i, k) = row[static_cast<std::size_t>(k)].get<double>();
    }
  }
  return m;
}

}  // namespace

void RunConfig::validate() const {
  (void)make_field(*this);
  if (!(rho >= 0.0) || !std::isfinite(rho)) throw ConfigError("rho must be a non-negative number");
  if (times.empty()) throw ConfigError("at least one fibre time is required");
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (!(times[i] > times[i - 1])) throw ConfigError("fibre times must be strictly increasing");
  }
  for (double t : times) {
    if (!std::isfinite(t)) throw ConfigError("fibre times must be finite");
  }
  if (sample_pairs < 1) throw ConfigError("sample_pairs must be positive");
  reconstruction.validate(make_field(*this).dim());
  cloud.validate();
  integrator.validate();
  if (!(t0 < times.front())) throw ConfigError("cloud start time t0 must precede the first fibre time");
  if (!(path_step >= 0.0)) throw ConfigError("path_step must be non-negative");
  if (verify.decay_fractions.size() < 3) throw ConfigError("verify.decay_fractions needs at least 3 entries");
}

json RunConfig::to_json() const {
  json j;
  j["system"] = system;
  if (!matrix.is_null()) j["matrix"] = matrix;
  j["rho"] = rho;
  j["times"] = times;
  j["window"] = {window.t0, window.t1};
  j["sample_pairs"] = sample_pairs;
  json r = {{"normals", reconstruction.normal_count},
            {"horizon", reconstruction.horizon},
            {"trunc_tol", reconstruction.trunc_tol}};
  if (reconstruction.seed_point.size() > 0) {
    r["seed_point"] = std::vector<double>(reconstruction.seed_point.data(),
                                          reconstruction.seed_point.data() + reconstruction.seed_point.size());
  }
  j["reconstruction"] = r;
  j["cloud"] = {{"trajectories", cloud.trajectory_count},
                {"segment_length", cloud.segment_length},
                {"law", to_string(cloud.law)},
                {"seed", cloud.seed},
                {"t0", t0},
                {"path_step", path_step}};
  j["integrator"] = {{"method", integrator.method == Method::Rk4Fixed ? "rk4" : "rk45"},
                     {"step", integrator.step},
                     {"rel_tol", integrator.rel_tol},
                     {"abs_tol", integrator.abs_tol},
                     {"max_steps", integrator.max_steps}};
  j["verify"] = {{"symmetry_tol", verify.symmetry_tol},
                 {"convexity_tol", verify.convexity_tol},
                 {"support_tol", verify.support_tol},
                 {"backward_tol", verify.backward_tol},
                 {"backward_depth", verify.backward_depth},
                 {"forward_tol", verify.forward_tol},
                 {"forward_step", verify.forward_step},
                 {"scaling_tol", verify.scaling_tol},
                 {"doubling_tol", verify.doubling_tol},
                 {"decay_fractions", verify.decay_fractions}};
  j["output_dir"] = output_dir.string();
  if (!input_dir.empty()) j["input_dir"] = input_dir.string();
  j["format"] = format == Format::Csv ? "csv" : "json";
  return j;
}

RunConfig merge_config(RunConfig c, const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  take(j, "system", c.system);
  if (j.contains("matrix")) c.matrix = j.at("matrix");
  take(j, "rho", c.rho);
  take(j, "times", c.times);
  take(j, "sample_pairs", c.sample_pairs);
  if (j.contains("window")) {
    std::vector<double> w;
    take(j, "window", w);
    if (w.size() != 2) throw ConfigError("window must hold two numbers");
    c.window = TimeInterval::make(w[0], w[1]);
  }
  const auto& r = section(j, "reconstruction");
  take(r, "normals", c.reconstruction.normal_count);
  take(r, "horizon", c.reconstruction.horizon);
  take(r, "trunc_tol", c.reconstruction.trunc_tol);
  if (r.contains("seed_point")) {
    std::vector<double> p;
    take(r, "seed_point", p);
    c.reconstruction.seed_point = Eigen::Map<const Vector>(p.data(), static_cast<Eigen::Index>(p.size()));
  }
  const auto& cl = section(j, "cloud");
  take(cl, "trajectories", c.cloud.trajectory_count);
  take(cl, "segment_length", c.cloud.segment_length);
  take(cl, "seed", c.cloud.seed);
  take(cl, "t0", c.t0);
  take(cl, "path_step", c.path_step);
  if (cl.contains("law")) {
    std::string law;
    take(cl, "law", law);
    c.cloud.law = parse_law(law);
  }
  const auto& in = section(j, "integrator");
  if (in.contains("method")) {
    std::string m;
    take(in, "method", m);
    c.integrator.method = parse_method(m);
  }
  take(in, "step", c.integrator.step);
  take(in, "rel_tol", c.integrator.rel_tol);
  take(in, "abs_tol", c.integrator.abs_tol);
  take(in, "max_steps", c.integrator.max_steps);
  const auto& v = section(j, "verify");
  take(v, "symmetry_tol", c.verify.symmetry_tol);
  take(v, "convexity_tol", c.verify.convexity_tol);
  take(v, "support_tol", c.verify.support_tol);
  take(v, "backward_tol", c.verify.backward_tol);
  take(v, "backward_depth", c.verify.backward_depth);
  take(v, "forward_tol", c.verify.forward_tol);
  take(v, "forward_step", c.verify.forward_step);
  take(v, "scaling_tol", c.verify.scaling_tol);
  take(v, "doubling_tol", c.verify.doubling_tol);
  take(v, "decay_fractions", c.verify.decay_fractions);
  if (j.contains("output_dir")) {
    std::string s;
    take(j, "output_dir", s);
    c.output_dir = s;
  }
  if (j.contains("input_dir")) {
    std::string s;
    take(j, "input_dir", s);
    c.input_dir = s;
  }
  if (j.contains("format")) {
    std::string s;
    take(j, "format", s);
    c.format = parse_format(s);
  }
  return c;
}

LinearField make_field(const RunConfig& cfg) {
  if (cfg.system == "paper-example") return paper_example_field();
  if (cfg.matrix.is_null()) throw ConfigError("system '" + cfg.system + "' needs --matrix");
  if (cfg.system == "constant") return LinearField::constant(matrix_from_json(cfg.matrix));
  if (cfg.system == "diagonal") {
    if (!cfg.matrix.is_array() || cfg.matrix.empty()) throw ConfigError("diagonal system needs a list of numbers");
    Vector d(static_cast<Eigen::Index>(cfg.matrix.size()));
    for (std::size_t i = 0; i < cfg.matrix.size(); ++i) {
      if (!cfg.matrix[i].is_number()) throw ConfigError("diagonal entries must be numbers");
      d[static_cast<Eigen::Index>(i)] = cfg.matrix[i].get<double>();
    }
    return LinearField::diagonal(d);
  }
  if (cfg.system == "custom") {
    if (!cfg.matrix.is_array()) throw ConfigError("custom system needs an array of rows of expressions");
    std::vector<std::vector<std::string>> rows;
    for (const auto& row : cfg.matrix) {
      if (!row.is_array()) throw ConfigError("custom system needs an array of rows of expressions");
      auto& out = rows.emplace_back();
      for (const auto& e : row) {
        if (e.is_string()) {
          out.push_back(e.get<std::string>());
        } else if (e.is_number()) {
          out.push_back(format_number(e.get<double>()));
        } else {
          throw ConfigError("custom entries must be strings or numbers");
        }
      }
    }
    return expression_field(rows);
  }
  throw ConfigError("unknown system '" + cfg.system + "' (paper-example | constant | diagonal | custom)");
}

namespace {

class Manifest {
 public:
  Manifest(const RunConfig& cfg, const char* command) : path_(cfg.output_dir / "manifest.json") {
    if (fs::exists(path_)) {
      try {
        doc_ = json::parse(read_file(path_));
      } catch (const json::exception&) {
        doc_ = json::object();
      }
      if (!doc_.is_object()) doc_ = json::object();
    }
    doc_["version"] = kVersion;
    doc_["config"] = cfg.to_json();
    doc_["command"] = command;
    doc_["seed"] = cfg.cloud.seed;
    doc_["timestamps"] = {{"started", utc_now()}};
  }

  json& operator[](const char* key) { return doc_[key]; }

  void save() {
    doc_["timestamps"]["finished"] = utc_now();
    write_atomic(path_, doc_.dump(2) + "\n");
  }

 private:
  fs::path path_;
  json doc_ = json::object();
};

StabilityCertificate certify(const RunConfig& cfg, const LinearField& field, std::ostream& log) {
  const auto cert = fit_certificate(field, cfg.window, cfg.sample_pairs, cfg.integrator);
  log << "certificate: K = " << cert.K << " (log K = " << std::log(cert.K) << "), gamma = " << cert.gamma
      << " on [" << cert.window.t0 << ", " << cert.window.t1 << "]\n";
  return cert;
}

std::vector<BoundaryFibre> reconstruct_all(const RunConfig& cfg, const LinearField& field,
                                           const StabilityCertificate& cert) {
  std::vector<BoundaryFibre> fibres;
  for (double tau : cfg.times) {
    fibres.push_back(reconstruct_fibre(field, cfg.rho, tau, cert, cfg.reconstruction, cfg.integrator));
  }
  return fibres;
}

json write_fibres(const RunConfig& cfg, const std::vector<BoundaryFibre>& fibres) {
  json list = json::array();
  for (const auto& f : fibres) {
    const auto name = fibre_name(f.time, cfg.format);
    write_atomic(cfg.output_dir / name, fibre_table(f, cfg.format));
    list.push_back({{"tau", f.time}, {"file", name}, {"rows", f.entries.size()}});
  }
  return list;
}

struct CloudRun {
  std::vector<FibreCloud> at_times;
  std::vector<FibreCloud> path;
};

CloudRun evolve_all(const RunConfig& cfg, const LinearField& field) {
  const double t_end = cfg.times.back();
  std::vector<double> outs(cfg.times);
  std::vector<double> path_times;
  if (cfg.path_step > 0.0) {
    const double a = cfg.times.front();
    const auto steps = static_cast<long>(std::floor((t_end - a) / cfg.path_step + 1e-9));
    for (long k = 0; k <= steps; ++k) path_times.push_back(a + static_cast<double>(k) * cfg.path_step);
    outs.insert(outs.end(), path_times.begin(), path_times.end());
  }
  std::sort(outs.begin(), outs.end());
  outs.erase(std::unique(outs.begin(), outs.end()), outs.end());
  const auto spec = linear_system(field, cfg.rho);
  const auto start = FibreCloud::make(cfg.t0, {Vector::Zero(field.dim())});
  const auto clouds = evolve_cloud(spec, cfg.cloud, start, TimeInterval::make(cfg.t0, t_end), cfg.integrator, outs);

  const auto pick = [&](double t) {
    const auto it = std::lower_bound(outs.begin(), outs.end(), t);
    return clouds[static_cast<std::size_t>(it - outs.begin())];
  };
  CloudRun run;
  for (double t : cfg.times) run.at_times.push_back(pick(t));
  for (double t : path_times) run.path.push_back(pick(t));
  return run;
}

json write_clouds(const RunConfig& cfg, const CloudRun& run, Manifest& manifest) {
  json list = json::array();
  for (const auto& c : run.at_times) {
    const auto name = cloud_name(c.time, cfg.format);
    write_atomic(cfg.output_dir / name, cloud_table(std::span(&c, 1), cfg.format));
    list.push_back({{"t", c.time}, {"file", name}, {"rows", c.points.size()}});
  }
  if (!run.path.empty()) {
    const auto name = std::string("paths") + file_suffix(cfg.format);
    write_atomic(cfg.output_dir / name, cloud_table(run.path, cfg.format));
    manifest["paths"] = {{"file", name},
                         {"rows", run.path.size() * run.path.front().points.size()},
                         {"step", cfg.path_step},
                         {"t_start", run.path.front().time},
                         {"t_end", run.path.back().time}};
  } else {
    manifest["paths"] = nullptr;
  }
  return list;
}

std::vector<PropertyReport> run_checks(const RunConfig& cfg, const LinearField& field,
                                       const StabilityCertificate& cert, const std::vector<BoundaryFibre>& fibres,
                                       const std::vector<FibreCloud>& clouds, std::ostream& log) {
  const auto& v = cfg.verify;
  std::vector<PropertyReport> reports;
  const auto add = [&](PropertyReport r, double t) {
    r.name += "@t=" + tag(t);
    log << (r.passed ? "  pass " : "  FAIL ") << r.name << ": metric " << r.metric << " (tol " << r.tolerance
        << ")\n";
    reports.push_back(std::move(r));
  };
  for (const auto& f : fibres) {
    add(check_symmetry(f, v.symmetry_tol), f.time);
    add(check_gauss_injectivity(f), f.time);
    for (const auto& c : clouds) {
      if (std::abs(c.time - f.time) <= 1e-9) {
        add(check_convexity(f, c, v.convexity_tol), f.time);
        add(check_support_dominance(f, c, v.support_tol), f.time);
      }
    }
    add(check_backward_invariance(field, cfg.rho, cert, f, v.backward_depth, cfg.reconstruction, cfg.integrator,
                                  v.backward_tol),
        f.time);
    add(check_forward_invariance(field, cfg.rho, cert, f, v.forward_step, cfg.reconstruction, cfg.integrator,
                                 v.forward_tol),
        f.time);
    if (cfg.rho > 0.0) {
      add(check_scaling(field, cert, f.time, cfg.rho, 2.0 * cfg.rho, cfg.reconstruction, cfg.integrator,
                        v.scaling_tol),
          f.time);
    }
    add(check_horizon_doubling(field, cfg.rho, cert, f, cfg.reconstruction, cfg.integrator, v.doubling_tol),
        f.time);
    std::vector<double> horizons;
    for (double frac : v.decay_fractions) horizons.push_back(frac * cfg.reconstruction.horizon);
    add(check_pullback_decay(field, cfg.rho, cert, f.time, horizons, cfg.reconstruction, cfg.integrator), f.time);
  }
  return reports;
}

int write_report(const RunConfig& cfg, const std::vector<PropertyReport>& reports, Manifest& manifest,
                 std::ostream& log) {
  json arr = json::array();
  bool ok = true;
  for (const auto& r : reports) {
    arr.push_back(to_json(r));
    ok = ok && r.passed;
  }
  write_atomic(cfg.output_dir / "verify_report.json", arr.dump(2) + "\n");
  manifest["report"] = {{"file", "verify_report.json"}, {"passed", ok}, {"checks", reports.size()}};
  log << (ok ? "all checks passed" : "property failure") << " (" << reports.size() << " checks)\n";
  return ok ? kExitOk : kExitPropertyFailure;
}

void require_planar(const LinearField& field, const char* what) {
  if (field.dim() != 2) throw UnsupportedError(std::string(what) + " is implemented for d = 2 only");
}

}  // namespace

namespace {

// certificate.json: fitted certificate, row-dominance data and attractor radius.
void write_certificate(const RunConfig& cfg, const LinearField& field, const StabilityCertificate& cert,
                       std::ostream& log) {
  std::vector<double> grid(10001);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    grid[i] = cfg.window.t0 + cfg.window.length() * static_cast<double>(i) / static_cast<double>(grid.size() - 1);
  }
  const auto dom = row_dominance_check(field, grid);
  log << "row dominance on the window: " << (dom.dominant ? "yes" : "no") << ", min margin " << dom.min_margin
      << "\n";
  double radius = attractor_bound(cfg.rho, cert).radius;
  json doc = {{"version", kVersion},
              {"system", cfg.system},
              {"certificate", to_json(cert)},
              {"row_dominance", {{"dominant", dom.dominant}, {"min_margin", dom.min_margin}, {"grid", grid.size()}}},
              {"max_log_norm", max_log_norm(field, grid)},
              {"rho", cfg.rho}};
  if (dom.dominant) {
    // Row dominance gives a second, often much tighter, certificate.
    const auto rd = row_dominance_certificate(field, cfg.window);
    doc["row_dominance"]["certificate"] = to_json(rd);
    radius = std::min(radius, attractor_bound(cfg.rho, rd).radius);
    log << "row-dominance certificate: K = " << rd.K << ", gamma = " << rd.gamma << "\n";
  }
  doc["attractor_radius"] = radius;
  log << "attractor bound: radius " << radius << "\n";
  write_atomic(cfg.output_dir / "certificate.json", doc.dump(2) + "\n");
}

}  // namespace

int cmd_stability(const RunConfig& cfg, std::ostream& log) {
  const auto field = make_field(cfg);
  Manifest manifest(cfg, "stability");
  const auto cert = certify(cfg, field, log);
  write_certificate(cfg, field, cert, log);
  manifest["certificate"] = to_json(cert);
  manifest.save();
  return kExitOk;
}

int cmd_boundary(const RunConfig& cfg, std::ostream& log) {
  cfg.validate();
  const auto field = make_field(cfg);
  require_planar(field, "fibre reconstruction");
  Manifest manifest(cfg, "boundary");
  const auto cert = certify(cfg, field, log);
  write_certificate(cfg, field, cert, log);
  const auto fibres = reconstruct_all(cfg, field, cert);
  manifest["certificate"] = to_json(cert);
  manifest["times"] = cfg.times;
  manifest["fibres"] = write_fibres(cfg, fibres);
  manifest.save();
  log << "wrote " << fibres.size() << " fibres to " << cfg.output_dir.string() << "\n";
  return kExitOk;
}

int cmd_cloud(const RunConfig& cfg, std::ostream& log) {
  cfg.validate();
  const auto field = make_field(cfg);
  Manifest manifest(cfg, "cloud");
  const auto run = evolve_all(cfg, field);
  manifest["times"] = cfg.times;
  manifest["clouds"] = write_clouds(cfg, run, manifest);
  manifest.save();
  log << "wrote " << run.at_times.size() << " clouds of " << cfg.cloud.trajectory_count << " trajectories to "
      << cfg.output_dir.string() << "\n";
  return kExitOk;
}

int cmd_verify(const RunConfig& cfg, std::ostream& log) {
  cfg.validate();
  const auto field = make_field(cfg);
  require_planar(field, "verification");
  const auto cert = certify(cfg, field, log);
  std::vector<BoundaryFibre> fibres;
  std::vector<FibreCloud> clouds;
  if (!cfg.input_dir.empty()) {
    const auto doc = json::parse(read_file(cfg.input_dir / "manifest.json"), nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) throw ConfigError("input manifest is not valid JSON");
    if (!doc.contains("fibres") || !doc.at("fibres").is_array() || doc.at("fibres").empty()) {
      throw ConfigError("input manifest lists no fibres");
    }
    for (const auto& e : doc.at("fibres")) fibres.push_back(read_fibre(cfg.input_dir / e.at("file").get<std::string>()));
    if (doc.contains("clouds") && doc.at("clouds").is_array()) {
      for (const auto& e : doc.at("clouds")) clouds.push_back(read_cloud(cfg.input_dir / e.at("file").get<std::string>()));
    }
    log << "loaded " << fibres.size() << " fibres and " << clouds.size() << " clouds from "
        << cfg.input_dir.string() << "\n";
  } else {
    fibres = reconstruct_all(cfg, field, cert);
    clouds = evolve_all(cfg, field).at_times;
  }
  Manifest manifest(cfg, "verify");
  manifest["certificate"] = to_json(cert);
  const auto reports = run_checks(cfg, field, cert, fibres, clouds, log);
  const int code = write_report(cfg, reports, manifest, log);
  manifest.save();
  return code;
}

int cmd_example(const RunConfig& cfg, std::ostream& log) {
  cfg.validate();
  const auto field = make_field(cfg);
  require_planar(field, "the example pipeline");
  Manifest manifest(cfg, "example");
  const auto cert = certify(cfg, field, log);
  write_certificate(cfg, field, cert, log);
  const auto fibres = reconstruct_all(cfg, field, cert);
  const auto run = evolve_all(cfg, field);
  manifest["certificate"] = to_json(cert);
  manifest["times"] = cfg.times;
  manifest["fibres"] = write_fibres(cfg, fibres);
  manifest["clouds"] = write_clouds(cfg, run, manifest);
  const auto reports = run_checks(cfg, field, cert, fibres, run.at_times, log);
  const int code = write_report(cfg, reports, manifest, log);
  manifest.save();
  return code;
}

namespace {

struct Flags {
  std::string config, system, matrix, times, window, method, law, format, out, in;
  std::optional<double> rho, horizon, t0, step, segment;
  std::optional<int> normals, trajectories;
  std::optional<std::uint64_t> seed;
};

void add_flags(CLI::App& cmd, Flags& f) {
  cmd.add_option("--config", f.config, "JSON config file; flags override its values");
  cmd.add_option("--system", f.system, "paper-example | constant | diagonal | custom");
  cmd.add_option("--matrix", f.matrix, "JSON entries: [[..],[..]] (constant), [..] (diagonal), expressions (custom)");
  cmd.add_option("--rho", f.rho, "noise radius");
  cmd.add_option("--times", f.times, "comma-separated fibre times");
  cmd.add_option("--window", f.window, "certificate window a:b");
  cmd.add_option("--normals", f.normals, "number of boundary normals");
  cmd.add_option("--horizon", f.horizon, "pullback horizon");
  cmd.add_option("--trajectories", f.trajectories, "cloud size");
  cmd.add_option("--t0", f.t0, "cloud start time");
  cmd.add_option("--seed", f.seed, "cloud RNG seed");
  cmd.add_option("--segment", f.segment, "control switching period");
  cmd.add_option("--law", f.law, "control law: unit-sphere | ball");
  cmd.add_option("--step", f.step, "integrator step");
  cmd.add_option("--method", f.method, "integrator: rk4 | rk45");
  cmd.add_option("--out", f.out, "output directory");
  cmd.add_option("--format", f.format, "point data format: csv | json");
  cmd.add_option("--in", f.in, "verify: directory holding a previous run");
}

RunConfig resolve(const Flags& f) {
  RunConfig c;
  if (!f.config.empty()) {
    const auto j = json::parse(read_file(f.config), nullptr, false);
    if (j.is_discarded()) throw ConfigError("config file " + f.config + " is not valid JSON");
    c = merge_config(c, j);
  }
  if (!f.system.empty()) c.system = f.system;
  if (!f.matrix.empty()) c.matrix = parse_matrix_text(f.matrix);
  if (f.rho) c.rho = *f.rho;
  if (!f.times.empty()) c.times = parse_list(f.times);
  if (!f.window.empty()) c.window = parse_window(f.window);
  if (f.normals) c.reconstruction.normal_count = *f.normals;
  if (f.horizon) c.reconstruction.horizon = *f.horizon;
  if (f.trajectories) c.cloud.trajectory_count = *f.trajectories;
  if (f.t0) c.t0 = *f.t0;
  if (f.seed) c.cloud.seed = *f.seed;
  if (f.segment) c.cloud.segment_length = *f.segment;
  if (!f.law.empty()) c.cloud.law = parse_law(f.law);
  if (f.step) c.integrator.step = *f.step;
  if (!f.method.empty()) c.integrator.method = parse_method(f.method);
  if (!f.out.empty()) c.output_dir = f.out;
  if (!f.format.empty()) c.format = parse_format(f.format);
  if (!f.in.empty()) c.input_dir = f.in;
  return c;
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"Boundaries of pullback attractors of linear systems with bounded noise"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  Flags flags;
  bool times_given = false;
  struct Sub {
    const char* name;
    const char* help;
    int (*fn)(const RunConfig&, std::ostream&);
  };
  const Sub subs[] = {
      {"stability", "fit an exponential stability certificate", cmd_stability},
      {"boundary", "reconstruct attractor fibre boundaries", cmd_boundary},
      {"cloud", "evolve a Monte Carlo cloud under sampled controls", cmd_cloud},
      {"verify", "run the property suite", cmd_verify},
      {"example", "run the example pipeline: certificate, fibres, clouds, checks", cmd_example},
  };
  std::vector<CLI::App*> cmds;
  for (const auto& s : subs) {
    auto* cmd = app.add_subcommand(s.name, s.help);
    add_flags(*cmd, flags);
    cmds.push_back(cmd);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }
  for (auto* cmd : cmds) {
    if (cmd->parsed() && cmd->count("--times") > 0) times_given = true;
  }

  try {
    RunConfig cfg = resolve(flags);
    if (times_given && flags.times.empty()) cfg.times.clear();
    for (std::size_t i = 0; i < cmds.size(); ++i) {
      if (cmds[i]->parsed()) {
        const auto t0 = std::chrono::steady_clock::now();
        const int rc = subs[i].fn(cfg, std::cerr);
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::cerr << subs[i].name << " finished in " << secs << " s, exit " << rc << "\n";
        return rc;
      }
    }
  } catch (const NotStableError& e) {
    std::cerr << "error (not stable): " << e.what() << "\n";
    return kExitUnstable;
  } catch (const CloudIntegrationError& e) {
    std::cerr << "error (integration): " << e.what() << "\nfailed trajectories:";
    for (auto i : e.failed()) std::cerr << ' ' << i;
    std::cerr << "\n";
    return kExitIntegration;
  } catch (const IntegrationError& e) {
    std::cerr << "error (integration): " << e.what() << "\n";
    return kExitIntegration;
  } catch (const NonConvergenceError& e) {
    std::cerr << "error (integration): " << e.what() << "\n";
    return kExitIntegration;
  } catch (const Error& e) {
    std::cerr << "error (config): " << e.what() << "\n";
    return kExitConfig;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error (io): " << e.what() << "\n";
    return kExitConfig;
  } catch (const json::exception& e) {
    std::cerr << "error (config): " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitConfig;
}

}  // namespace boundaryflow::app
