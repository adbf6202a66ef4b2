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

#include "boundaryflow/app/io.hpp"

#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace boundaryflow::app {

namespace fs = std::filesystem;

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_atomic(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot open " + tmp.string() + " for writing");
    out << content;
    out.flush();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw ConfigError("failed writing " + tmp.string());
    }
  }
  fs::rename(tmp, path);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::string file_suffix(Format format) { return format == Format::Csv ? ".csv" : ".json"; }

namespace {

std::vector<std::string> header(const char* lead, const char* state, const char* extra, int d) {
  std::vector<std::string> cols;
  std::istringstream is(lead);
  for (std::string c; std::getline(is, c, ',');) cols.push_back(c);
  for (int i = 1; i <= d; ++i) cols.push_back(state + std::to_string(i));
  if (extra) {
    for (int i = 1; i <= d; ++i) cols.push_back(extra + std::to_string(i));
  }
  return cols;
}

std::string render(const std::vector<std::string>& cols, const std::vector<std::vector<double>>& rows,
                   Format format) {
  if (format == Format::Json) {
    nlohmann::json j;
    j["columns"] = cols;
    j["rows"] = rows;
    return j.dump() + "\n";
  }
  std::string out;
  for (std::size_t i = 0; i < cols.size(); ++i) out += (i ? "," : "") + cols[i];
  out += "\n";
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (i) out += ',';
      out += format_number(r[i]);
    }
    out += "\n";
  }
  return out;
}

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

Table parse_json_table(const fs::path& path) {
  Table t;
  try {
    const auto j = nlohmann::json::parse(read_file(path));
    t.columns = j.at("columns").get<std::vector<std::string>>();
    t.rows = j.at("rows").get<std::vector<std::vector<double>>>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  for (const auto& r : t.rows) {
    if (r.size() != t.columns.size()) throw ConfigError(path.string() + ": wrong column count");
  }
  return t;
}

Table parse_table(const fs::path& path) {
  if (path.extension() == ".json") return parse_json_table(path);
  std::istringstream in(read_file(path));
  Table t;
  std::string line;
  if (!std::getline(in, line)) throw ConfigError(path.string() + ": empty file");
  std::istringstream hs(line);
  for (std::string c; std::getline(hs, c, ',');) t.columns.push_back(c);
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<double> row;
    std::istringstream ls(line);
    for (std::string c; std::getline(ls, c, ',');) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(c, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != c.size() || c.empty()) {
        throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": bad number '" + c + "'");
      }
      row.push_back(v);
    }
    if (row.size() != t.columns.size()) {
      throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": wrong column count");
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

int state_dim(const Table& t, std::size_t lead, int blocks, const fs::path& path) {
  const std::size_t rest = t.columns.size() - lead;
  if (t.columns.size() <= lead || rest % blocks != 0) throw ConfigError(path.string() + ": unexpected header");
  return static_cast<int>(rest / blocks);
}

}  // namespace

std::string fibre_table(const BoundaryFibre& fibre, Format format) {
  const int d = fibre.dim();
  std::vector<std::vector<double>> rows;
  rows.reserve(fibre.entries.size());
  for (std::size_t i = 0; i < fibre.entries.size(); ++i) {
    std::vector<double> r{static_cast<double>(i), fibre.time};
    const auto& e = fibre.entries[i];
    r.insert(r.end(), e.x.data(), e.x.data() + d);
    r.insert(r.end(), e.n.data(), e.n.data() + d);
    rows.push_back(std::move(r));
  }
  return render(header("index,tau", "x", "n", d), rows, format);
}

std::string cloud_table(std::span<const FibreCloud> clouds, Format format) {
  const int d = clouds.empty() || clouds.front().points.empty() ? 2
                                                                : static_cast<int>(clouds.front().points[0].size());
  std::vector<std::vector<double>> rows;
  const std::size_t count = clouds.empty() ? 0 : clouds.front().points.size();
  for (std::size_t i = 0; i < count; ++i) {
    for (const auto& c : clouds) {
      std::vector<double> r{static_cast<double>(i), c.time};
      r.insert(r.end(), c.points[i].data(), c.points[i].data() + d);
      rows.push_back(std::move(r));
    }
  }
  return render(header("traj,t", "x", nullptr, d), rows, format);
}

BoundaryFibre read_fibre(const fs::path& path) {
  const auto t = parse_table(path);
  const int d = state_dim(t, 2, 2, path);
  if (t.columns != header("index,tau", "x", "n", d)) throw ConfigError(path.string() + ": unexpected header");
  if (t.rows.empty()) throw ConfigError(path.string() + ": no fibre rows");
  std::vector<FibreEntry> entries;
  for (const auto& r : t.rows) {
    if (r[1] != t.rows.front()[1]) throw ConfigError(path.string() + ": mixed tau values");
    entries.push_back(FibreEntry{Eigen::Map<const Vector>(r.data() + 2, d), Eigen::Map<const Vector>(r.data() + 2 + d, d)});
  }
  return BoundaryFibre::make(t.rows.front()[1], std::move(entries));
}

FibreCloud read_cloud(const fs::path& path) {
  const auto t = parse_table(path);
  const int d = state_dim(t, 2, 1, path);
  if (t.columns != header("traj,t", "x", nullptr, d)) throw ConfigError(path.string() + ": unexpected header");
  if (t.rows.empty()) throw ConfigError(path.string() + ": no cloud rows");
  std::vector<Vector> points;
  for (const auto& r : t.rows) {
    if (r[1] != t.rows.front()[1]) throw ConfigError(path.string() + ": mixed time values");
    points.emplace_back(Eigen::Map<const Vector>(r.data() + 2, d));
  }
  return FibreCloud::make(t.rows.front()[1], std::move(points));
}

nlohmann::json to_json(const StabilityCertificate& cert) {
  return {{"K", cert.K},
          {"log_K", std::log(cert.K)},
          {"gamma", cert.gamma},
          {"window", {cert.window.t0, cert.window.t1}},
          {"method", to_string(cert.method)}};
}

nlohmann::json to_json(const PropertyReport& report) {
  return {{"name", report.name},
          {"passed", report.passed},
          {"metric", report.metric},
          {"tolerance", report.tolerance},
          {"details", report.details}};
}

}  // namespace boundaryflow::app
