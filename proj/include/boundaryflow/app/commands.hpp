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

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "boundaryflow/app/io.hpp"
#include "boundaryflow/boundary.hpp"
#include "boundaryflow/cloud.hpp"
#include "boundaryflow/integrate.hpp"
#include "boundaryflow/linear.hpp"
#include "json.hpp"

namespace boundaryflow::app {

inline constexpr const char* kVersion = "1.0.0";

enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 1,
  kExitUnstable = 2,
  kExitIntegration = 3,
  kExitPropertyFailure = 4,
};

struct VerifyConfig {
  double symmetry_tol = 1e-6;
  double convexity_tol = 1e-3;
  double support_tol = 1e-3;
  double backward_tol = 1e-3;
  double backward_depth = 10.0;
  double forward_tol = 1e-3;
  double forward_step = 1.0;
  double scaling_tol = 1e-6;
  double doubling_tol = 1e-6;
  std::vector<double> decay_fractions{0.1, 0.2, 0.3, 0.4, 1.0};  // of the horizon
};

struct RunConfig {
  std::string system = "paper-example";  // paper-example | constant | diagonal | custom
  nlohmann::json matrix;                 // entries for constant / diagonal / custom
  double rho = 1.0;
  std::vector<double> times{-20.0, 0.0, 20.0};
  TimeInterval window{-50.0, 50.0};  // certificate fitting window
  int sample_pairs = 1000;
  ReconstructionConfig reconstruction;
  CloudConfig cloud;
  double t0 = -100.0;       // cloud start time
  double path_step = 0.25;  // sampling of trajectories between fibre times; 0 disables
  IntegratorConfig integrator;
  VerifyConfig verify;
  std::filesystem::path output_dir = "out";
  std::filesystem::path input_dir;  // verify: read fibres and clouds from here
  Format format = Format::Csv;

  void validate() const;
  nlohmann::json to_json() const;
};

/// Overlays the keys present in j onto base.
RunConfig merge_config(RunConfig base, const nlohmann::json& j);

LinearField make_field(const RunConfig& cfg);

int cmd_stability(const RunConfig& cfg, std::ostream& log);
int cmd_boundary(const RunConfig& cfg, std::ostream& log);
int cmd_cloud(const RunConfig& cfg, std::ostream& log);
int cmd_verify(const RunConfig& cfg, std::ostream& log);
int cmd_example(const RunConfig& cfg, std::ostream& log);

/// Full command-line entry point; maps errors to exit codes.
int run_cli(int argc, char** argv);

}  // namespace boundaryflow::app
