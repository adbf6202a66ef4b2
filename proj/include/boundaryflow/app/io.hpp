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
#include <string>
#include <vector>

#include "boundaryflow/core.hpp"
#include "boundaryflow/linear.hpp"
#include "boundaryflow/verify.hpp"
#include "json.hpp"

namespace boundaryflow::app {

enum class Format { Csv, Json };

/// Shortest form that still round-trips: 17 significant digits.
std::string format_number(double v);

/// Writes through a temporary file in the same directory and renames it into
/// place, so readers never see a partial file.
void write_atomic(const std::filesystem::path& path, const std::string& content);

std::string read_file(const std::filesystem::path& path);

std::string fibre_table(const BoundaryFibre& fibre, Format format);
std::string cloud_table(std::span<const FibreCloud> clouds, Format format);

/// Readers accept both table formats, chosen by file extension.
BoundaryFibre read_fibre(const std::filesystem::path& path);
FibreCloud read_cloud(const std::filesystem::path& path);

nlohmann::json to_json(const StabilityCertificate& cert);
nlohmann::json to_json(const PropertyReport& report);

std::string file_suffix(Format format);

}  // namespace boundaryflow::app
