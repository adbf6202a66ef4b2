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

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "boundaryflow/linear.hpp"

namespace boundaryflow {

/// Scalar expression in the time variable `t`, e.g. "-20 + 10*atan(0.1*t)".
/// Supports + - * / ^, parentheses, the constant pi and the functions sin,
/// cos, tan, atan, exp, log, sqrt, abs, tanh.
class Expression {
 public:
  /// Throws ConfigError with the offending position on malformed input.
  static Expression parse(std::string_view text);

  double operator()(double t) const;
  const std::string& text() const { return text_; }

  struct Node;

 private:
  std::string text_;
  std::shared_ptr<const Node> root_;
};

/// Field whose entries are parsed expressions (row-major, square).
LinearField expression_field(const std::vector<std::vector<std::string>>& entries);

}  // namespace boundaryflow
