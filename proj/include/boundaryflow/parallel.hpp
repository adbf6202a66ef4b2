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

#include <cstddef>
#include <functional>

namespace boundaryflow {

/// Worker count: BOUNDARYFLOW_THREADS when set to a positive integer, else the
/// hardware concurrency (0 or unset means auto).
std::size_t thread_budget();

/// Runs body(i) for i in [0, n) on up to thread_budget() threads. Work items
/// must write to disjoint outputs. If any item throws, the exception of the
/// lowest failing index is rethrown after all workers finish.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace boundaryflow
