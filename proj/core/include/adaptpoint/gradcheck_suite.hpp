// Copyright 2026 The AdaptPoint Authors
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

#include "adaptpoint/nn/gradcheck.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace adaptpoint {

struct GradcheckCase {
  std::string name;
  nn::GradcheckReport report;
  double tolerance = 1e-5;
  bool passed() const { return report.max_rel_error <= tolerance; }
};

struct GradcheckSuiteOptions {
  std::uint64_t seed = 7;
  bool ops = true;
  bool layers = true;
  bool models = true;
  bool end_to_end = true;
};

/// Finite-difference checks of every differentiable op, the layers, the
/// classifier and discriminator, and the feedback loss back-propagated
/// through the classifier and the whole imitator. Single ops are held to
/// 1e-6 relative error, layers and models to 1e-5, the end-to-end chain to
/// 1e-4.
std::vector<GradcheckCase> run_gradcheck_suite(const GradcheckSuiteOptions& options = {});

}  // namespace adaptpoint
