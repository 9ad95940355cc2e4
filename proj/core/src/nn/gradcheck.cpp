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

#include "adaptpoint/nn/gradcheck.hpp"

#include "adaptpoint/rng.hpp"

#include <algorithm>
#include <cmath>

namespace adaptpoint::nn {

namespace {

double evaluate(const LossClosure& loss, BranchTape* tape) {
  Graph g;
  if (tape != nullptr) {
    tape->set_mode(BranchTape::Mode::kReplay);
    g.set_branch_tape(tape);
  }
  const Var out = loss(g);
  if (out.rows() != 1 || out.cols() != 1) throw GradcheckError("gradcheck: loss is not a scalar");
  const double v = out.scalar();
  if (!std::isfinite(v)) throw GradcheckError("gradcheck: non-finite loss");
  return v;
}

}  // namespace

GradcheckReport gradcheck(const LossClosure& loss, const std::vector<Parameter*>& params,
                          const GradcheckOptions& opts) {
  for (Parameter* p : params) p->zero_grad();
  BranchTape tape;
  BranchTape* replay = opts.freeze_branches ? &tape : nullptr;
  {
    Graph g;
    if (replay != nullptr) g.set_branch_tape(replay);
    const Var out = loss(g);
    if (!std::isfinite(out.scalar())) throw GradcheckError("gradcheck: non-finite loss");
    g.backward(out);
  }
  std::vector<Matrix> analytic;
  analytic.reserve(params.size());
  for (Parameter* p : params) {
    if (!p->grad.allFinite()) throw GradcheckError("gradcheck: non-finite gradient in " + p->name);
    analytic.push_back(p->grad);
  }

  GradcheckReport report;
  RngStream rng(opts.sample_seed, 0);
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    Parameter& p = *params[pi];
    const auto size = static_cast<std::size_t>(p.value.size());
    std::vector<std::size_t> coords;
    if (size <= opts.max_coords_per_tensor) {
      for (std::size_t i = 0; i < size; ++i) coords.push_back(i);
    } else {
      auto perm = rng.permutation(size);
      coords.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(opts.max_coords_per_tensor));
      std::sort(coords.begin(), coords.end());
    }
    for (std::size_t c : coords) {
      double& x = p.value.data()[c];
      const double saved = x;
      x = saved + opts.step;
      const double up = evaluate(loss, replay);
      x = saved - opts.step;
      const double down = evaluate(loss, replay);
      x = saved;
      const double numeric = (up - down) / (2.0 * opts.step);
      const double a = analytic[pi].data()[c];
      const double abs_err = std::abs(a - numeric);
      const double rel = abs_err / std::max({std::abs(a), std::abs(numeric), opts.denom_floor});
      report.max_abs_error = std::max(report.max_abs_error, abs_err);
      if (rel > report.max_rel_error || report.worst.empty()) {
        report.max_rel_error = std::max(rel, report.max_rel_error);
        report.worst = p.name + "[" + std::to_string(c) + "]";
      }
      ++report.coords_checked;
    }
  }
  return report;
}

}  // namespace adaptpoint::nn
