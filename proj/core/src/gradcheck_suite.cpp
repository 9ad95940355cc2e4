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

#include "adaptpoint/gradcheck_suite.hpp"

#include "adaptpoint/data_io.hpp"
#include "adaptpoint/imitator.hpp"
#include "adaptpoint/models.hpp"
#include "adaptpoint/nn/gumbel.hpp"
#include "adaptpoint/nn/layers.hpp"
#include "adaptpoint/nn/ops.hpp"
#include "adaptpoint/training.hpp"

#include <cmath>
#include <functional>

namespace adaptpoint {

namespace {

using nn::Graph;
using nn::Var;
using Body = std::function<Var(Graph&, const std::vector<Var>&)>;

constexpr double kOpTolerance = 1e-6;
constexpr double kLayerTolerance = 1e-5;
constexpr double kDeepTolerance = 1e-4;

Matrix normal_matrix(Eigen::Index r, Eigen::Index c, RngStream& rng) {
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
  return m;
}

// Entries bounded away from zero, for ops with a kink there.
Matrix off_zero(Eigen::Index r, Eigen::Index c, RngStream& rng) {
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    const double u = rng.uniform(0.1, 1.5);
    m.data()[i] = rng.uniform() < 0.5 ? -u : u;
  }
  return m;
}

Matrix positive(Eigen::Index r, Eigen::Index c, RngStream& rng) {
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(0.2, 2.0);
  return m;
}

// Projects a node onto fixed random weights so every output entry matters.
Var project(Graph& g, Var out, std::uint64_t tag) {
  RngStream rng(0xfeed, tag);
  return nn::sum_all(nn::mul(out, g.constant(normal_matrix(out.rows(), out.cols(), rng))));
}

GradcheckCase check_op(const std::string& name, std::vector<Matrix> inputs, const Body& body, double tol,
                       std::uint64_t tag) {
  nn::ParameterStore store;
  std::vector<nn::Parameter*> params;
  for (std::size_t i = 0; i < inputs.size(); ++i) params.push_back(&store.add("x" + std::to_string(i), inputs[i]));
  const nn::LossClosure loss = [&](Graph& g) {
    std::vector<Var> vars;
    for (nn::Parameter* p : params) vars.push_back(g.param(*p));
    return project(g, body(g, vars), tag);
  };
  return {name, nn::gradcheck(loss, params), tol};
}

void add_op_cases(std::vector<GradcheckCase>& out, std::uint64_t seed) {
  RngStream rng(seed, 1);
  std::uint64_t tag = 0;
  auto op = [&](const std::string& name, std::vector<Matrix> in, const Body& body) {
    out.push_back(check_op(name, std::move(in), body, kOpTolerance, ++tag));
  };
  auto n = [&](Eigen::Index r, Eigen::Index c) { return normal_matrix(r, c, rng); };

  op("add", {n(3, 4), n(3, 4)}, [](Graph&, const std::vector<Var>& v) { return nn::add(v[0], v[1]); });
  op("sub", {n(3, 4), n(3, 4)}, [](Graph&, const std::vector<Var>& v) { return nn::sub(v[0], v[1]); });
  op("mul", {n(3, 4), n(3, 4)}, [](Graph&, const std::vector<Var>& v) { return nn::mul(v[0], v[1]); });
  op("add_row", {n(5, 3), n(1, 3)}, [](Graph&, const std::vector<Var>& v) { return nn::add_row(v[0], v[1]); });
  op("affine", {n(3, 3)}, [](Graph&, const std::vector<Var>& v) { return nn::affine(v[0], -1.7, 0.3); });
  op("matmul", {n(3, 4), n(4, 2)}, [](Graph&, const std::vector<Var>& v) { return nn::matmul(v[0], v[1]); });
  op("matmul_nt", {n(3, 4), n(5, 4)}, [](Graph&, const std::vector<Var>& v) { return nn::matmul_nt(v[0], v[1]); });
  op("transpose", {n(2, 5)}, [](Graph&, const std::vector<Var>& v) { return nn::transpose(v[0]); });
  op("linear", {n(4, 3), n(3, 2), n(1, 2)},
     [](Graph&, const std::vector<Var>& v) { return nn::linear(v[0], v[1], v[2]); });
  op("relu", {off_zero(4, 4, rng)}, [](Graph&, const std::vector<Var>& v) { return nn::relu(v[0]); });
  op("tanh", {n(3, 4)}, [](Graph&, const std::vector<Var>& v) { return nn::tanh(v[0]); });
  op("sigmoid", {n(3, 4)}, [](Graph&, const std::vector<Var>& v) { return nn::sigmoid(v[0]); });
  op("exp", {n(3, 4)}, [](Graph&, const std::vector<Var>& v) { return nn::exp(v[0]); });
  op("log", {positive(3, 4, rng)}, [](Graph&, const std::vector<Var>& v) { return nn::log(v[0]); });
  op("abs", {off_zero(3, 4, rng)}, [](Graph&, const std::vector<Var>& v) { return nn::abs(v[0]); });
  op("clamp", {off_zero(4, 4, rng)}, [](Graph&, const std::vector<Var>& v) { return nn::clamp(v[0], -0.5, 0.5); });
  op("concat_cols", {n(3, 2), n(3, 4)}, [](Graph&, const std::vector<Var>& v) {
    const std::vector<Var> parts{v[0], v[1]};
    return nn::concat_cols(parts);
  });
  op("slice_cols", {n(3, 5)}, [](Graph&, const std::vector<Var>& v) { return nn::slice_cols(v[0], 1, 3); });
  op("slice_rows", {n(5, 3)}, [](Graph&, const std::vector<Var>& v) { return nn::slice_rows(v[0], 2, 2); });
  op("broadcast_rows", {n(1, 4)}, [](Graph&, const std::vector<Var>& v) { return nn::broadcast_rows(v[0], 3); });
  op("gather_rows", {n(4, 3)}, [](Graph&, const std::vector<Var>& v) { return nn::gather_rows(v[0], {2, 0, 2, 3}); });
  {
    IndexMatrix idx(3, 2);
    idx << 0, 1, 3, 3, 2, 0;
    Matrix w(3, 2);
    w << 0.25, 0.75, 0.5, 0.5, 0.9, 0.1;
    op("weighted_gather", {n(4, 3)},
       [idx, w](Graph&, const std::vector<Var>& v) { return nn::weighted_gather(v[0], idx, w); });
  }
  op("max_pool_groups", {n(6, 3)}, [](Graph&, const std::vector<Var>& v) { return nn::max_pool_groups(v[0], 3); });
  op("max_rows", {n(5, 4)}, [](Graph&, const std::vector<Var>& v) { return nn::max_rows(v[0]); });
  op("sum_all", {n(3, 4)}, [](Graph&, const std::vector<Var>& v) { return nn::sum_all(v[0]); });
  op("mean_all", {n(3, 4)}, [](Graph&, const std::vector<Var>& v) { return nn::mean_all(v[0]); });
  op("mean_rows", {n(3, 4)}, [](Graph&, const std::vector<Var>& v) { return nn::mean_rows(v[0]); });
  op("softmax_rows", {n(3, 4)}, [](Graph&, const std::vector<Var>& v) { return nn::softmax_rows(v[0]); });
  op("log_softmax_rows", {n(3, 4)}, [](Graph&, const std::vector<Var>& v) { return nn::log_softmax_rows(v[0]); });
  op("layer_norm", {n(3, 5), n(1, 5), n(1, 5)},
     [](Graph&, const std::vector<Var>& v) { return nn::layer_norm(v[0], v[1], v[2]); });
  op("scale_rows", {n(4, 3), n(4, 1)}, [](Graph&, const std::vector<Var>& v) { return nn::scale_rows(v[0], v[1]); });
  op("cross_entropy", {n(3, 4)}, [](Graph&, const std::vector<Var>& v) {
    const std::vector<int> labels{2, 0, 3};
    return nn::cross_entropy(v[0], labels);
  });
  op("euler_rotation", {n(1, 3)}, [](Graph&, const std::vector<Var>& v) { return nn::euler_rotation(v[0]); });
  {
    RngStream noise_rng(seed, 2);
    const Matrix noise = nn::gumbel_noise(4, 2, noise_rng);
    op("gumbel_softmax", {n(4, 2)},
       [noise](Graph&, const std::vector<Var>& v) { return nn::gumbel_softmax(v[0], noise, 0.7, false); });
  }

  // The forward value of these two is deliberately not the function whose
  // gradient they pass, so they are compared against the reference gradient
  // instead of finite differences.
  {
    nn::ParameterStore store;
    nn::Parameter& x = store.add("x", n(4, 2));
    const Matrix hard = nn::one_hot_argmax(x.value);
    Matrix reference;
    {
      Graph g;
      g.backward(project(g, nn::softmax_rows(g.param(x)), 99));
      reference = x.grad;
    }
    x.zero_grad();
    {
      Graph g;
      g.backward(project(g, nn::straight_through(nn::softmax_rows(g.param(x)), hard), 99));
    }
    GradcheckCase c{"straight_through", {}, kOpTolerance};
    c.report.max_abs_error = (x.grad - reference).cwiseAbs().maxCoeff();
    c.report.max_rel_error = c.report.max_abs_error / std::max(reference.cwiseAbs().maxCoeff(), 1e-4);
    c.report.coords_checked = static_cast<std::size_t>(x.value.size());
    c.report.worst = "x";
    out.push_back(c);
  }
  {
    nn::ParameterStore store;
    nn::Parameter& x = store.add("x", n(3, 3));
    Graph g;
    g.backward(nn::add(project(g, nn::detach(g.param(x)), 98), project(g, g.constant(x.value), 97)));
    GradcheckCase c{"detach", {}, kOpTolerance};
    c.report.max_abs_error = x.grad.cwiseAbs().maxCoeff();
    c.report.max_rel_error = c.report.max_abs_error / 1e-4;
    c.report.coords_checked = static_cast<std::size_t>(x.value.size());
    c.report.worst = "x";
    out.push_back(c);
  }
}

GradcheckCase check_store(const std::string& name, nn::ParameterStore& store,
                          const std::function<Var(Graph&)>& body, double tol) {
  return {name, nn::gradcheck(body, store.all()), tol};
}

void add_layer_cases(std::vector<GradcheckCase>& out, std::uint64_t seed) {
  RngStream rng(seed, 3);
  const Matrix x = normal_matrix(6, 8, rng);
  const Matrix pos = normal_matrix(6, 3, rng);
  {
    nn::ParameterStore store;
    const nn::Mlp mlp(store, "mlp", {8, 6, 4}, rng, true);
    out.push_back(check_store("mlp", store, [&](Graph& g) { return project(g, mlp(g, g.constant(x)), 201); },
                              kLayerTolerance));
  }
  {
    nn::ParameterStore store;
    const nn::LayerNorm ln(store, "ln", 8);
    store.find("ln.gain")->value = normal_matrix(1, 8, rng);
    out.push_back(check_store("layer_norm_layer", store,
                              [&](Graph& g) { return project(g, ln(g, g.constant(x)), 202); }, kLayerTolerance));
  }
  {
    nn::ParameterStore store;
    const nn::MultiHeadAttention mha(store, "mha", 8, 2, rng);
    out.push_back(check_store("multi_head_attention", store,
                              [&](Graph& g) { return project(g, mha(g, g.constant(x), g.constant(pos)), 203); },
                              kLayerTolerance));
  }
}

Matrix random_cloud(std::size_t n, RngStream& rng) {
  return normalize_unit_sphere(PointCloud(normal_matrix(static_cast<Eigen::Index>(n), 3, rng))).points;
}

void add_model_cases(std::vector<GradcheckCase>& out, std::uint64_t seed) {
  RngStream rng(seed, 4);
  ClassifierConfig cfg;
  const Matrix cloud = random_cloud(cfg.num_points, rng);
  {
    PointClassifier clf(cfg, rng);
    const BackboneIndices idx = clf.indices(cloud);
    const std::vector<int> label{2};
    out.push_back(check_store("classifier_cross_entropy", clf.parameters(),
                              [&](Graph& g) { return nn::cross_entropy(clf.forward(g, g.constant(cloud), &idx), label); },
                              kLayerTolerance));
  }
  {
    Discriminator disc(cfg, rng);
    const BackboneIndices idx = disc.indices(cloud);
    out.push_back(check_store("discriminator", disc.parameters(),
                              [&](Graph& g) { return disc.forward(g, g.constant(cloud), &idx); }, kLayerTolerance));
  }
}

void add_end_to_end_case(std::vector<GradcheckCase>& out, std::uint64_t seed) {
  RngStream rng(seed, 5);
  ImitatorConfig icfg;
  icfg.zero_init_heads = false;
  ClassifierConfig ccfg;
  const Matrix cloud = random_cloud(icfg.num_points, rng);
  Imitator imitator(icfg, rng);
  const PointClassifier clf(ccfg, rng);
  const int label = 1;

  const double lc_clean = [&] {
    Graph g;
    return nn::cross_entropy(clf.forward(g, g.constant(cloud)), std::span<const int>(&label, 1)).scalar();
  }();
  ImitateOptions opts;
  opts.hard_mask = false;  // the straight-through estimate is not a derivative of the hard forward pass
  const auto forward = [&](Graph& g) {
    RngStream noise(seed, 6);
    return imitator.forward(g, cloud, noise, opts);
  };
  // Sampling and grouping of the augmented cloud are frozen at the unperturbed point.
  const BackboneIndices idx = [&] {
    Graph g;
    return clf.indices(forward(g).output.value());
  }();
  const nn::LossClosure loss = [&](Graph& g) {
    g.freeze("classifier.");
    const ImitatorTrace t = forward(g);
    const Var lc_aug = nn::cross_entropy(clf.forward(g, t.output, &idx), std::span<const int>(&label, 1));
    return feedback_loss(lc_aug, lc_clean, 1.5);
  };
  nn::GradcheckOptions gopts;
  gopts.max_coords_per_tensor = 24;
  out.push_back({"imitator_feedback_end_to_end", nn::gradcheck(loss, imitator.parameters().all(), gopts),
                 kDeepTolerance});
}

}  // namespace

std::vector<GradcheckCase> run_gradcheck_suite(const GradcheckSuiteOptions& options) {
  std::vector<GradcheckCase> out;
  if (options.ops) add_op_cases(out, options.seed);
  if (options.layers) add_layer_cases(out, options.seed);
  if (options.models) add_model_cases(out, options.seed);
  if (options.end_to_end) add_end_to_end_case(out, options.seed);
  return out;
}

}  // namespace adaptpoint
