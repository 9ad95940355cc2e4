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

#include "adaptpoint/nn/checkpoint.hpp"
#include "adaptpoint/nn/gradcheck.hpp"
#include "adaptpoint/nn/gumbel.hpp"
#include "adaptpoint/nn/layers.hpp"
#include "adaptpoint/nn/ops.hpp"
#include "adaptpoint/nn/optim.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <utility>

namespace adaptpoint::nn {
namespace {

Matrix normal(Eigen::Index r, Eigen::Index c, std::uint64_t seed) {
  RngStream rng(seed, 0);
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
  return m;
}

Matrix scalar(double v) { return Matrix::Constant(1, 1, v); }

// Random fixed projection to a scalar, so every output entry gets a distinct weight.
Var project(Var out, std::uint64_t seed) {
  return sum_all(mul(out, out.graph().constant(normal(out.rows(), out.cols(), seed))));
}

// Gradcheck of f over one input tensor held in a parameter.
double op_error(const Matrix& x, const std::function<Var(Graph&, Var)>& f, std::uint64_t seed = 99) {
  ParameterStore store;
  Parameter& p = store.add("x", x);
  return gradcheck([&](Graph& g) { return project(f(g, g.param(p)), seed); }, store.all()).max_rel_error;
}

TEST(Ops, ActivationValues) {
  Graph g;
  EXPECT_EQ(sigmoid(g.constant(scalar(0.0))).scalar(), 0.5);
  EXPECT_EQ(nn::tanh(g.constant(scalar(0.0))).scalar(), 0.0);
  EXPECT_EQ(relu(g.constant(scalar(-2.0))).scalar(), 0.0);
  EXPECT_EQ(nn::abs(g.constant(scalar(-2.0))).scalar(), 2.0);
  EXPECT_EQ(clamp(g.constant(scalar(7.0)), -1.0, 1.0).scalar(), 1.0);
}

TEST(Ops, MaxPoolRoutesToArgmax) {
  Graph g;
  Matrix set(3, 1);
  set << 1, 5, 3;
  const Var x = g.input(set);
  const Var m = max_rows(x);
  EXPECT_EQ(m.scalar(), 5.0);
  g.backward(m);
  EXPECT_EQ(x.grad()(0, 0), 0.0);
  EXPECT_EQ(x.grad()(1, 0), 1.0);
  EXPECT_EQ(x.grad()(2, 0), 0.0);
}

TEST(Ops, MaxPoolTiesGoToLowestRow) {
  Graph g;
  Matrix set(4, 1);
  set << 2, 7, 7, 1;
  const Var x = g.input(set);
  g.backward(max_rows(x));
  EXPECT_EQ(x.grad()(1, 0), 1.0);
  EXPECT_EQ(x.grad()(2, 0), 0.0);
}

TEST(Ops, ShapeMismatchThrows) {
  Graph g;
  const Var a = g.constant(Matrix::Zero(2, 3));
  const Var b = g.constant(Matrix::Zero(3, 2));
  EXPECT_THROW(add(a, b), std::invalid_argument);
  EXPECT_THROW(mul(a, b), std::invalid_argument);
  EXPECT_THROW(matmul(a, a), std::invalid_argument);
  EXPECT_THROW(add_row(a, b), std::invalid_argument);
  EXPECT_THROW(max_pool_groups(a, 4), std::invalid_argument);
  EXPECT_THROW(g.backward(a), std::invalid_argument);
}

TEST(Ops, SoftmaxRowsSumToOne) {
  Graph g;
  const Matrix s = softmax_rows(g.constant(normal(20, 7, 1) * 10.0)).value();
  for (Eigen::Index i = 0; i < s.rows(); ++i) EXPECT_NEAR(s.row(i).sum(), 1.0, 1e-12);
  const Matrix big = softmax_rows(g.constant(Matrix::Constant(1, 3, 1000.0))).value();
  EXPECT_TRUE(big.allFinite());
}

TEST(Ops, EveryOpMatchesCentralDifferences) {
  const Matrix a = normal(4, 5, 2);
  const Matrix b = normal(4, 5, 3);
  const Matrix w = normal(5, 3, 4);
  const Matrix pos = a.cwiseAbs().array() + 0.5;
  constexpr double kTol = 1e-6;
  EXPECT_LE(op_error(a, [&](Graph& g, Var x) { return add(x, g.constant(b)); }), kTol);
  EXPECT_LE(op_error(a, [&](Graph& g, Var x) { return sub(g.constant(b), x); }), kTol);
  EXPECT_LE(op_error(a, [&](Graph& g, Var x) { return mul(x, g.constant(b)); }), kTol);
  EXPECT_LE(op_error(a, [&](Graph& g, Var x) { return add_row(x, g.constant(b.row(0))); }), kTol);
  EXPECT_LE(op_error(a, [&](Graph&, Var x) { return affine(x, -1.7, 0.3); }), kTol);
  EXPECT_LE(op_error(a, [&](Graph& g, Var x) { return matmul(x, g.constant(w)); }), kTol);
  EXPECT_LE(op_error(a, [&](Graph& g, Var x) { return matmul_nt(g.constant(b), x); }), kTol);
  EXPECT_LE(op_error(a, [&](Graph&, Var x) { return transpose(x); }), kTol);
  EXPECT_LE(op_error(a, [&](Graph& g, Var x) { return linear(x, g.constant(w), g.constant(w.row(0))); }), kTol);
  EXPECT_LE(op_error(a, [&](Graph&, Var x) { return relu(x); }), kTol);
  EXPECT_LE(op_error(a, [&](Graph&, Var x) { return nn::tanh(x); }), kTol);
  EXPECT_LE(op_error(a, [&](Graph&, Var x) { return sigmoid(x); }), kTol);
  EXPECT_LE(op_error(a, [&](Graph&, Var x) { return nn::exp(x); }), kTol);
  EXPECT_LE(op_error(pos, [&](Graph&, Var x) { return nn::log(x); }), kTol);
  EXPECT_LE(op_error(a, [&](Graph&, Var x) { return nn::abs(x); }), kTol);
  EXPECT_LE(op_error(a, [&](Graph&, Var x) { return clamp(x, -0.5, 0.5); }), kTol);
  EXPECT_LE(op_error(a, [&](Graph& g, Var x) {
              const std::vector<Var> parts{x, g.constant(b), x};
              return concat_cols(parts);
            }),
            kTol);
  EXPECT_LE(op_error(a, [&](Graph&, Var x) { return slice_cols(x, 1, 3); }), kTol);
  EXPECT_LE(op_error(a, [&](Graph&, Var x) { return slice_rows(x, 1, 2); }), kTol);
  EXPECT_LE(op_error(a.row(0), [&](Graph&, Var x) { return broadcast_rows(x, 3); }), kTol);
  EXPECT_LE(op_error(a, [&](Graph&, Var x) { return gather_rows(x, {3, 0, 0, 2, 1, 3}); }), kTol);
  IndexMatrix idx(2, 2);
  idx << 0, 3, 2, 2;
  Matrix iw(2, 2);
  iw << 0.25, 0.75, 0.5, 0.5;
  EXPECT_LE(op_error(a, [&](Graph&, Var x) { return weighted_gather(x, idx, iw); }), kTol);
  EXPECT_LE(op_error(a, [&](Graph&, Var x) { return max_pool_groups(x, 2); }), kTol);
  EXPECT_LE(op_error(a, [&](Graph&, Var x) { return sum_all(x); }), kTol);
  EXPECT_LE(op_error(a, [&](Graph&, Var x) { return mean_all(x); }), kTol);
  EXPECT_LE(op_error(a, [&](Graph&, Var x) { return mean_rows(x); }), kTol);
  EXPECT_LE(op_error(a, [&](Graph&, Var x) { return softmax_rows(x); }), kTol);
  EXPECT_LE(op_error(a, [&](Graph&, Var x) { return log_softmax_rows(x); }), kTol);
  EXPECT_LE(op_error(a, [&](Graph& g, Var x) { return layer_norm(x, g.constant(b.row(1)), g.constant(b.row(2))); }),
            kTol);
  EXPECT_LE(op_error(a, [&](Graph& g, Var x) { return scale_rows(x, g.constant(b.col(0))); }), kTol);
  const std::vector<int> labels{1, 4, 0, 2};
  EXPECT_LE(op_error(a, [&](Graph&, Var x) { return cross_entropy(x, labels); }), kTol);
  EXPECT_LE(op_error(a.block(0, 0, 1, 3), [&](Graph&, Var x) { return euler_rotation(x); }), kTol);
}

TEST(Ops, BinaryOpsDifferentiateBothSides) {
  const Matrix a = normal(3, 4, 5);
  const Matrix b = normal(3, 4, 6);
  ParameterStore store;
  Parameter& pa = store.add("a", a);
  Parameter& pb = store.add("b", b);
  const auto err = gradcheck(
      [&](Graph& g) {
        const Var x = g.param(pa);
        const Var y = g.param(pb);
        return add(project(mul(x, y), 7), project(matmul_nt(x, y), 8));
      },
      store.all());
  EXPECT_LE(err.max_rel_error, 1e-6);
}

TEST(Ops, EulerRotationMatchesGeometry) {
  Graph g;
  Matrix ang(1, 3);
  ang << 0.2, -0.4, 0.9;
  const Matrix r = euler_rotation(g.constant(ang)).value();
  EXPECT_LE((r - Matrix(euler_to_rotation({0.2, -0.4, 0.9}))).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Ops, StraightThroughAndDetach) {
  Graph g;
  const Var soft = g.input(normal(2, 2, 8));
  Matrix hard(2, 2);
  hard << 1, 0, 0, 1;
  const Var st = straight_through(soft, hard);
  EXPECT_TRUE(st.value() == hard);
  g.backward(sum_all(mul(st, g.constant(normal(2, 2, 9)))));
  EXPECT_TRUE(soft.grad() == normal(2, 2, 9));

  Graph h;
  const Var x = h.input(normal(2, 2, 8));
  h.backward(sum_all(add(x, detach(x))));
  EXPECT_TRUE(x.grad() == Matrix::Ones(2, 2));
}

TEST(CrossEntropy, Examples) {
  Graph g;
  const std::vector<int> label{3};
  EXPECT_NEAR(cross_entropy(g.constant(Matrix::Zero(1, 5)), label).scalar(), std::log(5.0), 1e-15);
  Matrix confident = Matrix::Zero(1, 5);
  confident(0, 3) = 800.0;
  EXPECT_EQ(cross_entropy(g.constant(confident), label).scalar(), 0.0);
  const std::vector<int> bad{5};
  EXPECT_THROW(cross_entropy(g.constant(Matrix::Zero(1, 5)), bad), std::invalid_argument);
}

TEST(Graph, ParamsAreSharedAndFreezable) {
  ParameterStore store;
  Parameter& w = store.add("model.w", normal(2, 2, 10));
  Parameter& v = store.add("other.v", normal(2, 2, 11));
  EXPECT_THROW(store.add("model.w", Matrix::Zero(1, 1)), std::invalid_argument);
  Graph g;
  g.freeze("model.");
  const Var a = g.param(w);
  EXPECT_EQ(g.param(w).id(), a.id());
  EXPECT_FALSE(a.requires_grad());
  g.backward(sum_all(mul(a, g.param(v))));
  EXPECT_TRUE(w.grad.isZero(0.0));
  EXPECT_TRUE(v.grad == w.value);
}

TEST(Graph, GradientsAccumulateAcrossBackwardPasses) {
  ParameterStore store;
  Parameter& w = store.add("w", normal(1, 3, 12));
  for (int i = 0; i < 2; ++i) {
    Graph g;
    g.backward(sum_all(g.param(w)));
  }
  EXPECT_TRUE(w.grad == Matrix::Constant(1, 3, 2.0));
  store.zero_grad();
  EXPECT_TRUE(w.grad.isZero(0.0));
}

TEST(Graph, ForwardIsBitReproducible) {
  ParameterStore store;
  RngStream rng(1, 1);
  const MultiHeadAttention mha(store, "mha", 8, 2, rng);
  const Matrix x = normal(5, 8, 13);
  const Matrix pos = normal(5, 3, 14);
  Graph g1;
  Graph g2;
  EXPECT_TRUE(mha(g1, g1.constant(x), g1.constant(pos)).value() == mha(g2, g2.constant(x), g2.constant(pos)).value());
}

TEST(BranchTape, ReplayReusesRecordedBranches) {
  BranchTape tape;
  Matrix v(1, 2);
  v << -1.0, 1.0;
  {
    Graph g;
    g.set_branch_tape(&tape);
    relu(g.constant(v));
  }
  tape.set_mode(BranchTape::Mode::kReplay);
  Graph g;
  g.set_branch_tape(&tape);
  Matrix flipped(1, 2);
  flipped << 0.5, -0.5;
  const Matrix out = relu(g.constant(flipped)).value();
  EXPECT_EQ(out(0, 0), 0.0);
  EXPECT_EQ(out(0, 1), -0.5);
}

TEST(Attention, SingleTokenAttendsToItself) {
  ParameterStore store;
  RngStream rng(2, 2);
  const MultiHeadAttention mha(store, "mha", 4, 2, rng);
  mha.wq().value = Matrix::Identity(4, 4);
  mha.wk().value = Matrix::Identity(4, 4);
  mha.wv().value = Matrix::Identity(4, 4);
  mha.output().weight().value = Matrix::Identity(4, 4);
  mha.output().bias().value.setZero();
  for (const Linear& l : mha.position_embedding().layers()) {
    l.weight().value.setZero();
    l.bias().value.setZero();
  }
  Matrix token(1, 4);
  token << 0.3, -1.2, 2.0, 0.1;
  Graph g;
  const Matrix out = mha(g, g.constant(token), g.constant(Matrix::Zero(1, 3))).value();
  const Matrix two = 2.0 * token;
  const Matrix want =
      layer_norm(g.constant(two), g.constant(Matrix::Ones(1, 4)), g.constant(Matrix::Zero(1, 4))).value();
  EXPECT_LE((out - want).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Attention, IdenticalTokensGiveIdenticalRows) {
  ParameterStore store;
  RngStream rng(3, 3);
  const MultiHeadAttention mha(store, "mha", 8, 4, rng);
  Matrix x = normal(3, 8, 15);
  x.row(2) = x.row(0);
  Matrix pos = normal(3, 3, 16);
  pos.row(2) = pos.row(0);
  Graph g;
  const Matrix out = mha(g, g.constant(x), g.constant(pos)).value();
  EXPECT_TRUE(out.row(0) == out.row(2));
}

TEST(Attention, RejectsIndivisibleWidth) {
  ParameterStore store;
  RngStream rng(4, 4);
  EXPECT_THROW(MultiHeadAttention(store, "mha", 6, 4, rng), std::invalid_argument);
}

TEST(Attention, ProjectionGradientsMatchFiniteDifferences) {
  ParameterStore store;
  RngStream rng(5, 5);
  const MultiHeadAttention mha(store, "mha", 8, 2, rng);
  const Matrix x = normal(5, 8, 17);
  const Matrix pos = normal(5, 3, 18);
  std::vector<Parameter*> proj{&mha.wq(), &mha.wk(), &mha.wv()};
  const auto r = gradcheck([&](Graph& g) { return project(mha(g, g.constant(x), g.constant(pos)), 19); }, proj);
  EXPECT_LE(r.max_rel_error, 1e-5);
}

TEST(Gumbel, HardRowsAreOneHot) {
  RngStream rng(6, 6);
  Graph g;
  const Matrix y = gumbel_softmax(g.constant(normal(50, 2, 20)), 0.7, true, rng).value();
  for (Eigen::Index i = 0; i < y.rows(); ++i) {
    EXPECT_EQ(y.row(i).sum(), 1.0);
    EXPECT_EQ(y.row(i).maxCoeff(), 1.0);
  }
}

TEST(Gumbel, SoftRowsSumToOne) {
  RngStream rng(7, 7);
  Graph g;
  const Matrix y = gumbel_softmax(g.constant(normal(50, 2, 21)), 0.3, false, rng).value();
  for (Eigen::Index i = 0; i < y.rows(); ++i) EXPECT_NEAR(y.row(i).sum(), 1.0, 1e-12);
}

TEST(Gumbel, HardSamplesFollowTheCategoricalMarginal) {
  RngStream rng(8, 8);
  Matrix logits(10000, 2);
  logits.col(0).setConstant(std::log(3.0));
  logits.col(1).setConstant(std::log(1.0));
  Graph g;
  const Matrix y = gumbel_softmax(g.constant(logits), 0.5, true, rng).value();
  EXPECT_NEAR(y.col(0).mean(), 0.75, 0.02);
}

TEST(Gumbel, RejectsNonPositiveTemperature) {
  RngStream rng(9, 9);
  Graph g;
  EXPECT_THROW(gumbel_softmax(g.constant(Matrix::Zero(2, 2)), 0.0, false, rng), std::invalid_argument);
}

TEST(Gumbel, HardBackwardUsesSoftSample) {
  const Matrix logits = normal(6, 2, 22);
  RngStream rng(10, 10);
  const Matrix noise = gumbel_noise(6, 2, rng);
  const Matrix weights = normal(6, 2, 23);
  Graph hard_g;
  const Var a = hard_g.input(logits);
  hard_g.backward(sum_all(mul(gumbel_softmax(a, noise, 0.5, true), hard_g.constant(weights))));
  Graph soft_g;
  const Var b = soft_g.input(logits);
  soft_g.backward(sum_all(mul(gumbel_softmax(b, noise, 0.5, false), soft_g.constant(weights))));
  EXPECT_LE((a.grad() - b.grad()).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Adam, ZeroGradientLeavesParametersUnchanged) {
  ParameterStore store;
  Parameter& p = store.add("p", normal(2, 3, 24));
  const Matrix before = p.value;
  Adam opt(store.all(), 0.1);
  opt.step();
  EXPECT_TRUE(p.value == before);
}

TEST(Adam, FirstStepMovesBySignTimesLr) {
  ParameterStore store;
  Parameter& p = store.add("p", normal(2, 3, 25));
  const Matrix before = p.value;
  p.grad = normal(2, 3, 26);
  Adam opt(store.all(), 1e-3);
  opt.step();
  const Matrix expected = before.array() - 1e-3 * p.grad.array().sign();
  EXPECT_LE((p.value - expected).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Adam, ThreeStepsMatchScalarRecurrence) {
  ParameterStore store;
  Parameter& p = store.add("p", scalar(0.7));
  Adam opt(store.all(), 0.05);
  const double grads[3] = {0.3, -1.1, 0.02};
  double x = 0.7, m = 0.0, v = 0.0;
  for (int t = 1; t <= 3; ++t) {
    const double g = grads[t - 1];
    p.grad(0, 0) = g;
    opt.step();
    m = 0.9 * m + 0.1 * g;
    v = 0.999 * v + 0.001 * g * g;
    const double mh = m / (1.0 - std::pow(0.9, t));
    const double vh = v / (1.0 - std::pow(0.999, t));
    x -= 0.05 * mh / (std::sqrt(vh) + 1e-8);
    EXPECT_NEAR(p.value(0, 0), x, 1e-15);
  }
  EXPECT_EQ(opt.state().step, 3);
}

TEST(Gradcheck, QuadraticIsExact) {
  ParameterStore store;
  Parameter& p = store.add("p", normal(4, 4, 27));
  const auto r = gradcheck([&](Graph& g) { return affine(sum_all(mul(g.param(p), g.param(p))), 0.5); }, store.all());
  EXPECT_LE(r.max_rel_error, 1e-8);
  EXPECT_EQ(r.coords_checked, 16u);
}

TEST(Gradcheck, CatchesAWrongGradient) {
  ParameterStore store;
  Parameter& p = store.add("p", normal(2, 2, 28));
  // Forward is 2x; backward claims the identity.
  const auto r = gradcheck(
      [&](Graph& g) {
        const Var x = g.param(p);
        const Var doubled = g.make(2.0 * x.value(), {x.id()}, [](Graph& gr, int self) {
          gr.grad_slot(gr.parents(self)[0]) += gr.upstream(self);
        });
        return sum_all(doubled);
      },
      store.all());
  EXPECT_GT(r.max_rel_error, 0.4);
}

TEST(Gradcheck, NonFiniteLossIsReported) {
  ParameterStore store;
  Parameter& p = store.add("p", Matrix::Constant(1, 1, 800.0));
  EXPECT_THROW(gradcheck([&](Graph& g) { return nn::exp(g.param(p)); }, store.all()), GradcheckError);
}

TEST(Checkpoint, RoundTripToFloatPrecision) {
  ParameterStore a;
  a.add("m.w", normal(3, 4, 29));
  a.add("m.b", normal(1, 4, 30));
  const std::vector<TensorRecord> recs = decode_checkpoint(encode_checkpoint(std::as_const(a).all()));
  ASSERT_EQ(recs.size(), 2u);
  EXPECT_EQ(recs[0].name, "m.w");
  EXPECT_TRUE(recs[0].value == a.find("m.w")->value.cast<float>().cast<double>());

  ParameterStore b;
  b.add("m.w", Matrix::Zero(3, 4));
  b.add("m.b", Matrix::Zero(1, 4));
  EXPECT_EQ(assign_records(recs, b, "m."), 2u);
  EXPECT_TRUE(b.find("m.b")->value == recs[1].value);

  ParameterStore wrong;
  wrong.add("m.w", Matrix::Zero(4, 3));
  EXPECT_THROW(assign_records(recs, wrong, "m.w"), std::invalid_argument);
  EXPECT_THROW(decode_checkpoint("ADPT-CKPT v2\n"), std::exception);
  const std::string bytes = encode_checkpoint(std::as_const(a).all());
  EXPECT_EQ(bytes.rfind(kCheckpointMagic, 0), 0u);
  EXPECT_THROW(decode_checkpoint(bytes.substr(0, bytes.size() - 3)), std::exception);
}

}  // namespace
}  // namespace adaptpoint::nn
