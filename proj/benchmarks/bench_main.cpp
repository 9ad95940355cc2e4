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

#include "adaptpoint/corruptions.hpp"
#include "adaptpoint/data_io.hpp"
#include "adaptpoint/geom.hpp"
#include "adaptpoint/imitator.hpp"
#include "adaptpoint/models.hpp"
#include "adaptpoint/training.hpp"

#include <benchmark/benchmark.h>

namespace adaptpoint {
namespace {

Matrix cloud(Eigen::Index n, std::uint64_t seed = 1) {
  RngStream rng(seed, 0);
  Matrix m(n, 3);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-1.0, 1.0);
  return m;
}

void BM_Fps(benchmark::State& state) {
  const Matrix p = cloud(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(fps(p, static_cast<std::size_t>(state.range(0) / 4), 0));
}
BENCHMARK(BM_Fps)->Arg(256)->Arg(1024)->Arg(4096);

void BM_Knn(benchmark::State& state) {
  const Matrix p = cloud(state.range(0));
  const Matrix q = cloud(state.range(0) / 4, 2);
  for (auto _ : state) benchmark::DoNotOptimize(knn(q, p, 8));
}
BENCHMARK(BM_Knn)->Arg(256)->Arg(1024);

void BM_Chamfer(benchmark::State& state) {
  const PointCloud a(cloud(state.range(0)));
  const PointCloud b(cloud(state.range(0), 2));
  for (auto _ : state) benchmark::DoNotOptimize(chamfer_distance(a, b));
}
BENCHMARK(BM_Chamfer)->Arg(256)->Arg(1024);

void BM_ImitateInference(benchmark::State& state) {
  RngStream init(3, 0);
  const Imitator im(ImitatorConfig{}, init);
  const PointCloud p(normalize_unit_sphere(PointCloud(cloud(256))).points);
  RngStream rng(3, 1);
  for (auto _ : state) benchmark::DoNotOptimize(im.imitate(p, rng));
}
BENCHMARK(BM_ImitateInference)->Unit(benchmark::kMillisecond);

void BM_ClassifierForward(benchmark::State& state) {
  RngStream init(4, 0);
  const PointClassifier clf(ClassifierConfig{}, init);
  const Matrix p = cloud(256);
  for (auto _ : state) benchmark::DoNotOptimize(clf.logits(p));
}
BENCHMARK(BM_ClassifierForward)->Unit(benchmark::kMillisecond);

void BM_TrainStep(benchmark::State& state) {
  SyntheticConfig sc;
  sc.samples_per_class = 5;
  const Dataset ds = synthesize_dataset(sc);
  TrainConfig cfg;
  cfg.baseline = state.range(0) == 0;
  Trainer trainer(cfg, ds.class_names.size());
  std::vector<const PointCloud*> batch;
  for (std::size_t i = 0; i < cfg.batch_size; ++i) batch.push_back(&ds.train[i % ds.train.size()]);
  std::uint64_t id = 0;
  for (auto _ : state) benchmark::DoNotOptimize(trainer.train_step(batch, 0, id++));
  state.SetLabel(cfg.baseline ? "baseline" : "adaptpoint");
}
BENCHMARK(BM_TrainStep)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace adaptpoint

BENCHMARK_MAIN();
