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

// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero when any criterion fails.
//
//   acceptance --cli <path to adaptpoint> [--work <dir>] [--seeds N] [--epochs E] [--only 1,2,...]

#include "adaptpoint/corruptions.hpp"
#include "adaptpoint/data_io.hpp"
#include "adaptpoint/errors.hpp"
#include "adaptpoint/eval.hpp"
#include "adaptpoint/gradcheck_suite.hpp"
#include "adaptpoint/imitator.hpp"
#include "adaptpoint/models.hpp"
#include "adaptpoint/simulator.hpp"
#include "adaptpoint/training.hpp"

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <mutex>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace fs = std::filesystem;
using namespace adaptpoint;

namespace {

struct Options {
  std::string cli;
  fs::path work;
  std::size_t seeds = 5;
  std::size_t epochs = 30;
  std::set<int> only;
};

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot read " + p.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Matrix random_cloud(RngStream& rng, Eigen::Index n) {
  Matrix m(n, 3);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-1.0, 1.0);
  return normalize_unit_sphere(PointCloud(m)).points;
}

Matrix permute(const Matrix& m, const std::vector<std::size_t>& perm) {
  Matrix out(m.rows(), m.cols());
  for (std::size_t i = 0; i < perm.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = m.row(static_cast<Eigen::Index>(perm[i]));
  }
  return out;
}

void run_cli(const Options& o, const std::string& args) {
  const std::string cmd = "\"" + o.cli + "\" " + args + " > /dev/null";
  if (std::system(cmd.c_str()) != 0) throw std::runtime_error("command failed: " + cmd);
}

// 1
Verdict identity_pipeline() {
  RngStream init(11, 0);
  const Imitator im(ImitatorConfig{}, init);
  RngStream data(11, 1);
  double worst = 0.0;
  for (std::uint64_t i = 0; i < 100; ++i) {
    const PointCloud p(random_cloud(data, 256));
    RngStream rng(11, 100 + i);
    ImitateOptions opts;
    opts.keep_all = true;
    worst = std::max(worst, (im.imitate(p, rng, opts).augmented.points - p.points).cwiseAbs().maxCoeff());
  }
  return {worst <= 1e-9, "max |imitate(P) - P| = " + fmt("%.3g", worst) + " over 100 clouds"};
}

// 2
Verdict gradient_fidelity() {
  const std::vector<GradcheckCase> cases = run_gradcheck_suite();
  double worst = 0.0;
  std::string worst_name;
  std::size_t failed = 0;
  for (const GradcheckCase& c : cases) {
    if (c.report.max_rel_error >= worst) {
      worst = c.report.max_rel_error;
      worst_name = c.name;
    }
    failed += c.passed() ? 0 : 1;
  }
  return {worst <= 1e-4 && failed == 0 && !cases.empty(),
          std::to_string(cases.size()) + " cases, max rel err " + fmt("%.3g", worst) + " (" + worst_name + "), " +
              std::to_string(failed) + " over their tier"};
}

// 3
Verdict fusion_partition() {
  RngStream rng(33, 0);
  double worst_sum = 0.0;
  bool single_exact = true;
  for (int t = 0; t < 50; ++t) {
    const Matrix cloud = random_cloud(rng, 256);
    const auto m = static_cast<Eigen::Index>(1 + rng.index(8));
    const Matrix anchors = take_rows(cloud, fps(cloud, static_cast<std::size_t>(m), 0));
    sim::FusionConfig cfg;
    cfg.bandwidth = rng.uniform(0.05, 2.0);
    const sim::FusionWeights w = sim::fusion_weights(cloud, anchors, cfg);
    worst_sum = std::max(worst_sum, (w.weight.rowwise().sum().array() - 1.0).abs().maxCoeff());

    Matrix one = anchors.topRows(1);
    DeformationParams p = DeformationParams::identity(1);
    for (int j = 0; j < 3; ++j) {
      p.scale(0, j) = rng.uniform(0.5, 2.0);
      p.rotation(0, j) = rng.uniform(-0.5, 0.5);
      p.translation(0, j) = rng.uniform(-0.25, 0.25);
    }
    const sim::AnchorSets sets = sim::per_anchor_deform(cloud, one, p);
    single_exact = single_exact && sim::fuse_anchor_sets(sets, cloud, cfg) == sets.candidates[0];
  }
  return {worst_sum <= 1e-12 && single_exact, "max |sum w - 1| = " + fmt("%.3g", worst_sum) +
                                                   ", M=1 fusion " + (single_exact ? "exact" : "differs")};
}

// 4
Verdict feedback_algebra() {
  const bool values = feedback_loss(0.0, 0.0, 1.0) == 0.0 && std::abs(feedback_loss(std::log(2.0), 0.0, 1.0) - 1.0) <= 1e-12 &&
                      std::abs(feedback_loss(-std::log(2.0), 0.0, 1.0) - 0.5) <= 1e-12;
  std::size_t violations = 0;
  for (int i = -5000; i < 5000; ++i) {
    const double a = feedback_loss(i * 1e-3, 0.0, 1.0);
    const double b = feedback_loss((i + 1) * 1e-3, 0.0, 1.0);
    if (i >= 0 && !(b > a)) ++violations;
    if (i + 1 <= 0 && !(b < a)) ++violations;
  }
  return {values && violations == 0, std::string("analytic values ") + (values ? "match" : "differ") + ", " +
                                         std::to_string(violations) + " monotonicity violations on 10000 steps"};
}

// 5
Verdict mce_convention() {
  RngStream rng(55, 0);
  MetricsTable t;
  for (auto& row : t.error) for (double& e : row) e = rng.uniform(0.01, 0.9);
  t.clean_oa = 0.87;
  const CorruptionErrors ce = corruption_error(t, t);
  const bool all = std::all_of(ce.ce.begin(), ce.ce.end(), [](double c) { return c == 100.0; });
  return {all && ce.mce == 100.0, "mCE = " + fmt("%.17g", ce.mce) + (all ? ", every CE = 100" : ", a CE differs")};
}

// 6
Verdict suite_determinism(const Options& o, const fs::path& dataset) {
  const fs::path a = o.work / "suite-a";
  const fs::path b = o.work / "suite-b";
  run_cli(o, "--seed 1 --out \"" + a.string() + "\" corrupt --dataset \"" + dataset.string() + "\"");
  run_cli(o, "--seed 1 --threads 4 --out \"" + b.string() + "\" corrupt --dataset \"" + dataset.string() + "\"");
  const std::string manifest_text = slurp(a / kSuiteManifestName);
  const SuiteManifest m = SuiteManifest::decode(manifest_text);
  bool identical = manifest_text == slurp(b / kSuiteManifestName);
  std::set<std::pair<Family, int>> cells;
  for (const SuiteRecord& r : m.records) {
    identical = identical && slurp(a / r.path) == slurp(b / r.path);
    cells.emplace(r.family, r.severity);
  }

  const Dataset ds = load_dataset(dataset);
  std::array<std::array<double, kNumSeverities>, kNumFamilies> sum{};
  std::array<std::array<std::size_t, kNumSeverities>, kNumFamilies> count{};
  for (const SuiteRecord& r : m.records) {
    const double d = chamfer_distance(ds.test[r.sample_index], read_cloud(a / r.path));
    sum[family_index(r.family)][static_cast<std::size_t>(r.severity - 1)] += d;
    ++count[family_index(r.family)][static_cast<std::size_t>(r.severity - 1)];
  }
  std::string non_monotone;
  std::size_t min_samples = ds.test.size();
  for (Family f : kAllFamilies) {
    const std::size_t fi = family_index(f);
    for (std::size_t l = 0; l < kNumSeverities; ++l) min_samples = std::min(min_samples, count[fi][l]);
    for (std::size_t l = 1; l < kNumSeverities; ++l) {
      if (!(sum[fi][l] / count[fi][l] > sum[fi][l - 1] / count[fi][l - 1])) {
        non_monotone += std::string(non_monotone.empty() ? "" : ",") + std::string(family_name(f));
        break;
      }
    }
  }
  const bool pass = identical && cells.size() == kNumFamilies * kNumSeverities && non_monotone.empty() &&
                    min_samples >= 50;
  return {pass, std::to_string(m.records.size()) + " files " + (identical ? "byte-identical" : "DIFFER") + ", " +
                    std::to_string(cells.size()) + " cells, Chamfer monotone over " + std::to_string(min_samples) +
                    " samples" + (non_monotone.empty() ? "" : ", not monotone: " + non_monotone)};
}

struct RunResult {
  MetricsTable table;
  double seconds = 0.0;
};

enum class Variant { kBaseline, kFull, kNoDeformMask, kNoFeedback, kNoAdversarial };
constexpr std::array<Variant, 5> kVariants{Variant::kBaseline, Variant::kFull, Variant::kNoDeformMask,
                                           Variant::kNoFeedback, Variant::kNoAdversarial};
constexpr std::array<const char*, 5> kVariantNames{"baseline", "full", "no-deform-mask", "no-feedback",
                                                  "no-adversarial"};

TrainConfig variant_config(Variant v, std::uint64_t seed, std::size_t epochs) {
  TrainConfig c;
  c.seed = seed;
  c.epochs = epochs;
  switch (v) {
    case Variant::kBaseline: c.baseline = true; break;
    case Variant::kFull: break;
    case Variant::kNoDeformMask:
      c.use_deformation = false;
      c.use_mask = false;
      break;
    case Variant::kNoFeedback: c.use_feedback = false; break;
    case Variant::kNoAdversarial: c.use_adversarial = false; break;
  }
  return c;
}

/// results[variant][seed]
using Grid = std::array<std::vector<RunResult>, kVariants.size()>;

Grid train_grid(const Options& o, const Dataset& ds, const fs::path& suite) {
  Grid grid;
  for (auto& row : grid) row.resize(o.seeds);
  std::vector<std::pair<std::size_t, std::size_t>> jobs;
  // slowest variants first so the tail of the schedule is short
  for (std::size_t v : {1u, 3u, 4u, 0u, 2u}) {
    for (std::size_t s = 0; s < o.seeds; ++s) jobs.emplace_back(v, s);
  }
  std::atomic<std::size_t> next{0};
  std::mutex io;
  std::exception_ptr error;
  auto worker = [&] {
    for (std::size_t j; (j = next.fetch_add(1)) < jobs.size();) {
      const auto [v, s] = jobs[j];
      try {
        const auto t0 = std::chrono::steady_clock::now();
        const TrainResult r = train(ds.train, ds.class_names.size(), variant_config(kVariants[v], s, o.epochs));
        const PointClassifier& clf = r.trainer->classifier();
        const SuiteEvaluation e = evaluate_suite([&](const Matrix& p) { return clf.predict(p); }, suite, ds.test,
                                                 ds.test_paths, {256, 0, 1});
        RunResult& out = grid[v][s];
        out.table = e.table;
        out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::lock_guard lock(io);
        std::cout << "  .. " << kVariantNames[v] << " seed " << s << ": clean OA " << fmt("%.3f", e.table.clean_oa)
                  << ", train acc " << fmt("%.3f", r.history.empty() ? 0.0 : r.history.back().train_accuracy)
                  << " (" << fmt("%.0f", out.seconds) << " s)" << std::endl;
      } catch (...) {
        std::lock_guard lock(io);
        if (!error) error = std::current_exception();
        next = jobs.size();
      }
    }
  };
  const unsigned workers = std::max(1u, std::min<unsigned>(std::thread::hardware_concurrency(),
                                                           static_cast<unsigned>(jobs.size())));
  std::vector<std::thread> pool;
  for (unsigned i = 0; i < workers; ++i) pool.emplace_back(worker);
  for (std::thread& t : pool) t.join();
  if (error) std::rethrow_exception(error);
  return grid;
}

double mce(const RunResult& method, const RunResult& baseline) { return corruption_error(method.table, baseline.table).mce; }

// 7
Verdict directional_robustness(const Grid& g) {
  const std::size_t seeds = g[0].size();
  std::size_t wins = 0;
  std::string per_seed;
  std::array<double, kNumFamilies> ce_mean{};
  for (std::size_t s = 0; s < seeds; ++s) {
    const CorruptionErrors ce = corruption_error(g[1][s].table, g[0][s].table);
    wins += ce.mce < 100.0 ? 1 : 0;
    per_seed += (s ? " " : "") + fmt("%.1f", ce.mce);
    for (std::size_t f = 0; f < kNumFamilies; ++f) ce_mean[f] += ce.ce[f] / static_cast<double>(seeds);
  }
  std::string families;
  for (Family f : kAllFamilies) {
    families += std::string(families.empty() ? "" : " ") + std::string(family_label(f)) + "=" +
                fmt("%.0f", ce_mean[family_index(f)]);
  }
  const std::size_t needed = seeds >= 5 ? seeds - 1 : seeds;
  return {wins >= needed, "mCE per seed [" + per_seed + "], " + std::to_string(wins) + "/" + std::to_string(seeds) +
                              " below 100; mean CE " + families};
}

// 8
Verdict ablation_direction(const Grid& g) {
  const std::size_t seeds = g[0].size();
  std::array<double, kVariants.size()> mean{};
  for (std::size_t v = 1; v < kVariants.size(); ++v) {
    for (std::size_t s = 0; s < seeds; ++s) mean[v] += mce(g[v][s], g[0][s]) / static_cast<double>(seeds);
  }
  const bool dm = mean[2] >= mean[1];
  const bool feed = mean[3] >= mean[1] - 2.0;
  const bool adv = mean[4] >= mean[1] - 2.0;
  return {dm && feed && adv, "mean mCE full " + fmt("%.1f", mean[1]) + ", no-deform-mask " + fmt("%.1f", mean[2]) +
                                 ", no-feedback " + fmt("%.1f", mean[3]) + ", no-adversarial " +
                                 fmt("%.1f", mean[4])};
}

// 9
Verdict permutation_invariance() {
  RngStream init(99, 0);
  const PointClassifier clf(ClassifierConfig{}, init);
  const Discriminator disc(ClassifierConfig{}, init);
  RngStream rng(99, 1);
  double worst_logit = 0.0;
  double worst_prob = 0.0;
  for (int t = 0; t < 100; ++t) {
    const Matrix p = random_cloud(rng, 256);
    const Matrix q = permute(p, rng.permutation(256));
    worst_logit = std::max(worst_logit, (clf.logits(p) - clf.logits(q)).cwiseAbs().maxCoeff());
    worst_prob = std::max(worst_prob, std::abs(disc.probability(p) - disc.probability(q)));
  }
  return {worst_logit <= 1e-5 && worst_prob <= 1e-5,
          "max logit deviation " + fmt("%.3g", worst_logit) + ", max probability deviation " + fmt("%.3g", worst_prob)};
}

// 10
Verdict format_integrity(const Options& o, const fs::path& dataset, const fs::path& suite) {
  RngStream rng(1010, 0);
  bool exact = true;
  for (int t = 0; t < 20; ++t) {
    const Matrix m = random_cloud(rng, 1 + static_cast<Eigen::Index>(rng.index(500))).cast<float>().cast<double>();
    const fs::path file = o.work / "roundtrip.pcb";
    write_cloud(file, PointCloud(m));
    exact = exact && read_cloud(file).points == m &&
            decode_cloud(encode_cloud(PointCloud(m), CloudFormat::kPcbBinary), CloudFormat::kPcbBinary).points == m;
  }

  const Dataset ds = load_dataset(dataset);
  RngStream init(1010, 1);
  const PointClassifier clf(ClassifierConfig{}, init);
  const SuiteEvaluation e =
      evaluate_suite([&](const Matrix& p) { return clf.predict(p); }, suite, ds.test, ds.test_paths, {256, 0, 1});
  const fs::path dump = o.work / "predictions.txt";
  std::ofstream(dump, std::ios::binary) << encode_predictions(e.predictions);
  const MetricsTable back =
      rescore(decode_predictions(slurp(dump)), SuiteManifest::decode(slurp(suite / kSuiteManifestName)));
  const bool same = back.error == e.table.error && back.clean_oa == e.table.clean_oa &&
                    encode_table(back) == encode_table(e.table);
  return {exact && same, std::string("binary round trip ") + (exact ? "exact" : "INEXACT") + ", rescored table " +
                             (same ? "bit-identical" : "DIFFERS") + " over " + std::to_string(e.predictions.size()) +
                             " predictions"};
}

Options parse(int argc, char** argv) {
  Options o;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    auto value = [&]() -> std::string {
      if (i + 1 >= argc) throw std::invalid_argument(a + " needs a value");
      return argv[++i];
    };
    if (a == "--cli") {
      o.cli = value();
    } else if (a == "--work") {
      o.work = value();
    } else if (a == "--seeds") {
      o.seeds = std::stoul(value());
    } else if (a == "--epochs") {
      o.epochs = std::stoul(value());
    } else if (a == "--only") {
      std::istringstream in(value());
      for (std::string n; std::getline(in, n, ',');) o.only.insert(std::stoi(n));
    } else {
      throw std::invalid_argument("unknown argument " + a);
    }
  }
  if (o.cli.empty()) throw std::invalid_argument("--cli is required");
  if (o.seeds == 0) throw std::invalid_argument("--seeds must be positive");
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  Options o;
  try {
    o = parse(argc, argv);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  const bool own_work = o.work.empty();
  if (own_work) o.work = fs::temp_directory_path() / ("adaptpoint-acceptance-" + std::to_string(::getpid()));
  fs::create_directories(o.work);

  int failures = 0;
  auto report = [&](int id, const char* title, const std::function<Verdict()>& check) {
    if (!o.only.empty() && !o.only.count(id)) return;
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = check();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failures += v.pass ? 0 : 1;
    std::cout << (v.pass ? "PASS" : "FAIL") << " [" << id << "] " << title << ": " << v.detail << " ("
              << fmt("%.1f", secs) << " s)" << std::endl;
  };

  const fs::path dataset = o.work / "data" / std::string(kDatasetManifestName);
  const fs::path suite = o.work / "suite-a";
  const bool need_data = o.only.empty() || o.only.count(6) || o.only.count(7) || o.only.count(8) || o.only.count(10);
  if (need_data) {
    try {
      run_cli(o, "--seed 1 --out \"" + (o.work / "data").string() + "\" gen-data");
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return 1;
    }
  }

  report(1, "identity pipeline", identity_pipeline);
  report(2, "gradient fidelity", gradient_fidelity);
  report(3, "fusion partition of unity", fusion_partition);
  report(4, "feedback-loss algebra", feedback_algebra);
  report(5, "mCE convention", mce_convention);
  report(6, "suite determinism", [&] { return suite_determinism(o, dataset); });
  report(9, "permutation invariance", permutation_invariance);
  report(10, "format integrity", [&] {
    if (!fs::exists(suite / kSuiteManifestName)) suite_determinism(o, dataset);
    return format_integrity(o, dataset, suite);
  });

  if (o.only.empty() || o.only.count(7) || o.only.count(8)) {
    Grid grid;
    std::string grid_error;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      if (!fs::exists(suite / kSuiteManifestName)) suite_determinism(o, dataset);
      std::cout << "  training " << o.seeds << " seeds x " << kVariants.size() << " variants, " << o.epochs
                << " epochs, " << std::max(1u, std::thread::hardware_concurrency()) << " workers" << std::endl;
      grid = train_grid(o, load_dataset(dataset), suite);
    } catch (const std::exception& e) {
      grid_error = e.what();
    }
    const double train_secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cout << "  training grid took " << fmt("%.0f", train_secs) << " s" << std::endl;
    auto guarded = [&](Verdict (*f)(const Grid&)) {
      return [&, f] { return grid_error.empty() ? f(grid) : Verdict{false, "training failed: " + grid_error}; };
    };
    report(7, "directional robustness", guarded(directional_robustness));
    report(8, "ablation direction", guarded(ablation_direction));
  }

  if (own_work) {
    std::error_code ec;
    fs::remove_all(o.work, ec);
  }
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
