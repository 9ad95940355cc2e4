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

#include "settings.hpp"
#include "svg.hpp"

#include "adaptpoint/corruptions.hpp"
#include "adaptpoint/data_io.hpp"
#include "adaptpoint/errors.hpp"
#include "adaptpoint/eval.hpp"
#include "adaptpoint/gradcheck_suite.hpp"
#include "adaptpoint/imitator.hpp"
#include "adaptpoint/nn/checkpoint.hpp"
#include "adaptpoint/training.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace adaptpoint;
using cli::Settings;

namespace {

constexpr std::uint64_t kAugmentStream = 0xa097;

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text) || !out.flush()) throw IoError("cannot write " + path.string());
}

std::string num(double v, const char* f = "%.6g") {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

fs::path manifest_path(const fs::path& p) { return fs::is_directory(p) ? p / kDatasetManifestName : p; }

// FNV-1a over the manifest and every listed file, in manifest order.
std::uint64_t suite_checksum(const fs::path& dir, const SuiteManifest& manifest) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&h](const std::string& bytes) {
    for (unsigned char c : bytes) h = (h ^ c) * 0x100000001b3ULL;
  };
  feed(manifest.encode());
  for (const SuiteRecord& r : manifest.records) feed(read_text(dir / r.path));
  return h;
}

Eigen::VectorXd read_mask(const fs::path& path) {
  std::istringstream in(read_text(path));
  std::vector<double> values;
  double v = 0.0;
  while (in >> v) values.push_back(v);
  if (!in.eof()) throw ParseError("malformed mask value in " + path.string(), static_cast<std::size_t>(in.tellg()));
  return Eigen::Map<Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

struct Run {
  Settings settings;
  std::string config_path;
  std::string out = ".";

  void prepare(const std::string& command, const std::map<std::string, std::string>& extra = {}) {
    if (!config_path.empty()) cli::apply_config_file(settings, config_path);
    settings.resolve();
    fs::create_directories(out);
    std::map<std::string, std::string> meta = extra;
    meta.emplace("out", out);
    if (!config_path.empty()) meta.emplace("config", config_path);
    write_text(fs::path(out) / cli::kRunMetaName, cli::encode_run_meta(command, settings, meta));
  }
};

void ok(const std::string& command, const std::vector<std::pair<std::string, std::string>>& metrics) {
  std::string line = "OK " + command;
  for (const auto& [k, v] : metrics) line += ' ' + k + '=' + v;
  std::cout << line << std::endl;
}

int cmd_gen_data(Run& run) {
  run.prepare("gen-data");
  const Settings& s = run.settings;
  const DatasetManifest m = generate_synthetic(s.data, run.out, s.threads);
  std::size_t train = 0;
  for (const DatasetRecord& r : m.records) train += r.split == Split::kTrain ? 1 : 0;
  ok("gen-data", {{"samples", std::to_string(m.records.size())},
                  {"train", std::to_string(train)},
                  {"test", std::to_string(m.records.size() - train)},
                  {"classes", std::to_string(m.class_names.size())},
                  {"manifest", (fs::path(run.out) / kDatasetManifestName).string()}});
  return 0;
}

int cmd_corrupt(Run& run, const std::string& dataset, const std::vector<std::string>& families,
                const std::vector<int>& severities) {
  run.prepare("corrupt", {{"dataset", dataset}});
  SuiteOptions opts;
  if (!families.empty()) {
    opts.families.clear();
    for (const std::string& f : families) opts.families.push_back(parse_family(f));
  }
  if (!severities.empty()) opts.severities = severities;
  opts.table = run.settings.severity;
  opts.threads = run.settings.threads;
  const Dataset ds = load_dataset(manifest_path(dataset));
  const SuiteManifest m = build_suite(ds.test, run.out, run.settings.seed, opts);
  char sum[24];
  std::snprintf(sum, sizeof sum, "%016llx", static_cast<unsigned long long>(suite_checksum(run.out, m)));
  ok("corrupt", {{"files", std::to_string(m.records.size())}, {"checksum", sum}, {"dir", run.out}});
  return 0;
}

int cmd_train(Run& run, const std::string& dataset, const std::vector<std::string>& ablate, bool baseline) {
  TrainConfig& t = run.settings.train;
  for (const std::string& a : ablate) {
    if (a == "feedback") {
      t.use_feedback = false;
    } else if (a == "adv") {
      t.use_adversarial = false;
    } else if (a == "deform") {
      t.use_deformation = false;
    } else if (a == "mask") {
      t.use_mask = false;
    } else {
      throw std::invalid_argument("unknown --ablate value '" + a + "' (expected feedback, adv, deform or mask)");
    }
  }
  if (baseline) t.baseline = true;
  const Dataset ds = load_dataset(manifest_path(dataset));
  run.settings.data.classes.clear();
  for (const std::string& name : ds.class_names) run.settings.data.classes.push_back(parse_shape(name));
  run.prepare("train", {{"dataset", dataset}});

  TrainOptions opts;
  opts.out_dir = run.out;
  opts.on_epoch = [](const EpochMetrics& m) { std::cerr << metrics_row(m) << '\n'; };
  const TrainResult r = train(ds.train, ds.class_names.size(), run.settings.train, opts);
  const EpochMetrics& last = r.history.back();
  ok("train", {{"epochs", std::to_string(r.history.size())},
               {"train_acc", num(last.train_accuracy, "%.4f")},
               {"lc_clean", num(last.mean.lc_clean)},
               {"lc_aug", num(last.mean.lc_aug)},
               {"checkpoint", (fs::path(run.out) / kFinalCheckpointName).string()}});
  return 0;
}

int cmd_eval(Run& run, const std::string& dataset, const std::string& suite, const std::string& checkpoint,
             const std::string& baseline_errors, const std::string& name) {
  const Dataset ds = load_dataset(manifest_path(dataset));
  run.settings.data.classes.clear();
  for (const std::string& n : ds.class_names) run.settings.data.classes.push_back(parse_shape(n));
  run.prepare("eval", {{"dataset", dataset}, {"suite", suite}, {"checkpoint", checkpoint}});
  const Settings& s = run.settings;

  RngStream init(s.seed, 0);
  PointClassifier classifier(s.train.classifier, init);
  nn::assign_records(nn::load_checkpoint(checkpoint), classifier.parameters(), "classifier.");

  EvalOptions opts;
  opts.num_points = s.num_points;
  opts.resample_seed = s.seed;
  opts.threads = s.threads;
  const SuiteEvaluation ev =
      evaluate_suite([&](const Matrix& p) { return classifier.predict(p); }, suite, ds.test, ds.test_paths, opts);

  std::optional<MetricsTable> base;
  if (!baseline_errors.empty()) base = parse_table(read_text(baseline_errors));
  const fs::path out(run.out);
  write_text(out / "predictions.txt", encode_predictions(ev.predictions));
  write_text(out / "errors.tsv", encode_table(ev.table));
  write_text(out / "report.tsv", format_report(ev.table, base ? &*base : nullptr, baseline_errors));

  double mean_error = 0.0;
  for (Family f : kAllFamilies) mean_error += ev.table.family_sum(f);
  mean_error /= static_cast<double>(kNumFamilies * kNumSeverities);
  std::vector<std::pair<std::string, std::string>> metrics{{"method", name},
                                                           {"clean_oa", num(ev.table.clean_oa, "%.4f")},
                                                           {"mean_error", num(mean_error, "%.4f")}};
  if (base) metrics.emplace_back("mce", num(corruption_error(ev.table, *base).mce, "%.1f"));
  metrics.emplace_back("report", (out / "report.tsv").string());
  ok("eval", metrics);
  return 0;
}

int cmd_augment(Run& run, const std::vector<std::string>& inputs, const std::string& checkpoint,
                const std::string& mask_mode) {
  if (mask_mode != "multiply" && mask_mode != "filter") {
    throw std::invalid_argument("unknown --mask-mode '" + mask_mode + "' (expected multiply or filter)");
  }
  run.prepare("augment", {{"checkpoint", checkpoint}, {"mask_mode", mask_mode}});
  const Settings& s = run.settings;
  RngStream init(s.seed, 0);
  Imitator imitator(s.train.imitator, init);
  if (!checkpoint.empty()) nn::assign_records(nn::load_checkpoint(checkpoint), imitator.parameters(), "imitator.");

  double dropped = 0.0;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const fs::path in(inputs[i]);
    RngStream rng(s.seed, stream_id({kAugmentStream, i}));
    PointCloud cloud = read_cloud(in);
    if (cloud.size() != s.num_points) cloud = resample_to_n(cloud, s.num_points, rng);

    RngStream noise = rng;
    const ImitateResult r = imitator.imitate(cloud, rng, {});
    PointCloud out = r.augmented;
    if (mask_mode == "filter") {
      ImitateOptions unmasked;
      unmasked.use_mask = false;
      const ImitateResult fused = imitator.imitate(cloud, noise, unmasked);
      out = sim::apply_mask(fused.augmented.points, r.mask, sim::MaskMode::kFilter, &rng);
    }
    const fs::path stem = fs::path(run.out) / in.stem();
    write_cloud(stem.string() + ".aug.pcb", out, CloudFormat::kPcbBinary);
    std::string mask;
    for (Eigen::Index j = 0; j < r.mask.keep.size(); ++j) mask += num(r.mask.keep(j), "%.9g") + '\n';
    write_text(stem.string() + ".mask.txt", mask);
    dropped += r.mask.drop_fraction();
  }
  ok("augment", {{"files", std::to_string(inputs.size())},
                 {"mean_drop", num(dropped / static_cast<double>(inputs.size()), "%.4f")},
                 {"dir", run.out}});
  return 0;
}

int cmd_render(Run& run, const std::vector<std::string>& inputs, const std::vector<std::string>& views,
               const std::string& color, const std::vector<std::string>& masks) {
  if (color != "depth" && color != "mask") {
    throw std::invalid_argument("unknown --color '" + color + "' (expected depth or mask)");
  }
  if (color == "mask" && masks.size() != inputs.size()) {
    throw std::invalid_argument("--color mask needs one --mask file per input (" + std::to_string(masks.size()) +
                                " for " + std::to_string(inputs.size()) + ")");
  }
  std::vector<cli::View> parsed;
  for (const std::string& v : views) parsed.push_back(cli::parse_view(v));
  run.prepare("render", {{"color", color}});

  std::size_t written = 0;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const fs::path in(inputs[i]);
    const PointCloud cloud = read_cloud(in);
    std::optional<Eigen::VectorXd> values;
    if (color == "mask") values = read_mask(masks[i]);
    for (cli::View v : parsed) {
      cli::RenderOptions opts;
      opts.title = in.filename().string() + " " + std::string(cli::view_name(v));
      const fs::path file = fs::path(run.out) / (in.stem().string() + "_" + std::string(cli::view_name(v)) + ".svg");
      write_text(file, cli::render_svg(cloud.points, v, values, opts));
      ++written;
    }
  }
  ok("render", {{"files", std::to_string(written)}, {"dir", run.out}});
  return 0;
}

int cmd_gradcheck(Run& run) {
  run.prepare("gradcheck");
  GradcheckSuiteOptions opts;
  opts.seed = run.settings.seed;
  const std::vector<GradcheckCase> cases = run_gradcheck_suite(opts);
  std::string report = "case\tmax_rel_error\ttolerance\tpassed\n";
  double worst = 0.0;
  const GradcheckCase* failed = nullptr;
  for (const GradcheckCase& c : cases) {
    report += c.name + '\t' + num(c.report.max_rel_error, "%.3e") + '\t' + num(c.tolerance, "%.0e") + '\t' +
              (c.passed() ? "yes" : "no") + '\n';
    worst = std::max(worst, c.report.max_rel_error);
    if (!c.passed() && failed == nullptr) failed = &c;
  }
  write_text(fs::path(run.out) / "gradcheck.tsv", report);
  if (failed != nullptr) {
    throw std::runtime_error("gradcheck: " + failed->name + " relative error " +
                             num(failed->report.max_rel_error, "%.3e") + " exceeds " + num(failed->tolerance, "%.0e"));
  }
  ok("gradcheck", {{"max_rel_err", num(worst, "%.3e")}, {"cases", std::to_string(cases.size())}});
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sample-adaptive point cloud augmentation: data, corruption suites, training and evaluation"};
  app.require_subcommand(1);
  app.fallthrough();

  Run run;
  app.add_option("--seed", run.settings.seed, "Seed of every random stream")->capture_default_str();
  app.add_option("--threads", run.settings.threads, "Workers for parallel stages; training is single-threaded")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--out", run.out, "Output directory")->capture_default_str();
  app.add_option("--config", run.config_path, "key = value file overriding defaults")->check(CLI::ExistingFile);

  std::string dataset, suite, checkpoint, baseline_errors, name = "method", mask_mode = "multiply", color = "depth";
  std::vector<std::string> families, ablate, inputs, masks, views{"xy", "xz", "yz"};
  std::vector<int> severities;
  bool baseline = false;

  auto* gen = app.add_subcommand("gen-data", "Generate the synthetic shape dataset");
  auto* corrupt = app.add_subcommand("corrupt", "Build the corruption suite over the test split");
  corrupt->add_option("--dataset", dataset, "Dataset directory or manifest")->required();
  corrupt->add_option("--families", families, "Families to include (default: all)")->delimiter(',');
  corrupt->add_option("--severities", severities, "Severities to include (default: 1-5)")
      ->delimiter(',')
      ->check(CLI::Range(1, kNumSeverities));

  auto* trn = app.add_subcommand("train", "Train the classifier, alone or with the imitator");
  trn->add_option("--dataset", dataset, "Dataset directory or manifest")->required();
  trn->add_option("--ablate", ablate, "Disable feedback, adv, deform or mask")->delimiter(',');
  trn->add_flag("--baseline", baseline, "Clean-only training");

  auto* evl = app.add_subcommand("eval", "Score a classifier checkpoint on a corruption suite");
  evl->add_option("--dataset", dataset, "Dataset directory or manifest")->required();
  evl->add_option("--suite", suite, "Suite directory")->required()->check(CLI::ExistingDirectory);
  evl->add_option("--checkpoint", checkpoint, "Checkpoint file")->required()->check(CLI::ExistingFile);
  evl->add_option("--baseline-errors", baseline_errors, "errors.tsv of the reference method")
      ->check(CLI::ExistingFile);
  evl->add_option("--name", name, "Method name in the summary")->capture_default_str();

  auto* aug = app.add_subcommand("augment", "Run the imitator over clouds");
  aug->add_option("inputs", inputs, "Cloud files")->required()->check(CLI::ExistingFile);
  aug->add_option("--checkpoint", checkpoint, "Checkpoint holding imitator weights (default: fresh init)")
      ->check(CLI::ExistingFile);
  aug->add_option("--mask-mode", mask_mode, "multiply or filter")->capture_default_str();

  auto* rnd = app.add_subcommand("render", "Write orthographic SVG projections");
  rnd->add_option("inputs", inputs, "Cloud files")->required()->check(CLI::ExistingFile);
  rnd->add_option("--views", views, "Projections among xy, xz, yz")->delimiter(',')->capture_default_str();
  rnd->add_option("--color", color, "depth or mask")->capture_default_str();
  rnd->add_option("--mask", masks, "Per-point mask file, one per input")->check(CLI::ExistingFile);

  auto* gc = app.add_subcommand("gradcheck", "Finite-difference check of every gradient");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 2;
  }

  try {
    if (gen->parsed()) return cmd_gen_data(run);
    if (corrupt->parsed()) return cmd_corrupt(run, dataset, families, severities);
    if (trn->parsed()) return cmd_train(run, dataset, ablate, baseline);
    if (evl->parsed()) return cmd_eval(run, dataset, suite, checkpoint, baseline_errors, name);
    if (aug->parsed()) return cmd_augment(run, inputs, checkpoint, mask_mode);
    if (rnd->parsed()) return cmd_render(run, inputs, views, color, masks);
    if (gc->parsed()) return cmd_gradcheck(run);
  } catch (const std::exception& e) {
    std::string what = e.what();
    // The training diagnostic dump spans several lines; the summary comes first.
    if (const auto nl = what.find('\n'); nl != std::string::npos) {
      std::cerr << what.substr(nl + 1) << '\n';
      what.resize(nl);
    }
    std::cerr << "error: " << what << std::endl;
    return 1;
  }
  return 1;
}
