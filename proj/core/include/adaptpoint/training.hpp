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

#include "adaptpoint/data_io.hpp"
#include "adaptpoint/imitator.hpp"
#include "adaptpoint/models.hpp"
#include "adaptpoint/nn/optim.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace adaptpoint {

struct TrainConfig {
  double lambda = 1.0;
  double beta_start = 1.0;
  double beta_end = 2.0;
  double lr_imitator = 1e-4;
  double lr_discriminator = 4e-4;
  double lr_classifier = 2e-3;
  std::size_t epochs = 30;
  std::size_t batch_size = 16;
  std::uint64_t seed = 0;
  bool use_feedback = true;
  bool use_adversarial = true;
  bool use_deformation = true;
  bool use_mask = true;
  /// Clean-only classifier training; no imitator or discriminator updates.
  bool baseline = false;
  ImitatorConfig imitator;
  ClassifierConfig classifier;

  void validate() const;
  /// True when the augmentation pipeline reduces to the identity.
  bool identity_augmentation() const { return !use_deformation && !use_mask; }
};

/// Batch means of every loss term.
struct LossReport {
  double lc_clean = 0.0;
  double lc_aug = 0.0;
  double l_feed = 0.0;
  double l_adv = 0.0;
  double l_disc = 0.0;
  double beta = 1.0;
  std::size_t correct = 0;  // clean training predictions
  std::size_t samples = 0;

  bool finite() const;
};

/// |1 - exp(g)| with g = lc_aug - beta * lc_clean clamped to [-20, 20].
double feedback_loss(double lc_aug, double lc_clean, double beta);
/// Differentiable in lc_aug; lc_clean enters as a constant.
nn::Var feedback_loss(nn::Var lc_aug, double lc_clean, double beta);

inline constexpr double kProbabilityClamp = 1e-7;

struct AdversarialTerms {
  double imitator = 0.0;       // -log D(aug)
  double discriminator = 0.0;  // -[log D(clean) + log(1 - D(aug))] / 2
};
/// Non-saturating split; probabilities are clamped to [1e-7, 1 - 1e-7].
AdversarialTerms adversarial_losses(double d_on_aug, double d_on_clean);

/// Linear from beta_start at epoch 0 to beta_end at the last epoch.
double beta_at(std::size_t epoch, const TrainConfig& cfg);

/// Raised when a step produces a NaN or infinite loss. `what()` carries the
/// diagnostic dump.
class NonFiniteLoss : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The three co-trained networks and their optimizers.
class Trainer {
 public:
  Trainer(const TrainConfig& cfg, std::size_t num_classes);

  /// One step on a batch: (1) discriminator on clean vs. augmented, (2)
  /// imitator on the adversarial and feedback terms, (3) classifier on the
  /// mean of the clean and augmented cross entropies. `batch_id` selects the
  /// random streams of the augmentation noise.
  LossReport train_step(std::span<const PointCloud* const> batch, std::size_t epoch, std::uint64_t batch_id);

  const TrainConfig& config() const { return cfg_; }
  Imitator& imitator() { return *imitator_; }
  PointClassifier& classifier() { return *classifier_; }
  Discriminator& discriminator() { return *discriminator_; }
  const Imitator& imitator() const { return *imitator_; }
  const PointClassifier& classifier() const { return *classifier_; }
  const Discriminator& discriminator() const { return *discriminator_; }

  /// Every parameter of the three networks, in a fixed order.
  std::vector<const nn::Parameter*> all_parameters() const;

 private:
  LossReport baseline_step(std::span<const PointCloud* const> batch);
  [[noreturn]] void fail(const std::string& stage, std::span<const PointCloud* const> batch,
                         const LossReport& report) const;

  TrainConfig cfg_;
  std::unique_ptr<Imitator> imitator_;
  std::unique_ptr<PointClassifier> classifier_;
  std::unique_ptr<Discriminator> discriminator_;
  std::unique_ptr<nn::Adam> opt_imitator_;
  std::unique_ptr<nn::Adam> opt_classifier_;
  std::unique_ptr<nn::Adam> opt_discriminator_;
};

struct EpochMetrics {
  std::size_t epoch = 0;  // 1-based
  LossReport mean;
  double train_accuracy = 0.0;
};

struct TrainOptions {
  /// When set, checkpoints and the metrics log are written here.
  std::filesystem::path out_dir;
  /// Called after every epoch.
  std::function<void(const EpochMetrics&)> on_epoch;
};

struct TrainResult {
  std::unique_ptr<Trainer> trainer;
  std::vector<EpochMetrics> history;
};

inline constexpr std::string_view kMetricsLogName = "metrics.tsv";
inline constexpr std::string_view kFinalCheckpointName = "final.ckpt";

/// Runs cfg.epochs epochs over the training split. With an output directory
/// it writes checkpoint_000.ckpt (initial weights), one checkpoint per epoch,
/// final.ckpt and metrics.tsv.
TrainResult train(const std::vector<PointCloud>& train_set, std::size_t num_classes, const TrainConfig& cfg,
                  const TrainOptions& options = {});

/// Header line and one row of the metrics log.
std::string metrics_header();
std::string metrics_row(const EpochMetrics& m);

}  // namespace adaptpoint
