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

#include "adaptpoint/training.hpp"

#include "adaptpoint/errors.hpp"
#include "adaptpoint/nn/checkpoint.hpp"
#include "adaptpoint/nn/ops.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace adaptpoint {

namespace {

constexpr double kGapClamp = 20.0;

// Stream tags for the independent random sources of a run.
constexpr std::uint64_t kInitImitator = 0x1a11;
constexpr std::uint64_t kInitClassifier = 0xc1a5;
constexpr std::uint64_t kInitDiscriminator = 0xd15c;
constexpr std::uint64_t kShuffle = 0x5a0f;
constexpr std::uint64_t kAugment = 0x1317;

double clamp_probability(double p) { return std::clamp(p, kProbabilityClamp, 1.0 - kProbabilityClamp); }

nn::Var mean_of(const std::vector<nn::Var>& terms) {
  nn::Var total = terms.front();
  for (std::size_t i = 1; i < terms.size(); ++i) total = nn::add(total, terms[i]);
  return nn::scale(total, 1.0 / static_cast<double>(terms.size()));
}

int label_of(const PointCloud& c) {
  if (!c.label) throw std::invalid_argument("training sample without a label");
  return *c.label;
}

int argmax_row(const Matrix& logits) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < logits.cols(); ++i) {
    if (logits(0, i) > logits(0, best)) best = i;
  }
  return static_cast<int>(best);
}

std::string checkpoint_name(std::size_t epoch) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "checkpoint_%03zu.ckpt", epoch);
  return buf;
}

}  // namespace

void TrainConfig::validate() const {
  if (!(lambda >= 0.0)) throw std::invalid_argument("train config: lambda must be non-negative");
  if (!(beta_start >= 1.0) || !(beta_end >= beta_start)) {
    throw std::invalid_argument("train config: need 1 <= beta_start <= beta_end");
  }
  if (!(lr_imitator > 0.0) || !(lr_discriminator > 0.0) || !(lr_classifier > 0.0)) {
    throw std::invalid_argument("train config: learning rates must be positive");
  }
  if (batch_size == 0) throw std::invalid_argument("train config: batch size must be positive");
  if (imitator.num_points != classifier.num_points) {
    throw std::invalid_argument("train config: imitator and classifier disagree on N");
  }
  imitator.validate();
  classifier.validate();
}

bool LossReport::finite() const {
  return std::isfinite(lc_clean) && std::isfinite(lc_aug) && std::isfinite(l_feed) && std::isfinite(l_adv) &&
         std::isfinite(l_disc) && std::isfinite(beta);
}

double feedback_loss(double lc_aug, double lc_clean, double beta) {
  const double gap = std::clamp(lc_aug - beta * lc_clean, -kGapClamp, kGapClamp);
  return std::abs(1.0 - std::exp(gap));
}

nn::Var feedback_loss(nn::Var lc_aug, double lc_clean, double beta) {
  const nn::Var gap = nn::clamp(nn::affine(lc_aug, 1.0, -beta * lc_clean), -kGapClamp, kGapClamp);
  return nn::abs(nn::affine(nn::exp(gap), -1.0, 1.0));
}

AdversarialTerms adversarial_losses(double d_on_aug, double d_on_clean) {
  const double a = clamp_probability(d_on_aug);
  const double c = clamp_probability(d_on_clean);
  return {-std::log(a), -(std::log(c) + std::log(1.0 - a)) / 2.0};
}

double beta_at(std::size_t epoch, const TrainConfig& cfg) {
  if (cfg.epochs == 0 || epoch >= cfg.epochs) {
    throw std::out_of_range("beta_at: epoch " + std::to_string(epoch) + " outside [0, " +
                            std::to_string(cfg.epochs) + ")");
  }
  if (cfg.epochs == 1) return cfg.beta_start;
  const double t = static_cast<double>(epoch) / static_cast<double>(cfg.epochs - 1);
  return cfg.beta_start + (cfg.beta_end - cfg.beta_start) * t;
}

Trainer::Trainer(const TrainConfig& cfg, std::size_t num_classes) : cfg_(cfg) {
  cfg_.classifier.num_classes = static_cast<Eigen::Index>(num_classes);
  cfg_.validate();
  RngStream init_i(cfg_.seed, stream_id({kInitImitator}));
  RngStream init_c(cfg_.seed, stream_id({kInitClassifier}));
  RngStream init_d(cfg_.seed, stream_id({kInitDiscriminator}));
  imitator_ = std::make_unique<Imitator>(cfg_.imitator, init_i);
  classifier_ = std::make_unique<PointClassifier>(cfg_.classifier, init_c);
  discriminator_ = std::make_unique<Discriminator>(cfg_.classifier, init_d);
  opt_imitator_ = std::make_unique<nn::Adam>(imitator_->parameters().all(), cfg_.lr_imitator);
  opt_classifier_ = std::make_unique<nn::Adam>(classifier_->parameters().all(), cfg_.lr_classifier);
  opt_discriminator_ = std::make_unique<nn::Adam>(discriminator_->parameters().all(), cfg_.lr_discriminator);
}

std::vector<const nn::Parameter*> Trainer::all_parameters() const {
  std::vector<const nn::Parameter*> out;
  for (const nn::ParameterStore* s : {&imitator_->parameters(), &classifier_->parameters(),
                                      &discriminator_->parameters()}) {
    const auto ps = s->all();
    out.insert(out.end(), ps.begin(), ps.end());
  }
  return out;
}

void Trainer::fail(const std::string& stage, std::span<const PointCloud* const> batch,
                   const LossReport& r) const {
  std::ostringstream os;
  os << "non-finite loss during " << stage << " step\n";
  os << "  lc_clean=" << r.lc_clean << " lc_aug=" << r.lc_aug << " l_feed=" << r.l_feed << " l_adv=" << r.l_adv
     << " l_disc=" << r.l_disc << " beta=" << r.beta << "\n";
  os << "  batch:";
  for (const PointCloud* c : batch) {
    os << " [label=" << c->label.value_or(-1) << " max|p|=" << c->points.cwiseAbs().maxCoeff()
       << " finite=" << c->points.allFinite() << "]";
  }
  os << "\n  parameter norms:";
  for (const nn::Parameter* p : all_parameters()) os << "\n    " << p->name << " " << p->value.norm();
  throw NonFiniteLoss(os.str());
}

LossReport Trainer::baseline_step(std::span<const PointCloud* const> batch) {
  LossReport r;
  r.samples = batch.size();
  nn::Graph g;
  std::vector<nn::Var> ce;
  for (const PointCloud* c : batch) {
    const int label = label_of(*c);
    const nn::Var logits = classifier_->forward(g, g.constant(c->points));
    if (argmax_row(logits.value()) == label) ++r.correct;
    ce.push_back(nn::cross_entropy(logits, std::span<const int>(&label, 1)));
  }
  const nn::Var loss = mean_of(ce);
  r.lc_clean = loss.scalar();
  r.lc_aug = r.lc_clean;
  if (!r.finite()) fail("classifier", batch, r);
  opt_classifier_->zero_grad();
  g.backward(loss);
  opt_classifier_->step();
  return r;
}

LossReport Trainer::train_step(std::span<const PointCloud* const> batch, std::size_t epoch, std::uint64_t batch_id) {
  if (batch.empty()) throw std::invalid_argument("train_step: empty batch");
  if (cfg_.baseline) return baseline_step(batch);

  LossReport r;
  r.samples = batch.size();
  r.beta = beta_at(epoch, cfg_);

  // Clean classifier pass; its graph is reused for the classifier update.
  nn::Graph gc;
  std::vector<nn::Var> ce_clean;
  std::vector<double> lc_clean;
  std::vector<int> labels;
  for (const PointCloud* c : batch) {
    labels.push_back(label_of(*c));
    const nn::Var logits = classifier_->forward(gc, gc.constant(c->points));
    if (argmax_row(logits.value()) == labels.back()) ++r.correct;
    ce_clean.push_back(nn::cross_entropy(logits, std::span<const int>(&labels.back(), 1)));
    lc_clean.push_back(ce_clean.back().scalar());
  }
  const nn::Var clean_loss = mean_of(ce_clean);
  r.lc_clean = clean_loss.scalar();

  if (cfg_.identity_augmentation()) {
    // augmented == clean, so 0.5 * (CE(clean) + CE(aug)) == CE(clean)
    r.lc_aug = r.lc_clean;
    r.l_feed = feedback_loss(r.lc_aug, r.lc_clean, r.beta);
    if (!r.finite()) fail("classifier", batch, r);
    opt_classifier_->zero_grad();
    gc.backward(clean_loss);
    opt_classifier_->step();
    return r;
  }

  nn::Graph gi;
  gi.freeze("classifier.");
  gi.freeze("discriminator.");
  ImitateOptions opts;
  opts.use_deformation = cfg_.use_deformation;
  opts.use_mask = cfg_.use_mask;
  std::vector<ImitatorTrace> traces;
  traces.reserve(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    RngStream rng(cfg_.seed, stream_id({kAugment, batch_id, i}));
    traces.push_back(imitator_->forward(gi, batch[i]->points, rng, opts));
  }

  // (1) discriminator: clean vs. the current augmentations
  if (cfg_.use_adversarial) {
    nn::Graph gd;
    std::vector<nn::Var> terms;
    for (std::size_t i = 0; i < batch.size(); ++i) {
      const nn::Var dc = nn::clamp(discriminator_->forward(gd, gd.constant(batch[i]->points)), kProbabilityClamp,
                                   1.0 - kProbabilityClamp);
      const nn::Var da = nn::clamp(discriminator_->forward(gd, gd.constant(traces[i].output.value())),
                                   kProbabilityClamp, 1.0 - kProbabilityClamp);
      terms.push_back(nn::scale(nn::add(nn::log(dc), nn::log(nn::affine(da, -1.0, 1.0))), -0.5));
    }
    const nn::Var loss = mean_of(terms);
    r.l_disc = loss.scalar();
    if (!std::isfinite(r.l_disc)) fail("discriminator", batch, r);
    opt_discriminator_->zero_grad();
    gd.backward(loss);
    opt_discriminator_->step();
  }

  // (2) imitator: adversarial + lambda * feedback, other players frozen
  std::vector<nn::Var> feed_terms;
  std::vector<nn::Var> adv_terms;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    if (cfg_.use_feedback) {
      const nn::Var logits = classifier_->forward(gi, traces[i].output);
      const nn::Var lc_aug = nn::cross_entropy(logits, std::span<const int>(&labels[i], 1));
      feed_terms.push_back(feedback_loss(lc_aug, lc_clean[i], r.beta));
    }
    if (cfg_.use_adversarial) {
      const nn::Var d = nn::clamp(discriminator_->forward(gi, traces[i].output), kProbabilityClamp,
                                  1.0 - kProbabilityClamp);
      adv_terms.push_back(nn::scale(nn::log(d), -1.0));
    }
  }
  nn::Var imitator_loss;
  if (!feed_terms.empty()) {
    const nn::Var feed = mean_of(feed_terms);
    r.l_feed = feed.scalar();
    imitator_loss = nn::scale(feed, cfg_.lambda);
  }
  if (!adv_terms.empty()) {
    const nn::Var adv = mean_of(adv_terms);
    r.l_adv = adv.scalar();
    imitator_loss = imitator_loss.valid() ? nn::add(imitator_loss, adv) : adv;
  }
  if (!r.finite()) fail("imitator", batch, r);
  if (imitator_loss.valid()) {
    opt_imitator_->zero_grad();
    gi.backward(imitator_loss);
    opt_imitator_->step();
  }

  // (3) classifier on clean and (detached) augmented samples
  std::vector<nn::Var> ce_aug;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const nn::Var logits = classifier_->forward(gc, gc.constant(traces[i].output.value()));
    ce_aug.push_back(nn::cross_entropy(logits, std::span<const int>(&labels[i], 1)));
  }
  const nn::Var aug_loss = mean_of(ce_aug);
  r.lc_aug = aug_loss.scalar();
  if (!cfg_.use_feedback) r.l_feed = feedback_loss(r.lc_aug, r.lc_clean, r.beta);
  if (!r.finite()) fail("classifier", batch, r);
  opt_classifier_->zero_grad();
  gc.backward(nn::scale(nn::add(clean_loss, aug_loss), 0.5));
  opt_classifier_->step();
  return r;
}

std::string metrics_header() { return "epoch\tlc_clean\tlc_aug\tl_feed\tl_adv\tl_disc\tbeta\ttrain_acc"; }

std::string metrics_row(const EpochMetrics& m) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%zu\t%.6f\t%.6f\t%.6f\t%.6f\t%.6f\t%.4f\t%.4f", m.epoch, m.mean.lc_clean,
                m.mean.lc_aug, m.mean.l_feed, m.mean.l_adv, m.mean.l_disc, m.mean.beta, m.train_accuracy);
  return buf;
}

TrainResult train(const std::vector<PointCloud>& train_set, std::size_t num_classes, const TrainConfig& cfg,
                  const TrainOptions& options) {
  if (train_set.empty()) throw std::invalid_argument("train: empty training split");
  TrainResult result;
  result.trainer = std::make_unique<Trainer>(cfg, num_classes);
  Trainer& trainer = *result.trainer;

  const bool write = !options.out_dir.empty();
  std::ofstream log;
  if (write) {
    std::error_code ec;
    std::filesystem::create_directories(options.out_dir, ec);
    if (ec) throw IoError("cannot create " + options.out_dir.string() + ": " + ec.message());
    nn::save_checkpoint((options.out_dir / checkpoint_name(0)).string(), trainer.all_parameters());
    log.open(options.out_dir / kMetricsLogName);
    if (!log) throw IoError("cannot write " + (options.out_dir / kMetricsLogName).string());
    log << metrics_header() << '\n';
  }

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    RngStream shuffle(cfg.seed, stream_id({kShuffle, epoch}));
    const std::vector<std::size_t> order = shuffle.permutation(train_set.size());
    EpochMetrics m;
    m.epoch = epoch + 1;
    for (std::size_t start = 0, b = 0; start < order.size(); start += cfg.batch_size, ++b) {
      std::vector<const PointCloud*> batch;
      for (std::size_t j = start; j < std::min(order.size(), start + cfg.batch_size); ++j) {
        batch.push_back(&train_set[order[j]]);
      }
      const LossReport r = trainer.train_step(batch, epoch, stream_id({epoch, b}));
      const auto w = static_cast<double>(r.samples);
      m.mean.lc_clean += w * r.lc_clean;
      m.mean.lc_aug += w * r.lc_aug;
      m.mean.l_feed += w * r.l_feed;
      m.mean.l_adv += w * r.l_adv;
      m.mean.l_disc += w * r.l_disc;
      m.mean.correct += r.correct;
      m.mean.samples += r.samples;
    }
    const auto n = static_cast<double>(m.mean.samples);
    m.mean.lc_clean /= n;
    m.mean.lc_aug /= n;
    m.mean.l_feed /= n;
    m.mean.l_adv /= n;
    m.mean.l_disc /= n;
    m.mean.beta = cfg.baseline ? 1.0 : beta_at(epoch, cfg);
    m.train_accuracy = static_cast<double>(m.mean.correct) / n;
    result.history.push_back(m);
    if (write) {
      log << metrics_row(m) << '\n' << std::flush;
      nn::save_checkpoint((options.out_dir / checkpoint_name(epoch + 1)).string(), trainer.all_parameters());
    }
    if (options.on_epoch) options.on_epoch(m);
  }
  if (write) {
    nn::save_checkpoint((options.out_dir / kFinalCheckpointName).string(), trainer.all_parameters());
    if (!log) throw IoError("failed writing " + (options.out_dir / kMetricsLogName).string());
  }
  return result;
}

}  // namespace adaptpoint
