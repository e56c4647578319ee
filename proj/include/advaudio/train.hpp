/* Copyright 2026 The advaudio Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "advaudio/adam.hpp"
#include "advaudio/alphabet.hpp"
#include "advaudio/autodiff.hpp"
#include "advaudio/corpus.hpp"
#include "advaudio/ctc.hpp"
#include "advaudio/errors.hpp"
#include "advaudio/model.hpp"

namespace advaudio {

struct TrainConfig {
  int epochs = 30;
  AdamConfig adam{};  // lr 1e-3
  double clip_norm = 5.0;
  double holdout_fraction = 0.1;
  std::uint64_t seed = 1;
  // Optional augmentation: every augment_stride-th training utterance also
  // contributes augment(audio) as an extra example (0 disables).
  std::function<Waveform(const Waveform&)> augment;
  std::size_t augment_stride = 0;
  // Called after every epoch with (epoch, mean training loss).
  std::function<void(int, double)> on_epoch;
};

struct TrainReport {
  std::vector<double> epoch_loss;
  double final_loss = 0.0;
  double train_accuracy = 0.0;
  double heldout_accuracy = 0.0;
  std::size_t n_train = 0;
  std::size_t n_heldout = 0;
};

/// Fraction of utterances whose greedy transcription equals the reference.
inline double exact_match_accuracy(const AcousticModel& model, const Corpus& corpus,
                                   const std::vector<std::size_t>& which) {
  if (which.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i : which) {
    if (model.transcribe(corpus[i].audio) == corpus[i].phrase) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(which.size());
}

/// CTC training with per-utterance Adam updates. Features are computed once
/// up front (no gradient to the audio is needed here). The model's input
/// normalization is fitted on the training split.
inline TrainReport train(AcousticModel& model, const Corpus& corpus, const TrainConfig& cfg) {
  if (corpus.empty()) throw PreconditionError("train: empty corpus");
  if (cfg.holdout_fraction < 0.0 || cfg.holdout_fraction >= 1.0) {
    throw PreconditionError("train: holdout_fraction must be in [0, 1)");
  }
  const Featurizer& fz = model.featurizer();
  std::vector<Tensor> features;
  std::vector<Labels> labels;
  features.reserve(corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto& u = corpus[i];
    Labels l;
    try {
      l = Alphabet::encode(u.phrase);
    } catch (const PreconditionError& e) {
      throw PreconditionError("utterance " + std::to_string(i) + ": " + e.what());
    }
    const std::size_t frames = fz.frame_count(u.audio.size());
    if (!ctc::feasible(l, frames)) {
      throw InfeasibleTargetError("utterance " + std::to_string(i) + " (\"" + u.phrase +
                                  "\") needs " + std::to_string(ctc::required_frames(l)) +
                                  " frames but the audio has " + std::to_string(frames));
    }
    features.push_back(fz.compute(u.audio));
    labels.push_back(std::move(l));
  }

  std::mt19937_64 rng(cfg.seed);
  std::vector<std::size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  const auto n_held = static_cast<std::size_t>(std::floor(cfg.holdout_fraction * corpus.size()));
  std::vector<std::size_t> heldout(order.begin(), order.begin() + n_held);
  std::vector<std::size_t> train_set(order.begin() + n_held, order.end());
  if (train_set.empty()) throw PreconditionError("train: no utterances left after the holdout split");
  std::sort(heldout.begin(), heldout.end());
  std::sort(train_set.begin(), train_set.end());

  // Augmented copies get indices past the corpus and only join the fit set.
  std::vector<std::size_t> fit_set = train_set;
  if (cfg.augment && cfg.augment_stride > 0) {
    for (std::size_t k = 0; k < train_set.size(); k += cfg.augment_stride) {
      const std::size_t i = train_set[k];
      const Waveform a = cfg.augment(corpus[i].audio);
      if (fz.frame_count(a.size()) != features[i].rows()) {
        throw PreconditionError("train: augmentation must preserve the frame count");
      }
      fit_set.push_back(features.size());
      features.push_back(fz.compute(a));
      labels.push_back(labels[i]);
    }
  }

  const std::size_t nc = fz.config().n_coefficients;
  std::vector<double> mean(nc, 0.0), var(nc, 0.0);
  std::size_t rows = 0;
  for (std::size_t i : fit_set) {
    for (std::size_t r = 0; r < features[i].rows(); ++r, ++rows) {
      for (std::size_t c = 0; c < nc; ++c) mean[c] += features[i].at(r, c);
    }
  }
  for (double& m : mean) m /= static_cast<double>(rows);
  for (std::size_t i : fit_set) {
    for (std::size_t r = 0; r < features[i].rows(); ++r) {
      for (std::size_t c = 0; c < nc; ++c) {
        const double d = features[i].at(r, c) - mean[c];
        var[c] += d * d;
      }
    }
  }
  std::vector<double> inv_std(nc);
  for (std::size_t c = 0; c < nc; ++c) {
    inv_std[c] = 1.0 / std::sqrt(var[c] / static_cast<double>(rows) + 1e-12);
  }
  model.set_normalization(mean, inv_std);

  auto& params = model.parameters();
  std::vector<Adam> opt;
  opt.reserve(params.size());
  for (const auto& p : params) opt.emplace_back(cfg.adam, p.value.size());

  TrainReport report;
  report.n_train = train_set.size();
  report.n_heldout = heldout.size();
  std::vector<std::size_t> epoch_order = fit_set;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(epoch_order.begin(), epoch_order.end(), rng);
    double total = 0.0;
    for (std::size_t i : epoch_order) {
      ad::Graph g;
      const auto bound = model.bind(g, true);
      ad::Var logits = model.logits_from_features(g, bound, g.constant(features[i]));
      ad::Var loss = ctc::loss(logits, labels[i]);
      g.backward(loss);
      total += loss.value().item();

      double norm2 = 0.0;
      for (const auto& v : bound.params) {
        for (double x : v.grad().values()) norm2 += x * x;
      }
      const double norm = std::sqrt(norm2);
      const double scale = (cfg.clip_norm > 0.0 && norm > cfg.clip_norm) ? cfg.clip_norm / norm : 1.0;
      for (std::size_t p = 0; p < params.size(); ++p) {
        std::vector<double> grad(bound.params[p].grad().values().begin(),
                                 bound.params[p].grad().values().end());
        if (scale != 1.0) {
          for (double& x : grad) x *= scale;
        }
        opt[p].step(params[p].value.values(), grad);
      }
    }
    const double mean_loss = total / static_cast<double>(epoch_order.size());
    report.epoch_loss.push_back(mean_loss);
    if (cfg.on_epoch) cfg.on_epoch(epoch, mean_loss);
  }
  report.final_loss = report.epoch_loss.empty() ? 0.0 : report.epoch_loss.back();
  report.train_accuracy = exact_match_accuracy(model, corpus, train_set);
  report.heldout_accuracy = exact_match_accuracy(model, corpus, heldout);

  auto& info = model.training_info();
  info.epochs += cfg.epochs;
  info.final_loss = report.final_loss;
  info.train_accuracy = report.train_accuracy;
  info.heldout_accuracy = report.heldout_accuracy;
  info.epoch_loss.insert(info.epoch_loss.end(), report.epoch_loss.begin(), report.epoch_loss.end());
  return report;
}

}  // namespace advaudio
