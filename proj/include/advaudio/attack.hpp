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

// Targeted attacks on the acoustic model.
//
// Every attack optimizes a real-valued perturbation delta with Adam while
// keeping x + delta inside the 16-bit range and |delta_i| <= tau. Whenever
// the current candidate transcribes as the target, it is re-checked after
// rounding to 16-bit integers; only a verified candidate counts as a success.
// On each success tau shrinks to shrink * max|delta| and optimization resumes,
// so the recorded successes get strictly quieter. The quietest one is
// returned.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "advaudio/adam.hpp"
#include "advaudio/alphabet.hpp"
#include "advaudio/audio.hpp"
#include "advaudio/autodiff.hpp"
#include "advaudio/codec.hpp"
#include "advaudio/ctc.hpp"
#include "advaudio/errors.hpp"
#include "advaudio/model.hpp"

namespace advaudio {

inline constexpr int kNonSpeechIterations = 20000;

struct TraceEntry {
  int iteration = 0;
  double loss = 0.0;
  double distortion_db = 0.0;
  std::string transcription;
};

struct AttackConfig {
  double learning_rate = 10.0;
  int max_iterations = 5000;
  double initial_c = 10.0;
  // Without any success after escalation_fraction * max_iterations, c grows
  // by escalation_factor (up to max_c), and again after each further period.
  double max_c = 1e4;
  double escalation_factor = 10.0;
  double escalation_fraction = 0.4;
  double shrink = 0.8;
  DecoderKind decoder = DecoderKind::kGreedy;
  std::size_t beam_width = 8;
  // Margin inside the per-frame hinge losses.
  double kappa = 0.0;
  // Per-frame constants for the hinge attacks.
  int frame_constant_interval = 50;
  double frame_constant_growth = 1.5;
  double frame_constant_decay = 0.95;
  double frame_constant_cap = 1e4;
  // Stop once this many iterations pass without a new success (0: never).
  int patience = 0;
  // Expectation over transforms against additive noise.
  int eot_draws = 16;
  double noise_db = -30.0;
  int eval_draws = 100;
  // Above the usual 90% bar: the tau loop stops right at the threshold of its
  // own verification draws, so fresh draws come out a few points lower.
  double survival_fraction = 0.95;
  int verify_cooldown = 10;
  AdamConfig adam{10.0, 0.9, 0.999, 1e-8};
  std::uint64_t seed = 0;
  int log_every = 100;
  std::function<void(const TraceEntry&)> progress;

  void validate() const {
    if (!(learning_rate > 0.0)) throw PreconditionError("attack: learning_rate must be > 0");
    if (!(shrink > 0.0 && shrink < 1.0)) throw PreconditionError("attack: shrink must be in (0, 1)");
    if (max_iterations < 1) throw PreconditionError("attack: max_iterations must be >= 1");
    if (!(initial_c > 0.0)) throw PreconditionError("attack: initial_c must be > 0");
    if (eot_draws < 1 || eval_draws < 1) throw PreconditionError("attack: draw counts must be >= 1");
    if (beam_width < 1) throw PreconditionError("attack: beam_width must be >= 1");
  }
};

struct AttackResult {
  std::string mode;
  std::string target;
  Waveform adversarial;
  std::vector<double> delta;
  bool success = false;
  std::string transcription;
  // dB_x(delta); -inf when delta is all zero.
  double distortion_db = -std::numeric_limits<double>::infinity();
  int iterations = 0;
  double final_c = 0.0;
  std::vector<TraceEntry> trace;
  // dB of every verified success, in the order they were found.
  std::vector<double> success_distortions;
  // Frame alignment held fixed by the hinge attacks (empty otherwise).
  Labels alignment;
};

// ---------------------------------------------------------------------------
// Losses

/// Per-frame hinge max(max_{k not allowed} z_k - max_{k allowed} z_k + kappa, 0).
/// Shape {N}. Zero on a frame exactly when an allowed token wins by kappa.
inline ad::Var frame_hinge(ad::Var logits, const ad::RowMask& allowed, double kappa = 0.0) {
  ad::RowMask rest(allowed.size());
  for (std::size_t i = 0; i < allowed.size(); ++i) rest[i] = allowed[i] ? 0 : 1;
  ad::Var margin = ad::masked_row_max(logits, rest) - ad::masked_row_max(logits, allowed);
  return ad::max_scalar(ad::add_scalar(margin, kappa), 0.0);
}

inline ad::RowMask alignment_mask(const Labels& alignment, std::size_t classes) {
  ad::RowMask mask(alignment.size() * classes, 0);
  for (std::size_t r = 0; r < alignment.size(); ++r) {
    if (alignment[r] < 0 || static_cast<std::size_t>(alignment[r]) >= classes) {
      throw PreconditionError("alignment token out of range");
    }
    mask[r * classes + static_cast<std::size_t>(alignment[r])] = 1;
  }
  return mask;
}

inline ad::RowMask silence_mask(std::size_t frames, std::size_t classes = Alphabet::kSize) {
  ad::RowMask mask(frames * classes, 0);
  for (std::size_t r = 0; r < frames; ++r) {
    mask[r * classes + Alphabet::kBlank] = 1;
    mask[r * classes + Alphabet::kSpace] = 1;
  }
  return mask;
}

/// max(max_{t' != t} z_t' - z_t + kappa, 0) for one logit row (shape {K} or 1 x K).
inline ad::Var improved_frame_loss(ad::Var row, int target, double kappa = 0.0) {
  const std::size_t k = row.value().size();
  ad::Var r = row.value().rank() == 2 ? row : ad::reshape(row, Shape{1, k});
  return ad::sum(frame_hinge(r, alignment_mask(Labels{target}, k), kappa));
}

/// Per-frame improved losses for a whole alignment, shape {N}.
inline ad::Var improved_frame_losses(ad::Var logits, const Labels& alignment, double kappa = 0.0) {
  if (alignment.size() != logits.value().rows()) {
    throw PreconditionError("alignment length does not match the frame count");
  }
  return frame_hinge(logits, alignment_mask(alignment, logits.value().cols()), kappa);
}

/// Sum over frames of max(max_{t not in {blank, space}} z_t - max_{t in {blank, space}} z_t + kappa, 0).
inline ad::Var silence_loss(ad::Var logits, double kappa = 0.0) {
  return ad::sum(frame_hinge(logits, silence_mask(logits.value().rows(), logits.value().cols()), kappa));
}

/// Rescale per-frame constants: frames whose argmax is not allowed grow
/// (capped), satisfied frames decay (floored at initial_c / 100).
inline std::vector<double> update_frame_constants(std::vector<double> c, const Tensor& logits,
                                                  const ad::RowMask& allowed, double initial_c,
                                                  const AttackConfig& cfg = {}) {
  if (c.size() != logits.rows()) throw PreconditionError("one constant per frame expected");
  const Labels best = ctc::argmax_rows(logits);
  const double floor = initial_c / 100.0;
  for (std::size_t r = 0; r < c.size(); ++r) {
    const bool ok = allowed[r * logits.cols() + static_cast<std::size_t>(best[r])] != 0;
    c[r] = ok ? std::max(c[r] * cfg.frame_constant_decay, floor)
              : std::min(c[r] * cfg.frame_constant_growth, cfg.frame_constant_cap);
  }
  return c;
}

inline std::vector<double> update_frame_constants(std::vector<double> c, const Tensor& logits,
                                                  const Labels& alignment, double initial_c,
                                                  const AttackConfig& cfg = {}) {
  return update_frame_constants(std::move(c), logits, alignment_mask(alignment, logits.cols()),
                                initial_c, cfg);
}

/// Per-frame argmax of f(x0); it must reduce to the greedy transcription.
inline Labels extract_alignment(const AcousticModel& model, const Waveform& x0,
                                const std::string& target) {
  const Labels pi = ctc::argmax_rows(model.logits(x0));
  if (ctc::reduce(pi) != Alphabet::encode(target)) {
    throw PreconditionError("extract_alignment: x0 does not greedily decode to \"" + target + "\"");
  }
  return pi;
}

// ---------------------------------------------------------------------------
// Noise and codec evaluation

/// Gaussian noise whose peak sits exactly `level_db` below the peak of `reference`.
inline std::vector<double> peak_scaled_noise(const Waveform& reference, double level_db,
                                             std::mt19937_64& rng) {
  std::vector<double> g(reference.size(), 0.0);
  if (std::isinf(level_db) && level_db < 0) return g;
  std::normal_distribution<double> gauss(0.0, 1.0);
  double peak = 0.0;
  for (double& v : g) {
    v = gauss(rng);
    peak = std::max(peak, std::fabs(v));
  }
  const double want = reference.peak() * std::pow(10.0, level_db / 20.0);
  if (peak > 0.0) {
    for (double& v : g) v *= want / peak;
  }
  return g;
}

inline Waveform add_noise(const Waveform& x, const std::vector<double>& noise) {
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] + noise[i];
  return clip(Waveform(std::move(out), x.sample_rate()));
}

/// How many of `draws` fresh noisy copies of x_adv still transcribe as target.
inline int noise_survival(const AcousticModel& model, const Waveform& x_adv,
                          const Waveform& reference, const std::string& target, int draws,
                          double level_db, std::mt19937_64& rng,
                          DecoderKind decoder = DecoderKind::kGreedy, std::size_t beam_width = 8) {
  const Labels want = Alphabet::encode(target);
  int ok = 0;
  for (int d = 0; d < draws; ++d) {
    const Waveform noisy = add_noise(x_adv, peak_scaled_noise(reference, level_db, rng));
    if (model.decode(model.logits(noisy), decoder, beam_width) == want) ++ok;
  }
  return ok;
}

namespace attack_detail {

// What a particular attack optimizes and how it decides success.
struct Objective {
  // Adversarial part of the loss for one view, given its logits.
  std::function<ad::Var(ad::Var logits, double c, const std::vector<double>& frame_c)> loss;
  // Cheap test on a view's logits; all views passing makes a candidate.
  std::function<bool(const Tensor& logits)> candidate;
  // Definitive test on the 16-bit quantized waveform.
  std::function<bool(const Waveform& quantized)> verify;
  // Inputs the model actually sees; gradients flow back through each as the
  // identity. Empty means {x_adv}.
  std::function<std::vector<Waveform>(const Waveform& x_adv)> views;
  // Allowed-token mask for per-frame constants; empty disables them.
  ad::RowMask frame_mask;
  DecoderKind decoder = DecoderKind::kGreedy;
};

inline double current_db(const std::vector<double>& delta, const Waveform& x) {
  return db_distortion_or_silent(delta, x.samples());
}

inline AttackResult zero_result(const AcousticModel& model, const Waveform& x, std::string mode,
                                std::string target, DecoderKind decoder, std::size_t beam) {
  AttackResult r;
  r.mode = std::move(mode);
  r.target = std::move(target);
  r.adversarial = x;
  r.delta.assign(x.size(), 0.0);
  r.success = true;
  r.transcription = Alphabet::decode(model.decode(model.logits(x), decoder, beam));
  r.distortion_db = -std::numeric_limits<double>::infinity();
  return r;
}

inline AttackResult optimize(const AcousticModel& model, const Waveform& x,
                             std::vector<double> delta, double tau, const AttackConfig& cfg,
                             const Objective& obj, std::string mode, std::string target) {
  const std::size_t n = x.size();
  const double inv_m2 = 1.0 / (kFullScale * kFullScale);
  const std::size_t frames = model.featurizer().frame_count(n);

  auto project = [&](std::vector<double>& d) {
    for (std::size_t i = 0; i < n; ++i) {
      double v = std::clamp(d[i], -tau, tau);
      d[i] = std::clamp(x[i] + v, kSampleMin, kSampleMax) - x[i];
    }
  };
  auto waveform_of = [&](const std::vector<double>& d) {
    std::vector<double> s(n);
    for (std::size_t i = 0; i < n; ++i) s[i] = x[i] + d[i];
    return Waveform(std::move(s), x.sample_rate());
  };

  project(delta);
  AdamConfig adam_cfg = cfg.adam;
  adam_cfg.learning_rate = cfg.learning_rate;
  Adam adam(adam_cfg, n);
  double c = cfg.initial_c;
  std::vector<double> frame_c(frames, cfg.initial_c);
  const int escalate_every =
      std::max(1, static_cast<int>(std::floor(cfg.escalation_fraction * cfg.max_iterations)));

  AttackResult result;
  result.mode = std::move(mode);
  result.target = std::move(target);
  std::optional<Waveform> best;
  double best_db = std::numeric_limits<double>::infinity();
  int last_success = -1;
  int next_verify = 0;
  std::vector<double> grad(n);
  int it = 0;

  for (; it < cfg.max_iterations; ++it) {
    const Waveform x_adv = waveform_of(delta);
    std::vector<Waveform> views = obj.views ? obj.views(x_adv) : std::vector<Waveform>{x_adv};
    std::fill(grad.begin(), grad.end(), 0.0);
    double adv_loss = 0.0;
    bool all_ok = true;
    Tensor first_logits;
    const double w = 1.0 / static_cast<double>(views.size());
    for (std::size_t v = 0; v < views.size(); ++v) {
      ad::Graph g;
      ad::Var input = g.input(Tensor::vector(views[v].vec()));
      ad::Var logits = model.logits(g, input);
      ad::Var loss = obj.loss(logits, c, frame_c);
      g.backward(loss);
      adv_loss += w * loss.value().item();
      const auto gv = input.grad().values();
      for (std::size_t i = 0; i < n; ++i) grad[i] += w * gv[i];
      all_ok = all_ok && obj.candidate(logits.value());
      if (v == 0) first_logits = logits.value();
    }
    double l2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      l2 += delta[i] * delta[i] * inv_m2;
      grad[i] += 2.0 * delta[i] * inv_m2;
    }

    if (all_ok && it >= next_verify) {
      const Waveform xq = quantize(x_adv);
      if (obj.verify(xq)) {
        const std::vector<double> dq = difference(xq, x);
        const double dbq = current_db(dq, x);
        if (dbq < best_db) {
          best = xq;
          best_db = dbq;
          result.success_distortions.push_back(dbq);
          last_success = it;
          double peak = 0.0;
          for (double v : dq) peak = std::max(peak, std::fabs(v));
          tau = cfg.shrink * peak;
        }
      } else {
        next_verify = it + cfg.verify_cooldown;
      }
    }

    if (cfg.log_every > 0 && (it % cfg.log_every == 0 || it + 1 == cfg.max_iterations)) {
      TraceEntry e{it, l2 + adv_loss, current_db(delta, x),
                   Alphabet::decode(model.decode(first_logits, obj.decoder, cfg.beam_width))};
      if (cfg.progress) cfg.progress(e);
      result.trace.push_back(std::move(e));
    }

    if (!best && (it + 1) % escalate_every == 0) c = std::min(c * cfg.escalation_factor, cfg.max_c);
    if (!obj.frame_mask.empty() && cfg.frame_constant_interval > 0 &&
        (it + 1) % cfg.frame_constant_interval == 0) {
      frame_c = update_frame_constants(std::move(frame_c), first_logits, obj.frame_mask,
                                       cfg.initial_c, cfg);
    }
    if (cfg.patience > 0 && best && it - last_success >= cfg.patience) {
      ++it;
      break;
    }

    adam.step(delta, grad);
    project(delta);
  }

  result.iterations = it;
  result.final_c = c;
  result.adversarial = best ? *best : quantize(waveform_of(delta));
  result.delta = difference(result.adversarial, x);
  result.success = best.has_value();
  result.distortion_db = current_db(result.delta, x);
  const Waveform seen = obj.views ? obj.views(result.adversarial).front() : result.adversarial;
  result.transcription =
      Alphabet::decode(model.decode(model.logits(seen), obj.decoder, cfg.beam_width));
  return result;
}

inline Labels checked_target(const AcousticModel& model, const Waveform& x,
                             const std::string& target) {
  Alphabet::validate_phrase(target);
  if (target.empty()) throw PreconditionError("target phrase is empty; use the silence attack");
  if (x.empty()) throw PreconditionError("source waveform is empty");
  const Labels t = Alphabet::encode(target);
  ctc::require_feasible(t, model.featurizer().frame_count(x.size()));
  return t;
}

inline Objective ctc_objective(const AcousticModel& model, const Labels& t, const AttackConfig& cfg) {
  Objective obj;
  obj.decoder = cfg.decoder;
  obj.loss = [t](ad::Var logits, double c, const std::vector<double>&) {
    return ad::scale(ctc::loss(logits, t), c);
  };
  obj.candidate = [&model, t, cfg](const Tensor& logits) {
    return model.decode(logits, cfg.decoder, cfg.beam_width) == t;
  };
  obj.verify = [&model, t, cfg](const Waveform& xq) {
    return model.decode(model.logits(xq), cfg.decoder, cfg.beam_width) == t;
  };
  return obj;
}

// Hinge objective sum_i c_i * L_i over an allowed-token mask; success is a
// greedy decode accepted by `accept`.
inline Objective hinge_objective(const AcousticModel& model, ad::RowMask mask,
                                 std::function<bool(const Labels&)> accept, const AttackConfig& cfg) {
  Objective obj;
  obj.decoder = DecoderKind::kGreedy;
  obj.frame_mask = mask;
  const double kappa = cfg.kappa;
  obj.loss = [mask, kappa](ad::Var logits, double, const std::vector<double>& frame_c) {
    ad::Var per_frame = frame_hinge(logits, mask, kappa);
    return ad::sum(per_frame * logits.graph().constant(Tensor::vector(frame_c)));
  };
  obj.candidate = [accept](const Tensor& logits) { return accept(ctc::greedy_decode(logits)); };
  obj.verify = [&model, accept](const Waveform& xq) {
    return accept(ctc::greedy_decode(model.logits(xq)));
  };
  return obj;
}

inline constexpr double kUnbounded = kSampleMax - kSampleMin;

}  // namespace attack_detail

// ---------------------------------------------------------------------------
// Attacks

/// minimize |delta/2^15|^2 + c * CTC(f(x + delta), t) with tau-reduction.
inline AttackResult attack_ctc(const AcousticModel& model, const Waveform& x,
                               const std::string& target, const AttackConfig& cfg = {}) {
  cfg.validate();
  const Labels t = attack_detail::checked_target(model, x, target);
  if (model.decode(model.logits(x), cfg.decoder, cfg.beam_width) == t) {
    return attack_detail::zero_result(model, x, "ctc", target, cfg.decoder, cfg.beam_width);
  }
  return attack_detail::optimize(model, x, std::vector<double>(x.size(), 0.0),
                                 attack_detail::kUnbounded, cfg,
                                 attack_detail::ctc_objective(model, t, cfg), "ctc", target);
}

/// Hinge attack toward a fixed frame alignment, starting from delta0.
/// Success means the greedy transcription equals `target`.
inline AttackResult attack_alignment(const AcousticModel& model, const Waveform& x,
                                     const Labels& alignment, const std::string& target,
                                     std::vector<double> delta0, double tau,
                                     const AttackConfig& cfg, std::string mode) {
  cfg.validate();
  const std::size_t frames = model.featurizer().frame_count(x.size());
  if (alignment.size() != frames) {
    throw PreconditionError("alignment has " + std::to_string(alignment.size()) +
                            " tokens for " + std::to_string(frames) + " frames");
  }
  const Labels t = Alphabet::encode(target);
  auto obj = attack_detail::hinge_objective(model, alignment_mask(alignment, Alphabet::kSize),
                                            [t](const Labels& d) { return d == t; }, cfg);
  AttackResult r = attack_detail::optimize(model, x, std::move(delta0), tau, cfg, obj,
                                           std::move(mode), target);
  r.alignment = alignment;
  return r;
}

/// Step 2 of the improved attack, refining a finished attack_ctc result:
/// fix the alignment induced by step1's example and minimize
/// |delta|^2 + sum_i c_i L_i starting from step1's delta. Success is judged
/// with the greedy decoder. Never returns a louder result than step 1.
inline AttackResult attack_two_step(const AcousticModel& model, const Waveform& x,
                                    const std::string& target, const AttackResult& step1,
                                    const AttackConfig& cfg = {}) {
  cfg.validate();
  AttackResult out = step1;
  out.mode = "two-step";
  if (!step1.success || std::isinf(step1.distortion_db)) return out;
  if (step1.delta.size() != x.size()) throw PreconditionError("step-1 result is for another source");

  const Labels pi = ctc::argmax_rows(model.logits(step1.adversarial));
  if (ctc::reduce(pi) != Alphabet::encode(target)) return out;  // beam-only success

  double peak = 0.0;
  for (double v : step1.delta) peak = std::max(peak, std::fabs(v));
  AttackResult step2 = attack_alignment(model, x, pi, target, step1.delta, peak, cfg, "two-step");

  if (step2.success && step2.distortion_db < step1.distortion_db) {
    out.adversarial = step2.adversarial;
    out.delta = step2.delta;
    out.transcription = step2.transcription;
    out.distortion_db = step2.distortion_db;
    out.final_c = step2.final_c;
  }
  out.alignment = pi;
  out.iterations = step1.iterations + step2.iterations;
  for (auto e : step2.trace) {
    e.iteration += step1.iterations;
    out.trace.push_back(std::move(e));
  }
  for (double d : step2.success_distortions) {
    if (d < out.success_distortions.back()) out.success_distortions.push_back(d);
  }
  return out;
}

/// Step 1: CTC attack. Step 2: see above.
inline AttackResult attack_two_step(const AcousticModel& model, const Waveform& x,
                                    const std::string& target, const AttackConfig& cfg = {}) {
  return attack_two_step(model, x, target, attack_ctc(model, x, target, cfg), cfg);
}

/// One character per frame: the target itself is the only alignment.
inline AttackResult attack_dense(const AcousticModel& model, const Waveform& x,
                                 const std::string& target, const AttackConfig& cfg = {}) {
  Alphabet::validate_phrase(target);
  const std::size_t frames = model.featurizer().frame_count(x.size());
  if (target.size() != frames) {
    throw PreconditionError("dense target must have exactly one character per frame: " +
                            std::to_string(target.size()) + " characters for " +
                            std::to_string(frames) + " frames");
  }
  for (std::size_t i = 1; i < target.size(); ++i) {
    if (target[i] == target[i - 1]) {
      throw PreconditionError("dense target repeats '" + std::string(1, target[i]) +
                              "' at position " + std::to_string(i) +
                              "; a repeated character needs a blank frame between, so no "
                              "one-per-frame alignment exists");
    }
  }
  cfg.validate();
  const Labels t = Alphabet::encode(target);
  if (ctc::greedy_decode(model.logits(x)) == t) {
    auto r = attack_detail::zero_result(model, x, "dense", target, DecoderKind::kGreedy, 1);
    r.alignment = t;
    return r;
  }
  return attack_alignment(model, x, t, target, std::vector<double>(x.size(), 0.0),
                          attack_detail::kUnbounded, cfg, "dense");
}

/// Make x transcribe as nothing (only blanks and spaces on every frame).
inline AttackResult attack_silence(const AcousticModel& model, const Waveform& x,
                                   const AttackConfig& cfg = {}) {
  cfg.validate();
  if (x.empty() || x.peak() == 0.0) throw PreconditionError("silence attack needs a nonzero source");
  auto silent = [](const Labels& d) { return is_silent_phrase(Alphabet::decode(d)); };
  if (silent(ctc::greedy_decode(model.logits(x)))) {
    return attack_detail::zero_result(model, x, "silence", "", DecoderKind::kGreedy, 1);
  }
  const std::size_t frames = model.featurizer().frame_count(x.size());
  auto obj = attack_detail::hinge_objective(model, silence_mask(frames), silent, cfg);
  return attack_detail::optimize(model, x, std::vector<double>(x.size(), 0.0),
                                 attack_detail::kUnbounded, cfg, obj, "silence", "");
}

/// CTC attack with expectation over transforms: every step averages the
/// gradient over eot_draws fresh noise draws at noise_db relative to x.
/// Success: at least survival_fraction of eval_draws fresh noisy copies of the
/// quantized result transcribe as target, on two independent batches.
inline AttackResult attack_robust_noise(const AcousticModel& model, const Waveform& x,
                                        const std::string& target, const AttackConfig& cfg = {}) {
  cfg.validate();
  const Labels t = attack_detail::checked_target(model, x, target);
  std::mt19937_64 train_rng(cfg.seed);
  std::mt19937_64 eval_rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  const int need = static_cast<int>(std::ceil(cfg.survival_fraction * cfg.eval_draws));
  // A pass must be confirmed on a second independent batch. The tau loop runs
  // many checks near the boundary and would otherwise keep the lucky ones.
  auto survives = [&](const Waveform& xq) {
    for (int batch = 0; batch < 2; ++batch) {
      if (noise_survival(model, xq, x, target, cfg.eval_draws, cfg.noise_db, eval_rng, cfg.decoder,
                         cfg.beam_width) < need) {
        return false;
      }
    }
    return true;
  };
  if (model.decode(model.logits(x), cfg.decoder, cfg.beam_width) == t && survives(x)) {
    return attack_detail::zero_result(model, x, "robust-noise", target, cfg.decoder, cfg.beam_width);
  }
  auto obj = attack_detail::ctc_objective(model, t, cfg);
  obj.views = [&](const Waveform& x_adv) {
    std::vector<Waveform> v;
    v.reserve(static_cast<std::size_t>(cfg.eot_draws));
    for (int k = 0; k < cfg.eot_draws; ++k) {
      v.push_back(add_noise(x_adv, peak_scaled_noise(x, cfg.noise_db, train_rng)));
    }
    return v;
  };
  obj.verify = survives;
  AttackResult r = attack_detail::optimize(model, x, std::vector<double>(x.size(), 0.0),
                                           attack_detail::kUnbounded, cfg, obj, "robust-noise",
                                           target);
  // Report the clean transcription rather than one noisy draw.
  r.transcription =
      Alphabet::decode(model.decode(model.logits(r.adversarial), cfg.decoder, cfg.beam_width));
  return r;
}

/// CTC attack through a non-differentiable codec: the forward pass sees
/// codec(x + delta), the backward pass treats the codec as the identity.
/// Success: decode(codec(x')) == target.
inline AttackResult attack_through_codec(const AcousticModel& model, const Waveform& x,
                                         const std::string& target, const Codec& codec,
                                         const AttackConfig& cfg = {}) {
  cfg.validate();
  const Labels t = attack_detail::checked_target(model, x, target);
  if (model.decode(model.logits(codec(x)), cfg.decoder, cfg.beam_width) == t) {
    auto r = attack_detail::zero_result(model, x, "robust-codec", target, cfg.decoder, cfg.beam_width);
    r.transcription = target;
    return r;
  }
  auto obj = attack_detail::ctc_objective(model, t, cfg);
  obj.views = [&codec](const Waveform& x_adv) { return std::vector<Waveform>{codec(x_adv)}; };
  obj.verify = [&model, &codec, t, cfg](const Waveform& xq) {
    return model.decode(model.logits(codec(xq)), cfg.decoder, cfg.beam_width) == t;
  };
  return attack_detail::optimize(model, x, std::vector<double>(x.size(), 0.0),
                                 attack_detail::kUnbounded, cfg, obj, "robust-codec", target);
}

// ---------------------------------------------------------------------------
// Single-step baseline and the linearity probe

/// Gradient of CTC(f(x), t) with respect to the samples of x.
inline std::vector<double> ctc_input_gradient(const AcousticModel& model, const Waveform& x,
                                              const Labels& t) {
  ad::Graph g;
  ad::Var input = g.input(Tensor::vector(x.vec()));
  ad::Var loss = ctc::loss(model.logits(g, input), t);
  g.backward(loss);
  const auto gv = input.grad().values();
  return {gv.begin(), gv.end()};
}

inline double ctc_loss_value(const AcousticModel& model, const Waveform& x, const Labels& t) {
  ad::Graph g;
  return ctc::loss(model.logits(g, g.constant(Tensor::vector(x.vec()))), t).value().item();
}

inline double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

/// x' = clip(x - eps * sign(grad_x CTC(f(x), t))).
inline Waveform fgsm(const AcousticModel& model, const Waveform& x, const std::string& target,
                     double eps) {
  const Labels t = attack_detail::checked_target(model, x, target);
  if (eps < 0.0) throw PreconditionError("fgsm: step must be >= 0");
  const std::vector<double> g = ctc_input_gradient(model, x, t);
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] - eps * sign(g[i]);
  return clip(Waveform(std::move(out), x.sample_rate()));
}

struct ProbePoint {
  double alpha = 0.0;
  double loss_adv_dir = 0.0;
  double loss_fgsm_dir = 0.0;
};

/// CTC loss along x + alpha * delta_adv and along the FGSM direction
/// x - alpha * max|delta_adv| * sign(grad), for alpha = 0, 1/steps, ..., 1.
inline std::vector<ProbePoint> interpolation_probe(const AcousticModel& model, const Waveform& x,
                                                   const Waveform& x_adv, const std::string& target,
                                                   int steps) {
  if (steps < 1) throw PreconditionError("probe needs at least one step");
  if (x_adv.size() != x.size()) throw PreconditionError("probe: waveform lengths differ");
  const Labels t = attack_detail::checked_target(model, x, target);
  const std::vector<double> delta = difference(x_adv, x);
  double reach = 0.0;
  for (double v : delta) reach = std::max(reach, std::fabs(v));
  const std::vector<double> g = ctc_input_gradient(model, x, t);

  std::vector<ProbePoint> out;
  out.reserve(static_cast<std::size_t>(steps) + 1);
  for (int s = 0; s <= steps; ++s) {
    const double alpha = static_cast<double>(s) / steps;
    std::vector<double> a(x.size()), f(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      a[i] = s == steps ? x_adv[i] : x[i] + alpha * delta[i];
      f[i] = x[i] - alpha * reach * sign(g[i]);
    }
    out.push_back({alpha, ctc_loss_value(model, Waveform(std::move(a), x.sample_rate()), t),
                   ctc_loss_value(model, clip(Waveform(std::move(f), x.sample_rate())), t)});
  }
  return out;
}

}  // namespace advaudio
