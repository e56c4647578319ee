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

// Connectionist temporal classification over an alphabet whose last column
// is the blank token.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "advaudio/alphabet.hpp"
#include "advaudio/autodiff.hpp"
#include "advaudio/errors.hpp"
#include "advaudio/tensor.hpp"

namespace advaudio::ctc {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

inline double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(-std::fabs(a - b)));
}

/// Collapse repeated tokens, then drop blanks.
inline Labels reduce(const Labels& alignment, int blank = Alphabet::kBlank) {
  Labels out;
  for (std::size_t i = 0; i < alignment.size(); ++i) {
    if (i > 0 && alignment[i] == alignment[i - 1]) continue;
    if (alignment[i] != blank) out.push_back(alignment[i]);
  }
  return out;
}

/// Shortest alignment length for a phrase: one frame per token plus a
/// separating blank between equal neighbours.
inline std::size_t required_frames(const Labels& phrase) {
  std::size_t n = phrase.size();
  for (std::size_t i = 1; i < phrase.size(); ++i) {
    if (phrase[i] == phrase[i - 1]) ++n;
  }
  return n;
}

inline bool feasible(const Labels& phrase, std::size_t frames) {
  return required_frames(phrase) <= frames;
}

inline void require_feasible(const Labels& phrase, std::size_t frames) {
  if (!feasible(phrase, frames)) {
    throw InfeasibleTargetError("target needs at least " + std::to_string(required_frames(phrase)) +
                                " frames (" + std::to_string(phrase.size()) +
                                " tokens plus a blank between each repeated pair) but only " +
                                std::to_string(frames) + " are available");
  }
}

inline Labels argmax_rows(const Tensor& m) {
  Labels out(m.rows());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto row = m.row(r);
    out[r] = static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
  }
  return out;
}

/// Row-wise log-softmax of a plain matrix.
inline Tensor log_softmax_rows(const Tensor& logits) {
  Tensor out(logits.shape());
  for (std::size_t r = 0; r < logits.rows(); ++r) {
    auto in = logits.row(r);
    const double m = *std::max_element(in.begin(), in.end());
    double z = 0.0;
    for (double v : in) z += std::exp(v - m);
    const double lz = m + std::log(z);
    for (std::size_t k = 0; k < in.size(); ++k) out.at(r, k) = in[k] - lz;
  }
  return out;
}

inline Tensor softmax_rows(const Tensor& logits) {
  Tensor out = log_softmax_rows(logits);
  for (double& v : out.values()) v = std::exp(v);
  return out;
}

/// Pr(pi | y) = prod_i y[i, pi_i]. `probs` is N x K.
inline double alignment_prob(const Labels& alignment, const Tensor& probs) {
  if (alignment.size() != probs.rows()) {
    throw PreconditionError("alignment has " + std::to_string(alignment.size()) +
                            " tokens for " + std::to_string(probs.rows()) + " frames");
  }
  double p = 1.0;
  for (std::size_t i = 0; i < alignment.size(); ++i) {
    p *= probs.at(i, static_cast<std::size_t>(alignment[i]));
  }
  return p;
}

/// Exhaustive list of length-N alignments reducing to `phrase`, by brute force
/// over all K^N sequences. Test oracle only.
inline std::vector<Labels> enumerate_alignments(const Labels& phrase, std::size_t frames,
                                                std::size_t alphabet_size) {
  constexpr std::size_t kMaxFrames = 8;
  constexpr double kMaxSequences = 390625.0;  // 5^8
  if (frames > kMaxFrames ||
      std::pow(static_cast<double>(alphabet_size), static_cast<double>(frames)) > kMaxSequences) {
    throw PreconditionError("enumerate_alignments: " + std::to_string(alphabet_size) + "^" +
                            std::to_string(frames) + " sequences exceeds the exhaustive-search guard");
  }
  const int blank = static_cast<int>(alphabet_size) - 1;
  std::vector<Labels> out;
  Labels seq(frames, 0);
  while (true) {
    if (reduce(seq, blank) == phrase) out.push_back(seq);
    std::size_t i = 0;
    while (i < frames && ++seq[i] == static_cast<int>(alphabet_size)) seq[i++] = 0;
    if (i == frames) break;
  }
  return out;
}

namespace detail {

// Blank-interleaved label sequence: _ p1 _ p2 _ ... pL _
inline Labels extend(const Labels& phrase, int blank) {
  Labels ext(2 * phrase.size() + 1, blank);
  for (std::size_t i = 0; i < phrase.size(); ++i) ext[2 * i + 1] = phrase[i];
  return ext;
}

inline bool can_skip(const Labels& ext, std::size_t s, int blank) {
  return s >= 2 && ext[s] != blank && ext[s] != ext[s - 2];
}

// alpha[t][s]: log-probability of all prefixes of length t+1 ending in ext[s].
inline std::vector<double> forward(const Tensor& logp, const Labels& ext, int blank) {
  const std::size_t n = logp.rows(), s_len = ext.size();
  std::vector<double> alpha(n * s_len, kNegInf);
  if (n == 0) return alpha;
  alpha[0] = logp.at(0, static_cast<std::size_t>(ext[0]));
  if (s_len > 1) alpha[1] = logp.at(0, static_cast<std::size_t>(ext[1]));
  for (std::size_t t = 1; t < n; ++t) {
    for (std::size_t s = 0; s < s_len; ++s) {
      double a = alpha[(t - 1) * s_len + s];
      if (s >= 1) a = log_add(a, alpha[(t - 1) * s_len + s - 1]);
      if (can_skip(ext, s, blank)) a = log_add(a, alpha[(t - 1) * s_len + s - 2]);
      if (a != kNegInf) alpha[t * s_len + s] = a + logp.at(t, static_cast<std::size_t>(ext[s]));
    }
  }
  return alpha;
}

// beta[t][s]: log-probability of emitting frames t+1..N-1 given ext[s] at t.
inline std::vector<double> backward(const Tensor& logp, const Labels& ext, int blank) {
  const std::size_t n = logp.rows(), s_len = ext.size();
  std::vector<double> beta(n * s_len, kNegInf);
  if (n == 0) return beta;
  beta[(n - 1) * s_len + s_len - 1] = 0.0;
  if (s_len > 1) beta[(n - 1) * s_len + s_len - 2] = 0.0;
  for (std::size_t t = n - 1; t-- > 0;) {
    for (std::size_t s = 0; s < s_len; ++s) {
      double b = kNegInf;
      for (std::size_t step = 0; step <= 2; ++step) {
        const std::size_t s2 = s + step;
        if (s2 >= s_len) break;
        if (step == 2 && !can_skip(ext, s2, blank)) continue;
        const double next = beta[(t + 1) * s_len + s2];
        if (next == kNegInf) continue;
        b = log_add(b, next + logp.at(t + 1, static_cast<std::size_t>(ext[s2])));
      }
      beta[t * s_len + s] = b;
    }
  }
  return beta;
}

inline double total(const std::vector<double>& alpha, std::size_t n, std::size_t s_len) {
  if (n == 0) return s_len == 1 ? 0.0 : kNegInf;
  double z = alpha[(n - 1) * s_len + s_len - 1];
  if (s_len > 1) z = log_add(z, alpha[(n - 1) * s_len + s_len - 2]);
  return z;
}

}  // namespace detail

/// log Pr(phrase | y) by the forward recursion, from per-frame log-probabilities.
/// Returns -inf when no alignment of this length exists.
inline double phrase_log_prob_from_log(const Labels& phrase, const Tensor& logp) {
  const int blank = static_cast<int>(logp.cols()) - 1;
  if (!feasible(phrase, logp.rows())) return kNegInf;
  const Labels ext = detail::extend(phrase, blank);
  return detail::total(detail::forward(logp, ext, blank), logp.rows(), ext.size());
}

/// Pr(phrase | y) with `probs` the softmaxed N x K output.
inline double phrase_prob(const Labels& phrase, const Tensor& probs) {
  Tensor logp(probs.shape());
  for (std::size_t i = 0; i < probs.size(); ++i) logp[i] = std::log(probs[i]);
  return std::exp(phrase_log_prob_from_log(phrase, logp));
}

/// CTC negative log-likelihood of `phrase` under softmax(logits), as a graph
/// node. Gradient w.r.t. the logits is softmax - occupancy, from the
/// forward-backward recursions.
inline ad::Var loss(ad::Var logits, const Labels& phrase) {
  const Tensor& z = logits.value();
  if (z.rank() != 2) throw ShapeError("ctc loss: logits must be N x K, got " + shape_string(z.shape()));
  require_feasible(phrase, z.rows());
  const int blank = static_cast<int>(z.cols()) - 1;
  for (int t : phrase) {
    if (t < 0 || t >= blank) throw PreconditionError("ctc loss: phrase token out of range");
  }
  Tensor logp = log_softmax_rows(z);
  const Labels ext = detail::extend(phrase, blank);
  std::vector<double> alpha = detail::forward(logp, ext, blank);
  const double log_z = detail::total(alpha, z.rows(), ext.size());
  if (log_z == kNegInf) {
    throw NonFiniteError("ctc loss underflowed to zero probability for a feasible target");
  }
  return logits.graph().record(
      "ctc_loss", Tensor::scalar(-log_z), {logits},
      [logp = std::move(logp), ext, alpha = std::move(alpha), log_z, blank](ad::BackwardContext& c) {
        const std::size_t n = logp.rows(), k = logp.cols(), s_len = ext.size();
        const std::vector<double> beta = detail::backward(logp, ext, blank);
        const double g = c.out_grad[0];
        Tensor& gz = *c.in_grad[0];
        std::vector<double> occ(k);
        for (std::size_t t = 0; t < n; ++t) {
          std::fill(occ.begin(), occ.end(), 0.0);
          for (std::size_t s = 0; s < s_len; ++s) {
            const double a = alpha[t * s_len + s], b = beta[t * s_len + s];
            if (a == kNegInf || b == kNegInf) continue;
            occ[static_cast<std::size_t>(ext[s])] += std::exp(a + b - log_z);
          }
          for (std::size_t j = 0; j < k; ++j) {
            gz[t * k + j] += g * (std::exp(logp.at(t, j)) - occ[j]);
          }
        }
      });
}

/// reduce(argmax per frame); ties go to the lowest token index.
inline Labels greedy_decode(const Tensor& logits) {
  return reduce(argmax_rows(logits), static_cast<int>(logits.cols()) - 1);
}

/// Prefix beam search. Alignments that reduce to the same prefix are merged
/// (blank-ending and non-blank-ending mass tracked separately). The greedy
/// phrase is added to the final candidates, and candidates are ranked by their
/// exact phrase probability, so the result never scores below greedy.
inline Labels beam_decode(const Tensor& logits, std::size_t beam_width) {
  if (beam_width == 0) throw PreconditionError("beam width must be at least 1");
  const Tensor logp = log_softmax_rows(logits);
  const std::size_t n = logp.rows(), k = logp.cols();
  const int blank = static_cast<int>(k) - 1;

  struct Mass {
    double blank = kNegInf;
    double label = kNegInf;
    double total() const { return log_add(blank, label); }
  };
  using Beam = std::map<Labels, Mass>;

  auto prune = [beam_width](const Beam& all) {
    std::vector<std::pair<const Labels*, double>> order;
    order.reserve(all.size());
    for (const auto& [prefix, m] : all) order.emplace_back(&prefix, m.total());
    std::stable_sort(order.begin(), order.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    Beam kept;
    for (std::size_t i = 0; i < order.size() && i < beam_width; ++i) {
      kept.emplace(*order[i].first, all.at(*order[i].first));
    }
    return kept;
  };

  Beam beam;
  beam[Labels{}] = Mass{0.0, kNegInf};
  for (std::size_t t = 0; t < n; ++t) {
    Beam next;
    for (const auto& [prefix, m] : beam) {
      const double all = m.total();
      Mass& same = next[prefix];
      same.blank = log_add(same.blank, all + logp.at(t, static_cast<std::size_t>(blank)));
      if (!prefix.empty()) {
        // Repeating the last token without a blank stays on the same prefix.
        const double lp = logp.at(t, static_cast<std::size_t>(prefix.back()));
        same.label = log_add(same.label, m.label + lp);
      }
      for (int c = 0; c < blank; ++c) {
        const double lp = logp.at(t, static_cast<std::size_t>(c));
        Labels extended = prefix;
        extended.push_back(c);
        Mass& ext = next[extended];
        const double from = (!prefix.empty() && prefix.back() == c) ? m.blank : all;
        ext.label = log_add(ext.label, from + lp);
      }
    }
    beam = prune(next);
  }

  std::vector<Labels> candidates;
  {
    std::vector<std::pair<const Labels*, double>> order;
    for (const auto& [prefix, m] : beam) order.emplace_back(&prefix, m.total());
    std::stable_sort(order.begin(), order.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    for (const auto& o : order) candidates.push_back(*o.first);
  }
  candidates.push_back(greedy_decode(logits));

  Labels best;
  double best_score = kNegInf;
  bool have = false;
  for (const Labels& c : candidates) {
    const double s = phrase_log_prob_from_log(c, logp);
    if (!have || s > best_score) {
      best = c;
      best_score = s;
      have = true;
    }
  }
  return best;
}

}  // namespace advaudio::ctc
