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

// Synthetic "toy speech": every letter is a 100 ms two-tone burst with its own
// frequency pair, a space is a stretch of low-level noise. Small enough that a
// tiny LSTM learns it in minutes, but still real audio that has to pass
// through the MFC front end.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "advaudio/alphabet.hpp"
#include "advaudio/audio.hpp"
#include "advaudio/errors.hpp"
#include "advaudio/featurizer.hpp"

namespace advaudio {

struct Utterance {
  Waveform audio;
  std::string phrase;
};

using Corpus = std::vector<Utterance>;

struct SynthConfig {
  int sample_rate = 16000;
  double char_seconds = 0.1;
  double amplitude = 0.3 * 32767.0;
  // Background noise level relative to amplitude, drawn per utterance from
  // [noise_db - noise_spread_db, noise_db].
  double noise_db = -30.0;
  double noise_spread_db = 25.0;
  double space_level = 0.05;        // std of space noise as a fraction of amplitude
  double ramp_seconds = 0.01;       // raised-cosine onset/offset per letter
  double tone_low_hz = 250.0;
  double tone_high_hz = 1800.0;
  std::size_t tone_count = 12;
  std::uint64_t voice_seed = 2018;  // fixes the letter -> tone-pair table
};

/// Letter -> (low, high) tone frequencies. Tones are spaced evenly on the mel
/// scale; pairs are assigned by a seeded shuffle of all distinct pairs.
class ToneTable {
 public:
  explicit ToneTable(const SynthConfig& cfg = {}) {
    std::vector<double> tones(cfg.tone_count);
    const double lo = hz_to_mel(cfg.tone_low_hz), hi = hz_to_mel(cfg.tone_high_hz);
    for (std::size_t i = 0; i < tones.size(); ++i) {
      tones[i] = mel_to_hz(lo + (hi - lo) * static_cast<double>(i) /
                                    static_cast<double>(tones.size() - 1));
    }
    std::vector<std::pair<double, double>> pairs;
    for (std::size_t a = 0; a < tones.size(); ++a) {
      for (std::size_t b = a + 1; b < tones.size(); ++b) pairs.emplace_back(tones[a], tones[b]);
    }
    if (pairs.size() < 26) throw PreconditionError("tone table: need at least 26 tone pairs");
    std::mt19937_64 rng(cfg.voice_seed);
    std::shuffle(pairs.begin(), pairs.end(), rng);
    std::copy_n(pairs.begin(), 26, table_.begin());
  }

  std::pair<double, double> pair(char letter) const {
    if (!Alphabet::is_letter(letter)) throw PreconditionError("tone table covers letters only");
    return table_[static_cast<std::size_t>(letter - 'a')];
  }

 private:
  std::array<std::pair<double, double>, 26> table_{};
};

/// Render one phrase. Output is integer-valued (already 16-bit quantized).
inline Waveform render_phrase(const std::string& phrase, const ToneTable& tones,
                              std::mt19937_64& rng, const SynthConfig& cfg = {}) {
  Alphabet::validate_phrase(phrase);
  const auto unit = static_cast<std::size_t>(std::lround(cfg.char_seconds * cfg.sample_rate));
  const auto ramp = static_cast<std::size_t>(std::lround(cfg.ramp_seconds * cfg.sample_rate));
  std::vector<double> s(unit * phrase.size(), 0.0);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  std::uniform_real_distribution<double> gain(0.8, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  for (std::size_t c = 0; c < phrase.size(); ++c) {
    double* out = s.data() + c * unit;
    if (phrase[c] == ' ') {
      const double sd = cfg.space_level * cfg.amplitude;
      for (std::size_t i = 0; i < unit; ++i) out[i] = sd * gauss(rng);
      continue;
    }
    const auto [f1, f2] = tones.pair(phrase[c]);
    const double p1 = phase(rng), p2 = phase(rng), g1 = gain(rng), g2 = gain(rng);
    for (std::size_t i = 0; i < unit; ++i) {
      const double t = static_cast<double>(i) / cfg.sample_rate;
      double env = 1.0;
      if (i < ramp) env = 0.5 - 0.5 * std::cos(std::numbers::pi * static_cast<double>(i) / ramp);
      if (unit - 1 - i < ramp) {
        env = 0.5 - 0.5 * std::cos(std::numbers::pi * static_cast<double>(unit - 1 - i) / ramp);
      }
      const double tone = 0.5 * g1 * std::sin(2.0 * std::numbers::pi * f1 * t + p1) +
                          0.5 * g2 * std::sin(2.0 * std::numbers::pi * f2 * t + p2);
      out[i] = cfg.amplitude * env * tone;
    }
  }
  std::uniform_real_distribution<double> level(cfg.noise_db - cfg.noise_spread_db, cfg.noise_db);
  const double noise_sd = cfg.amplitude * std::pow(10.0, level(rng) / 20.0);
  for (double& v : s) v += noise_sd * gauss(rng);
  return quantize(Waveform(std::move(s), cfg.sample_rate));
}

/// One waveform per phrase, all drawn from a single seeded stream.
inline Corpus synth_corpus(const std::vector<std::string>& phrases, std::uint64_t seed,
                           const SynthConfig& cfg = {}) {
  if (phrases.empty()) throw PreconditionError("synth_corpus: empty phrase list");
  const ToneTable tones(cfg);
  std::mt19937_64 rng(seed);
  Corpus corpus;
  corpus.reserve(phrases.size());
  for (const auto& p : phrases) {
    if (p.empty()) throw PreconditionError("synth_corpus: empty phrase");
    corpus.push_back({render_phrase(p, tones, rng, cfg), p});
  }
  return corpus;
}

/// Random phrases over [a-z ] with lengths in [min_len, max_len]. No two
/// neighbouring characters are equal and spaces are interior only, so every
/// phrase reads unambiguously at one character per 100 ms.
inline std::vector<std::string> random_phrases(std::size_t count, std::size_t min_len,
                                               std::size_t max_len, std::uint64_t seed,
                                               double space_probability = 0.15) {
  if (min_len == 0 || max_len < min_len) {
    throw PreconditionError("random_phrases: need 1 <= min_len <= max_len");
  }
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> length(min_len, max_len);
  std::uniform_int_distribution<int> letter(0, 25);
  std::bernoulli_distribution space(space_probability);
  std::vector<std::string> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t n = length(rng);
    std::string p;
    while (p.size() < n) {
      const bool interior = !p.empty() && p.size() + 1 < n && p.back() != ' ';
      char c = (interior && space(rng)) ? ' ' : static_cast<char>('a' + letter(rng));
      if (!p.empty() && c == p.back()) continue;
      p.push_back(c);
    }
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace advaudio
