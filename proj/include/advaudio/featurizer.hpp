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

#include <cmath>
#include <cstddef>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

#include "advaudio/audio.hpp"
#include "advaudio/autodiff.hpp"
#include "advaudio/errors.hpp"
#include "advaudio/tensor.hpp"

namespace advaudio {

struct FeatureConfig {
  int sample_rate = 16000;
  std::size_t window_len = 512;
  std::size_t hop = 320;  // 50 frames per second at 16 kHz
  std::size_t n_mel_filters = 26;
  std::size_t n_coefficients = 13;
  double log_floor = 1e-8;

  void validate() const {
    if (sample_rate <= 0 || hop == 0 || hop * 50 != static_cast<std::size_t>(sample_rate)) {
      throw PreconditionError("feature config: hop * 50 must equal the sample rate");
    }
    if (window_len < hop) throw PreconditionError("feature config: window_len < hop");
    if (window_len % 2 != 0) throw PreconditionError("feature config: window_len must be even");
    if (n_coefficients == 0 || n_coefficients > n_mel_filters) {
      throw PreconditionError("feature config: need 1 <= n_coefficients <= n_mel_filters");
    }
    if (!(log_floor > 0.0)) throw PreconditionError("feature config: log_floor must be > 0");
  }

  std::size_t n_bins() const { return window_len / 2 + 1; }

  friend bool operator==(const FeatureConfig&, const FeatureConfig&) = default;
};

inline double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
inline double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

/// Index into [0, n) for a position that may fall outside it, mirroring about
/// the end samples without repeating them (numpy "reflect"). Works for any
/// offset, including signals shorter than the pad.
inline std::size_t reflect_index(std::ptrdiff_t i, std::size_t n) {
  if (n == 1) return 0;
  const auto period = static_cast<std::ptrdiff_t>(2 * (n - 1));
  std::ptrdiff_t m = i % period;
  if (m < 0) m += period;
  if (m >= static_cast<std::ptrdiff_t>(n)) m = period - m;
  return static_cast<std::size_t>(m);
}

/// Waveform -> MFC frames, built from graph ops so gradients reach the samples.
///
///   samples / 2^15 -> reflect pad by window/2 -> Hann-windowed frames
///   -> |DFT|^2 (dense cos/sin matrices) -> triangular mel filterbank
///   -> log(. + log_floor) -> orthonormal DCT-II, first n_coefficients.
class Featurizer {
 public:
  explicit Featurizer(FeatureConfig cfg = {}) : cfg_(cfg) {
    cfg_.validate();
    build();
  }

  const FeatureConfig& config() const { return cfg_; }

  std::size_t frame_count(std::size_t n_samples) const {
    return (n_samples + cfg_.hop - 1) / cfg_.hop;
  }

  /// samples: shape {L}. Returns N x window_len Hann-windowed frames in
  /// full-scale units.
  ad::Var frame(ad::Var samples) const {
    const std::size_t len = samples.value().size();
    if (len == 0) throw PreconditionError("cannot frame an empty waveform");
    const std::size_t n = frame_count(len);
    const std::size_t w = cfg_.window_len;
    const auto pad = static_cast<std::ptrdiff_t>(w / 2);
    auto index = std::make_shared<std::vector<std::size_t>>(n * w);
    auto weights = std::make_shared<std::vector<double>>(n * w);
    for (std::size_t f = 0; f < n; ++f) {
      const auto start = static_cast<std::ptrdiff_t>(f * cfg_.hop) - pad;
      for (std::size_t k = 0; k < w; ++k) {
        (*index)[f * w + k] = reflect_index(start + static_cast<std::ptrdiff_t>(k), len);
        (*weights)[f * w + k] = window_[k] / kFullScale;
      }
    }
    return ad::gather(samples, index, weights, Shape{n, w});
  }

  ad::Var power_spectrum(ad::Var windows) const {
    ad::Graph& g = windows.graph();
    ad::Var re = ad::matmul(windows, g.constant(dft_cos_));
    ad::Var im = ad::matmul(windows, g.constant(dft_sin_));
    return ad::square(re) + ad::square(im);
  }

  ad::Var mel_energies(ad::Var windows) const {
    return ad::matmul(power_spectrum(windows), windows.graph().constant(filterbank_));
  }

  ad::Var mfc(ad::Var windows) const {
    ad::Var logmel = ad::log(ad::add_scalar(mel_energies(windows), cfg_.log_floor));
    return ad::matmul(logmel, windows.graph().constant(dct_));
  }

  ad::Var features(ad::Var samples) const { return mfc(frame(samples)); }

  Tensor compute(const Waveform& x) const {
    ad::Graph g;
    return features(g.constant(Tensor::vector(x.vec()))).value();
  }

  /// n_bins x n_mel_filters.
  const Tensor& filterbank() const { return *filterbank_; }
  const std::vector<double>& window() const { return window_; }

 private:
  void build() {
    const std::size_t w = cfg_.window_len, bins = cfg_.n_bins();
    window_.resize(w);
    for (std::size_t k = 0; k < w; ++k) {
      window_[k] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(k) /
                                        static_cast<double>(w));
    }

    Tensor c(Shape{w, bins}), s(Shape{w, bins});
    for (std::size_t n = 0; n < w; ++n) {
      for (std::size_t k = 0; k < bins; ++k) {
        // n*k mod w keeps the angle small so large windows stay accurate.
        const double phase = 2.0 * std::numbers::pi * static_cast<double>((n * k) % w) /
                             static_cast<double>(w);
        c.at(n, k) = std::cos(phase);
        s.at(n, k) = -std::sin(phase);
      }
    }
    dft_cos_ = std::make_shared<const Tensor>(std::move(c));
    dft_sin_ = std::make_shared<const Tensor>(std::move(s));

    const std::size_t m = cfg_.n_mel_filters;
    const double nyquist = cfg_.sample_rate / 2.0;
    const double mel_hi = hz_to_mel(nyquist);
    std::vector<double> edges(m + 2);
    for (std::size_t j = 0; j < m + 2; ++j) {
      edges[j] = mel_to_hz(mel_hi * static_cast<double>(j) / static_cast<double>(m + 1));
    }
    Tensor fb(Shape{bins, m});
    for (std::size_t k = 0; k < bins; ++k) {
      const double f = static_cast<double>(k) * cfg_.sample_rate / static_cast<double>(w);
      for (std::size_t j = 0; j < m; ++j) {
        const double lo = edges[j], mid = edges[j + 1], hi = edges[j + 2];
        double v = 0.0;
        if (f > lo && f <= mid) v = (f - lo) / (mid - lo);
        else if (f > mid && f < hi) v = (hi - f) / (hi - mid);
        fb.at(k, j) = v;
      }
    }
    filterbank_ = std::make_shared<const Tensor>(std::move(fb));

    const std::size_t nc = cfg_.n_coefficients;
    Tensor d(Shape{m, nc});
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t q = 0; q < nc; ++q) {
        const double norm = std::sqrt((q == 0 ? 1.0 : 2.0) / static_cast<double>(m));
        d.at(i, q) = norm * std::cos(std::numbers::pi * static_cast<double>(q) *
                                     (static_cast<double>(i) + 0.5) / static_cast<double>(m));
      }
    }
    dct_ = std::make_shared<const Tensor>(std::move(d));
  }

  FeatureConfig cfg_;
  std::vector<double> window_;
  std::shared_ptr<const Tensor> dft_cos_, dft_sin_, filterbank_, dct_;
};

}  // namespace advaudio
