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
#include <functional>
#include <string>
#include <vector>

#include "advaudio/audio.hpp"
#include "advaudio/errors.hpp"

namespace advaudio {

/// A waveform -> waveform transform the attacker must survive.
using Codec = std::function<Waveform(const Waveform&)>;

inline Waveform identity_codec(const Waveform& x) { return x; }

/// Lossy stand-in for a perceptual codec: 4x decimation by block averaging,
/// linear interpolation back to the original length, then requantization to
/// 8-bit resolution (multiples of 256 on the 16-bit scale).
inline Waveform lossy_codec(const Waveform& x) {
  constexpr std::size_t kFactor = 4;
  constexpr double kStep = 256.0;
  const std::size_t n = x.size();
  if (n == 0) return x;
  const std::size_t m = (n + kFactor - 1) / kFactor;
  std::vector<double> low(m, 0.0);
  for (std::size_t j = 0; j < m; ++j) {
    const std::size_t begin = j * kFactor, end = std::min(n, begin + kFactor);
    double s = 0.0;
    for (std::size_t i = begin; i < end; ++i) s += x[i];
    low[j] = s / static_cast<double>(end - begin);
  }
  std::vector<double> out(n);
  const double center = (kFactor - 1) / 2.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double pos = std::clamp((static_cast<double>(i) - center) / kFactor, 0.0,
                                  static_cast<double>(m - 1));
    const auto j = static_cast<std::size_t>(pos);
    const double frac = pos - static_cast<double>(j);
    const double v = j + 1 < m ? (1.0 - frac) * low[j] + frac * low[j + 1] : low[j];
    out[i] = std::clamp(std::round(v / kStep) * kStep, kSampleMin, kSampleMax);
  }
  return Waveform(std::move(out), x.sample_rate());
}

}  // namespace advaudio
