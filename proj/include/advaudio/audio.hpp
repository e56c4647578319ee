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
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "advaudio/errors.hpp"

namespace advaudio {

inline constexpr double kSampleMin = -32768.0;  // -2^15
inline constexpr double kSampleMax = 32767.0;   //  2^15 - 1
inline constexpr double kFullScale = 32768.0;

/// Mono audio at a fixed rate. Samples are reals on the signed 16-bit scale;
/// they only become integers at WAV export (see quantize()).
class Waveform {
 public:
  Waveform() = default;

  explicit Waveform(std::vector<double> samples, int sample_rate = 16000)
      : samples_(std::move(samples)), sample_rate_(sample_rate) {
    if (sample_rate_ <= 0) {
      throw PreconditionError("sample rate must be positive, got " + std::to_string(sample_rate_));
    }
  }

  static Waveform zeros(std::size_t n, int sample_rate = 16000) {
    return Waveform(std::vector<double>(n, 0.0), sample_rate);
  }

  std::size_t size() const { return samples_.size(); }
  bool empty() const { return samples_.empty(); }
  int sample_rate() const { return sample_rate_; }
  double seconds() const { return static_cast<double>(samples_.size()) / sample_rate_; }

  double operator[](std::size_t i) const { return samples_[i]; }
  double& operator[](std::size_t i) { return samples_[i]; }

  std::span<const double> samples() const { return samples_; }
  std::span<double> samples() { return samples_; }
  const std::vector<double>& vec() const { return samples_; }

  double peak() const {
    double m = 0.0;
    for (double v : samples_) m = std::max(m, std::fabs(v));
    return m;
  }

  friend bool operator==(const Waveform&, const Waveform&) = default;

 private:
  std::vector<double> samples_;
  int sample_rate_ = 16000;
};

/// Clamp every sample into the representable range [-2^15, 2^15 - 1].
inline Waveform clip(const Waveform& x) {
  std::vector<double> out(x.samples().begin(), x.samples().end());
  for (double& v : out) v = std::clamp(v, kSampleMin, kSampleMax);
  return Waveform(std::move(out), x.sample_rate());
}

/// Clip then round half away from zero; the exact values a WAV file would hold.
inline Waveform quantize(const Waveform& x) {
  std::vector<double> out(x.samples().begin(), x.samples().end());
  for (double& v : out) v = std::clamp(std::round(v), kSampleMin, kSampleMax);
  return Waveform(std::move(out), x.sample_rate());
}

inline double peak_abs(std::span<const double> x) {
  double peak = 0.0;
  for (double v : x) peak = std::max(peak, std::fabs(v));
  return peak;
}

/// Peak level max_i 20 log10 |x_i|.
inline double db(std::span<const double> x) {
  const double peak = peak_abs(x);
  if (!(peak > 0.0)) throw PreconditionError("dB level is undefined for an all-zero signal");
  return 20.0 * std::log10(peak);
}

inline double db(const Waveform& x) { return db(x.samples()); }

/// dB_x(delta) = dB(delta) - dB(x). Negative when delta is quieter than x.
inline double db_distortion(std::span<const double> delta, std::span<const double> x) {
  if (delta.size() != x.size()) {
    throw PreconditionError("distortion needs equal lengths, got " + std::to_string(delta.size()) +
                            " and " + std::to_string(x.size()));
  }
  const double pd = peak_abs(delta), px = peak_abs(x);
  if (!(pd > 0.0) || !(px > 0.0)) throw PreconditionError("dB level is undefined for an all-zero signal");
  // Equal to db(delta) - db(x). The ratio is taken in extended precision so a
  // single rounding remains, which keeps e.g. dB_x(0.1 x) at exactly -20.
  return static_cast<double>(20.0L * std::log10(static_cast<long double>(pd) / static_cast<long double>(px)));
}

inline double db_distortion(const Waveform& delta, const Waveform& x) {
  return db_distortion(delta.samples(), x.samples());
}

/// Same as db_distortion but an all-zero delta maps to -infinity.
inline double db_distortion_or_silent(std::span<const double> delta, std::span<const double> x) {
  const bool silent = std::all_of(delta.begin(), delta.end(), [](double v) { return v == 0.0; });
  if (silent) {
    if (delta.size() != x.size()) return db_distortion(delta, x);  // throws
    return -std::numeric_limits<double>::infinity();
  }
  return db_distortion(delta, x);
}

inline std::vector<double> difference(const Waveform& a, const Waveform& b) {
  if (a.size() != b.size()) throw PreconditionError("waveform lengths differ");
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  return d;
}

namespace wav_detail {

inline std::uint32_t u32(const std::uint8_t* p) {
  return std::uint32_t(p[0]) | (std::uint32_t(p[1]) << 8) | (std::uint32_t(p[2]) << 16) |
         (std::uint32_t(p[3]) << 24);
}
inline std::uint16_t u16(const std::uint8_t* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}
inline void put32(std::vector<std::uint8_t>& o, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) o.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}
inline void put16(std::vector<std::uint8_t>& o, std::uint16_t v) {
  o.push_back(static_cast<std::uint8_t>(v));
  o.push_back(static_cast<std::uint8_t>(v >> 8));
}

constexpr std::uint16_t kFormatPcm = 0x0001;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

}  // namespace wav_detail

/// Decode an in-memory RIFF/WAVE image: PCM, 16-bit, mono only.
inline Waveform decode_wav(std::span<const std::uint8_t> bytes) {
  using namespace wav_detail;
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw FormatError("not a RIFF/WAVE file");
  }
  std::size_t pos = 12;
  bool have_fmt = false;
  int rate = 0;
  while (pos + 8 <= bytes.size()) {
    const std::uint8_t* h = bytes.data() + pos;
    const std::uint32_t len = u32(h + 4);
    const std::size_t body = pos + 8;
    if (body + len > bytes.size()) throw FormatError("truncated WAV chunk");
    if (std::memcmp(h, "fmt ", 4) == 0) {
      if (len < 16) throw FormatError("fmt chunk too short");
      const std::uint8_t* f = bytes.data() + body;
      std::uint16_t tag = u16(f);
      const std::uint16_t channels = u16(f + 2);
      rate = static_cast<int>(u32(f + 4));
      const std::uint16_t bits = u16(f + 14);
      if (tag == kFormatExtensible && len >= 40) tag = u16(f + 24);
      if (tag != kFormatPcm) {
        throw FormatError("unsupported WAV encoding (format tag " + std::to_string(tag) +
                          "); only uncompressed PCM is read");
      }
      if (channels != 1) {
        throw FormatError("unsupported WAV layout: " + std::to_string(channels) +
                          " channels, only mono is read");
      }
      if (bits != 16) {
        throw FormatError("unsupported WAV sample width: " + std::to_string(bits) +
                          " bits, only 16-bit is read");
      }
      have_fmt = true;
    } else if (std::memcmp(h, "data", 4) == 0) {
      if (!have_fmt) throw FormatError("data chunk before fmt chunk");
      if (len % 2 != 0) throw FormatError("odd data chunk length for 16-bit audio");
      std::vector<double> samples(len / 2);
      const std::uint8_t* d = bytes.data() + body;
      for (std::size_t i = 0; i < samples.size(); ++i) {
        samples[i] = static_cast<double>(static_cast<std::int16_t>(u16(d + 2 * i)));
      }
      return Waveform(std::move(samples), rate);
    }
    pos = body + len + (len & 1u);
  }
  throw FormatError(have_fmt ? "WAV file has no data chunk" : "WAV file has no fmt chunk");
}

/// Encode as canonical 44-byte-header PCM16 mono. Samples are rounded to the
/// nearest integer; anything outside [-32768, 32767] after rounding is an error.
inline std::vector<std::uint8_t> encode_wav(const Waveform& x) {
  using namespace wav_detail;
  const auto data_len = static_cast<std::uint32_t>(x.size() * 2);
  std::vector<std::uint8_t> o;
  o.reserve(44 + data_len);
  o.insert(o.end(), {'R', 'I', 'F', 'F'});
  put32(o, 36 + data_len);
  o.insert(o.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
  put32(o, 16);
  put16(o, kFormatPcm);
  put16(o, 1);
  put32(o, static_cast<std::uint32_t>(x.sample_rate()));
  put32(o, static_cast<std::uint32_t>(x.sample_rate()) * 2);
  put16(o, 2);
  put16(o, 16);
  o.insert(o.end(), {'d', 'a', 't', 'a'});
  put32(o, data_len);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = std::round(x[i]);
    if (!(r >= kSampleMin && r <= kSampleMax)) {
      throw RangeError("sample " + std::to_string(i) + " = " + std::to_string(x[i]) +
                       " is outside the 16-bit range");
    }
    put16(o, static_cast<std::uint16_t>(static_cast<std::int16_t>(r)));
  }
  return o;
}

inline Waveform read_wav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  try {
    return decode_wav(bytes);
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.what());
  }
}

inline void write_wav(const std::string& path, const Waveform& x) {
  const auto bytes = encode_wav(x);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("short write to " + path);
}

}  // namespace advaudio
