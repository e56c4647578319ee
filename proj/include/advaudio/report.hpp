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

// Serialized artifacts: attack result records, probe CSVs and batch summaries.
//
// Result record (schema "advaudio-attack-result", version 1):
//   source, target, mode, success, transcription, distortion_db (null when the
//   perturbation is all zero), iterations, final_c, seed, config_hash, output,
//   success_distortions, trace [{iteration, loss, distortion_db, transcription}],
//   manifest.
// Probe CSV (version 1): header "alpha,loss_adv_dir,loss_fgsm_dir", one row per
// probe point.

#pragma once

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "advaudio/attack.hpp"
#include "advaudio/errors.hpp"

namespace advaudio {

using json = nlohmann::ordered_json;

inline constexpr const char* kResultSchema = "advaudio-attack-result";
inline constexpr int kResultVersion = 1;
inline constexpr int kProbeCsvVersion = 1;

/// 64-bit FNV-1a, as 16 lowercase hex digits.
inline std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return buf;
}

inline json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline double number_or_neg_inf(const json& j) {
  return j.is_null() ? -std::numeric_limits<double>::infinity() : j.get<double>();
}

inline json attack_config_to_json(const AttackConfig& c) {
  json j;
  j["learning_rate"] = c.learning_rate;
  j["max_iterations"] = c.max_iterations;
  j["initial_c"] = c.initial_c;
  j["max_c"] = c.max_c;
  j["escalation_factor"] = c.escalation_factor;
  j["escalation_fraction"] = c.escalation_fraction;
  j["shrink"] = c.shrink;
  j["decoder"] = to_string(c.decoder);
  j["beam_width"] = c.beam_width;
  j["kappa"] = c.kappa;
  j["frame_constant_interval"] = c.frame_constant_interval;
  j["frame_constant_growth"] = c.frame_constant_growth;
  j["frame_constant_decay"] = c.frame_constant_decay;
  j["frame_constant_cap"] = c.frame_constant_cap;
  j["patience"] = c.patience;
  j["eot_draws"] = c.eot_draws;
  j["noise_db"] = finite_or_null(c.noise_db);
  j["eval_draws"] = c.eval_draws;
  j["survival_fraction"] = c.survival_fraction;
  j["verify_cooldown"] = c.verify_cooldown;
  j["adam"] = {{"beta1", c.adam.beta1}, {"beta2", c.adam.beta2}, {"epsilon", c.adam.epsilon}};
  j["seed"] = c.seed;
  j["log_every"] = c.log_every;
  return j;
}

inline std::string config_hash(const json& config) { return fnv1a_hex(config.dump()); }

inline json trace_to_json(const std::vector<TraceEntry>& trace) {
  json arr = json::array();
  for (const auto& e : trace) {
    arr.push_back({{"iteration", e.iteration},
                   {"loss", finite_or_null(e.loss)},
                   {"distortion_db", finite_or_null(e.distortion_db)},
                   {"transcription", e.transcription}});
  }
  return arr;
}

struct RecordContext {
  std::string source;
  std::string output;
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string manifest;
};

inline json result_to_json(const AttackResult& r, const RecordContext& ctx) {
  json j;
  j["schema"] = kResultSchema;
  j["version"] = kResultVersion;
  j["source"] = ctx.source;
  j["target"] = r.target;
  j["mode"] = r.mode;
  j["success"] = r.success;
  j["transcription"] = r.transcription;
  j["distortion_db"] = finite_or_null(r.distortion_db);
  j["iterations"] = r.iterations;
  j["final_c"] = r.final_c;
  j["seed"] = ctx.seed;
  j["config_hash"] = ctx.config_hash;
  j["output"] = ctx.output;
  json ds = json::array();
  for (double d : r.success_distortions) ds.push_back(finite_or_null(d));
  j["success_distortions"] = ds;
  j["trace"] = trace_to_json(r.trace);
  j["manifest"] = ctx.manifest;
  return j;
}

/// Shortest round-trip decimal form, so CSV bytes depend only on the values.
inline std::string format_double(double v) {
  char buf[32];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

inline void write_probe_csv(std::ostream& out, const std::vector<ProbePoint>& points) {
  out << "alpha,loss_adv_dir,loss_fgsm_dir\n";
  for (const auto& p : points) {
    out << format_double(p.alpha) << ',' << format_double(p.loss_adv_dir) << ','
        << format_double(p.loss_fgsm_dir) << '\n';
  }
}

// ---------------------------------------------------------------------------
// Summary statistics

/// Linear-interpolation percentile (q in [0, 100]) of unsorted values.
inline double percentile(std::vector<double> v, double q) {
  if (v.empty()) throw PreconditionError("percentile of an empty set");
  if (q < 0.0 || q > 100.0) throw PreconditionError("percentile must be in [0, 100]");
  std::sort(v.begin(), v.end());
  const double pos = q / 100.0 * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

struct LinearFit {
  double slope = std::numeric_limits<double>::quiet_NaN();
  double intercept = std::numeric_limits<double>::quiet_NaN();
};

/// Ordinary least squares; NaN when x has no spread.
inline LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw PreconditionError("fit_line: length mismatch");
  LinearFit f;
  if (x.size() < 2) return f;
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(x.size());
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) return f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  return f;
}

struct Summary {
  std::size_t records = 0;
  std::size_t successes = 0;
  double success_rate = 0.0;
  // Over successful records with a finite distortion.
  std::size_t measured = 0;
  double mean_db = std::numeric_limits<double>::quiet_NaN();
  double p025_db = std::numeric_limits<double>::quiet_NaN();
  double p975_db = std::numeric_limits<double>::quiet_NaN();
  // dB per extra target character.
  double db_per_char = std::numeric_limits<double>::quiet_NaN();
};

inline Summary summarize(const std::vector<json>& records) {
  if (records.empty()) throw PreconditionError("no result records to summarize");
  Summary s;
  s.records = records.size();
  std::vector<double> db, len;
  for (const auto& r : records) {
    if (!r.value("success", false)) continue;
    ++s.successes;
    const json& d = r.at("distortion_db");
    if (d.is_null()) continue;
    db.push_back(d.get<double>());
    len.push_back(static_cast<double>(r.value("target", std::string()).size()));
  }
  s.success_rate = static_cast<double>(s.successes) / static_cast<double>(s.records);
  s.measured = db.size();
  if (!db.empty()) {
    double sum = 0;
    for (double v : db) sum += v;
    s.mean_db = sum / static_cast<double>(db.size());
    s.p025_db = percentile(db, 2.5);
    s.p975_db = percentile(db, 97.5);
    s.db_per_char = fit_line(len, db).slope;
  }
  return s;
}

inline json summary_to_json(const Summary& s) {
  return {{"records", s.records},
          {"successes", s.successes},
          {"success_rate", s.success_rate},
          {"measured", s.measured},
          {"mean_db", std::isnan(s.mean_db) ? json(nullptr) : json(s.mean_db)},
          {"p2_5_db", std::isnan(s.p025_db) ? json(nullptr) : json(s.p025_db)},
          {"p97_5_db", std::isnan(s.p975_db) ? json(nullptr) : json(s.p975_db)},
          {"db_per_char", std::isnan(s.db_per_char) ? json(nullptr) : json(s.db_per_char)}};
}

}  // namespace advaudio
