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
#include <cstdint>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "advaudio/alphabet.hpp"
#include "advaudio/audio.hpp"
#include "advaudio/autodiff.hpp"
#include "advaudio/ctc.hpp"
#include "advaudio/errors.hpp"
#include "advaudio/featurizer.hpp"
#include "advaudio/tensor.hpp"

namespace advaudio {

enum class DecoderKind { kGreedy, kBeam };

inline std::string to_string(DecoderKind d) { return d == DecoderKind::kGreedy ? "greedy" : "beam"; }

inline DecoderKind parse_decoder(const std::string& s) {
  if (s == "greedy") return DecoderKind::kGreedy;
  if (s == "beam") return DecoderKind::kBeam;
  throw PreconditionError("unknown decoder '" + s + "' (expected greedy or beam)");
}

struct ModelConfig {
  std::size_t hidden_size = 64;
  std::size_t n_layers = 1;
  std::size_t alphabet_size = Alphabet::kSize;
  FeatureConfig features;
  std::uint64_t seed = 1;

  void validate() const {
    if (hidden_size < 1) throw PreconditionError("model: hidden_size must be >= 1");
    if (n_layers < 1) throw PreconditionError("model: n_layers must be >= 1");
    if (alphabet_size != static_cast<std::size_t>(Alphabet::kSize)) {
      throw PreconditionError("model: alphabet size must be " + std::to_string(Alphabet::kSize) +
                              ", got " + std::to_string(alphabet_size));
    }
    features.validate();
  }
};

struct TrainingInfo {
  int epochs = 0;
  double final_loss = 0.0;
  double heldout_accuracy = 0.0;
  double train_accuracy = 0.0;
  std::vector<double> epoch_loss;
};

/// The transcriber under attack: MFC features -> LSTM stack -> per-frame
/// logits over [a-z, space, blank]. The recurrence starts from a zero state.
class AcousticModel {
 public:
  struct Parameter {
    std::string name;
    Tensor value;
  };

  explicit AcousticModel(ModelConfig cfg = {}) : cfg_(std::move(cfg)), featurizer_(cfg_.features) {
    cfg_.validate();
    init();
  }

  const ModelConfig& config() const { return cfg_; }
  const Featurizer& featurizer() const { return featurizer_; }
  std::vector<Parameter>& parameters() { return params_; }
  const std::vector<Parameter>& parameters() const { return params_; }

  const std::vector<double>& norm_mean() const { return norm_mean_; }
  const std::vector<double>& norm_inv_std() const { return norm_inv_std_; }

  void set_normalization(std::vector<double> mean, std::vector<double> inv_std) {
    const std::size_t f = cfg_.features.n_coefficients;
    if (mean.size() != f || inv_std.size() != f) {
      throw ShapeError("normalization vectors must have " + std::to_string(f) + " entries");
    }
    norm_mean_ = std::move(mean);
    norm_inv_std_ = std::move(inv_std);
  }

  TrainingInfo& training_info() { return info_; }
  const TrainingInfo& training_info() const { return info_; }

  /// Graph handles for the parameters, in parameters() order.
  struct Bound {
    std::vector<ad::Var> params;
  };

  Bound bind(ad::Graph& g, bool trainable) const {
    Bound b;
    b.params.reserve(params_.size());
    for (const auto& p : params_) b.params.push_back(g.input(p.value, trainable));
    return b;
  }

  /// features: N x n_coefficients -> logits: N x alphabet_size.
  ad::Var logits_from_features(ad::Graph& g, const Bound& b, ad::Var features) const {
    const Tensor& fv = features.value();
    if (fv.rank() != 2 || fv.cols() != cfg_.features.n_coefficients) {
      throw ShapeError("model expects N x " + std::to_string(cfg_.features.n_coefficients) +
                       " features, got " + shape_string(fv.shape()));
    }
    const std::size_t n = fv.rows(), h = cfg_.hidden_size;
    ad::Var mean = g.constant(Tensor::vector(negated(norm_mean_)));
    ad::Var inv_std = g.constant(Tensor::vector(norm_inv_std_));
    ad::Var x = ad::mul_row(ad::add_row(features, mean), inv_std);

    for (std::size_t layer = 0; layer < cfg_.n_layers; ++layer) {
      ad::Var w_x = b.params[3 * layer], w_h = b.params[3 * layer + 1], bias = b.params[3 * layer + 2];
      ad::Var proj = ad::add_row(ad::matmul(x, w_x), bias);
      ad::Var hidden, cell;
      std::vector<ad::Var> outputs;
      outputs.reserve(n);
      for (std::size_t t = 0; t < n; ++t) {
        ad::Var gates = ad::slice_rows(proj, t, t + 1);
        if (t > 0) gates = gates + ad::matmul(hidden, w_h);
        ad::Var in_gate = ad::sigmoid(ad::slice_cols(gates, 0, h));
        ad::Var forget = ad::sigmoid(ad::slice_cols(gates, h, 2 * h));
        ad::Var cand = ad::tanh(ad::slice_cols(gates, 2 * h, 3 * h));
        ad::Var out_gate = ad::sigmoid(ad::slice_cols(gates, 3 * h, 4 * h));
        cell = t > 0 ? forget * cell + in_gate * cand : in_gate * cand;
        hidden = out_gate * ad::tanh(cell);
        outputs.push_back(hidden);
      }
      x = ad::concat_rows(outputs);
    }
    const std::size_t k = 3 * cfg_.n_layers;
    return ad::add_row(ad::matmul(x, b.params[k]), b.params[k + 1]);
  }

  /// samples: shape {L} -> logits, with the weights held constant.
  ad::Var logits(ad::Graph& g, ad::Var samples) const {
    return logits_from_features(g, bind(g, false), featurizer_.features(samples));
  }

  Tensor logits(const Waveform& x) const {
    ad::Graph g;
    return logits(g, g.constant(Tensor::vector(x.vec()))).value();
  }

  Labels decode(const Tensor& logits, DecoderKind decoder, std::size_t beam_width = 8) const {
    return decoder == DecoderKind::kGreedy ? ctc::greedy_decode(logits)
                                           : ctc::beam_decode(logits, beam_width);
  }

  std::string transcribe(const Waveform& x, DecoderKind decoder = DecoderKind::kGreedy,
                         std::size_t beam_width = 8) const {
    return Alphabet::decode(decode(logits(x), decoder, beam_width));
  }

 private:
  static std::vector<double> negated(const std::vector<double>& v) {
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = -v[i];
    return out;
  }

  void init() {
    const std::size_t f = cfg_.features.n_coefficients, h = cfg_.hidden_size;
    const std::size_t k = cfg_.alphabet_size;
    std::mt19937_64 rng(cfg_.seed);
    const double bound = 1.0 / std::sqrt(static_cast<double>(h));
    std::uniform_real_distribution<double> u(-bound, bound);
    auto random = [&](Shape shape) {
      Tensor t(std::move(shape));
      for (double& v : t.values()) v = u(rng);
      return t;
    };
    params_.clear();
    for (std::size_t layer = 0; layer < cfg_.n_layers; ++layer) {
      const std::string p = "lstm" + std::to_string(layer);
      const std::size_t in = layer == 0 ? f : h;
      params_.push_back({p + ".w_x", random({in, 4 * h})});
      params_.push_back({p + ".w_h", random({h, 4 * h})});
      Tensor bias = random({4 * h});
      for (std::size_t j = h; j < 2 * h; ++j) bias[j] += 1.0;  // forget gate starts open
      params_.push_back({p + ".bias", std::move(bias)});
    }
    params_.push_back({"out.w", random({h, k})});
    params_.push_back({"out.b", random({k})});
    norm_mean_.assign(f, 0.0);
    norm_inv_std_.assign(f, 1.0);
  }

  ModelConfig cfg_;
  Featurizer featurizer_;
  std::vector<Parameter> params_;
  std::vector<double> norm_mean_, norm_inv_std_;
  TrainingInfo info_;
};

// Checkpoint file: UTF-8 JSON, doubles written with 17 significant digits so
// every weight round-trips exactly.
//
//   { "format": "advaudio-checkpoint", "version": 1,
//     "model":    { hidden_size, n_layers, alphabet_size, alphabet, seed },
//     "features": { sample_rate, window_len, hop, n_mel_filters, n_coefficients, log_floor },
//     "normalization": { mean: [...], inv_std: [...] },
//     "parameters": [ { name, shape: [...], values: [...] }, ... ],
//     "training": { epochs, final_loss, heldout_accuracy, train_accuracy, epoch_loss: [...] } }
inline constexpr const char* kCheckpointFormat = "advaudio-checkpoint";
inline constexpr int kCheckpointVersion = 1;
inline constexpr const char* kAlphabetString = "abcdefghijklmnopqrstuvwxyz _";

inline nlohmann::json feature_config_to_json(const FeatureConfig& f) {
  return {{"sample_rate", f.sample_rate},     {"window_len", f.window_len},
          {"hop", f.hop},                     {"n_mel_filters", f.n_mel_filters},
          {"n_coefficients", f.n_coefficients}, {"log_floor", f.log_floor}};
}

inline FeatureConfig feature_config_from_json(const nlohmann::json& j) {
  FeatureConfig f;
  f.sample_rate = j.at("sample_rate").get<int>();
  f.window_len = j.at("window_len").get<std::size_t>();
  f.hop = j.at("hop").get<std::size_t>();
  f.n_mel_filters = j.at("n_mel_filters").get<std::size_t>();
  f.n_coefficients = j.at("n_coefficients").get<std::size_t>();
  f.log_floor = j.at("log_floor").get<double>();
  return f;
}

inline nlohmann::json checkpoint_to_json(const AcousticModel& m) {
  nlohmann::json params = nlohmann::json::array();
  for (const auto& p : m.parameters()) {
    params.push_back({{"name", p.name}, {"shape", p.value.shape()}, {"values", p.value.storage()}});
  }
  const auto& cfg = m.config();
  const auto& info = m.training_info();
  return {{"format", kCheckpointFormat},
          {"version", kCheckpointVersion},
          {"model",
           {{"hidden_size", cfg.hidden_size},
            {"n_layers", cfg.n_layers},
            {"alphabet_size", cfg.alphabet_size},
            {"alphabet", kAlphabetString},
            {"seed", cfg.seed}}},
          {"features", feature_config_to_json(cfg.features)},
          {"normalization", {{"mean", m.norm_mean()}, {"inv_std", m.norm_inv_std()}}},
          {"parameters", params},
          {"training",
           {{"epochs", info.epochs},
            {"final_loss", info.final_loss},
            {"heldout_accuracy", info.heldout_accuracy},
            {"train_accuracy", info.train_accuracy},
            {"epoch_loss", info.epoch_loss}}}};
}

inline AcousticModel checkpoint_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format").get<std::string>() != kCheckpointFormat) {
      throw FormatError("not an advaudio checkpoint");
    }
    const int version = j.at("version").get<int>();
    if (version != kCheckpointVersion) {
      throw FormatError("unsupported checkpoint version " + std::to_string(version));
    }
    const auto& jm = j.at("model");
    ModelConfig cfg;
    cfg.hidden_size = jm.at("hidden_size").get<std::size_t>();
    cfg.n_layers = jm.at("n_layers").get<std::size_t>();
    cfg.alphabet_size = jm.at("alphabet_size").get<std::size_t>();
    cfg.seed = jm.at("seed").get<std::uint64_t>();
    if (cfg.alphabet_size != static_cast<std::size_t>(Alphabet::kSize) ||
        jm.at("alphabet").get<std::string>() != kAlphabetString) {
      throw FormatError("checkpoint alphabet does not match [a-z, space, blank] (size " +
                        std::to_string(cfg.alphabet_size) + ")");
    }
    cfg.features = feature_config_from_json(j.at("features"));
    AcousticModel m(cfg);
    m.set_normalization(j.at("normalization").at("mean").get<std::vector<double>>(),
                        j.at("normalization").at("inv_std").get<std::vector<double>>());
    const auto& jp = j.at("parameters");
    auto& params = m.parameters();
    if (jp.size() != params.size()) {
      throw FormatError("checkpoint has " + std::to_string(jp.size()) + " parameter tensors, expected " +
                        std::to_string(params.size()));
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
      const auto name = jp[i].at("name").get<std::string>();
      const auto shape = jp[i].at("shape").get<Shape>();
      if (name != params[i].name || shape != params[i].value.shape()) {
        throw FormatError("checkpoint parameter " + name + " " + shape_string(shape) +
                          " does not match " + params[i].name + " " +
                          shape_string(params[i].value.shape()));
      }
      params[i].value = Tensor(shape, jp[i].at("values").get<std::vector<double>>());
    }
    const auto& jt = j.at("training");
    auto& info = m.training_info();
    info.epochs = jt.at("epochs").get<int>();
    info.final_loss = jt.at("final_loss").get<double>();
    info.heldout_accuracy = jt.at("heldout_accuracy").get<double>();
    info.train_accuracy = jt.at("train_accuracy").get<double>();
    info.epoch_loss = jt.at("epoch_loss").get<std::vector<double>>();
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed checkpoint: ") + e.what());
  } catch (const ShapeError& e) {
    throw FormatError(std::string("malformed checkpoint: ") + e.what());
  }
}

inline void save_checkpoint(const AcousticModel& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write checkpoint " + path);
  out << checkpoint_to_json(m).dump() << '\n';
  if (!out) throw Error("short write to " + path);
}

inline AcousticModel load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open checkpoint " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(ss.str());
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path + ": unreadable checkpoint (" + e.what() + ")");
  }
  return checkpoint_from_json(j);
}

}  // namespace advaudio
