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

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "advaudio/errors.hpp"
#include "advaudio/model.hpp"
#include "support/oracles.hpp"

namespace advaudio {
namespace {

ModelConfig tiny_config() {
  ModelConfig c;
  c.hidden_size = 4;
  c.features.sample_rate = 2000;
  c.features.hop = 40;
  c.features.window_len = 64;
  c.features.n_mel_filters = 8;
  c.features.n_coefficients = 5;
  return c;
}

Waveform noise(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 5000.0);
  std::vector<double> s(n);
  for (double& v : s) v = g(rng);
  return Waveform(std::move(s), 16000);
}

double sigm(double v) { return 1.0 / (1.0 + std::exp(-v)); }

// Plain-loop LSTM forward pass over normalized features.
Tensor reference_logits(const AcousticModel& m, const Tensor& features) {
  const auto& p = m.parameters();
  const std::size_t n = features.rows(), f = features.cols(), h = m.config().hidden_size;
  std::vector<double> hid(h, 0.0), cell(h, 0.0);
  Tensor out(Shape{n, 28});
  for (std::size_t t = 0; t < n; ++t) {
    std::vector<double> x(f);
    for (std::size_t i = 0; i < f; ++i) x[i] = (features.at(t, i) - m.norm_mean()[i]) * m.norm_inv_std()[i];
    std::vector<double> gates(4 * h);
    for (std::size_t j = 0; j < 4 * h; ++j) {
      double s = p[2].value[j];
      for (std::size_t i = 0; i < f; ++i) s += x[i] * p[0].value.at(i, j);
      for (std::size_t i = 0; i < h; ++i) s += hid[i] * p[1].value.at(i, j);
      gates[j] = s;
    }
    for (std::size_t j = 0; j < h; ++j) {
      const double ig = sigm(gates[j]), fg = sigm(gates[h + j]), g = std::tanh(gates[2 * h + j]),
                   og = sigm(gates[3 * h + j]);
      cell[j] = fg * cell[j] + ig * g;
      hid[j] = og * std::tanh(cell[j]);
    }
    for (std::size_t k = 0; k < 28; ++k) {
      double s = p[4].value[k];
      for (std::size_t i = 0; i < h; ++i) s += hid[i] * p[3].value.at(i, k);
      out.at(t, k) = s;
    }
  }
  return out;
}

TEST(Model, ParameterLayout) {
  AcousticModel m;
  const auto& p = m.parameters();
  ASSERT_EQ(p.size(), 5u);
  EXPECT_EQ(p[0].name, "lstm0.w_x");
  EXPECT_EQ(p[0].value.shape(), (Shape{13, 256}));
  EXPECT_EQ(p[1].value.shape(), (Shape{64, 256}));
  EXPECT_EQ(p[2].value.shape(), (Shape{256}));
  EXPECT_EQ(p[3].value.shape(), (Shape{64, 28}));
  EXPECT_EQ(p[4].value.shape(), (Shape{28}));
  // Forget-gate bias block is shifted up by one.
  double forget = 0, input = 0;
  for (std::size_t j = 0; j < 64; ++j) {
    input += p[2].value[j];
    forget += p[2].value[64 + j];
  }
  EXPECT_GT(forget / 64, 0.5);
  EXPECT_LT(std::fabs(input / 64), 0.5);
}

TEST(Model, LogitsShapeFollowsFrames) {
  AcousticModel m;
  EXPECT_EQ(m.logits(noise(16000, 1)).shape(), (Shape{50, 28}));
  EXPECT_EQ(m.logits(noise(100, 2)).shape(), (Shape{1, 28}));
}

TEST(Model, MatchesPlainLoopLstm) {
  AcousticModel m;
  m.set_normalization(std::vector<double>(13, 0.5), std::vector<double>(13, 0.1));
  const Waveform x = noise(3000, 3);
  const Tensor got = m.logits(x);
  const Tensor want = reference_logits(m, m.featurizer().compute(x));
  ASSERT_EQ(got.shape(), want.shape());
  for (std::size_t i = 0; i < got.size(); ++i) EXPECT_NEAR(got[i], want[i], 1e-10);
}

TEST(Model, SeedDeterminesWeights) {
  ModelConfig a, b;
  b.seed = 2;
  EXPECT_EQ(AcousticModel(a).parameters()[0].value, AcousticModel(a).parameters()[0].value);
  EXPECT_FALSE(AcousticModel(a).parameters()[0].value == AcousticModel(b).parameters()[0].value);
}

TEST(Model, RejectsWrongAlphabetSize) {
  ModelConfig c;
  c.alphabet_size = 29;
  EXPECT_THROW(AcousticModel{c}, PreconditionError);
}

TEST(Model, FullChainGradientMatchesFiniteDifferences) {
  AcousticModel m(tiny_config());
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g(0.0, 5000.0);
  std::vector<double> s(200);  // 5 frames
  for (double& v : s) v = g(rng);
  const Labels target = {2, 7};
  auto r = testing::gradcheck(
      [&](ad::Graph& graph, ad::Var in) { return ctc::loss(m.logits(graph, in), target); },
      Tensor::vector(s));
  EXPECT_LT(r.rel_error, 1e-4);
}

TEST(Model, ParameterGradientMatchesFiniteDifferences) {
  AcousticModel m(tiny_config());
  std::mt19937_64 rng(5);
  const Tensor feats = testing::random_tensor({4, 5}, rng);
  const Labels target = {1, 1};
  for (std::size_t which = 0; which < m.parameters().size(); ++which) {
    auto r = testing::gradcheck(
        [&](ad::Graph& g, ad::Var in) {
          auto b = m.bind(g, false);
          b.params[which] = in;
          return ctc::loss(m.logits_from_features(g, b, g.constant(feats)), target);
        },
        m.parameters()[which].value);
    EXPECT_LT(r.rel_error, 1e-4) << m.parameters()[which].name;
  }
}

class CheckpointTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = std::filesystem::temp_directory_path() / "advaudio_model_test";
    std::filesystem::create_directories(dir_);
  }
  void TearDown() override { std::filesystem::remove_all(dir_); }
  std::string path(const char* name) const { return (dir_ / name).string(); }
  std::filesystem::path dir_;
};

TEST_F(CheckpointTest, RoundTripIsExact) {
  ModelConfig c;
  c.seed = 9;
  AcousticModel m(c);
  m.set_normalization(std::vector<double>(13, 0.1 / 3), std::vector<double>(13, 1.0 / 7));
  m.training_info().epochs = 3;
  m.training_info().epoch_loss = {3.5, 2.25, 1.0 / 3};
  save_checkpoint(m, path("m.json"));
  const AcousticModel back = load_checkpoint(path("m.json"));
  for (std::size_t i = 0; i < m.parameters().size(); ++i) {
    EXPECT_EQ(back.parameters()[i].value, m.parameters()[i].value);
  }
  EXPECT_EQ(back.norm_mean(), m.norm_mean());
  EXPECT_EQ(back.training_info().epoch_loss, m.training_info().epoch_loss);
  const Waveform x = noise(2000, 6);
  EXPECT_EQ(back.logits(x), m.logits(x));
}

TEST_F(CheckpointTest, RejectsMismatchedOrCorruptFiles) {
  AcousticModel m;
  nlohmann::json good = checkpoint_to_json(m);

  auto bad = good;
  bad["format"] = "something-else";
  EXPECT_THROW(checkpoint_from_json(bad), FormatError);
  bad = good;
  bad["version"] = 99;
  EXPECT_THROW(checkpoint_from_json(bad), FormatError);
  bad = good;
  bad["model"]["alphabet"] = "abc";
  EXPECT_THROW(checkpoint_from_json(bad), FormatError);
  bad = good;
  bad["parameters"][0]["shape"] = {13, 255};
  EXPECT_THROW(checkpoint_from_json(bad), FormatError);
  bad = good;
  bad["parameters"][1]["values"] = std::vector<double>{1.0};
  EXPECT_THROW(checkpoint_from_json(bad), FormatError);
  bad = good;
  bad.erase("normalization");
  EXPECT_THROW(checkpoint_from_json(bad), FormatError);

  std::ofstream(path("trunc.json")) << good.dump().substr(0, 100);
  EXPECT_THROW(load_checkpoint(path("trunc.json")), FormatError);
  EXPECT_THROW(load_checkpoint(path("missing.json")), Error);
}

TEST(Model, DecoderNames) {
  EXPECT_EQ(parse_decoder("greedy"), DecoderKind::kGreedy);
  EXPECT_EQ(parse_decoder("beam"), DecoderKind::kBeam);
  EXPECT_THROW(parse_decoder("viterbi"), PreconditionError);
  EXPECT_EQ(to_string(DecoderKind::kBeam), "beam");
}

}  // namespace
}  // namespace advaudio
