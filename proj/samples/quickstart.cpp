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

// Quickstart: train a small recognizer on synthetic speech, then make one
// utterance transcribe as a different phrase.
//
//   quickstart [target] [model.json]
//
// With a checkpoint path that exists, training is skipped.

#include <filesystem>
#include <iostream>
#include <string>

#include "advaudio/attack.hpp"
#include "advaudio/corpus.hpp"
#include "advaudio/train.hpp"

using namespace advaudio;

int main(int argc, char** argv) {
  const std::string target = argc > 1 ? argv[1] : "ok";
  const std::string ckpt = argc > 2 ? argv[2] : "";

  try {
    AcousticModel model;
    if (!ckpt.empty() && std::filesystem::exists(ckpt)) {
      model = load_checkpoint(ckpt);
    } else {
      const Corpus corpus = synth_corpus(random_phrases(300, 2, 5, 11), 12);
      TrainConfig tc;
      tc.epochs = 20;
      tc.on_epoch = [](int e, double loss) { std::cout << "epoch " << e + 1 << " loss " << loss << "\n"; };
      const TrainReport r = train(model, corpus, tc);
      std::cout << "held-out exact match " << r.heldout_accuracy << "\n";
      if (!ckpt.empty()) save_checkpoint(model, ckpt);
    }

    const Corpus probe = synth_corpus({"hi"}, 99);
    const Waveform& x = probe[0].audio;
    std::cout << "source \"" << probe[0].phrase << "\" transcribes as \"" << model.transcribe(x) << "\"\n";

    AttackConfig cfg;
    cfg.max_iterations = 2000;
    cfg.learning_rate = 100.0;
    const AttackResult r = attack_ctc(model, x, target, cfg);
    std::cout << "adversarial transcribes as \"" << r.transcription << "\" ("
              << (r.success ? "success" : "failed") << ", " << r.distortion_db << " dB)\n";
    write_wav("quickstart_adv.wav", r.adversarial);
    return r.success ? 0 : 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
