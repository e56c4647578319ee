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

// advaudio: synthesize a toy speech corpus, train the recognizer, transcribe,
// attack, probe and summarize.

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <sstream>
#include <string>
#include <vector>

#include "advaudio/attack.hpp"
#include "advaudio/codec.hpp"
#include "advaudio/corpus.hpp"
#include "advaudio/parallel.hpp"
#include "advaudio/report.hpp"
#include "advaudio/train.hpp"

namespace fs = std::filesystem;
using namespace advaudio;

namespace {

constexpr const char* kVersion = "0.1.0";
constexpr const char* kModelEnv = "ADVAUDIO_MODEL";
constexpr const char* kCorpusSchema = "advaudio-corpus";

// Exit codes.
constexpr int kOk = 0;
constexpr int kError = 1;
constexpr int kAttackFailed = 3;

struct UsageError : Error {
  using Error::Error;
};

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("short write to " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json read_json(const fs::path& path) {
  try {
    return json::parse(read_text(path));
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

/// Creates out_dir, refusing a non-empty one unless `force`.
void prepare_out_dir(const fs::path& dir, bool force) {
  if (fs::exists(dir)) {
    if (!fs::is_directory(dir)) throw UsageError(dir.string() + " exists and is not a directory");
    if (!fs::is_empty(dir) && !force) {
      throw UsageError("output directory " + dir.string() +
                       " is not empty; pass --force to write into it anyway");
    }
  }
  fs::create_directories(dir);
}

struct Manifest {
  std::string command;
  json config;
  std::uint64_t seed = 0;
  json inputs = json::array();
  json outputs = json::array();
  std::string started;

  json to_json() const {
    return {{"schema", "advaudio-manifest"}, {"version", 1},         {"command", command},
            {"toolkit_version", kVersion},   {"seed", seed},         {"config", config},
            {"inputs", inputs},              {"outputs", outputs},   {"started", started},
            {"finished", utc_now()}};
  }
};

std::string resolve_model(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv(kModelEnv); env && *env) return env;
  throw UsageError(std::string("no model given: pass --model or set ") + kModelEnv);
}

AcousticModel open_model(const std::string& path) {
  if (!fs::exists(path)) throw Error("checkpoint not found: " + path);
  return load_checkpoint(path);
}

// ---------------------------------------------------------------------------
// Corpus directories: index.json plus one WAV and one .txt per utterance.

struct CorpusEntry {
  std::string id;
  fs::path wav;
  std::string text;
};

std::vector<CorpusEntry> read_corpus_index(const fs::path& dir) {
  const fs::path index = dir / "index.json";
  if (!fs::exists(index)) throw Error("no corpus index at " + index.string());
  const json j = read_json(index);
  if (j.value("schema", "") != kCorpusSchema) throw FormatError(index.string() + " is not a corpus index");
  std::vector<CorpusEntry> out;
  for (const auto& u : j.at("utterances")) {
    out.push_back({u.at("id").get<std::string>(), dir / u.at("wav").get<std::string>(),
                   u.at("text").get<std::string>()});
  }
  if (out.empty()) throw Error("corpus " + dir.string() + " is empty");
  return out;
}

// ---------------------------------------------------------------------------
// synth

struct SynthOptions {
  std::string out;
  std::size_t count = 300;
  std::size_t min_len = 2;
  std::size_t max_len = 5;
  std::uint64_t seed = 1;
  double char_ms = 100.0;
  bool force = false;
};

int cmd_synth(const SynthOptions& o) {
  if (o.min_len == 0) throw UsageError("phrase length must be at least 1");
  if (o.count == 0) throw UsageError("--count must be at least 1");
  if (!(o.char_ms > 0.0)) throw UsageError("--char-ms must be positive");
  prepare_out_dir(o.out, o.force);
  Manifest m{"synth",
             {{"count", o.count}, {"min_len", o.min_len}, {"max_len", o.max_len}, {"char_ms", o.char_ms}},
             o.seed};
  m.started = utc_now();

  const auto phrases = random_phrases(o.count, o.min_len, o.max_len, o.seed);
  SynthConfig sc;
  sc.char_seconds = o.char_ms / 1000.0;
  const Corpus corpus = synth_corpus(phrases, o.seed, sc);
  json index = {{"schema", kCorpusSchema}, {"version", 1}, {"manifest", "manifest.json"},
                {"utterances", json::array()}};
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    std::ostringstream id;
    id << "utt_" << std::setw(5) << std::setfill('0') << i;
    write_wav((fs::path(o.out) / (id.str() + ".wav")).string(), corpus[i].audio);
    write_text(fs::path(o.out) / (id.str() + ".txt"), corpus[i].phrase + "\n");
    index["utterances"].push_back({{"id", id.str()}, {"wav", id.str() + ".wav"}, {"text", corpus[i].phrase}});
  }
  write_text(fs::path(o.out) / "index.json", index.dump(2) + "\n");
  m.outputs.push_back("index.json");
  write_text(fs::path(o.out) / "manifest.json", m.to_json().dump(2) + "\n");
  std::cout << "wrote " << corpus.size() << " utterances to " << o.out << "\n";
  return kOk;
}

// ---------------------------------------------------------------------------
// train

struct TrainOptions {
  std::vector<std::string> corpora;
  std::string model_out;
  int epochs = 20;
  double lr = 1e-3;
  double holdout = 0.1;
  std::size_t hidden = 64;
  std::uint64_t seed = 1;
  std::size_t codec_stride = 2;
  bool quiet = false;
};

int cmd_train(const TrainOptions& o) {
  Manifest m{"train",
             {{"epochs", o.epochs}, {"learning_rate", o.lr}, {"holdout_fraction", o.holdout},
              {"hidden_size", o.hidden}, {"codec_augment_stride", o.codec_stride}},
             o.seed};
  m.started = utc_now();
  Corpus corpus;
  for (const auto& dir : o.corpora) {
    m.inputs.push_back(dir);
    for (const auto& e : read_corpus_index(dir)) corpus.push_back({read_wav(e.wav.string()), e.text});
  }

  ModelConfig mc;
  mc.hidden_size = o.hidden;
  mc.seed = o.seed;
  AcousticModel model(mc);
  TrainConfig tc;
  tc.epochs = o.epochs;
  tc.adam.learning_rate = o.lr;
  tc.holdout_fraction = o.holdout;
  tc.seed = o.seed;
  if (o.codec_stride > 0) {
    tc.augment = lossy_codec;
    tc.augment_stride = o.codec_stride;
  }
  if (!o.quiet) {
    tc.on_epoch = [](int e, double loss) { std::cerr << "epoch " << e + 1 << " loss " << loss << "\n"; };
  }
  const TrainReport r = train(model, corpus, tc);

  const fs::path out(o.model_out);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  const std::string manifest_path = o.model_out + ".manifest.json";
  auto ckpt = checkpoint_to_json(model);
  ckpt["manifest"] = fs::path(manifest_path).filename().string();
  write_text(out, ckpt.dump() + "\n");
  m.outputs.push_back(o.model_out);
  m.config["train_accuracy"] = r.train_accuracy;
  m.config["heldout_accuracy"] = r.heldout_accuracy;
  write_text(manifest_path, m.to_json().dump(2) + "\n");
  std::cout << "train exact match " << r.train_accuracy << " (" << r.n_train << " utterances), held-out "
            << r.heldout_accuracy << " (" << r.n_heldout << ")\nsaved " << o.model_out << "\n";
  return kOk;
}

// ---------------------------------------------------------------------------
// transcribe

struct TranscribeOptions {
  std::string model;
  std::vector<std::string> wavs;
  std::string decoder = "greedy";
  std::size_t beam_width = 8;
  bool verbose = false;
};

int cmd_transcribe(const TranscribeOptions& o) {
  const AcousticModel model = open_model(resolve_model(o.model));
  const DecoderKind dec = parse_decoder(o.decoder);
  for (const auto& path : o.wavs) {
    const Waveform x = read_wav(path);
    const Tensor logits = model.logits(x);
    const std::string text = Alphabet::decode(model.decode(logits, dec, o.beam_width));
    if (o.wavs.size() > 1) std::cout << path << "\t";
    std::cout << text << "\n";
    if (o.verbose) std::cout << "frames: " << Alphabet::decode(ctc::argmax_rows(logits)) << "\n";
  }
  return kOk;
}

// ---------------------------------------------------------------------------
// attack

struct AttackOptions {
  std::string model;
  std::vector<std::string> wavs;
  std::string from_corpus;
  std::size_t limit = 0;
  std::string target;
  bool random_targets = false;
  std::size_t target_min_len = 2;
  std::size_t target_max_len = 3;
  bool silence = false;
  bool dense = false;
  std::string mode = "ctc";
  std::string robust = "none";
  std::string out;
  bool force = false;
  std::size_t workers = default_workers();
  bool verbose = false;
  AttackConfig cfg;
  std::string decoder = "greedy";
  double noise_db = -30.0;
};

struct AttackJob {
  std::string name;
  std::string source_path;
  Waveform x;
  std::string target;
};

std::string dense_target(std::size_t frames, std::size_t offset) {
  std::string t(frames, 'a');
  for (std::size_t i = 0; i < frames; ++i) t[i] = static_cast<char>('a' + (i + offset) % 26);
  return t;
}

json attack_config_snapshot(const AttackOptions& o) {
  json c = attack_config_to_json(o.cfg);
  c["mode"] = o.silence ? "silence" : o.dense ? "dense" : o.mode;
  c["robust"] = o.robust;
  return c;
}

AttackResult run_attack(const AttackOptions& o, const AcousticModel& model, const AttackJob& job,
                        const AttackConfig& cfg) {
  if (o.silence) return attack_silence(model, job.x, cfg);
  if (o.dense) return attack_dense(model, job.x, job.target, cfg);
  if (o.robust == "noise") return attack_robust_noise(model, job.x, job.target, cfg);
  if (o.robust == "codec") return attack_through_codec(model, job.x, job.target, lossy_codec, cfg);
  if (o.mode == "two-step") return attack_two_step(model, job.x, job.target, cfg);
  return attack_ctc(model, job.x, job.target, cfg);
}

std::vector<AttackJob> build_jobs(const AttackOptions& o, const AcousticModel& model) {
  std::vector<AttackJob> jobs;
  if (!o.from_corpus.empty()) {
    auto entries = read_corpus_index(o.from_corpus);
    if (o.limit > 0 && entries.size() > o.limit) entries.resize(o.limit);
    for (auto& e : entries) jobs.push_back({e.id, e.wav.string(), read_wav(e.wav.string()), ""});
  }
  for (const auto& w : o.wavs) jobs.push_back({fs::path(w).stem().string(), w, read_wav(w), ""});
  if (jobs.empty()) throw UsageError("nothing to attack: give WAV files or --from-corpus");

  const auto random = o.random_targets
                          ? random_phrases(jobs.size() * 4, o.target_min_len, o.target_max_len, o.cfg.seed)
                          : std::vector<std::string>{};
  std::size_t next_random = 0;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    AttackJob& j = jobs[i];
    const std::size_t frames = model.featurizer().frame_count(j.x.size());
    if (o.silence) continue;
    if (o.dense) {
      j.target = o.target.empty() ? dense_target(frames, i) : o.target;
      continue;
    }
    if (!o.random_targets) {
      j.target = o.target;
      continue;
    }
    const std::string current = model.transcribe(j.x);
    while (next_random < random.size()) {
      const std::string& cand = random[next_random++];
      if (cand != current && ctc::feasible(Alphabet::encode(cand), frames)) {
        j.target = cand;
        break;
      }
    }
    if (j.target.empty()) throw Error("ran out of random targets for " + j.name);
  }
  return jobs;
}

int cmd_attack(AttackOptions o) {
  const int modes = (!o.target.empty() || o.random_targets) + o.silence;
  if (modes != 1 && !(o.dense && !o.silence)) {
    throw UsageError("choose exactly one of --target, --random-targets or --silence");
  }
  if (o.mode != "ctc" && o.mode != "two-step") throw UsageError("--mode must be ctc or two-step");
  if (o.robust != "none" && o.robust != "noise" && o.robust != "codec") {
    throw UsageError("--robust must be none, noise or codec");
  }
  o.cfg.decoder = parse_decoder(o.decoder);
  o.cfg.noise_db = o.noise_db;
  o.cfg.validate();

  const std::string model_path = resolve_model(o.model);
  const AcousticModel model = open_model(model_path);
  const std::vector<AttackJob> jobs = build_jobs(o, model);
  prepare_out_dir(o.out, o.force);

  Manifest m{"attack", attack_config_snapshot(o), o.cfg.seed};
  m.started = utc_now();
  m.inputs.push_back(model_path);
  const std::string hash = config_hash(m.config);

  std::vector<json> records(jobs.size());
  std::vector<std::string> errors(jobs.size());
  std::mutex log_mu;
  parallel_for(jobs.size(), o.workers, [&](std::size_t i) {
    const AttackJob& job = jobs[i];
    AttackConfig cfg = o.cfg;
    if (o.verbose) {
      cfg.progress = [&](const TraceEntry& e) {
        std::lock_guard<std::mutex> lock(log_mu);
        std::cerr << job.name << " iter " << e.iteration << " loss " << e.loss << " dB "
                  << e.distortion_db << " \"" << e.transcription << "\"\n";
      };
    }
    try {
      const AttackResult r = run_attack(o, model, job, cfg);
      const std::string wav = job.name + ".adv.wav";
      write_wav((fs::path(o.out) / wav).string(), r.adversarial);
      records[i] = result_to_json(r, {job.source_path, wav, hash, o.cfg.seed, "manifest.json"});
      write_text(fs::path(o.out) / (job.name + ".json"), records[i].dump(2) + "\n");
      std::lock_guard<std::mutex> lock(log_mu);
      std::cout << job.name << ": \"" << r.transcription << "\" target \"" << r.target << "\" "
                << (r.success ? "success" : "FAILED") << " dB "
                << (std::isfinite(r.distortion_db) ? format_double(r.distortion_db) : "-inf") << "\n";
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });

  std::vector<json> done;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    if (!errors[i].empty()) {
      std::cerr << jobs[i].name << ": " << errors[i] << "\n";
    } else {
      done.push_back(records[i]);
      m.outputs.push_back(jobs[i].name + ".json");
    }
  }
  if (!done.empty()) {
    const Summary s = summarize(done);
    write_text(fs::path(o.out) / "summary.json", summary_to_json(s).dump(2) + "\n");
    std::cout << "success " << s.successes << "/" << s.records << "\n";
  }
  write_text(fs::path(o.out) / "manifest.json", m.to_json().dump(2) + "\n");
  for (const auto& e : errors) {
    if (!e.empty()) return kError;
  }
  for (const auto& r : done) {
    if (!r["success"].get<bool>()) return kAttackFailed;
  }
  return kOk;
}

// ---------------------------------------------------------------------------
// probe

struct ProbeOptions {
  std::string model;
  std::string wav;
  std::string target;
  int steps = 20;
  std::string out;
  bool force = false;
  AttackConfig cfg;
};

int cmd_probe(const ProbeOptions& o) {
  const std::string model_path = resolve_model(o.model);
  const AcousticModel model = open_model(model_path);
  const Waveform x = read_wav(o.wav);
  if (o.steps < 1) throw UsageError("--steps must be at least 1");
  ctc::require_feasible(Alphabet::encode(o.target), model.featurizer().frame_count(x.size()));
  prepare_out_dir(o.out, o.force);

  Manifest m{"probe", attack_config_to_json(o.cfg), o.cfg.seed};
  m.config["steps"] = o.steps;
  m.started = utc_now();
  m.inputs = {model_path, o.wav};
  const AttackResult r = attack_ctc(model, x, o.target, o.cfg);
  write_wav((fs::path(o.out) / "adversarial.wav").string(), r.adversarial);
  write_text(fs::path(o.out) / "attack.json",
             result_to_json(r, {o.wav, "adversarial.wav", config_hash(m.config), o.cfg.seed, "manifest.json"})
                     .dump(2) + "\n");
  if (!r.success) {
    write_text(fs::path(o.out) / "manifest.json", m.to_json().dump(2) + "\n");
    std::cerr << "attack did not reach \"" << o.target << "\"; no probe written\n";
    return kAttackFailed;
  }
  const auto curve = interpolation_probe(model, x, r.adversarial, o.target, o.steps);
  std::ostringstream csv;
  write_probe_csv(csv, curve);
  write_text(fs::path(o.out) / "probe.csv", csv.str());
  m.outputs = {"adversarial.wav", "attack.json", "probe.csv"};
  write_text(fs::path(o.out) / "manifest.json", m.to_json().dump(2) + "\n");
  std::cout << csv.str();
  return kOk;
}

// ---------------------------------------------------------------------------
// eval

int cmd_eval(const std::string& dir) {
  if (!fs::is_directory(dir)) throw Error(dir + " is not a directory");
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.path().extension() == ".json") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<json> records;
  for (const auto& f : files) {
    json j = read_json(f);
    if (j.is_object() && j.value("schema", "") == kResultSchema) records.push_back(std::move(j));
  }
  if (records.empty()) throw Error("no attack result records in " + dir);
  std::cout << summary_to_json(summarize(records)).dump(2) << "\n";
  return kOk;
}

void add_attack_flags(CLI::App* sub, AttackConfig& cfg) {
  sub->add_option("--iterations", cfg.max_iterations, "Iteration budget per attack")->capture_default_str();
  sub->add_option("--lr", cfg.learning_rate, "Adam learning rate")->capture_default_str();
  sub->add_option("--initial-c", cfg.initial_c, "Initial loss constant c")->capture_default_str();
  sub->add_option("--shrink", cfg.shrink, "tau shrink factor on each success")->capture_default_str();
  sub->add_option("--kappa", cfg.kappa, "Margin inside the hinge losses")->capture_default_str();
  sub->add_option("--patience", cfg.patience, "Stop after this many iterations without a new success (0: never)")
      ->capture_default_str();
  sub->add_option("--seed", cfg.seed, "Seed for noise draws")->capture_default_str();
  sub->add_option("--log-every", cfg.log_every, "Trace interval in iterations")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Targeted adversarial examples against a toy CTC speech recognizer"};
  app.set_config("--config", "", "Read options from a TOML/INI file; command-line flags win");
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  SynthOptions so;
  auto* synth = app.add_subcommand("synth", "Synthesize a tone-language corpus");
  synth->add_option("--out", so.out, "Output directory")->required();
  synth->add_option("--count", so.count, "Number of utterances")->capture_default_str();
  synth->add_option("--min-len", so.min_len, "Shortest phrase")->capture_default_str();
  synth->add_option("--max-len", so.max_len, "Longest phrase")->capture_default_str();
  synth->add_option("--seed", so.seed, "Random seed")->capture_default_str();
  synth->add_option("--char-ms", so.char_ms, "Duration of one character")->capture_default_str();
  synth->add_flag("--force", so.force, "Write into a non-empty directory");

  TrainOptions to;
  auto* trn = app.add_subcommand("train", "Train the recognizer on a corpus directory");
  trn->add_option("--corpus", to.corpora, "Corpus directory from synth (repeatable)")->required();
  trn->add_option("--model-out", to.model_out, "Checkpoint path")->required();
  trn->add_option("--epochs", to.epochs)->capture_default_str();
  trn->add_option("--lr", to.lr)->capture_default_str();
  trn->add_option("--holdout", to.holdout, "Held-out fraction")->capture_default_str();
  trn->add_option("--hidden", to.hidden, "LSTM width")->capture_default_str();
  trn->add_option("--seed", to.seed)->capture_default_str();
  trn->add_option("--codec-augment-stride", to.codec_stride,
                  "Add a codec-processed copy of every n-th training utterance (0: off)")
      ->capture_default_str();
  trn->add_flag("--quiet", to.quiet, "No per-epoch log");

  TranscribeOptions tro;
  auto* tr = app.add_subcommand("transcribe", "Transcribe WAV files");
  tr->add_option("wavs", tro.wavs, "16-bit mono WAV files")->required()->check(CLI::ExistingFile);
  tr->add_option("--model", tro.model, std::string("Checkpoint (default: $") + kModelEnv + ")");
  tr->add_option("--decoder", tro.decoder, "greedy or beam")->capture_default_str();
  tr->add_option("--beam-width", tro.beam_width)->capture_default_str();
  tr->add_flag("--verbose", tro.verbose, "Also print the per-frame argmax");

  AttackOptions ao;
  auto* atk = app.add_subcommand("attack", "Construct adversarial examples");
  atk->add_option("wavs", ao.wavs, "Source WAV files")->check(CLI::ExistingFile);
  atk->add_option("--model", ao.model, std::string("Checkpoint (default: $") + kModelEnv + ")");
  atk->add_option("--from-corpus", ao.from_corpus, "Attack the utterances of a corpus directory");
  atk->add_option("--limit", ao.limit, "Use only the first n corpus utterances (0: all)");
  atk->add_option("--target", ao.target, "Target phrase");
  atk->add_flag("--random-targets", ao.random_targets, "Draw a random feasible target per source (seeded)");
  atk->add_option("--target-min-len", ao.target_min_len)->capture_default_str();
  atk->add_option("--target-max-len", ao.target_max_len)->capture_default_str();
  atk->add_flag("--silence", ao.silence, "Make the source transcribe as nothing");
  atk->add_flag("--dense", ao.dense, "One character per frame (default target cycles a-z)");
  atk->add_option("--mode", ao.mode, "ctc or two-step")->capture_default_str();
  atk->add_option("--robust", ao.robust, "none, noise or codec")->capture_default_str();
  atk->add_option("--noise-db", ao.noise_db, "Noise level for --robust noise")->capture_default_str();
  atk->add_option("--eot-draws", ao.cfg.eot_draws, "Noise draws per iteration")->capture_default_str();
  atk->add_option("--decoder", ao.decoder, "greedy or beam")->capture_default_str();
  atk->add_option("--out", ao.out, "Output directory")->required();
  atk->add_flag("--force", ao.force, "Write into a non-empty directory");
  atk->add_option("--workers", ao.workers, "Parallel attacks")->capture_default_str();
  atk->add_flag("--verbose", ao.verbose, "Log progress every --log-every iterations");
  add_attack_flags(atk, ao.cfg);

  ProbeOptions po;
  auto* prb = app.add_subcommand("probe", "Attack, then compare the loss along the attack and FGSM directions");
  prb->add_option("wav", po.wav, "Source WAV")->required()->check(CLI::ExistingFile);
  prb->add_option("--model", po.model, std::string("Checkpoint (default: $") + kModelEnv + ")");
  prb->add_option("--target", po.target, "Target phrase")->required();
  prb->add_option("--steps", po.steps, "Interpolation steps")->capture_default_str();
  prb->add_option("--out", po.out, "Output directory")->required();
  prb->add_flag("--force", po.force, "Write into a non-empty directory");
  add_attack_flags(prb, po.cfg);

  std::string eval_dir;
  auto* ev = app.add_subcommand("eval", "Summarize a directory of attack results");
  ev->add_option("results", eval_dir, "Directory holding attack JSON records")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*synth) return cmd_synth(so);
    if (*trn) return cmd_train(to);
    if (*tr) return cmd_transcribe(tro);
    if (*atk) return cmd_attack(ao);
    if (*prb) return cmd_probe(po);
    if (*ev) return cmd_eval(eval_dir);
  } catch (const InfeasibleTargetError& e) {
    std::cerr << "error: infeasible target: " << e.what() << "\n";
    return kError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kError;
  }
  return kError;
}
