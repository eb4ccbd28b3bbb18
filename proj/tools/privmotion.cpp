// Copyright (c) 2026 The privmotion authors
// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end. Exit codes: 0 success, 2 config error, 3 data
// error, 4 checkpoint error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "privmotion/privmotion.hpp"
#include "privmotion/version.hpp"

namespace fs = std::filesystem;
using namespace privmotion;

namespace {

// Flags are recorded as (config key, raw value) pairs and applied over the
// config file, which itself is applied over the defaults. PRIVMOTION_SEED
// beats everything.
struct FlagSet {
  std::string config_path;
  std::vector<std::pair<std::string, std::string>> applied;
};

void add_option(CLI::App* sub, FlagSet& fs, const std::string& flag,
                const std::string& key, const std::string& help) {
  sub->add_option_function<std::string>(
      flag,
      [key, &fs](const std::string& v) { fs.applied.emplace_back(key, v); },
      help);
}

void add_common_flags(CLI::App* sub, FlagSet& fs) {
  sub->add_option("--config", fs.config_path, "key=value config file");
  add_option(sub, fs, "--data", "data_dir", "training data (.mseq file or directory)");
  add_option(sub, fs, "--eval-data", "eval_dir", "evaluation data; defaults to --data");
  add_option(sub, fs, "--out", "out_dir", "artifact directory");
  add_option(sub, fs, "--seed", "seed", "rng seed");
  add_option(sub, fs, "--n", "n", "observed frames");
  add_option(sub, fs, "--t", "t", "predicted frames");
  add_option(sub, fs, "--p", "p", "privileged frames");
  add_option(sub, fs, "--coeffs", "coeffs", "DCT coefficients kept (0 = all)");
  add_option(sub, fs, "--hidden", "hidden", "hidden feature width");
  add_option(sub, fs, "--lr0", "lr0", "initial learning rate");
  add_option(sub, fs, "--decay", "decay", "lr decay factor");
  add_option(sub, fs, "--decay-every", "decay_every", "epochs between decays");
  add_option(sub, fs, "--dropout", "dropout", "dropout rate");
  add_option(sub, fs, "--batch", "batch", "mini-batch size");
  add_option(sub, fs, "--epochs-itp", "epochs_itp", "interpolation epochs");
  add_option(sub, fs, "--epochs-fp", "epochs_fp", "prediction epochs");
  add_option(sub, fs, "--lambda", "lambda", "simulation-loss weight");
  add_option(sub, fs, "--clip-norm", "clip_norm", "gradient clip norm (0 = off)");
  add_option(sub, fs, "--metric", "metric", "mp (positions) or ma (angles)");
  add_option(sub, fs, "--stride", "stride", "training window stride");
  add_option(sub, fs, "--eval-stride", "eval_stride", "evaluation window stride");
  add_option(sub, fs, "--ms-list", "ms_list", "testpoints in ms, comma separated");
  add_option(sub, fs, "--p-list", "p_list", "sweep privileged lengths, comma separated");
  add_option(sub, fs, "--psl-weight", "psl_weight", "privileged-sequence loss weight");
  add_option(sub, fs, "--checkpoint", "checkpoint", "checkpoint to evaluate");
  add_option(sub, fs, "--itp-checkpoint", "itp_checkpoint", "teacher checkpoint for train-fp");
  add_option(sub, fs, "--warm-start-fp", "warm_start_fp", "copy teacher obs/dec weights (0/1)");
  add_option(sub, fs, "--itp-skip-obs", "itp_skip_obs", "outermost skip weight, observed");
  add_option(sub, fs, "--itp-skip-priv", "itp_skip_priv", "outermost skip weight, privileged");
  add_option(sub, fs, "--joints", "synth_joints", "synthetic joints");
  add_option(sub, fs, "--frames", "synth_frames", "synthetic frames per recording");
  add_option(sub, fs, "--fps", "synth_fps", "synthetic frame rate");
  add_option(sub, fs, "--kind", "synth_kind", "positions or angles");
  add_option(sub, fs, "--count", "synth_count", "synthetic recordings to generate");
  add_option(sub, fs, "--freq-min", "freq_min", "synthetic frequency range low (Hz)");
  add_option(sub, fs, "--freq-max", "freq_max", "synthetic frequency range high (Hz)");
  add_option(sub, fs, "--amp-min", "amp_min", "synthetic amplitude range low");
  add_option(sub, fs, "--amp-max", "amp_max", "synthetic amplitude range high");
  add_option(sub, fs, "--drift-rate", "drift_rate", "synthetic drift rate");
}

RunConfig resolve(const FlagSet& fs) {
  RunConfig cfg;
  if (!fs.config_path.empty()) apply_config_file(cfg, fs.config_path);
  for (const auto& [key, value] : fs.applied) apply_config_key(cfg, key, value);
  apply_env_overrides(cfg);
  validate_run_config(cfg);
  return cfg;
}

void write_text_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out.write(text.data(), static_cast<std::streamsize>(text.size()))) {
    throw IoError("cannot write '" + path.string() + "'");
  }
}

void write_manifest(const RunConfig& cfg, const std::string& command) {
  fs::create_directories(cfg.out_dir);
  std::string text = std::string("# privmotion ") + kVersion + "\n# command: " +
                     command + "\n" + serialize_run_config(cfg);
  write_text_file(fs::path(cfg.out_dir) / "manifest.cfg", text);
  std::cout << "wrote " << (fs::path(cfg.out_dir) / "manifest.cfg").string()
            << "\n";
}

std::vector<Recording> load_data(const std::string& dir, const char* which) {
  if (dir.empty()) {
    throw ConfigError(std::string(which) + " is required (set data_dir)");
  }
  return load_recordings(dir);
}

std::vector<MotionWindow> train_windows(const RunConfig& cfg) {
  auto w = make_dataset(load_data(cfg.data_dir, "data_dir"), cfg.train.n,
                        cfg.train.t, cfg.train.p, cfg.stride);
  if (w.empty()) {
    throw ParseError("no training windows: recordings under '" + cfg.data_dir +
                     "' are shorter than " + std::to_string(cfg.train.total()) +
                     " frames");
  }
  return w;
}

std::vector<MotionWindow> eval_windows(const RunConfig& cfg,
                                       const TrainConfig& shape) {
  auto w = make_dataset(load_data(cfg.eval_source(), "eval_dir"), shape.n,
                        shape.t, shape.p, cfg.eval_stride);
  if (w.empty()) {
    throw ParseError("no evaluation windows: recordings under '" +
                     cfg.eval_source() + "' are shorter than " +
                     std::to_string(shape.total()) + " frames");
  }
  return w;
}

void save_artifacts(const RunConfig& cfg, const StageArtifacts& art,
                    std::size_t k, MetaMap extra = {}) {
  fs::create_directories(cfg.out_dir);
  const std::string name = stage_name(art.stage);
  const fs::path ck = fs::path(cfg.out_dir) / (name + std::string(".pkck"));
  save_stage(art, cfg.train, k, ck, std::move(extra));
  std::cout << "wrote " << ck.string() << "\n";
  const fs::path curve = fs::path(cfg.out_dir) / ("curve_" + name + ".csv");
  write_text_file(curve, serialize_loss_curve(art));
  std::cout << "wrote " << curve.string() << "\n";
  if (!art.loss_curve.empty()) {
    std::printf("%s loss: first epoch %.6g, last epoch %.6g\n", name.c_str(),
                art.loss_curve.front().total, art.loss_curve.back().total);
  }
}

std::string default_path(const std::string& configured, const RunConfig& cfg,
                         const char* filename) {
  return configured.empty() ? (fs::path(cfg.out_dir) / filename).string()
                            : configured;
}

LoadedStage load_teacher(const std::string& path) {
  LoadedStage teacher = load_stage(path);
  if (teacher.stage != Stage::kItp) {
    throw CheckpointError("checkpoint '" + path + "' holds stage '" +
                          stage_name(teacher.stage) + "', expected 'itp'");
  }
  return teacher;
}

void print_testpoints(const EvalReport& rep) {
  for (const auto& [ms, err] : rep.testpoint_errors) {
    std::printf("%5dms  %-10.6g  (zero-velocity %.6g)\n", ms, err,
                rep.baseline.at(ms));
  }
}

// --------------------------- subcommands ----------------------------------

int cmd_synth(const RunConfig& cfg) {
  fs::create_directories(cfg.out_dir);
  for (std::size_t i = 0; i < cfg.synth_count; ++i) {
    const Recording rec = synth_generate(cfg.synth_spec(cfg.train.seed + i));
    const fs::path path = fs::path(cfg.out_dir) / (rec.name + ".mseq");
    save_recording(rec, path);
    std::cout << "wrote " << path.string() << "\n";
  }
  write_manifest(cfg, "synth");
  return 0;
}

int cmd_train_itp(const RunConfig& cfg) {
  const auto w = train_windows(cfg);
  const StageArtifacts art = train_itp(w, cfg.train);
  save_artifacts(cfg, art, w.front().k());
  write_manifest(cfg, "train-itp");
  return 0;
}

int cmd_train_fp(RunConfig cfg) {
  cfg.itp_checkpoint = default_path(cfg.itp_checkpoint, cfg, "itp.pkck");
  const LoadedStage teacher = load_teacher(cfg.itp_checkpoint);
  const auto w = train_windows(cfg);
  const StageArtifacts art = train_fp(w, &teacher.params, cfg.train);
  save_artifacts(cfg, art, w.front().k());
  write_manifest(cfg, "train-fp");
  return 0;
}

int cmd_train_tp(RunConfig cfg) {
  cfg.train.p = 0;
  cfg.train.lambda = 0.0;
  const auto w = train_windows(cfg);
  const StageArtifacts art = train_fp(w, nullptr, cfg.train, Stage::kTp);
  save_artifacts(cfg, art, w.front().k());
  write_manifest(cfg, "train-tp");
  return 0;
}

int cmd_train_psl(const RunConfig& cfg) {
  const auto w = train_windows(cfg);
  const StageArtifacts art = train_psl(w, cfg.train, cfg.psl_weight);
  save_artifacts(cfg, art, w.front().k(),
                 {{"psl_weight", detail::fmt17(cfg.psl_weight)}});
  write_manifest(cfg, "train-psl");
  return 0;
}

int cmd_eval(RunConfig cfg) {
  cfg.checkpoint = default_path(cfg.checkpoint, cfg, "fp.pkck");
  const LoadedStage loaded = load_stage(cfg.checkpoint);
  const auto w = eval_windows(cfg, loaded.cfg);
  EvalReport rep =
      evaluate_stage(loaded.params, loaded.stage, loaded.cfg, w, cfg.ms_list);
  rep.seed = loaded.cfg.seed;
  rep.checkpoint = cfg.checkpoint;
  fs::create_directories(cfg.out_dir);
  const fs::path report = fs::path(cfg.out_dir) / "report.csv";
  write_text_file(report, report_csv(rep));
  std::cout << "wrote " << report.string() << "\n";
  const fs::path curve = fs::path(cfg.out_dir) / "curve.csv";
  write_text_file(curve, curve_csv(rep));
  std::cout << "wrote " << curve.string() << "\n";
  print_testpoints(rep);
  write_manifest(cfg, "eval");
  return 0;
}

int cmd_predict(RunConfig cfg) {
  cfg.checkpoint = default_path(cfg.checkpoint, cfg, "fp.pkck");
  const LoadedStage loaded = load_stage(cfg.checkpoint);
  const auto recs = load_data(cfg.eval_source(), "eval_dir");
  const auto w = eval_windows(cfg, loaded.cfg);
  const MotionWindow& first = w.front();
  const TrainConfig& tc = loaded.cfg;
  const NetworkConfig net = tc.network(first.k());
  const DctBasis basis(tc.total(), tc.coeff_count());
  const Mat h_obs = dct_encode(pad_observed(first), basis);
  Mat h_out;
  if (loaded.stage == Stage::kItp) {
    h_out = itp_eval(extract_itp(loaded.params), net, h_obs,
                     dct_encode(pad_privileged(first), basis))
                .h_itp;
  } else if (loaded.stage == Stage::kPsl) {
    h_out = psl_eval(extract_psl(loaded.params), net, h_obs);
  } else {
    h_out = fp_eval(extract_fp(loaded.params), net, h_obs).h_fp;
  }
  const Mat pose = idct_decode(h_out, basis);

  Recording out;
  out.name = "prediction";
  out.kind = recs.front().kind;
  out.fps = 1000.0 / first.frame_ms;
  out.frames = Mat(first.k(), tc.t);
  for (std::size_t f = 0; f < tc.t; ++f) {
    for (std::size_t r = 0; r < first.k(); ++r) {
      out.frames(r, f) = pose(r, tc.n + f);
    }
  }
  fs::create_directories(cfg.out_dir);
  const fs::path path = fs::path(cfg.out_dir) / "prediction.mseq";
  save_recording(out, path);
  std::cout << "wrote " << path.string() << "\n";
  write_manifest(cfg, "predict");
  return 0;
}

int cmd_sweep(const RunConfig& cfg) {
  const auto train_recs = load_data(cfg.data_dir, "data_dir");
  const auto eval_recs = load_data(cfg.eval_source(), "eval_dir");
  const SweepReport sw =
      pk_length_sweep(train_recs, eval_recs, cfg.train, cfg.p_list, cfg.ms_list,
                      cfg.stride, cfg.eval_stride);
  fs::create_directories(cfg.out_dir);
  const fs::path path = fs::path(cfg.out_dir) / "sweep.csv";
  write_text_file(path, sweep_csv(sw));
  std::cout << "wrote " << path.string() << "\n";
  for (const SweepRow& row : sw.rows) {
    for (const auto& [ms, err] : row.report.testpoint_errors) {
      std::printf("P=%-3zu %5dms  %-10.6g  (delta vs TP %+.6g)\n", row.p, ms,
                  err, row.delta_vs_tp.at(ms));
    }
  }
  write_manifest(cfg, "sweep");
  return 0;
}

int cmd_baseline(const RunConfig& cfg) {
  const auto w = eval_windows(cfg, cfg.train);
  const EvalReport rep = zero_velocity_report(cfg.train, w, cfg.ms_list);
  fs::create_directories(cfg.out_dir);
  const fs::path path = fs::path(cfg.out_dir) / "baseline.csv";
  write_text_file(path, report_csv(rep));
  std::cout << "wrote " << path.string() << "\n";
  print_testpoints(rep);
  write_manifest(cfg, "baseline");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"privileged-knowledge motion prediction pipeline"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string("privmotion ") + kVersion);

  FlagSet fs_store;
  static const std::vector<std::pair<const char*, const char*>> kCommands = {
      {"synth", "generate synthetic .mseq recordings"},
      {"train-itp", "stage 1: train the interpolation network"},
      {"train-fp", "stage 2: train the prediction network with distillation"},
      {"train-tp", "train the plain predictor (no privileged input)"},
      {"train-psl", "train the direct privileged-sequence-loss baseline"},
      {"eval", "evaluate a checkpoint at the millisecond testpoints"},
      {"predict", "emit one window's forecast as .mseq"},
      {"sweep", "train and evaluate across privileged lengths"},
      {"baseline", "zero-velocity reference errors"},
  };
  for (const auto& [name, help] : kCommands) {
    add_common_flags(app.add_subcommand(name, help), fs_store);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  const std::string cmd = app.get_subcommands().front()->get_name();
  try {
    const RunConfig cfg = resolve(fs_store);
    if (cmd == "synth") return cmd_synth(cfg);
    if (cmd == "train-itp") return cmd_train_itp(cfg);
    if (cmd == "train-fp") return cmd_train_fp(cfg);
    if (cmd == "train-tp") return cmd_train_tp(cfg);
    if (cmd == "train-psl") return cmd_train_psl(cfg);
    if (cmd == "eval") return cmd_eval(cfg);
    if (cmd == "predict") return cmd_predict(cfg);
    if (cmd == "sweep") return cmd_sweep(cfg);
    if (cmd == "baseline") return cmd_baseline(cfg);
    std::cerr << "error: unknown command '" << cmd << "'\n";
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const CheckpointError& e) {
    std::cerr << "checkpoint error: " << e.what() << "\n";
    return 4;
  } catch (const FormatError& e) {
    std::cerr << "checkpoint error: " << e.what() << "\n";
    return 4;
  } catch (const ParseError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const IoError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
