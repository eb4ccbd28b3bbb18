// Copyright (c) 2026 The privmotion authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "privmotion/dataset.hpp"
#include "privmotion/strings.hpp"
#include "privmotion/trainer.hpp"

namespace privmotion {

/// Everything a run needs, serializable as a flat key=value file. Defaults
/// here, then config file, then command-line flags, then PRIVMOTION_SEED —
/// later layers win. The manifest written next to every artifact is exactly
/// this struct echoed back, so a manifest is itself a valid config file.
struct RunConfig {
  TrainConfig train;

  std::string data_dir;
  std::string eval_dir;  // empty: fall back to data_dir
  std::string out_dir = "out";
  std::string checkpoint;      // eval / predict input
  std::string itp_checkpoint;  // train-fp teacher input
  std::size_t stride = 5;
  std::size_t eval_stride = 20;
  std::vector<int> ms_list = {80, 160, 320, 400, 560, 1000};
  std::vector<std::size_t> p_list = {0, 1, 5, 10};
  double psl_weight = 0.6;

  std::size_t synth_joints = 11;
  std::size_t synth_frames = 240;
  double synth_fps = 25.0;
  SeqKind synth_kind = SeqKind::kPositions;
  std::size_t synth_count = 2;
  double freq_min = 0.2;
  double freq_max = 1.2;
  double amp_min = 0.5;
  double amp_max = 2.5;
  double drift_rate = 0.1;

  const std::string& eval_source() const {
    return eval_dir.empty() ? data_dir : eval_dir;
  }
  SynthSpec synth_spec(std::uint64_t seed) const {
    return SynthSpec{synth_joints, synth_frames, synth_fps, synth_kind,
                     freq_min,     freq_max,     amp_min,   amp_max,
                     drift_rate,   seed};
  }
};

namespace detail {

inline std::uint64_t cfg_count(const std::string& v, const std::string& key) {
  char* end = nullptr;
  const unsigned long long r = std::strtoull(v.c_str(), &end, 10);
  if (v.empty() || end != v.c_str() + v.size()) {
    throw ConfigError("config key '" + key + "': expected a count, got '" + v +
                      "'");
  }
  return r;
}

inline double cfg_real(const std::string& v, const std::string& key) {
  try {
    return parse_real(v, "config key '" + key + "'");
  } catch (const ParseError& e) {
    throw ConfigError(e.what());
  }
}

inline bool cfg_bool(const std::string& v, const std::string& key) {
  if (v == "1" || v == "true") return true;
  if (v == "0" || v == "false") return false;
  throw ConfigError("config key '" + key + "': expected 0/1, got '" + v + "'");
}

inline std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::string cur;
  for (const char c : v) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

inline std::string join_counts(const std::vector<std::size_t>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(v[i]);
  }
  return out;
}

inline std::string join_ints(const std::vector<int>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(v[i]);
  }
  return out;
}

}  // namespace detail

/// Applies one key=value pair; unknown keys are rejected loudly.
inline void apply_config_key(RunConfig& cfg, const std::string& key,
                             const std::string& value) {
  using detail::cfg_bool;
  using detail::cfg_count;
  using detail::cfg_real;
  TrainConfig& t = cfg.train;
  if (key == "n") t.n = cfg_count(value, key);
  else if (key == "t") t.t = cfg_count(value, key);
  else if (key == "p") t.p = cfg_count(value, key);
  else if (key == "coeffs") t.coeffs = cfg_count(value, key);
  else if (key == "hidden") t.hidden = cfg_count(value, key);
  else if (key == "lr0") t.lr0 = cfg_real(value, key);
  else if (key == "decay") t.decay = cfg_real(value, key);
  else if (key == "decay_every") t.decay_every = cfg_count(value, key);
  else if (key == "dropout") t.dropout = cfg_real(value, key);
  else if (key == "batch") t.batch = cfg_count(value, key);
  else if (key == "epochs_itp") t.epochs_itp = cfg_count(value, key);
  else if (key == "epochs_fp") t.epochs_fp = cfg_count(value, key);
  else if (key == "lambda") t.lambda = cfg_real(value, key);
  else if (key == "clip_norm") t.clip_norm = cfg_real(value, key);
  else if (key == "seed") t.seed = cfg_count(value, key);
  else if (key == "metric") t.metric = parse_metric(value);
  else if (key == "itp_skip_obs") t.itp_skip_obs = cfg_real(value, key);
  else if (key == "itp_skip_priv") t.itp_skip_priv = cfg_real(value, key);
  else if (key == "warm_start_fp") t.warm_start_fp = cfg_bool(value, key);
  else if (key == "data_dir") cfg.data_dir = value;
  else if (key == "eval_dir") cfg.eval_dir = value;
  else if (key == "out_dir") cfg.out_dir = value;
  else if (key == "checkpoint") cfg.checkpoint = value;
  else if (key == "itp_checkpoint") cfg.itp_checkpoint = value;
  else if (key == "stride") cfg.stride = cfg_count(value, key);
  else if (key == "eval_stride") cfg.eval_stride = cfg_count(value, key);
  else if (key == "psl_weight") cfg.psl_weight = cfg_real(value, key);
  else if (key == "ms_list") {
    cfg.ms_list.clear();
    for (const std::string& tok : detail::split_list(value)) {
      cfg.ms_list.push_back(static_cast<int>(cfg_count(detail::trim(tok), key)));
    }
  } else if (key == "p_list") {
    cfg.p_list.clear();
    for (const std::string& tok : detail::split_list(value)) {
      cfg.p_list.push_back(
          static_cast<std::size_t>(cfg_count(detail::trim(tok), key)));
    }
  } else if (key == "synth_joints") cfg.synth_joints = cfg_count(value, key);
  else if (key == "synth_frames") cfg.synth_frames = cfg_count(value, key);
  else if (key == "synth_fps") cfg.synth_fps = cfg_real(value, key);
  else if (key == "synth_kind") {
    try {
      cfg.synth_kind = parse_kind(value);
    } catch (const ParseError& e) {
      throw ConfigError(e.what());
    }
  } else if (key == "synth_count") cfg.synth_count = cfg_count(value, key);
  else if (key == "freq_min") cfg.freq_min = cfg_real(value, key);
  else if (key == "freq_max") cfg.freq_max = cfg_real(value, key);
  else if (key == "amp_min") cfg.amp_min = cfg_real(value, key);
  else if (key == "amp_max") cfg.amp_max = cfg_real(value, key);
  else if (key == "drift_rate") cfg.drift_rate = cfg_real(value, key);
  else {
    throw ConfigError("unknown config key '" + key + "'");
  }
}

inline void apply_config_text(RunConfig& cfg, const std::string& text,
                              const std::string& source) {
  std::istringstream is(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (detail::skippable(line)) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(source + ":" + std::to_string(lineno) +
                        ": expected key=value");
    }
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    if (key.empty()) {
      throw ConfigError(source + ":" + std::to_string(lineno) + ": empty key");
    }
    try {
      apply_config_key(cfg, key, value);
    } catch (const ConfigError& e) {
      throw ConfigError(source + ":" + std::to_string(lineno) + ": " +
                        e.what());
    }
  }
}

inline void apply_config_file(RunConfig& cfg, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  apply_config_text(cfg, buf.str(), path.string());
}

/// CI hook: PRIVMOTION_SEED beats every other seed source.
inline void apply_env_overrides(RunConfig& cfg) {
  if (const char* env = std::getenv("PRIVMOTION_SEED")) {
    cfg.train.seed = detail::cfg_count(env, "PRIVMOTION_SEED");
  }
}

/// Canonical echo: sorted keys, 17-significant-digit reals. Feeding the
/// result back through apply_config_text reproduces the struct exactly.
inline std::string serialize_run_config(const RunConfig& cfg) {
  using detail::fmt17;
  const TrainConfig& t = cfg.train;
  std::map<std::string, std::string> kv;
  kv["n"] = std::to_string(t.n);
  kv["t"] = std::to_string(t.t);
  kv["p"] = std::to_string(t.p);
  kv["coeffs"] = std::to_string(t.coeffs);
  kv["hidden"] = std::to_string(t.hidden);
  kv["lr0"] = fmt17(t.lr0);
  kv["decay"] = fmt17(t.decay);
  kv["decay_every"] = std::to_string(t.decay_every);
  kv["dropout"] = fmt17(t.dropout);
  kv["batch"] = std::to_string(t.batch);
  kv["epochs_itp"] = std::to_string(t.epochs_itp);
  kv["epochs_fp"] = std::to_string(t.epochs_fp);
  kv["lambda"] = fmt17(t.lambda);
  kv["clip_norm"] = fmt17(t.clip_norm);
  kv["seed"] = std::to_string(t.seed);
  kv["metric"] = metric_name(t.metric);
  kv["itp_skip_obs"] = fmt17(t.itp_skip_obs);
  kv["itp_skip_priv"] = fmt17(t.itp_skip_priv);
  kv["warm_start_fp"] = t.warm_start_fp ? "1" : "0";
  kv["data_dir"] = cfg.data_dir;
  kv["eval_dir"] = cfg.eval_dir;
  kv["out_dir"] = cfg.out_dir;
  kv["checkpoint"] = cfg.checkpoint;
  kv["itp_checkpoint"] = cfg.itp_checkpoint;
  kv["stride"] = std::to_string(cfg.stride);
  kv["eval_stride"] = std::to_string(cfg.eval_stride);
  kv["psl_weight"] = fmt17(cfg.psl_weight);
  kv["ms_list"] = detail::join_ints(cfg.ms_list);
  kv["p_list"] = detail::join_counts(cfg.p_list);
  kv["synth_joints"] = std::to_string(cfg.synth_joints);
  kv["synth_frames"] = std::to_string(cfg.synth_frames);
  kv["synth_fps"] = fmt17(cfg.synth_fps);
  kv["synth_kind"] = kind_name(cfg.synth_kind);
  kv["synth_count"] = std::to_string(cfg.synth_count);
  kv["freq_min"] = fmt17(cfg.freq_min);
  kv["freq_max"] = fmt17(cfg.freq_max);
  kv["amp_min"] = fmt17(cfg.amp_min);
  kv["amp_max"] = fmt17(cfg.amp_max);
  kv["drift_rate"] = fmt17(cfg.drift_rate);
  std::string out;
  for (const auto& [key, value] : kv) {
    out += key;
    out += '=';
    out += value;
    out += '\n';
  }
  return out;
}

inline void validate_run_config(const RunConfig& cfg) {
  validate_train_config(cfg.train);
  if (cfg.stride == 0 || cfg.eval_stride == 0) {
    throw ConfigError("stride and eval_stride must be >= 1");
  }
  if (cfg.ms_list.empty()) throw ConfigError("ms_list must not be empty");
  for (const int ms : cfg.ms_list) {
    if (ms <= 0) throw ConfigError("ms_list entries must be positive");
  }
  if (cfg.psl_weight < 0.0) throw ConfigError("psl_weight must be >= 0");
  if (cfg.synth_joints < 2) throw ConfigError("synth_joints must be >= 2");
  if (cfg.synth_frames == 0) throw ConfigError("synth_frames must be >= 1");
  if (cfg.synth_count == 0) throw ConfigError("synth_count must be >= 1");
  if (!(cfg.synth_fps > 0.0)) throw ConfigError("synth_fps must be positive");
}

}  // namespace privmotion
