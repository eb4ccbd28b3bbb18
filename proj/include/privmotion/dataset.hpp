// Copyright (c) 2026 The privmotion authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "privmotion/errors.hpp"
#include "privmotion/mat.hpp"
#include "privmotion/preprocess.hpp"
#include "privmotion/rng.hpp"
#include "privmotion/strings.hpp"

namespace privmotion {

enum class SeqKind { kPositions, kAngles };

inline const char* kind_name(SeqKind k) {
  return k == SeqKind::kPositions ? "positions" : "angles";
}

inline SeqKind parse_kind(const std::string& s) {
  if (s == "positions") return SeqKind::kPositions;
  if (s == "angles") return SeqKind::kAngles;
  throw ParseError("kind must be 'positions' or 'angles', got '" + s + "'");
}

/// One action recording: K pose parameters over L frames. Positions data
/// stores xyz triples per joint, so K is divisible by 3 and joint 0 is the
/// root.
struct Recording {
  std::string name;
  double fps = 25.0;
  SeqKind kind = SeqKind::kPositions;
  Mat frames;  // K x L

  std::size_t k() const noexcept { return frames.rows(); }
  std::size_t length() const noexcept { return frames.cols(); }
};

inline void validate_recording(const Recording& r) {
  if (!(r.fps > 0.0) || !std::isfinite(r.fps)) {
    throw ParseError(r.name + ": fps must be positive and finite");
  }
  if (r.k() == 0 || r.length() == 0) {
    throw ParseError(r.name + ": recording must have at least one row and frame");
  }
  if (r.kind == SeqKind::kPositions && r.k() % 3 != 0) {
    throw ParseError(r.name + ": positions data needs K divisible by 3, got K=" +
                     std::to_string(r.k()));
  }
}

// ---------------------------------------------------------------------------
// .mseq text format.
//   MSEQ1 <kind> <fps> <K> <L>
//   <K space-separated reals>   (L data lines, one frame per line)
// Lines starting with '#' and blank lines are skipped. Values are printed at
// 17 significant digits, so parse(serialize(r)) reproduces every double.
// ---------------------------------------------------------------------------

inline Recording parse_mseq(std::istream& in, const std::string& name) {
  Recording r;
  r.name = name;
  std::string line;
  std::size_t lineno = 0;
  auto where = [&] { return name + ":" + std::to_string(lineno); };

  // Header.
  std::size_t want_k = 0;
  std::size_t want_l = 0;
  for (;;) {
    if (!std::getline(in, line)) throw ParseError(name + ": missing header");
    ++lineno;
    if (detail::skippable(line)) continue;
    const auto tok = detail::split_ws(line);
    if (tok.size() != 5 || tok[0] != "MSEQ1") {
      throw ParseError(where() + ": expected 'MSEQ1 <kind> <fps> <K> <L>'");
    }
    r.kind = parse_kind(tok[1]);
    r.fps = detail::parse_real(tok[2], where());
    const long k = std::atol(tok[3].c_str());
    const long l = std::atol(tok[4].c_str());
    if (k <= 0 || l <= 0) {
      throw ParseError(where() + ": K and L must be positive integers");
    }
    want_k = static_cast<std::size_t>(k);
    want_l = static_cast<std::size_t>(l);
    break;
  }

  r.frames = Mat(want_k, want_l);
  std::size_t frame = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::skippable(line)) continue;
    if (frame == want_l) {
      throw ParseError(where() + ": trailing content after " +
                       std::to_string(want_l) + " frames");
    }
    const auto tok = detail::split_ws(line);
    if (tok.size() != want_k) {
      throw ParseError(where() + ": expected " + std::to_string(want_k) +
                       " values, got " + std::to_string(tok.size()));
    }
    for (std::size_t i = 0; i < want_k; ++i) {
      r.frames(i, frame) = detail::parse_real(tok[i], where());
    }
    ++frame;
  }
  if (frame != want_l) {
    throw ParseError(name + ": expected " + std::to_string(want_l) +
                     " frames, got " + std::to_string(frame));
  }
  validate_recording(r);
  return r;
}

inline Recording parse_mseq(const std::string& text, const std::string& name) {
  std::istringstream is(text);
  return parse_mseq(is, name);
}

inline std::string serialize_mseq(const Recording& r) {
  validate_recording(r);
  if (!all_finite(r.frames)) {
    throw ContractError(r.name + ": cannot serialize non-finite values");
  }
  std::string out = "MSEQ1 ";
  out += kind_name(r.kind);
  out += ' ';
  out += detail::fmt17(r.fps);
  out += ' ';
  out += std::to_string(r.k());
  out += ' ';
  out += std::to_string(r.length());
  out += '\n';
  for (std::size_t f = 0; f < r.length(); ++f) {
    for (std::size_t i = 0; i < r.k(); ++i) {
      if (i != 0) out += ' ';
      out += detail::fmt17(r.frames(i, f));
    }
    out += '\n';
  }
  return out;
}

inline Recording load_recording(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  return parse_mseq(in, path.stem().string());
}

inline void save_recording(const Recording& r, const std::filesystem::path& path) {
  const std::string text = serialize_mseq(r);
  std::ofstream out(path, std::ios::binary);  // keep LF endings everywhere
  if (!out.write(text.data(), static_cast<std::streamsize>(text.size()))) {
    throw IoError("cannot write '" + path.string() + "'");
  }
}

/// Loads one .mseq file, or every *.mseq in a directory in lexicographic
/// filename order (so dataset order never depends on readdir order).
inline std::vector<Recording> load_recordings(const std::filesystem::path& path) {
  namespace fs = std::filesystem;
  if (!fs::exists(path)) throw IoError("no such path '" + path.string() + "'");
  if (fs::is_regular_file(path)) return {load_recording(path)};
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(path)) {
    if (entry.is_regular_file() && entry.path().extension() == ".mseq") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end(),
            [](const fs::path& a, const fs::path& b) {
              return a.filename().string() < b.filename().string();
            });
  std::vector<Recording> out;
  out.reserve(files.size());
  for (const auto& f : files) out.push_back(load_recording(f));
  return out;
}

// ---------------------------------------------------------------------------
// Canonicalization: zero the global translation and downsample. Global
// rotation zeroing is a no-op here — synthetic data is generated rootless,
// and proper rotation removal needs skeleton metadata we don't define.
// ---------------------------------------------------------------------------

inline Recording canonicalize(const Recording& r, double target_fps) {
  if (!(target_fps > 0.0)) throw ConfigError("target fps must be positive");
  if (target_fps > r.fps) {
    throw ConfigError("cannot upsample " + r.name + " from " +
                      detail::fmt17(r.fps) + " to " + detail::fmt17(target_fps) +
                      " fps");
  }
  const auto step = static_cast<std::size_t>(std::llround(r.fps / target_fps));
  const std::size_t kept = (r.length() + step - 1) / step;
  Recording out;
  out.name = r.name;
  out.kind = r.kind;
  out.fps = r.fps / static_cast<double>(step);
  out.frames = Mat(r.k(), kept);
  for (std::size_t f = 0; f < kept; ++f) {
    const std::size_t src = f * step;
    for (std::size_t i = 0; i < r.k(); ++i) out.frames(i, f) = r.frames(i, src);
    if (r.kind == SeqKind::kPositions) {
      const double rx = out.frames(0, f);
      const double ry = out.frames(1, f);
      const double rz = out.frames(2, f);
      for (std::size_t j = 0; j < r.k() / 3; ++j) {
        out.frames(3 * j + 0, f) -= rx;
        out.frames(3 * j + 1, f) -= ry;
        out.frames(3 * j + 2, f) -= rz;
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Synthetic quasi-periodic motion.
// ---------------------------------------------------------------------------

/// Each channel is a per-seed sum of 2-3 sinusoids around a constant center,
/// plus a slow linear drift. The drift slope is scaled by the mean amplitude,
/// so zero amplitudes give an exactly constant recording.
struct SynthSpec {
  std::size_t joints = 11;
  std::size_t frames = 120;
  double fps = 25.0;
  SeqKind kind = SeqKind::kPositions;
  double freq_min = 0.2;   // Hz
  double freq_max = 1.2;   // Hz
  double amp_min = 0.5;
  double amp_max = 2.5;
  double drift_rate = 0.1;  // fraction of mean amplitude per second
  std::uint64_t seed = 1;
};

inline constexpr std::size_t kSynthMaxComponents = 3;

/// Largest possible per-channel adjacent-frame displacement; synthetic
/// recordings stay strictly below this bound.
inline double synth_step_bound(const SynthSpec& s) {
  const double mean_amp = 0.5 * (s.amp_min + s.amp_max);
  const double wave = static_cast<double>(kSynthMaxComponents) * s.amp_max *
                      2.0 * std::numbers::pi * s.freq_max;
  return (wave + s.drift_rate * mean_amp) / s.fps;
}

inline Recording synth_generate(const SynthSpec& s) {
  if (s.joints < 2) throw ConfigError("synth: need at least 2 joints");
  if (s.frames < 1) throw ConfigError("synth: need at least 1 frame");
  if (!(s.fps > 0.0)) throw ConfigError("synth: fps must be positive");
  if (s.freq_min > s.freq_max || s.amp_min > s.amp_max || s.amp_min < 0.0 ||
      s.freq_min < 0.0 || s.drift_rate < 0.0) {
    throw ConfigError("synth: malformed frequency/amplitude ranges");
  }

  const std::size_t channels =
      s.kind == SeqKind::kPositions ? 3 * s.joints : s.joints;
  const double mean_amp = 0.5 * (s.amp_min + s.amp_max);
  Rng rng(s.seed);

  Recording r;
  r.name = "synth-" + std::to_string(s.seed);
  r.fps = s.fps;
  r.kind = s.kind;
  r.frames = Mat(channels, s.frames);

  struct Component {
    double amp, freq, phase;
  };
  std::vector<Component> comps;
  for (std::size_t ch = 0; ch < channels; ++ch) {
    comps.clear();
    const std::size_t n = 2 + rng.below(kSynthMaxComponents - 1);
    for (std::size_t i = 0; i < n; ++i) {
      comps.push_back({rng.uniform(s.amp_min, s.amp_max),
                       rng.uniform(s.freq_min, s.freq_max),
                       rng.uniform(0.0, 2.0 * std::numbers::pi)});
    }
    const double center = rng.uniform(-s.amp_max, s.amp_max);
    const double drift = rng.uniform(-1.0, 1.0) * s.drift_rate * mean_amp;
    for (std::size_t f = 0; f < s.frames; ++f) {
      const double t = static_cast<double>(f) / s.fps;
      double v = center + drift * t;
      for (const auto& c : comps) {
        v += c.amp * std::sin(2.0 * std::numbers::pi * c.freq * t + c.phase);
      }
      r.frames(ch, f) = v;
    }
  }
  return r;
}

/// Windows every recording (per-recording frame_ms, never across files) and
/// concatenates the samples in recording order.
inline std::vector<MotionWindow> make_dataset(const std::vector<Recording>& recs,
                                              std::size_t n, std::size_t t,
                                              std::size_t p, std::size_t stride) {
  std::vector<MotionWindow> out;
  for (const Recording& r : recs) {
    auto w = make_window_samples(r.frames, n, t, p, stride, 1000.0 / r.fps);
    out.insert(out.end(), std::make_move_iterator(w.begin()),
               std::make_move_iterator(w.end()));
  }
  return out;
}

}  // namespace privmotion
