#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "lcd/feature_io.hpp"

namespace lcd {

enum class MotionModel { identity, planar };

// Desk-scale sequence generator.  A sequence visits `places` distinct places
// in order, frames_per_place frames each, then appends single-frame revisits
// of early places interleaved with aliased distractors.  An aliased frame
// reuses a place's descriptor multiset but lays the key points out at fresh
// random positions, so it fools appearance matching while carrying an
// unrelated geometry.
struct SynthConfig {
  int places = 1;
  int frames_per_place = 1;
  int revisits = 0;
  double noise_sigma = 0.0;
  double jitter_px = 0.0;
  int aliased_frames = 0;
  double outlier_frac = 0.0;
  int descriptor_dim = 256;
  int features_per_frame = 100;
  MotionModel motion = MotionModel::identity;

  // Flat key=value text file; '#' starts a comment line.
  static SynthConfig from_file(const std::filesystem::path& path);
  void validate() const;  // throws ConfigError
};

struct LoopPair {
  int query_id = 0;
  int match_id = 0;

  friend bool operator==(const LoopPair&, const LoopPair&) = default;
};

struct SynthSequence {
  std::vector<FrameFeatures> frames;
  std::vector<LoopPair> ground_truth;  // sorted by (query_id, match_id); aliases excluded
  std::vector<int> alias_frame_ids;    // distractor frames, never ground truth
};

// Deterministic for fixed (config, seed).
SynthSequence synth_generate_sequence(const SynthConfig& config, std::uint64_t seed);

// Writes frames as NNNNNN.lcdf plus ground_truth.csv into dir.
void write_sequence(const SynthSequence& seq, const std::filesystem::path& dir);

}  // namespace lcd
