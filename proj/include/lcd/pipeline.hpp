#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <vector>

#include "lcd/evaluation.hpp"
#include "lcd/geometry.hpp"
#include "lcd/vocabulary.hpp"

namespace lcd {

struct TrainParams {
  int branching = 10;
  std::uint64_t seed = 0;
  int max_depth = 10;
  int min_split_count = 0;  // 0 selects the branching factor
  RansacParams ransac{};
};

struct TrainSummary {
  int frames = 0;
  int groups = 0;
  double gamma_bar = 0.0;
  bool gamma_warning = false;  // no feature was tracked more than once
  int word_count = 0;
  int max_depth = 0;
  bool forced_root_split = false;
  std::map<StopReason, int> stop_histogram;
};

// Off-line training: fit the scaler, track features over consecutive frames
// with the two-step matcher, aggregate the compact database, and train and
// serialize the vocabulary.  Throws InsufficientSequenceError below 2 frames.
TrainSummary run_train(const std::filesystem::path& features_dir,
                       const std::filesystem::path& vocab_out, const TrainParams& params);

struct DetectParams {
  int eta = 100;
  double zeta_threshold = 0.55;
  int top_t = 50;
  Verifier verifier = Verifier::graph;
  double alpha = 0.0;
  bool timing = false;
  RansacParams ransac{};
  std::filesystem::path graph_dump_dir;  // non-empty: write one dump per verified pair
};

// On-line detection over a sequence directory: per frame scale, convert to a
// BoW vector, query the database, verify the candidate, then add the frame.
// Writes one CSV row per query when records_out is non-empty.
std::vector<DetectionRecord> run_detect(const std::filesystem::path& features_dir,
                                        const std::filesystem::path& vocab_path,
                                        const std::filesystem::path& records_out,
                                        const DetectParams& params);

// P-R sweep over recorded detections against ground truth.
EvalResult run_evaluate(const std::filesystem::path& records_csv,
                        const std::filesystem::path& gt_csv,
                        const std::filesystem::path& pr_out, SweepMode mode, int gt_window = 0);

}  // namespace lcd
