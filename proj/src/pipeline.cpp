#include "lcd/pipeline.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>

#include "lcd/compact_database.hpp"
#include "lcd/graph_verification.hpp"
#include "lcd/retrieval_index.hpp"
#include "lcd/rng.hpp"

namespace lcd {

namespace {

std::vector<FrameFeatures> load_sequence(const std::filesystem::path& dir) {
  const auto files = list_feature_files(dir);
  std::vector<FrameFeatures> frames;
  frames.reserve(files.size());
  std::optional<std::uint32_t> dim;
  for (std::size_t i = 0; i < files.size(); ++i) {
    FrameFeatures frame = load_frame_features(files[i], dim);
    frame.frame_id = static_cast<int>(i);
    if (!dim && !frame.empty()) dim = static_cast<std::uint32_t>(frame.descriptor_dim());
    frames.push_back(std::move(frame));
  }
  return frames;
}

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

}  // namespace

TrainSummary run_train(const std::filesystem::path& features_dir,
                       const std::filesystem::path& vocab_out, const TrainParams& params) {
  auto frames = load_sequence(features_dir);
  if (frames.size() < 2) {
    throw InsufficientSequenceError("run_train: need at least 2 frames, found " +
                                    std::to_string(frames.size()));
  }

  const Scaler scaler = fit_scaler(frames);
  for (auto& frame : frames) frame = apply_scaler(scaler, frame);

  CompactDatabase db;
  db.ingest_first_frame(frames[0]);
  for (std::size_t t = 1; t < frames.size(); ++t) {
    RansacParams ransac = params.ransac;
    ransac.rng_seed = split_seed(params.seed, 0x7261 + t);
    const auto tracked = two_step_match(frames[t - 1], frames[t], ransac);
    db.ingest_next_frame(frames[t], tracked.matches);
  }

  const auto gamma = db.average_radius();
  if (!gamma.any_tracked) {
    std::cerr << "warning: no feature tracked more than once; gamma_bar = 0, "
                 "vocabulary depth is limited by guards only\n";
  }

  TrainGuards guards;
  guards.min_split_count = params.min_split_count;
  guards.max_depth = params.max_depth;
  const VocabularyTree tree =
      VocabularyTree::train_auto(db, scaler, params.branching, params.seed, guards);
  tree.save(vocab_out);

  TrainSummary summary;
  summary.frames = static_cast<int>(frames.size());
  summary.groups = static_cast<int>(db.groups().size());
  summary.gamma_bar = gamma.value;
  summary.gamma_warning = !gamma.any_tracked;
  summary.word_count = tree.word_count();
  summary.max_depth = tree.max_depth();
  summary.forced_root_split = tree.forced_root_split();
  summary.stop_histogram = tree.stop_histogram();
  return summary;
}

std::vector<DetectionRecord> run_detect(const std::filesystem::path& features_dir,
                                        const std::filesystem::path& vocab_path,
                                        const std::filesystem::path& records_out,
                                        const DetectParams& params) {
  const VocabularyTree tree = VocabularyTree::load(vocab_path);
  const auto files = list_feature_files(features_dir);

  FrameDatabase db;
  std::vector<DetectionRecord> records;
  records.reserve(files.size());

  double t_load = 0, t_bow = 0, t_query = 0, t_verify = 0;
  int n_verified = 0;

  for (std::size_t i = 0; i < files.size(); ++i) {
    auto t0 = Clock::now();
    FrameFeatures frame = load_frame_features(files[i], tree.dim());
    frame.frame_id = static_cast<int>(i);
    frame = apply_scaler(tree.scaler(), frame);
    t_load += ms_since(t0);

    t0 = Clock::now();
    const BowVector bow = tree.bow_vector(frame);
    t_bow += ms_since(t0);

    t0 = Clock::now();
    const auto candidate = db.query_candidate(bow, frame.frame_id, params.eta, params.alpha);
    t_query += ms_since(t0);

    DetectionRecord rec;
    rec.query_id = frame.frame_id;
    rec.verifier = params.verifier;
    if (candidate) {
      rec.candidate_id = candidate->candidate_id;
      rec.bow_sim = candidate->bow_similarity;

      t0 = Clock::now();
      const FrameFeatures& cand_frame = db.frame(candidate->candidate_id);
      switch (params.verifier) {
        case Verifier::none:
          rec.accepted = true;
          break;
        case Verifier::graph: {
          TopoGraph gq, gc;
          const bool dump = !params.graph_dump_dir.empty();
          const auto vr = verify_graph(frame, cand_frame, params.top_t, params.zeta_threshold,
                                       dump ? &gq : nullptr, dump ? &gc : nullptr);
          rec.verify_score = vr.zeta;
          rec.accepted = vr.accepted;
          if (dump) {
            std::filesystem::create_directories(params.graph_dump_dir);
            char name[40];
            std::snprintf(name, sizeof(name), "pair_%06d_%06d.txt", rec.query_id,
                          rec.candidate_id);
            std::ofstream out(params.graph_dump_dir / name);
            dump_graph_pair(out, gq, gc, vr.zeta);
          }
          break;
        }
        case Verifier::ransac12:
        case Verifier::ransac20: {
          RansacParams ransac = params.ransac;
          ransac.rng_seed = split_seed(params.ransac.rng_seed, 0x7665 + i);
          const int min_inliers = params.verifier == Verifier::ransac12 ? 12 : 20;
          const auto vr = verify_ransac(frame, cand_frame, ransac, min_inliers);
          rec.verify_score = vr.zeta;
          rec.accepted = vr.accepted;
          break;
        }
      }
      t_verify += ms_since(t0);
      ++n_verified;
    }
    records.push_back(rec);

    db.add_frame(frame.frame_id, bow, std::move(frame));
  }

  if (!records_out.empty()) save_records_csv(records, records_out);

  if (params.timing && !files.empty()) {
    const double n = double(files.size());
    std::printf("timing per frame (ms): load+scale %.3f, bow %.3f, query %.3f", t_load / n,
                t_bow / n, t_query / n);
    if (n_verified > 0) std::printf(", verify %.3f over %d candidates", t_verify / n_verified, n_verified);
    std::printf("\n");
  }
  return records;
}

EvalResult run_evaluate(const std::filesystem::path& records_csv,
                        const std::filesystem::path& gt_csv, const std::filesystem::path& pr_out,
                        SweepMode mode, int gt_window) {
  const auto records = load_records_csv(records_csv);
  const auto gt = load_ground_truth(gt_csv);
  const EvalResult result = evaluate(records, gt, mode, gt_window);
  if (!pr_out.empty()) save_pr_csv(result, pr_out);
  return result;
}

}  // namespace lcd
