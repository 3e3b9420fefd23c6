#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "lcd/pipeline.hpp"
#include "lcd/synthetic.hpp"
#include "lcd/vocabulary.hpp"

using namespace lcd;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const char* name) {
  const fs::path dir = fs::temp_directory_path() / "lcd_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("run_train: two identical frames take the zero-drift path") {
  const auto dir = fresh_dir("train_zero_drift");
  SynthConfig cfg;
  cfg.places = 1;
  cfg.frames_per_place = 2;
  cfg.descriptor_dim = 8;
  cfg.features_per_frame = 10;
  write_sequence(synth_generate_sequence(cfg, 1), dir);
  fs::remove(dir / "ground_truth.csv");

  TrainParams params;
  params.branching = 4;
  const auto summary = run_train(dir, dir / "vocab.lcdv", params);
  CHECK(summary.frames == 2);
  CHECK(summary.groups == 10);          // every feature tracked, chi = 2
  CHECK(summary.gamma_bar == 0.0);      // absorbing an identical descriptor keeps radius 0
  CHECK(summary.gamma_warning);
  CHECK(summary.word_count >= 1);

  const auto tree = VocabularyTree::load(dir / "vocab.lcdv");
  const auto frame = apply_scaler(tree.scaler(), load_frame_features(dir / "000000.lcdf"));
  for (const auto& f : frame.features) CHECK_NOTHROW(tree.quantize(f.descriptor));
}

TEST_CASE("run_train: synthetic sequence end to end") {
  const auto dir = fresh_dir("train_smoke");
  SynthConfig cfg;
  cfg.places = 5;
  cfg.frames_per_place = 4;
  cfg.noise_sigma = 0.05;
  cfg.jitter_px = 0.5;
  cfg.descriptor_dim = 8;
  cfg.features_per_frame = 20;
  cfg.motion = MotionModel::planar;
  write_sequence(synth_generate_sequence(cfg, 2), dir);
  fs::remove(dir / "ground_truth.csv");

  TrainParams params;
  params.branching = 5;
  params.seed = 3;
  const auto summary = run_train(dir, dir / "vocab.lcdv", params);
  CHECK(summary.frames == 20);
  CHECK(summary.gamma_bar > 0.0);
  CHECK_FALSE(summary.gamma_warning);
  CHECK(summary.word_count > 1);

  // the vocabulary quantizes every training descriptor without error
  const auto tree = VocabularyTree::load(dir / "vocab.lcdv");
  for (const auto& file : list_feature_files(dir)) {
    const auto frame = apply_scaler(tree.scaler(), load_frame_features(file));
    for (const auto& f : frame.features) {
      const auto word = tree.quantize(f.descriptor);
      CHECK(word < std::uint32_t(tree.word_count()));
    }
  }
}

TEST_CASE("run_train: too few frames") {
  const auto dir = fresh_dir("train_short");
  SynthConfig cfg;
  cfg.places = 1;
  cfg.frames_per_place = 1;
  cfg.descriptor_dim = 4;
  cfg.features_per_frame = 5;
  write_sequence(synth_generate_sequence(cfg, 1), dir);
  fs::remove(dir / "ground_truth.csv");
  CHECK_THROWS_AS(run_train(dir, dir / "v.lcdv", TrainParams{}), InsufficientSequenceError);

  const auto empty = fresh_dir("train_empty");
  CHECK_THROWS_AS(run_train(empty, empty / "v.lcdv", TrainParams{}), InsufficientSequenceError);
}

TEST_CASE("run_detect: sequences shorter than eta never propose candidates") {
  const auto dir = fresh_dir("detect_short");
  SynthConfig cfg;
  cfg.places = 3;
  cfg.frames_per_place = 3;
  cfg.descriptor_dim = 8;
  cfg.features_per_frame = 12;
  cfg.noise_sigma = 0.02;
  write_sequence(synth_generate_sequence(cfg, 4), dir);
  fs::remove(dir / "ground_truth.csv");

  TrainParams tp;
  tp.branching = 4;
  run_train(dir, dir / "vocab.lcdv", tp);

  DetectParams dp;
  dp.eta = 100;
  const auto records = run_detect(dir, dir / "vocab.lcdv", dir / "records.csv", dp);
  REQUIRE(records.size() == 9);
  for (const auto& rec : records) {
    CHECK_FALSE(rec.has_candidate());
    CHECK_FALSE(rec.accepted);
  }
}

TEST_CASE("run_detect: an exact revisit is proposed and verified") {
  const auto dir = fresh_dir("detect_revisit");
  SynthConfig cfg;
  cfg.places = 3;
  cfg.frames_per_place = 2;
  cfg.revisits = 1;  // frame 6 revisits place 0 (frames 0 and 1)
  cfg.descriptor_dim = 8;
  cfg.features_per_frame = 15;
  write_sequence(synth_generate_sequence(cfg, 5), dir);
  fs::remove(dir / "ground_truth.csv");

  TrainParams tp;
  tp.branching = 4;
  run_train(dir, dir / "vocab.lcdv", tp);

  DetectParams dp;
  dp.eta = 3;
  const auto records = run_detect(dir, dir / "vocab.lcdv", dir / "records.csv", dp);
  REQUIRE(records.size() == 7);
  const auto& revisit = records.back();
  REQUIRE(revisit.has_candidate());
  CHECK(revisit.candidate_id <= 1);
  CHECK(revisit.bow_sim == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(revisit.verify_score == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(revisit.accepted);
}

TEST_CASE("run_detect: verifier choice changes acceptance, not candidates") {
  const auto dir = fresh_dir("detect_verifiers");
  SynthConfig cfg;
  cfg.places = 4;
  cfg.frames_per_place = 2;
  cfg.revisits = 2;
  cfg.aliased_frames = 2;
  cfg.noise_sigma = 0.03;
  cfg.jitter_px = 0.5;
  cfg.descriptor_dim = 8;
  cfg.features_per_frame = 20;
  cfg.motion = MotionModel::planar;
  write_sequence(synth_generate_sequence(cfg, 6), dir);
  fs::remove(dir / "ground_truth.csv");

  TrainParams tp;
  tp.branching = 4;
  run_train(dir, dir / "vocab.lcdv", tp);

  DetectParams none;
  none.eta = 4;
  none.verifier = Verifier::none;
  DetectParams graph = none;
  graph.verifier = Verifier::graph;

  const auto r_none = run_detect(dir, dir / "vocab.lcdv", "", none);
  const auto r_graph = run_detect(dir, dir / "vocab.lcdv", "", graph);
  REQUIRE(r_none.size() == r_graph.size());
  for (std::size_t i = 0; i < r_none.size(); ++i) {
    CHECK(r_none[i].candidate_id == r_graph[i].candidate_id);
    CHECK(r_none[i].bow_sim == r_graph[i].bow_sim);
    if (r_none[i].has_candidate()) {
      CHECK(r_none[i].accepted);
      if (r_graph[i].accepted) CHECK(r_graph[i].verify_score > graph.zeta_threshold);
    }
  }
}

TEST_CASE("run_detect: dimension mismatch against the vocabulary") {
  const auto dir = fresh_dir("detect_dim");
  SynthConfig cfg;
  cfg.places = 2;
  cfg.frames_per_place = 2;
  cfg.descriptor_dim = 8;
  cfg.features_per_frame = 10;
  write_sequence(synth_generate_sequence(cfg, 7), dir);
  fs::remove(dir / "ground_truth.csv");
  TrainParams tp;
  tp.branching = 3;
  run_train(dir, dir / "vocab.lcdv", tp);

  const auto other = fresh_dir("detect_dim_other");
  SynthConfig cfg16 = cfg;
  cfg16.descriptor_dim = 16;
  write_sequence(synth_generate_sequence(cfg16, 7), other);
  fs::remove(other / "ground_truth.csv");

  CHECK_THROWS_AS(run_detect(other, dir / "vocab.lcdv", "", DetectParams{}), DimensionError);
}

TEST_CASE("run_evaluate: csv pipeline end to end") {
  const auto dir = fresh_dir("eval_files");
  {
    std::ofstream records(dir / "records.csv");
    records << "query_id,candidate_id,bow_sim,verify_score,accepted,verifier\n";
    records << "150,3,0.9,0.8,1,graph\n";
    records << "151,7,0.8,0.1,0,graph\n";
  }
  {
    std::ofstream gt(dir / "gt.csv");
    gt << "150,3\n151,4\n";
  }
  const auto result =
      run_evaluate(dir / "records.csv", dir / "gt.csv", dir / "pr.csv", SweepMode::zeta, 0);
  CHECK(fs::exists(dir / "pr.csv"));
  CHECK(result.r_max_at_full_precision == doctest::Approx(0.5));
}
