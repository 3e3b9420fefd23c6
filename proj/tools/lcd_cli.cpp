#include <CLI11.hpp>
#include <cstdio>
#include <iostream>

#include "lcd/pipeline.hpp"
#include "lcd/synthetic.hpp"

namespace {

void print_train_summary(const lcd::TrainSummary& s) {
  std::printf("frames            %d\n", s.frames);
  std::printf("compact groups    %d\n", s.groups);
  std::printf("gamma_bar         %.6g%s\n", s.gamma_bar, s.gamma_warning ? " (warning: 0)" : "");
  std::printf("words             %d\n", s.word_count);
  std::printf("max depth         %d\n", s.max_depth);
  std::printf("forced root split %s\n", s.forced_root_split ? "yes" : "no");
  static const std::pair<lcd::StopReason, const char*> kReasons[] = {
      {lcd::StopReason::criterion, "criterion"},
      {lcd::StopReason::min_count, "min_count"},
      {lcd::StopReason::max_depth, "max_depth"},
      {lcd::StopReason::root, "root"},
  };
  for (const auto& [reason, name] : kReasons) {
    const auto it = s.stop_histogram.find(reason);
    std::printf("leaves %-10s %d\n", name, it == s.stop_histogram.end() ? 0 : it->second);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Loop-closure detection toolkit"};
  app.require_subcommand(1);

  // train
  auto* train = app.add_subcommand("train", "Train a vocabulary from a feature sequence");
  std::string train_features, train_out;
  lcd::TrainParams train_params;
  std::uint64_t train_seed = 0;
  train->add_option("--features", train_features, "Directory of NNNNNN.lcdf files")->required();
  train->add_option("--out", train_out, "Output vocabulary file")->required();
  train->add_option("--kw", train_params.branching, "Branching factor")->capture_default_str();
  train->add_option("--seed", train_seed, "Training seed")->capture_default_str();
  train->add_option("--max-depth", train_params.max_depth, "Depth guard")->capture_default_str();

  // detect
  auto* detect = app.add_subcommand("detect", "Detect loop closures over a sequence");
  std::string det_features, det_vocab, det_out, det_verifier = "graph";
  lcd::DetectParams det_params;
  detect->add_option("--features", det_features, "Directory of NNNNNN.lcdf files")->required();
  detect->add_option("--vocab", det_vocab, "Vocabulary file")->required();
  detect->add_option("--out", det_out, "Output records CSV")->required();
  detect->add_option("--eta", det_params.eta, "Temporal exclusion window")->capture_default_str();
  detect->add_option("--zeta", det_params.zeta_threshold, "Graph verification threshold")
      ->capture_default_str();
  detect->add_option("--top-t", det_params.top_t, "Matches used for verification")
      ->capture_default_str();
  detect->add_option("--verifier", det_verifier, "graph|ransac12|ransac20|none")
      ->capture_default_str();
  detect->add_option("--alpha", det_params.alpha, "Minimum BoW similarity gate")
      ->capture_default_str();
  detect->add_flag("--timing", det_params.timing, "Print per-stage mean milliseconds");
  std::string det_dump;
  detect->add_option("--dump-graphs", det_dump, "Directory for per-pair graph dumps (debug)");

  // eval
  auto* eval = app.add_subcommand("eval", "Precision/recall over recorded detections");
  std::string eval_records, eval_gt, eval_out, eval_sweep = "alpha";
  int eval_window = 0;
  eval->add_option("--records", eval_records, "Records CSV from detect")->required();
  eval->add_option("--gt", eval_gt, "Ground-truth CSV")->required();
  eval->add_option("--out", eval_out, "Output PR CSV")->required();
  eval->add_option("--sweep", eval_sweep, "alpha|zeta")->capture_default_str();
  eval->add_option("--gt-window", eval_window, "Candidate id tolerance")->capture_default_str();

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a synthetic feature sequence");
  std::string synth_config, synth_out;
  std::uint64_t synth_seed = 0;
  synth->add_option("--config", synth_config, "key=value config file")->required();
  synth->add_option("--out", synth_out, "Output directory")->required();
  synth->add_option("--seed", synth_seed, "Generator seed")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;  // usage error
  }

  try {
    if (*train) {
      train_params.seed = train_seed;
      print_train_summary(lcd::run_train(train_features, train_out, train_params));
    } else if (*detect) {
      det_params.verifier = lcd::parse_verifier(det_verifier);
      det_params.graph_dump_dir = det_dump;
      const auto records = lcd::run_detect(det_features, det_vocab, det_out, det_params);
      int proposed = 0, accepted = 0;
      for (const auto& r : records) {
        proposed += r.has_candidate() ? 1 : 0;
        accepted += r.accepted ? 1 : 0;
      }
      std::printf("queries %zu, candidates %d, accepted %d\n", records.size(), proposed,
                  accepted);
    } else if (*eval) {
      lcd::SweepMode mode;
      if (eval_sweep == "alpha") {
        mode = lcd::SweepMode::alpha;
      } else if (eval_sweep == "zeta") {
        mode = lcd::SweepMode::zeta;
      } else {
        std::cerr << "error: --sweep must be alpha or zeta\n";
        return 1;
      }
      const auto result = lcd::run_evaluate(eval_records, eval_gt, eval_out, mode, eval_window);
      std::printf("points %zu, AUC %.6g, R_max@1.0 %.6g\n", result.curve.size(), result.auc,
                  result.r_max_at_full_precision);
    } else if (*synth) {
      const auto config = lcd::SynthConfig::from_file(synth_config);
      const auto seq = lcd::synth_generate_sequence(config, synth_seed);
      lcd::write_sequence(seq, synth_out);
      std::printf("frames %zu, ground-truth pairs %zu, alias frames %zu\n", seq.frames.size(),
                  seq.ground_truth.size(), seq.alias_frame_ids.size());
    }
  } catch (const lcd::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
