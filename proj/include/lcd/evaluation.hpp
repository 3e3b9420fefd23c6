#pragma once

#include <filesystem>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "lcd/errors.hpp"
#include "lcd/synthetic.hpp"

namespace lcd {

enum class Verifier { none, graph, ransac12, ransac20 };

std::string verifier_name(Verifier v);
Verifier parse_verifier(const std::string& name);  // throws ConfigError

// One detection per query frame.  verify_score holds zeta for the graph
// verifier and the inlier count for the RANSAC verifiers.
struct DetectionRecord {
  int query_id = 0;
  int candidate_id = -1;  // -1: no candidate proposed
  double bow_sim = 0.0;
  double verify_score = 0.0;
  bool accepted = false;
  Verifier verifier = Verifier::none;

  bool has_candidate() const { return candidate_id >= 0; }
};

// Records CSV: header query_id,candidate_id,bow_sim,verify_score,accepted,verifier
void save_records_csv(const std::vector<DetectionRecord>& records,
                      const std::filesystem::path& path);
std::vector<DetectionRecord> load_records_csv(const std::filesystem::path& path);

struct GroundTruth {
  std::set<std::pair<int, int>> pairs;
  std::set<int> queries;

  // (q, c) matches ground truth when some (q, c') exists with |c - c'| <= window.
  bool matches(int query_id, int candidate_id, int window = 0) const;
};

// Text file of query_id,match_id lines.
GroundTruth load_ground_truth(const std::filesystem::path& path);
GroundTruth ground_truth_from_pairs(const std::vector<LoopPair>& pairs);

enum class SweepMode { alpha, zeta };

struct PrPoint {
  double threshold = 0.0;
  double precision = 1.0;
  double recall = 0.0;
  int tp = 0;
  int fp = 0;
  int fn = 0;
};

// Classification at one threshold, read as the minimum passing value:
// alpha sweeps gate accepted records by bow_sim >= threshold; zeta sweeps
// re-decide acceptance as verify_score >= threshold over all proposed
// candidates.  A query with a true loop counts FN when it is not accepted
// with a correct candidate; an accepted wrong candidate is both FP and FN.
// Precision is defined as 1 when nothing is accepted.
PrPoint pr_at_threshold(const std::vector<DetectionRecord>& records, const GroundTruth& gt,
                        SweepMode mode, double threshold, int gt_window = 0);

// Counts taken directly from the records' accepted flags.
PrPoint pr_at_operating_point(const std::vector<DetectionRecord>& records, const GroundTruth& gt,
                              int gt_window = 0);

struct EvalResult {
  std::vector<PrPoint> curve;  // one point per distinct sweep value plus +inf
  double auc = 0.0;            // trapezoidal over recall
  double r_max_at_full_precision = 0.0;
};

EvalResult evaluate(const std::vector<DetectionRecord>& records, const GroundTruth& gt,
                    SweepMode mode, int gt_window = 0);

// PR CSV: header threshold,precision,recall,tp,fp,fn
void save_pr_csv(const EvalResult& result, const std::filesystem::path& path);

}  // namespace lcd
