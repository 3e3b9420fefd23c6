#include "lcd/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>

namespace lcd {

namespace {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.push_back("");
  return fields;
}

bool record_accepted_at(const DetectionRecord& rec, SweepMode mode, double threshold) {
  if (!rec.has_candidate()) return false;
  if (mode == SweepMode::alpha) return rec.accepted && rec.bow_sim >= threshold;
  return rec.verify_score >= threshold;
}

PrPoint classify(const std::vector<DetectionRecord>& records, const GroundTruth& gt,
                 int gt_window, const std::function<bool(const DetectionRecord&)>& accepted) {
  PrPoint point;
  std::set<int> satisfied;  // ground-truth queries answered correctly
  for (const auto& rec : records) {
    if (!accepted(rec)) continue;
    if (gt.matches(rec.query_id, rec.candidate_id, gt_window)) {
      ++point.tp;
      satisfied.insert(rec.query_id);
    } else {
      ++point.fp;
    }
  }
  for (const int q : gt.queries) {
    if (!satisfied.count(q)) ++point.fn;
  }
  point.precision = (point.tp + point.fp) > 0 ? double(point.tp) / double(point.tp + point.fp) : 1.0;
  point.recall = (point.tp + point.fn) > 0 ? double(point.tp) / double(point.tp + point.fn) : 0.0;
  return point;
}

}  // namespace

std::string verifier_name(Verifier v) {
  switch (v) {
    case Verifier::none:
      return "none";
    case Verifier::graph:
      return "graph";
    case Verifier::ransac12:
      return "ransac12";
    case Verifier::ransac20:
      return "ransac20";
  }
  return "none";
}

Verifier parse_verifier(const std::string& name) {
  if (name == "none") return Verifier::none;
  if (name == "graph") return Verifier::graph;
  if (name == "ransac12") return Verifier::ransac12;
  if (name == "ransac20") return Verifier::ransac20;
  throw ConfigError("unknown verifier: " + name);
}

void save_records_csv(const std::vector<DetectionRecord>& records,
                      const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write records csv: " + path.string());
  out << "query_id,candidate_id,bow_sim,verify_score,accepted,verifier\n";
  for (const auto& rec : records) {
    out << rec.query_id << "," << rec.candidate_id << "," << format_double(rec.bow_sim) << ","
        << format_double(rec.verify_score) << "," << (rec.accepted ? 1 : 0) << ","
        << verifier_name(rec.verifier) << "\n";
  }
}

std::vector<DetectionRecord> load_records_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open records csv: " + path.string());
  std::vector<DetectionRecord> records;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line_no == 1) {
      if (line != "query_id,candidate_id,bow_sim,verify_score,accepted,verifier") {
        throw ParseError("records csv line 1: unexpected header");
      }
      continue;
    }
    const auto fields = split_csv_line(line);
    if (fields.size() != 6) {
      throw ParseError("records csv line " + std::to_string(line_no) + ": expected 6 fields");
    }
    try {
      DetectionRecord rec;
      rec.query_id = std::stoi(fields[0]);
      rec.candidate_id = std::stoi(fields[1]);
      rec.bow_sim = std::stod(fields[2]);
      rec.verify_score = std::stod(fields[3]);
      rec.accepted = std::stoi(fields[4]) != 0;
      rec.verifier = parse_verifier(fields[5]);
      records.push_back(rec);
    } catch (const ConfigError&) {
      throw ParseError("records csv line " + std::to_string(line_no) + ": bad verifier");
    } catch (const std::exception&) {
      throw ParseError("records csv line " + std::to_string(line_no) + ": bad number");
    }
  }
  return records;
}

bool GroundTruth::matches(int query_id, int candidate_id, int window) const {
  if (window <= 0) return pairs.count({query_id, candidate_id}) > 0;
  for (int c = candidate_id - window; c <= candidate_id + window; ++c) {
    if (pairs.count({query_id, c})) return true;
  }
  return false;
}

GroundTruth load_ground_truth(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open ground truth: " + path.string());
  GroundTruth gt;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != 2) {
      throw ParseError("ground truth line " + std::to_string(line_no) + ": expected 2 fields");
    }
    try {
      const int q = std::stoi(fields[0]);
      const int m = std::stoi(fields[1]);
      gt.pairs.insert({q, m});
      gt.queries.insert(q);
    } catch (const std::exception&) {
      throw ParseError("ground truth line " + std::to_string(line_no) + ": bad number");
    }
  }
  return gt;
}

GroundTruth ground_truth_from_pairs(const std::vector<LoopPair>& pairs) {
  GroundTruth gt;
  for (const auto& p : pairs) {
    gt.pairs.insert({p.query_id, p.match_id});
    gt.queries.insert(p.query_id);
  }
  return gt;
}

PrPoint pr_at_threshold(const std::vector<DetectionRecord>& records, const GroundTruth& gt,
                        SweepMode mode, double threshold, int gt_window) {
  PrPoint point = classify(records, gt, gt_window, [&](const DetectionRecord& rec) {
    return record_accepted_at(rec, mode, threshold);
  });
  point.threshold = threshold;
  return point;
}

PrPoint pr_at_operating_point(const std::vector<DetectionRecord>& records, const GroundTruth& gt,
                              int gt_window) {
  return classify(records, gt, gt_window,
                  [](const DetectionRecord& rec) { return rec.accepted; });
}

EvalResult evaluate(const std::vector<DetectionRecord>& records, const GroundTruth& gt,
                    SweepMode mode, int gt_window) {
  std::set<double> thresholds;
  for (const auto& rec : records) {
    if (!rec.has_candidate()) continue;
    thresholds.insert(mode == SweepMode::alpha ? rec.bow_sim : rec.verify_score);
  }
  thresholds.insert(std::numeric_limits<double>::infinity());

  EvalResult result;
  for (const double t : thresholds) {
    result.curve.push_back(pr_at_threshold(records, gt, mode, t, gt_window));
  }

  for (const auto& point : result.curve) {
    if (point.fp == 0) {
      result.r_max_at_full_precision = std::max(result.r_max_at_full_precision, point.recall);
    }
  }

  // Trapezoidal AUC over recall.
  std::vector<std::pair<double, double>> rp;
  for (const auto& point : result.curve) rp.emplace_back(point.recall, point.precision);
  std::sort(rp.begin(), rp.end());
  for (std::size_t i = 1; i < rp.size(); ++i) {
    result.auc += (rp[i].first - rp[i - 1].first) * (rp[i].second + rp[i - 1].second) / 2.0;
  }
  return result;
}

void save_pr_csv(const EvalResult& result, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write pr csv: " + path.string());
  out << "threshold,precision,recall,tp,fp,fn\n";
  for (const auto& p : result.curve) {
    out << format_double(p.threshold) << "," << format_double(p.precision) << ","
        << format_double(p.recall) << "," << p.tp << "," << p.fp << "," << p.fn << "\n";
  }
}

}  // namespace lcd
