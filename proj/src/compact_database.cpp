#include "lcd/compact_database.hpp"

#include <cmath>
#include <ostream>

namespace lcd {

CompactDatabase CompactDatabase::from_groups(std::vector<CompactGroup> groups) {
  CompactDatabase db;
  db.groups_ = std::move(groups);
  db.frames_ingested_ = 1;
  for (const auto& g : db.groups_) db.features_ingested_ += g.count;
  return db;
}

int CompactDatabase::open_group(const Feature& feature) {
  CompactGroup group;
  group.center.assign(feature.descriptor.begin(), feature.descriptor.end());
  group.radius = 0.0;
  group.count = 1;
  groups_.push_back(std::move(group));
  return static_cast<int>(groups_.size()) - 1;
}

void CompactDatabase::ingest_first_frame(const FrameFeatures& frame) {
  if (frames_ingested_ != 0 || !groups_.empty()) {
    throw StateError("ingest_first_frame: database is not empty");
  }
  active_map_.clear();
  for (const auto& f : frame.features) {
    active_map_.push_back(open_group(f));
  }
  frames_ingested_ = 1;
  features_ingested_ += static_cast<std::int64_t>(frame.size());
}

void CompactDatabase::ingest_next_frame(const FrameFeatures& frame,
                                        const std::vector<Match>& matches) {
  if (frames_ingested_ == 0) {
    throw StateError("ingest_next_frame: ingest_first_frame has not run");
  }
  std::vector<int> next_map(frame.size(), -1);

  for (const auto& m : matches) {
    if (m.idx_a < 0 || m.idx_a >= static_cast<int>(active_map_.size()) || m.idx_b < 0 ||
        m.idx_b >= static_cast<int>(frame.size())) {
      throw ParameterError("ingest_next_frame: match index out of range");
    }
    const int g = active_map_[m.idx_a];
    CompactGroup& group = groups_[g];
    const auto& d = frame.features[m.idx_b].descriptor;
    if (d.size() != group.center.size()) {
      throw DimensionError("ingest_next_frame: descriptor dimension mismatch");
    }

    const double old_count = group.count;
    double drift_sq = 0.0;
    for (std::size_t k = 0; k < group.center.size(); ++k) {
      group.center[k] = (group.center[k] * old_count + double(d[k])) / (old_count + 1.0);
      const double diff = group.center[k] - double(d[k]);
      drift_sq += diff * diff;
    }
    group.radius = std::max(std::sqrt(drift_sq), group.radius);
    group.count += 1;
    next_map[m.idx_b] = g;
  }

  for (std::size_t i = 0; i < frame.size(); ++i) {
    if (next_map[i] < 0) next_map[i] = open_group(frame.features[i]);
  }

  active_map_ = std::move(next_map);
  frames_ingested_ += 1;
  features_ingested_ += static_cast<std::int64_t>(frame.size());
}

CompactDatabase::AverageRadius CompactDatabase::average_radius() const {
  if (frames_ingested_ == 0) {
    throw StateError("average_radius: empty database");
  }
  double sum = 0.0;
  int n = 0;
  for (const auto& g : groups_) {
    if (g.radius > 0.0) {
      sum += g.radius;
      ++n;
    }
  }
  if (n == 0) return {0.0, false};
  return {sum / double(n), true};
}

void CompactDatabase::dump(std::ostream& out) const {
  for (const auto& g : groups_) {
    out << g.count << " " << g.radius;
    for (double v : g.center) out << " " << v;
    out << "\n";
  }
}

}  // namespace lcd
