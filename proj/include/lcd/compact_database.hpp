#pragma once

#include <iosfwd>
#include <vector>

#include "lcd/feature_io.hpp"
#include "lcd/geometry.hpp"

namespace lcd {

// Running aggregate of one tracked feature: center (mean of absorbed
// descriptors), radius (largest observed drift, running approximation) and
// member count.
struct CompactGroup {
  std::vector<double> center;
  double radius = 0.0;
  int count = 1;
};

// Aggregates adjacent-frame feature tracks over a training sequence.  A
// feature lost for one frame starts a new group; there is no re-acquisition.
class CompactDatabase {
 public:
  CompactDatabase() = default;

  // Test/debug factory: plant groups directly.
  static CompactDatabase from_groups(std::vector<CompactGroup> groups);

  // Every feature of the first frame opens a singleton group.
  // Throws StateError when the database already holds data.
  void ingest_first_frame(const FrameFeatures& frame);

  // Matched features update their groups:
  //   center' = (center * count + d) / (count + 1)
  //   radius' = max(|center' - d|, radius)
  //   count'  = count + 1
  // Unmatched features open new singleton groups.  `matches` pair the
  // previous frame's feature indices (idx_a) with this frame's (idx_b).
  void ingest_next_frame(const FrameFeatures& frame, const std::vector<Match>& matches);

  struct AverageRadius {
    double value = 0.0;
    bool any_tracked = false;  // false: every radius is zero, value 0 is a warning result
  };

  // Mean radius over groups with radius > 0 (Iverson-bracket filter).
  // Throws StateError on an empty database.
  AverageRadius average_radius() const;

  const std::vector<CompactGroup>& groups() const { return groups_; }
  int frames_ingested() const { return frames_ingested_; }
  std::int64_t features_ingested() const { return features_ingested_; }
  bool empty() const { return frames_ingested_ == 0; }

  // One line per group: count, radius, then the center entries.
  void dump(std::ostream& out) const;

 private:
  int open_group(const Feature& feature);

  std::vector<CompactGroup> groups_;
  std::vector<int> active_map_;  // previous-frame feature index -> group index
  int frames_ingested_ = 0;
  std::int64_t features_ingested_ = 0;
};

}  // namespace lcd
