#pragma once

#include <optional>
#include <unordered_map>
#include <vector>

#include "lcd/feature_io.hpp"
#include "lcd/vocabulary.hpp"

namespace lcd {

struct LoopCandidate {
  int query_id = -1;
  int candidate_id = -1;
  double bow_similarity = 0.0;  // weighted L2 similarity, in [0, 1]
};

// Frame store with an inverted index over visual words.  Writes are strictly
// sequential; queries may run between writes.
class FrameDatabase {
 public:
  struct Posting {
    int frame_id;
    double tf;
  };

  // frame_id must equal the next sequential id; throws SequenceError.
  void add_frame(int frame_id, BowVector bow, FrameFeatures frame);

  // Best candidate among frames with id <= query_id - eta that share at
  // least one word with the query; ties break toward the smaller frame id.
  // Returns nothing when query_id <= eta, nothing is eligible, or the best
  // similarity falls below alpha.
  std::optional<LoopCandidate> query_candidate(const BowVector& query, int query_id, int eta,
                                               double alpha = 0.0) const;

  const BowVector& bow(int frame_id) const { return entries_.at(frame_id).bow; }
  const FrameFeatures& frame(int frame_id) const { return entries_.at(frame_id).features; }
  int size() const { return static_cast<int>(entries_.size()); }
  const std::unordered_map<std::uint32_t, std::vector<Posting>>& inverted_index() const {
    return inverted_;
  }

 private:
  struct Entry {
    BowVector bow;
    FrameFeatures features;
  };

  std::vector<Entry> entries_;
  std::unordered_map<std::uint32_t, std::vector<Posting>> inverted_;
};

}  // namespace lcd
