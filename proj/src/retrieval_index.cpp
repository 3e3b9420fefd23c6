#include "lcd/retrieval_index.hpp"

#include <algorithm>
#include <cmath>

namespace lcd {

void FrameDatabase::add_frame(int frame_id, BowVector bow, FrameFeatures frame) {
  if (frame_id != static_cast<int>(entries_.size())) {
    throw SequenceError("add_frame: expected frame id " + std::to_string(entries_.size()) +
                        ", got " + std::to_string(frame_id));
  }
  for (const auto& [word, entry] : bow.entries) {
    inverted_[word].push_back({frame_id, entry.tf});
  }
  entries_.push_back({std::move(bow), std::move(frame)});
}

std::optional<LoopCandidate> FrameDatabase::query_candidate(const BowVector& query, int query_id,
                                                            int eta, double alpha) const {
  if (query.empty() || query_id <= eta) return std::nullopt;
  const int limit = query_id - eta;

  // Touch only frames sharing at least one word with the query.
  std::vector<int> candidates;
  for (const auto& [word, entry] : query.entries) {
    const auto it = inverted_.find(word);
    if (it == inverted_.end()) continue;
    for (const auto& posting : it->second) {
      if (posting.frame_id > limit) break;  // postings are id-ascending
      candidates.push_back(posting.frame_id);
    }
  }
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
  if (candidates.empty()) return std::nullopt;

  int best_id = -1;
  double best_d = -1.0;
  for (const int id : candidates) {
    const double d = similarity(query, entries_[id].bow);
    if (d > best_d) {
      best_d = d;
      best_id = id;
    }
  }
  if (best_id < 0 || best_d < alpha) return std::nullopt;
  return LoopCandidate{query_id, best_id, best_d};
}

}  // namespace lcd
