#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <vector>

#include "lcd/compact_database.hpp"
#include "lcd/feature_io.hpp"

namespace lcd {

struct KMeansResult {
  std::vector<std::vector<double>> centers;
  std::vector<int> assignments;
};

// Lloyd's algorithm with distance-weighted careful seeding.  Empty clusters
// are re-seeded with the point farthest from its current center.  When
// |points| <= k every point becomes its own center.
KMeansResult kmeans(const std::vector<std::vector<double>>& points, int k, std::uint64_t seed);

// Mean L2 distance of the member vectors to the sub-node center.
double subnode_radius(const std::vector<std::vector<double>>& members,
                      const std::vector<double>& center);

enum class StopReason : std::uint8_t {
  criterion = 0,    // leaf: tentative split had theta_bar < gamma_bar
  min_count = 1,    // leaf: too few members to split
  max_depth = 2,    // leaf: depth guard
  root = 3,         // leaf: the root itself could not split
  none = 4,         // internal node
  forced_root = 5,  // internal root committed although theta_bar < gamma_bar
};

struct VocabNode {
  std::vector<float> center;
  std::vector<std::uint32_t> children;  // branching-factor many, or none
  std::int32_t word_id = -1;            // leaves only; dense 0..W-1
  std::uint16_t depth = 0;
  StopReason stop_reason = StopReason::none;
  // theta_bar of the committed (internal) or discarded (criterion leaf)
  // split; -1 when no split was ever attempted.
  float tentative_theta = -1.0f;

  bool is_leaf() const { return children.empty(); }
};

struct TrainGuards {
  int min_split_count = 0;  // 0 selects the branching factor
  int max_depth = 10;
};

struct BowEntry {
  int count = 0;     // n_w
  double tf = 0.0;   // n_w / N
  double unit = 0.0; // L2-normalized tf weight
};

// Sparse TF-weighted word histogram of one frame.
struct BowVector {
  std::map<std::uint32_t, BowEntry> entries;
  int total = 0;  // N

  bool empty() const { return total == 0; }
};

// Weighted L2 similarity d = 1 - sqrt(1 - <w1, w2>) over unit tf vectors,
// in [0, 1]; zero vectors score 0.
double similarity(const BowVector& v1, const BowVector& v2);

// Hierarchical quantizer with per-branch automatic depth.  A tentative
// k-means split of a node is discarded when its mean sub-node radius
// theta_bar falls below the database's average drift gamma_bar; the branch
// then stops and the node becomes a visual word.
class VocabularyTree {
 public:
  // Throws StateError on an empty database.  When gamma_bar is zero the
  // criterion never fires and only the guards terminate branches.
  static VocabularyTree train_auto(const CompactDatabase& db, const Scaler& scaler, int branching,
                                   std::uint64_t seed, TrainGuards guards = {});

  // Greedy descent to the nearest child; ties break toward the lowest
  // child index.  Throws DimensionError on a wrong descriptor length.
  std::uint32_t quantize(const std::vector<float>& descriptor) const;

  // Quantizes all descriptors of the frame; an empty frame yields an empty
  // vector (total == 0).
  BowVector bow_vector(const FrameFeatures& frame) const;

  // Vocabulary file (binary, little-endian): magic "LCDV", version u32=1,
  // D u32, branching u32, gamma_bar f32, train_seed u64, scaler mean/stddev
  // f32 x D each, node_count u32, then per node: depth u16, child_count u16,
  // child ids u32 x count, word_id i32 (-1 internal), stop_reason u8,
  // tentative theta_bar f32, center f32 x D.
  void save(const std::filesystem::path& path) const;
  static VocabularyTree load(const std::filesystem::path& path);

  const std::vector<VocabNode>& nodes() const { return nodes_; }
  const VocabNode& root() const { return nodes_.front(); }
  const Scaler& scaler() const { return scaler_; }
  int branching() const { return branching_; }
  double gamma_bar() const { return gamma_bar_; }
  std::uint32_t dim() const { return dim_; }
  std::uint64_t train_seed() const { return train_seed_; }
  int word_count() const { return word_count_; }
  bool forced_root_split() const;
  int max_depth() const;
  std::map<StopReason, int> stop_histogram() const;

 private:
  VocabularyTree() = default;

  std::vector<VocabNode> nodes_;
  Scaler scaler_;
  int branching_ = 0;
  double gamma_bar_ = 0.0;
  std::uint32_t dim_ = 0;
  std::uint64_t train_seed_ = 0;
  int word_count_ = 0;
};

}  // namespace lcd
