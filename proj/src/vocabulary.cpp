#include "lcd/vocabulary.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <random>

#include "lcd/rng.hpp"

namespace lcd {

namespace {

constexpr char kMagic[4] = {'L', 'C', 'D', 'V'};
constexpr std::uint32_t kVersion = 1;

double dist_sq(const std::vector<double>& a, const std::vector<double>& b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    sum += d * d;
  }
  return sum;
}

double dist_sq_f(const std::vector<float>& a, const std::vector<float>& b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = double(a[i]) - double(b[i]);
    sum += d * d;
  }
  return sum;
}

template <typename T>
void write_pod(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

template <typename T>
T read_pod(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  return v;
}

void write_f32_vec(std::ostream& out, const std::vector<float>& v) {
  out.write(reinterpret_cast<const char*>(v.data()), v.size() * sizeof(float));
}

void read_f32_vec(std::istream& in, std::vector<float>& v, std::size_t n) {
  v.resize(n);
  in.read(reinterpret_cast<char*>(v.data()), n * sizeof(float));
}

}  // namespace

KMeansResult kmeans(const std::vector<std::vector<double>>& points, int k, std::uint64_t seed) {
  if (k <= 0) throw ParameterError("kmeans: k must be >= 1");
  if (points.empty()) throw ParameterError("kmeans: no points");
  const int n = static_cast<int>(points.size());

  KMeansResult result;
  if (n <= k) {
    result.centers = points;
    result.assignments.resize(n);
    for (int i = 0; i < n; ++i) result.assignments[i] = i;
    return result;
  }

  std::mt19937_64 rng(seed);

  // Careful seeding: first center uniform, then distance-weighted draws.
  std::vector<std::vector<double>>& centers = result.centers;
  std::uniform_int_distribution<int> first(0, n - 1);
  centers.push_back(points[first(rng)]);
  std::vector<double> best_d2(n, std::numeric_limits<double>::max());
  while (static_cast<int>(centers.size()) < k) {
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      best_d2[i] = std::min(best_d2[i], dist_sq(points[i], centers.back()));
      total += best_d2[i];
    }
    int chosen = -1;
    if (total > 0.0) {
      std::uniform_real_distribution<double> u(0.0, total);
      double r = u(rng);
      for (int i = 0; i < n; ++i) {
        r -= best_d2[i];
        if (r <= 0.0) {
          chosen = i;
          break;
        }
      }
      if (chosen < 0) chosen = n - 1;
    } else {
      // all remaining points coincide with chosen centers
      chosen = static_cast<int>(centers.size()) % n;
    }
    centers.push_back(points[chosen]);
  }

  std::vector<int>& assign = result.assignments;
  assign.assign(n, -1);
  std::vector<int> prev_assign;

  for (int iter = 0; iter < 100; ++iter) {
    prev_assign = assign;

    for (int i = 0; i < n; ++i) {
      int best = 0;
      double best_d = dist_sq(points[i], centers[0]);
      for (int c = 1; c < k; ++c) {
        const double d = dist_sq(points[i], centers[c]);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      assign[i] = best;
    }

    // Re-seed empty clusters with the point farthest from its center.
    std::vector<int> sizes(k, 0);
    for (int i = 0; i < n; ++i) ++sizes[assign[i]];
    for (int c = 0; c < k; ++c) {
      if (sizes[c] > 0) continue;
      int worst = -1;
      double worst_d = -1.0;
      for (int i = 0; i < n; ++i) {
        if (sizes[assign[i]] < 2) continue;
        const double d = dist_sq(points[i], centers[assign[i]]);
        if (d > worst_d) {
          worst_d = d;
          worst = i;
        }
      }
      if (worst < 0) break;
      --sizes[assign[worst]];
      assign[worst] = c;
      ++sizes[c];
    }

    // Update step.
    const std::size_t dim = points[0].size();
    for (int c = 0; c < k; ++c) {
      if (sizes[c] == 0) continue;
      centers[c].assign(dim, 0.0);
    }
    for (int i = 0; i < n; ++i) {
      auto& c = centers[assign[i]];
      for (std::size_t d = 0; d < dim; ++d) c[d] += points[i][d];
    }
    for (int c = 0; c < k; ++c) {
      if (sizes[c] == 0) continue;
      for (auto& v : centers[c]) v /= double(sizes[c]);
    }

    if (assign == prev_assign) break;
  }
  return result;
}

double subnode_radius(const std::vector<std::vector<double>>& members,
                      const std::vector<double>& center) {
  if (members.empty()) throw ParameterError("subnode_radius: empty member set");
  double sum = 0.0;
  for (const auto& m : members) sum += std::sqrt(dist_sq(m, center));
  return sum / double(members.size());
}

double similarity(const BowVector& v1, const BowVector& v2) {
  if (v1.empty() || v2.empty()) return 0.0;
  double s = 0.0;
  auto it1 = v1.entries.begin();
  auto it2 = v2.entries.begin();
  while (it1 != v1.entries.end() && it2 != v2.entries.end()) {
    if (it1->first < it2->first) {
      ++it1;
    } else if (it2->first < it1->first) {
      ++it2;
    } else {
      s += it1->second.unit * it2->second.unit;
      ++it1;
      ++it2;
    }
  }
  s = std::clamp(s, 0.0, 1.0);
  return 1.0 - std::sqrt(1.0 - s);
}

VocabularyTree VocabularyTree::train_auto(const CompactDatabase& db, const Scaler& scaler,
                                          int branching, std::uint64_t seed, TrainGuards guards) {
  if (db.empty() || db.groups().empty()) {
    throw StateError("train_auto: empty compact database");
  }
  if (branching < 2) throw ParameterError("train_auto: branching factor must be >= 2");
  const int min_split = guards.min_split_count > 0 ? guards.min_split_count : branching;

  const auto& groups = db.groups();
  const std::size_t dim = groups.front().center.size();

  VocabularyTree tree;
  tree.scaler_ = scaler;
  tree.branching_ = branching;
  tree.gamma_bar_ = db.average_radius().value;
  tree.dim_ = static_cast<std::uint32_t>(dim);
  tree.train_seed_ = seed;

  const auto cast_center = [&](const std::vector<double>& c) {
    std::vector<float> out(c.size());
    for (std::size_t i = 0; i < c.size(); ++i) out[i] = static_cast<float>(c[i]);
    return out;
  };

  // Root holds every compact-feature center.
  {
    std::vector<double> mean(dim, 0.0);
    for (const auto& g : groups)
      for (std::size_t d = 0; d < dim; ++d) mean[d] += g.center[d];
    for (auto& v : mean) v /= double(groups.size());
    VocabNode root;
    root.center = cast_center(mean);
    root.depth = 0;
    tree.nodes_.push_back(std::move(root));
  }

  struct Task {
    std::uint32_t node;
    std::vector<int> members;  // indices into groups
    std::uint64_t seed;
  };

  // Depth-first build; child order keeps word ids deterministic.
  std::vector<Task> stack;
  {
    std::vector<int> all(groups.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
    stack.push_back({0, std::move(all), split_seed(seed, 0)});
  }

  while (!stack.empty()) {
    Task task = std::move(stack.back());
    stack.pop_back();
    const std::uint32_t node_id = task.node;
    const int depth = tree.nodes_[node_id].depth;
    const bool is_root = node_id == 0;
    const int n = static_cast<int>(task.members.size());

    if (depth >= guards.max_depth) {
      tree.nodes_[node_id].stop_reason = is_root ? StopReason::root : StopReason::max_depth;
      continue;
    }
    if (n < min_split || n < branching) {
      tree.nodes_[node_id].stop_reason = is_root ? StopReason::root : StopReason::min_count;
      continue;
    }

    std::vector<std::vector<double>> member_vecs;
    member_vecs.reserve(n);
    for (int idx : task.members) member_vecs.push_back(groups[idx].center);
    const KMeansResult km = kmeans(member_vecs, branching, task.seed);
    const int n_clusters = static_cast<int>(km.centers.size());

    std::vector<std::vector<int>> cluster_members(n_clusters);
    for (int i = 0; i < n; ++i) cluster_members[km.assignments[i]].push_back(task.members[i]);

    // theta_bar over non-empty sub-nodes (equals the branching factor
    // whenever k-means could fill every cluster).
    double theta_sum = 0.0;
    int non_empty = 0;
    for (int c = 0; c < n_clusters; ++c) {
      if (cluster_members[c].empty()) continue;
      double radius_sum = 0.0;
      for (int idx : cluster_members[c]) radius_sum += std::sqrt(dist_sq(groups[idx].center, km.centers[c]));
      theta_sum += radius_sum / double(cluster_members[c].size());
      ++non_empty;
    }
    const double theta_bar = theta_sum / double(non_empty);
    tree.nodes_[node_id].tentative_theta = static_cast<float>(theta_bar);

    const bool criterion_stop = theta_bar < tree.gamma_bar_;
    if (criterion_stop && !is_root) {
      tree.nodes_[node_id].stop_reason = StopReason::criterion;
      continue;
    }
    tree.nodes_[node_id].stop_reason =
        criterion_stop ? StopReason::forced_root : StopReason::none;

    // Commit the split; children are pushed in reverse so the depth-first
    // stack visits cluster 0 first.
    std::vector<Task> child_tasks;
    for (int c = 0; c < n_clusters; ++c) {
      if (cluster_members[c].empty()) continue;
      VocabNode child;
      child.center = cast_center(km.centers[c]);
      child.depth = static_cast<std::uint16_t>(depth + 1);
      const auto child_id = static_cast<std::uint32_t>(tree.nodes_.size());
      tree.nodes_.push_back(std::move(child));
      tree.nodes_[node_id].children.push_back(child_id);
      child_tasks.push_back({child_id, std::move(cluster_members[c]),
                             split_seed(task.seed, std::uint64_t(c) + 1)});
    }
    for (auto it = child_tasks.rbegin(); it != child_tasks.rend(); ++it) {
      stack.push_back(std::move(*it));
    }
  }

  // Dense word ids in depth-first child order.
  std::vector<std::uint32_t> dfs{0};
  int next_word = 0;
  while (!dfs.empty()) {
    const std::uint32_t id = dfs.back();
    dfs.pop_back();
    VocabNode& node = tree.nodes_[id];
    if (node.is_leaf()) {
      node.word_id = next_word++;
    } else {
      for (auto it = node.children.rbegin(); it != node.children.rend(); ++it) dfs.push_back(*it);
    }
  }
  tree.word_count_ = next_word;
  return tree;
}

std::uint32_t VocabularyTree::quantize(const std::vector<float>& descriptor) const {
  if (descriptor.size() != dim_) {
    throw DimensionError("quantize: descriptor dim " + std::to_string(descriptor.size()) +
                         " vs vocabulary dim " + std::to_string(dim_));
  }
  const VocabNode* node = &nodes_.front();
  while (!node->is_leaf()) {
    const VocabNode* best = nullptr;
    double best_d = std::numeric_limits<double>::max();
    for (const std::uint32_t child : node->children) {
      const double d = dist_sq_f(nodes_[child].center, descriptor);
      if (d < best_d) {
        best_d = d;
        best = &nodes_[child];
      }
    }
    node = best;
  }
  return static_cast<std::uint32_t>(node->word_id);
}

BowVector VocabularyTree::bow_vector(const FrameFeatures& frame) const {
  BowVector bow;
  if (frame.empty()) return bow;
  for (const auto& f : frame.features) {
    bow.entries[quantize(f.descriptor)].count += 1;
  }
  bow.total = static_cast<int>(frame.size());
  double norm_sq = 0.0;
  for (auto& [word, entry] : bow.entries) {
    entry.tf = double(entry.count) / double(bow.total);
    norm_sq += entry.tf * entry.tf;
  }
  const double norm = std::sqrt(norm_sq);
  for (auto& [word, entry] : bow.entries) entry.unit = entry.tf / norm;
  return bow;
}

void VocabularyTree::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open vocabulary file for writing: " + path.string());
  out.write(kMagic, 4);
  write_pod(out, kVersion);
  write_pod(out, dim_);
  write_pod(out, static_cast<std::uint32_t>(branching_));
  write_pod(out, static_cast<float>(gamma_bar_));
  write_pod(out, train_seed_);
  write_f32_vec(out, scaler_.mean);
  write_f32_vec(out, scaler_.stddev);
  write_pod(out, static_cast<std::uint32_t>(nodes_.size()));
  for (const auto& node : nodes_) {
    write_pod(out, node.depth);
    write_pod(out, static_cast<std::uint16_t>(node.children.size()));
    for (const std::uint32_t c : node.children) write_pod(out, c);
    write_pod(out, node.word_id);
    write_pod(out, static_cast<std::uint8_t>(node.stop_reason));
    write_pod(out, node.tentative_theta);
    write_f32_vec(out, node.center);
  }
  if (!out) throw IoError("write failed: " + path.string());
}

VocabularyTree VocabularyTree::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open vocabulary file: " + path.string());
  char magic[4] = {};
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0) {
    throw FormatError("bad magic in vocabulary file: " + path.string());
  }
  const auto version = read_pod<std::uint32_t>(in);
  if (version != kVersion) {
    throw FormatError("unsupported vocabulary version " + std::to_string(version));
  }

  VocabularyTree tree;
  tree.dim_ = read_pod<std::uint32_t>(in);
  tree.branching_ = static_cast<int>(read_pod<std::uint32_t>(in));
  tree.gamma_bar_ = read_pod<float>(in);
  tree.train_seed_ = read_pod<std::uint64_t>(in);
  read_f32_vec(in, tree.scaler_.mean, tree.dim_);
  read_f32_vec(in, tree.scaler_.stddev, tree.dim_);
  const auto node_count = read_pod<std::uint32_t>(in);
  if (!in) throw CorruptionError("truncated vocabulary header: " + path.string());
  if (node_count == 0) throw CorruptionError("vocabulary has no nodes: " + path.string());

  tree.nodes_.resize(node_count);
  int max_word = -1;
  for (auto& node : tree.nodes_) {
    node.depth = read_pod<std::uint16_t>(in);
    const auto n_children = read_pod<std::uint16_t>(in);
    node.children.resize(n_children);
    for (auto& c : node.children) {
      c = read_pod<std::uint32_t>(in);
      if (c >= node_count) throw CorruptionError("child id out of range: " + path.string());
    }
    node.word_id = read_pod<std::int32_t>(in);
    node.stop_reason = static_cast<StopReason>(read_pod<std::uint8_t>(in));
    node.tentative_theta = read_pod<float>(in);
    read_f32_vec(in, node.center, tree.dim_);
    if (!in) throw CorruptionError("truncated vocabulary payload: " + path.string());
    max_word = std::max(max_word, int(node.word_id));
  }
  tree.word_count_ = max_word + 1;
  return tree;
}

bool VocabularyTree::forced_root_split() const {
  return root().stop_reason == StopReason::forced_root;
}

int VocabularyTree::max_depth() const {
  int d = 0;
  for (const auto& node : nodes_) d = std::max(d, int(node.depth));
  return d;
}

std::map<StopReason, int> VocabularyTree::stop_histogram() const {
  std::map<StopReason, int> hist;
  for (const auto& node : nodes_) {
    if (node.is_leaf()) ++hist[node.stop_reason];
  }
  return hist;
}

}  // namespace lcd
