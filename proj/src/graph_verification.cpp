#include "lcd/graph_verification.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <set>

namespace lcd {

namespace {

constexpr double kCircleEps = 1e-9;
constexpr int kMinVerifyMatches = 8;

// Strict in-circle test with a relative tolerance; cocircular configurations
// count as outside so existing triangles are kept.
bool circumcircle_contains(const Eigen::Vector2d& a, const Eigen::Vector2d& b,
                           const Eigen::Vector2d& c, const Eigen::Vector2d& p) {
  const double ax = a.x() - p.x(), ay = a.y() - p.y();
  const double bx = b.x() - p.x(), by = b.y() - p.y();
  const double cx = c.x() - p.x(), cy = c.y() - p.y();
  const double a2 = ax * ax + ay * ay;
  const double b2 = bx * bx + by * by;
  const double c2 = cx * cx + cy * cy;

  double det = ax * (by * c2 - b2 * cy) - ay * (bx * c2 - b2 * cx) + a2 * (bx * cy - by * cx);

  const double orient =
      (b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x());
  if (orient == 0.0) return false;
  if (orient < 0.0) det = -det;

  const double s = std::max({std::abs(ax), std::abs(ay), std::abs(bx), std::abs(by),
                             std::abs(cx), std::abs(cy)});
  return det > kCircleEps * s * s * s * s;
}

struct Tri {
  int a, b, c;
  bool alive = true;
};

std::pair<int, int> norm_edge(int u, int v) { return u < v ? std::make_pair(u, v) : std::make_pair(v, u); }

}  // namespace

TopoGraph delaunay(const std::vector<Eigen::Vector2d>& points, const std::vector<int>* labels) {
  if (labels && labels->size() != points.size()) {
    throw ParameterError("delaunay: label count does not match point count");
  }

  // Exact coordinate duplicates are dropped; the first occurrence wins.
  std::vector<int> kept;
  {
    std::set<std::pair<double, double>> seen;
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (seen.insert({points[i].x(), points[i].y()}).second) kept.push_back(static_cast<int>(i));
    }
  }
  const int n = static_cast<int>(kept.size());
  if (n < 3) throw InsufficientPointsError("delaunay: need at least 3 distinct points");

  // Collinearity: farthest point pair as the base line, max deviation.
  {
    const Eigen::Vector2d& p0 = points[kept[0]];
    int far = kept[0];
    double far_d = -1.0;
    for (int idx : kept) {
      const double d = (points[idx] - p0).norm();
      if (d > far_d) {
        far_d = d;
        far = idx;
      }
    }
    const Eigen::Vector2d base = points[far] - p0;
    double max_cross = 0.0;
    for (int idx : kept) {
      const Eigen::Vector2d u = points[idx] - p0;
      max_cross = std::max(max_cross, std::abs(base.x() * u.y() - base.y() * u.x()));
    }
    if (max_cross <= 1e-12 * far_d * far_d) {
      throw DegeneracyError("delaunay: all points are collinear");
    }
  }

  // Insertion order: lexicographic by (x, y).
  std::vector<int> order = kept;
  std::sort(order.begin(), order.end(), [&](int i, int j) {
    return std::make_pair(points[i].x(), points[i].y()) <
           std::make_pair(points[j].x(), points[j].y());
  });

  std::vector<Eigen::Vector2d> v;
  v.reserve(n + 3);
  for (int idx : order) v.push_back(points[idx]);

  // Super-triangle 20x the bounding-box extent.
  {
    double min_x = v[0].x(), max_x = v[0].x(), min_y = v[0].y(), max_y = v[0].y();
    for (const auto& p : v) {
      min_x = std::min(min_x, p.x());
      max_x = std::max(max_x, p.x());
      min_y = std::min(min_y, p.y());
      max_y = std::max(max_y, p.y());
    }
    const double cx = (min_x + max_x) / 2.0;
    const double cy = (min_y + max_y) / 2.0;
    const double m = 20.0 * std::max(max_x - min_x, max_y - min_y);
    v.emplace_back(cx - m, cy - m);
    v.emplace_back(cx + m, cy - m);
    v.emplace_back(cx, cy + m);
  }

  std::vector<Tri> tris;
  tris.push_back({n, n + 1, n + 2});

  std::map<std::pair<int, int>, int> edge_count;
  for (int pi = 0; pi < n; ++pi) {
    const Eigen::Vector2d& p = v[pi];

    edge_count.clear();
    bool found = false;
    for (auto& t : tris) {
      if (!t.alive) continue;
      if (!circumcircle_contains(v[t.a], v[t.b], v[t.c], p)) continue;
      t.alive = false;
      found = true;
      ++edge_count[norm_edge(t.a, t.b)];
      ++edge_count[norm_edge(t.b, t.c)];
      ++edge_count[norm_edge(t.c, t.a)];
    }
    if (!found) {
      throw Error("delaunay: insertion failed to locate a containing circumcircle");
    }
    // Cavity boundary edges occur exactly once; connect them to the new point.
    for (const auto& [edge, count] : edge_count) {
      if (count == 1) tris.push_back({edge.first, edge.second, pi});
    }
  }

  // Map internal (sorted) indices back to the deduplicated input order.
  std::vector<int> out_index(points.size(), -1);
  for (std::size_t j = 0; j < kept.size(); ++j) out_index[kept[j]] = static_cast<int>(j);
  std::vector<int> sorted_to_out(n);
  for (int j = 0; j < n; ++j) sorted_to_out[j] = out_index[order[j]];

  TopoGraph graph;
  graph.vertices.reserve(n);
  graph.labels.reserve(n);
  for (int idx : kept) {
    graph.vertices.push_back(points[idx]);
    graph.labels.push_back(labels ? (*labels)[idx] : idx);
  }

  std::set<std::pair<int, int>> edges;
  for (const auto& t : tris) {
    if (!t.alive || t.a >= n || t.b >= n || t.c >= n) continue;
    std::array<int, 3> tri = {sorted_to_out[t.a], sorted_to_out[t.b], sorted_to_out[t.c]};
    std::sort(tri.begin(), tri.end());
    graph.triangles.push_back(tri);
    edges.insert(norm_edge(tri[0], tri[1]));
    edges.insert(norm_edge(tri[1], tri[2]));
    edges.insert(norm_edge(tri[0], tri[2]));
  }
  std::sort(graph.triangles.begin(), graph.triangles.end());
  graph.edges.assign(edges.begin(), edges.end());
  return graph;
}

GraphSimilarityResult graph_similarity(const TopoGraph& g1, const TopoGraph& g2,
                                       const std::unordered_map<int, int>& correspondence) {
  if (g1.edges.empty() || g2.edges.empty()) return {0.0, 0, true};

  std::set<std::pair<int, int>> e2;
  for (const auto& [a, b] : g2.edges) e2.insert(norm_edge(g2.labels[a], g2.labels[b]));

  int pe = 0;
  for (const auto& [a, b] : g1.edges) {
    const auto ia = correspondence.find(g1.labels[a]);
    const auto ib = correspondence.find(g1.labels[b]);
    if (ia == correspondence.end() || ib == correspondence.end()) continue;
    if (e2.count(norm_edge(ia->second, ib->second))) ++pe;
  }
  const double zeta =
      (double(pe) / double(g1.edges.size())) * (double(pe) / double(g2.edges.size()));
  return {zeta, pe, false};
}

GraphSimilarityResult graph_similarity(const TopoGraph& g1, const TopoGraph& g2) {
  std::unordered_map<int, int> identity;
  identity.reserve(g1.labels.size());
  for (int l : g1.labels) identity[l] = l;
  return graph_similarity(g1, g2, identity);
}

std::vector<Match> select_top_matches(std::vector<Match> matches, int top_t) {
  std::sort(matches.begin(), matches.end(), [](const Match& a, const Match& b) {
    if (a.descriptor_distance != b.descriptor_distance) {
      return a.descriptor_distance < b.descriptor_distance;
    }
    return a.idx_a < b.idx_a;
  });
  if (top_t >= 0 && static_cast<int>(matches.size()) > top_t) matches.resize(top_t);
  return matches;
}

VerificationResult verify_graph(const FrameFeatures& query, const FrameFeatures& candidate,
                                int top_t, double zeta_threshold, TopoGraph* out_query_graph,
                                TopoGraph* out_candidate_graph) {
  VerificationResult result;
  const auto matches = select_top_matches(mutual_nn_match(query, candidate), top_t);
  result.match_count_used = static_cast<int>(matches.size());
  if (result.match_count_used < kMinVerifyMatches) {
    result.status = VerifyStatus::too_few_matches;
    return result;
  }

  // Key-point collisions are dropped pairwise so the vertex bijection holds.
  std::vector<Eigen::Vector2d> pts_q, pts_c;
  {
    std::set<std::pair<float, float>> seen_q, seen_c;
    for (const auto& m : matches) {
      const Feature& fq = query.features[m.idx_a];
      const Feature& fc = candidate.features[m.idx_b];
      if (seen_q.count({fq.x, fq.y}) || seen_c.count({fc.x, fc.y})) continue;
      seen_q.insert({fq.x, fq.y});
      seen_c.insert({fc.x, fc.y});
      pts_q.emplace_back(fq.x, fq.y);
      pts_c.emplace_back(fc.x, fc.y);
    }
  }
  result.match_count_used = static_cast<int>(pts_q.size());
  if (result.match_count_used < kMinVerifyMatches) {
    result.status = VerifyStatus::too_few_matches;
    return result;
  }

  TopoGraph g1, g2;
  try {
    g1 = delaunay(pts_q);
    g2 = delaunay(pts_c);
  } catch (const DegeneracyError&) {
    result.status = VerifyStatus::degenerate_geometry;
    return result;
  } catch (const InsufficientPointsError&) {
    result.status = VerifyStatus::degenerate_geometry;
    return result;
  }

  const auto sim = graph_similarity(g1, g2);
  result.zeta = sim.zeta;
  result.public_edge_count = sim.public_edges;
  result.edges_query = static_cast<int>(g1.edges.size());
  result.edges_candidate = static_cast<int>(g2.edges.size());
  if (out_query_graph) *out_query_graph = g1;
  if (out_candidate_graph) *out_candidate_graph = g2;
  if (sim.degenerate) {
    result.status = VerifyStatus::degenerate_geometry;
    return result;
  }
  result.accepted = result.zeta > zeta_threshold;
  return result;
}

VerificationResult verify_ransac(const FrameFeatures& query, const FrameFeatures& candidate,
                                 const RansacParams& params, int min_inliers) {
  VerificationResult result;
  const auto matches = mutual_nn_match(query, candidate);
  result.match_count_used = static_cast<int>(matches.size());
  if (matches.empty()) {
    result.status = VerifyStatus::too_few_matches;
    return result;
  }
  const auto f =
      ransac_fundamental(matches, keypoints_of(query), keypoints_of(candidate), params);
  if (!f) return result;
  result.zeta = f->inlier_count;
  result.accepted = f->inlier_count >= min_inliers;
  return result;
}

void dump_graph_pair(std::ostream& out, const TopoGraph& g1, const TopoGraph& g2, double zeta) {
  const auto dump_one = [&out](const TopoGraph& g, const char* name) {
    out << name << " vertices " << g.vertices.size() << "\n";
    for (std::size_t i = 0; i < g.vertices.size(); ++i) {
      out << "  " << g.labels[i] << " " << g.vertices[i].x() << " " << g.vertices[i].y() << "\n";
    }
    out << name << " edges " << g.edges.size() << "\n";
    for (const auto& [a, b] : g.edges) {
      out << "  " << g.labels[a] << " " << g.labels[b] << "\n";
    }
  };
  dump_one(g1, "g1");
  dump_one(g2, "g2");
  out << "zeta " << zeta << "\n";
}

}  // namespace lcd
