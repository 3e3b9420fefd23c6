#pragma once

#include <Eigen/Core>
#include <array>
#include <unordered_map>
#include <utility>
#include <vector>

#include "lcd/feature_io.hpp"
#include "lcd/geometry.hpp"

namespace lcd {

// Delaunay triangulation over matched key points.  Vertices carry
// correspondence labels so two graphs built from the two sides of a match
// list can be compared edge by edge.
struct TopoGraph {
  std::vector<Eigen::Vector2d> vertices;
  std::vector<int> labels;
  std::vector<std::pair<int, int>> edges;       // vertex index pairs, first < second
  std::vector<std::array<int, 3>> triangles;    // vertex index triples, ascending
};

// Bowyer-Watson incremental triangulation.  Points are inserted in
// lexicographic (x, then y) order into a super-triangle 20x the bounding-box
// extent; each insertion removes the triangles whose circumcircle strictly
// contains the point and re-triangulates the cavity.  Cocircular points
// (within a relative 1e-9 tolerance) count as outside, which keeps the
// result deterministic.  Exact duplicate points are dropped.
//
// Throws InsufficientPointsError (< 3 distinct points) or DegeneracyError
// (all points collinear).  `labels`, when given, tags the output vertices;
// by default the input index is used.
TopoGraph delaunay(const std::vector<Eigen::Vector2d>& points,
                   const std::vector<int>* labels = nullptr);

struct GraphSimilarityResult {
  double zeta = 0.0;
  int public_edges = 0;
  bool degenerate = false;  // one of the edge sets was empty
};

// zeta = (|PE|/|E1|) * (|PE|/|E2|): an edge of g1 is public when its
// label pair, mapped through the correspondence, is an edge of g2.
GraphSimilarityResult graph_similarity(const TopoGraph& g1, const TopoGraph& g2,
                                       const std::unordered_map<int, int>& correspondence);

// Identity correspondence over shared labels.
GraphSimilarityResult graph_similarity(const TopoGraph& g1, const TopoGraph& g2);

// The top_t matches with the smallest descriptor distance; stable tie-break
// by idx_a.
std::vector<Match> select_top_matches(std::vector<Match> matches, int top_t);

enum class VerifyStatus : std::uint8_t { ok, too_few_matches, degenerate_geometry };

struct VerificationResult {
  double zeta = 0.0;  // graph similarity, or the inlier count for verify_ransac
  bool accepted = false;
  int public_edge_count = 0;
  int edges_query = 0;
  int edges_candidate = 0;
  int match_count_used = 0;
  VerifyStatus status = VerifyStatus::ok;
};

// mNN-match the frames, keep the top_t nearest matches, build a Delaunay
// graph per side and accept iff zeta > zeta_threshold.  Fewer than 8 usable
// matches or a degenerate geometry rejects the candidate, never throws.
// The built graphs are copied out through the optional pointers (debug).
VerificationResult verify_graph(const FrameFeatures& query, const FrameFeatures& candidate,
                                int top_t, double zeta_threshold,
                                TopoGraph* out_query_graph = nullptr,
                                TopoGraph* out_candidate_graph = nullptr);

// RANSAC baseline: accept iff the fundamental-matrix inlier count reaches
// min_inliers.
VerificationResult verify_ransac(const FrameFeatures& query, const FrameFeatures& candidate,
                                 const RansacParams& params, int min_inliers);

// Text dump (vertices with labels, edge list, zeta) for debugging.
void dump_graph_pair(std::ostream& out, const TopoGraph& g1, const TopoGraph& g2, double zeta);

}  // namespace lcd
