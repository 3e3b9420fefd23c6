#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <vector>

#include "lcd/feature_io.hpp"

namespace lcd {

// A correspondence between one feature of frame A and one of frame B.
// Match lists are injective on both sides at every pipeline stage.
struct Match {
  int idx_a = -1;
  int idx_b = -1;
  double descriptor_distance = 0.0;
};

enum class TransformKind { homography, fundamental };

struct PlanarTransform {
  TransformKind kind = TransformKind::homography;
  Eigen::Matrix3d matrix = Eigen::Matrix3d::Identity();
  int inlier_count = 0;
  double inlier_threshold = 0.0;
  std::vector<int> inliers;  // indices into the match list the model was fit on
};

struct RansacParams {
  double reprojection_threshold = 3.0;  // pixels
  int max_iterations = 2000;
  double confidence = 0.999;
  std::uint64_t rng_seed = 0;
};

enum class FmMode { projection, verification };

struct FmResult {
  std::vector<Match> matches;
  bool bad_case = false;                  // both models failed
  std::optional<PlanarTransform> model;   // the winning model, when any
};

struct TwoStepResult {
  std::vector<Match> matches;
  bool frames_related = false;
};

double descriptor_distance(const Feature& a, const Feature& b);
std::vector<Eigen::Vector2d> keypoints_of(const FrameFeatures& frame);

// Mutually-nearest-neighbor matching by descriptor L2 distance.  A pair
// (i, j) is kept iff j is i's nearest neighbor in B and i is j's nearest
// neighbor in A; ties break toward the lowest index.
std::vector<Match> mutual_nn_match(const FrameFeatures& a, const FrameFeatures& b);

// Homography by 4-point sampling and normalized DLT, inliers by symmetric
// transfer error.  Fails (nullopt) when the best support is below 4.
std::optional<PlanarTransform> ransac_homography(const std::vector<Match>& matches,
                                                 const std::vector<Eigen::Vector2d>& points_a,
                                                 const std::vector<Eigen::Vector2d>& points_b,
                                                 const RansacParams& params);

// Fundamental matrix by normalized 8-point with rank-2 enforcement, inliers
// by point-to-epipolar-line distance in both directions.  Fails below 8.
std::optional<PlanarTransform> ransac_fundamental(const std::vector<Match>& matches,
                                                  const std::vector<Eigen::Vector2d>& points_a,
                                                  const std::vector<Eigen::Vector2d>& points_b,
                                                  const RansacParams& params);

// Estimates both H and F from m1 and keeps the model with more inliers,
// except that F is demoted when the homography explains (almost) all of its
// support: a planar scene constrains F only up to a family compatible with
// H, so a raw-count win there is spurious.  verification mode returns the
// winning model's inlier matches.  projection mode projects every key point
// of image 1 into image 2 and pairs it with the nearest key point within
// the reprojection threshold; an image-2 key point is claimed at most once,
// closest projector wins.  Matches emitted by projection carry no
// descriptor distance.
FmResult fm(const std::vector<Match>& m1, const std::vector<Eigen::Vector2d>& p1,
            const std::vector<Eigen::Vector2d>& p2, FmMode mode, const RansacParams& params);

// MN = mutual_nn_match; MP = fm(MN, projection); MV = fm(MP, verification).
// Any stage failing or coming up empty marks the frames unrelatable.
TwoStepResult two_step_match(const FrameFeatures& a, const FrameFeatures& b,
                             const RansacParams& params);

// Homogeneous point projection.  Throws ProjectionAtInfinityError when the
// homogeneous scale vanishes (|w| <= 1e-12).
Eigen::Vector2d homography_project(const Eigen::Matrix3d& h, const Eigen::Vector2d& p);

// Distance of q to the epipolar line F * p.
double epipolar_distance(const Eigen::Matrix3d& f, const Eigen::Vector2d& p,
                         const Eigen::Vector2d& q);

}  // namespace lcd
