#include "lcd/geometry.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>

#include "lcd/rng.hpp"

namespace lcd {

namespace {

constexpr double kInfinityScale = 1e-12;

std::optional<Eigen::Vector2d> project_or_null(const Eigen::Matrix3d& h,
                                               const Eigen::Vector2d& p) {
  const Eigen::Vector3d q = h * p.homogeneous();
  if (std::abs(q(2)) <= kInfinityScale) return std::nullopt;
  return Eigen::Vector2d(q(0) / q(2), q(1) / q(2));
}

bool collinear(const Eigen::Vector2d& p, const Eigen::Vector2d& q, const Eigen::Vector2d& r) {
  const Eigen::Vector2d u = q - p;
  const Eigen::Vector2d v = r - p;
  const double cross = u.x() * v.y() - u.y() * v.x();
  const double scale = std::max({1.0, u.norm(), v.norm()});
  return std::abs(cross) <= 1e-9 * scale * scale;
}

bool degenerate_quad(const std::vector<Eigen::Vector2d>& pts) {
  for (int a = 0; a < 4; ++a)
    for (int b = a + 1; b < 4; ++b)
      for (int c = b + 1; c < 4; ++c)
        if (collinear(pts[a], pts[b], pts[c])) return true;
  return false;
}

struct Normalized {
  Eigen::Matrix3d t = Eigen::Matrix3d::Identity();
  std::vector<Eigen::Vector2d> pts;
};

std::optional<Normalized> normalize_points(const std::vector<Eigen::Vector2d>& pts) {
  Eigen::Vector2d centroid = Eigen::Vector2d::Zero();
  for (const auto& p : pts) centroid += p;
  centroid /= double(pts.size());
  double mean_dist = 0.0;
  for (const auto& p : pts) mean_dist += (p - centroid).norm();
  mean_dist /= double(pts.size());
  if (mean_dist < 1e-12) return std::nullopt;
  const double s = std::sqrt(2.0) / mean_dist;

  Normalized out;
  out.t << s, 0, -s * centroid.x(), 0, s, -s * centroid.y(), 0, 0, 1;
  out.pts.reserve(pts.size());
  for (const auto& p : pts) out.pts.emplace_back(s * (p - centroid));
  return out;
}

std::optional<Eigen::Matrix3d> fit_homography(const std::vector<Eigen::Vector2d>& pa,
                                              const std::vector<Eigen::Vector2d>& pb) {
  const int n = static_cast<int>(pa.size());
  if (n < 4) return std::nullopt;
  const auto na = normalize_points(pa);
  const auto nb = normalize_points(pb);
  if (!na || !nb) return std::nullopt;

  Eigen::MatrixXd a(2 * n, 9);
  for (int i = 0; i < n; ++i) {
    const double x = na->pts[i].x(), y = na->pts[i].y();
    const double u = nb->pts[i].x(), v = nb->pts[i].y();
    a.row(2 * i) << 0, 0, 0, -x, -y, -1, v * x, v * y, v;
    a.row(2 * i + 1) << x, y, 1, 0, 0, 0, -u * x, -u * y, -u;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
  const Eigen::VectorXd h = svd.matrixV().col(8);
  Eigen::Matrix3d hn;
  hn << h(0), h(1), h(2), h(3), h(4), h(5), h(6), h(7), h(8);

  Eigen::Matrix3d result = nb->t.inverse() * hn * na->t;
  if (!result.allFinite()) return std::nullopt;
  if (std::abs(result.determinant()) < 1e-15) return std::nullopt;
  if (std::abs(result(2, 2)) > 1e-12) result /= result(2, 2);
  return result;
}

std::optional<Eigen::Matrix3d> fit_fundamental(const std::vector<Eigen::Vector2d>& pa,
                                               const std::vector<Eigen::Vector2d>& pb) {
  const int n = static_cast<int>(pa.size());
  if (n < 8) return std::nullopt;
  const auto na = normalize_points(pa);
  const auto nb = normalize_points(pb);
  if (!na || !nb) return std::nullopt;

  Eigen::MatrixXd a(n, 9);
  for (int i = 0; i < n; ++i) {
    const double x = na->pts[i].x(), y = na->pts[i].y();
    const double u = nb->pts[i].x(), v = nb->pts[i].y();
    a.row(i) << u * x, u * y, u, v * x, v * y, v, x, y, 1;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
  const Eigen::VectorXd f = svd.matrixV().col(8);
  Eigen::Matrix3d fn;
  fn << f(0), f(1), f(2), f(3), f(4), f(5), f(6), f(7), f(8);

  // Enforce rank 2 by zeroing the smallest singular value.
  Eigen::JacobiSVD<Eigen::Matrix3d> fsvd(fn, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Vector3d d = fsvd.singularValues();
  d(2) = 0.0;
  fn = fsvd.matrixU() * d.asDiagonal() * fsvd.matrixV().transpose();

  Eigen::Matrix3d result = nb->t.transpose() * fn * na->t;
  const double norm = result.norm();
  if (!std::isfinite(norm) || norm < 1e-15) return std::nullopt;
  return result / norm;
}

struct Consensus {
  std::vector<int> inliers;
  double score = 0.0;  // truncated squared-error total, lower is better
};

// Generic sample-consensus loop with adaptive termination.  Models are ranked
// by the truncated squared error, so among models covering the same matches
// the tighter fit wins; the inlier definition and the failure floor stay
// count-based.  The final least-squares refit is adopted only when it
// improves the score, which keeps band strays from dragging the model.
template <typename FitFn, typename ConsensusFn>
std::optional<std::pair<Eigen::Matrix3d, std::vector<int>>> ransac_loop(
    int sample_size, int n, int min_inliers, const RansacParams& params, const FitFn& fit_on,
    const ConsensusFn& consensus_of) {
  if (n < sample_size) return std::nullopt;

  std::mt19937_64 rng(params.rng_seed);
  std::uniform_int_distribution<int> pick(0, n - 1);

  Eigen::Matrix3d best_model;
  Consensus best;
  bool have_model = false;
  int required = params.max_iterations;
  std::vector<int> sample;
  sample.reserve(sample_size);

  for (int iter = 0; iter < required; ++iter) {
    sample.clear();
    while (static_cast<int>(sample.size()) < sample_size) {
      const int v = pick(rng);
      if (std::find(sample.begin(), sample.end(), v) == sample.end()) sample.push_back(v);
    }
    const auto model = fit_on(sample, true);
    if (!model) continue;
    auto consensus = consensus_of(*model);
    if (!have_model || consensus.score < best.score) {
      have_model = true;
      best_model = *model;
      best = std::move(consensus);
      const double w = double(best.inliers.size()) / double(n);
      if (w >= 1.0) {
        required = iter + 1;
      } else {
        const double denom = std::log(1.0 - std::pow(w, sample_size));
        if (denom < 0.0) {
          const double need = std::ceil(std::log(1.0 - params.confidence) / denom);
          required = static_cast<int>(
              std::clamp(need, double(iter + 1), double(params.max_iterations)));
        }
      }
    }
  }

  if (!have_model || static_cast<int>(best.inliers.size()) < min_inliers) return std::nullopt;

  for (int round = 0; round < 5; ++round) {
    const auto model = fit_on(best.inliers, false);
    if (!model) break;
    auto consensus = consensus_of(*model);
    if (static_cast<int>(consensus.inliers.size()) < min_inliers) break;
    if (consensus.score >= best.score) break;
    const bool stable = consensus.inliers == best.inliers;
    best_model = *model;
    best = std::move(consensus);
    if (stable) break;
  }
  return std::make_pair(best_model, best.inliers);
}

std::vector<Eigen::Vector2d> gather(const std::vector<Eigen::Vector2d>& pts,
                                    const std::vector<Match>& matches,
                                    const std::vector<int>& idx, bool side_a) {
  std::vector<Eigen::Vector2d> out;
  out.reserve(idx.size());
  for (int i : idx) out.push_back(pts[side_a ? matches[i].idx_a : matches[i].idx_b]);
  return out;
}

void check_match_indices(const std::vector<Match>& matches,
                         const std::vector<Eigen::Vector2d>& points_a,
                         const std::vector<Eigen::Vector2d>& points_b) {
  for (const auto& m : matches) {
    if (m.idx_a < 0 || m.idx_a >= static_cast<int>(points_a.size()) || m.idx_b < 0 ||
        m.idx_b >= static_cast<int>(points_b.size())) {
      throw ParameterError("match index out of range");
    }
  }
}

}  // namespace

double descriptor_distance(const Feature& a, const Feature& b) {
  double sum = 0.0;
  for (std::size_t d = 0; d < a.descriptor.size(); ++d) {
    const double diff = double(a.descriptor[d]) - double(b.descriptor[d]);
    sum += diff * diff;
  }
  return std::sqrt(sum);
}

std::vector<Eigen::Vector2d> keypoints_of(const FrameFeatures& frame) {
  std::vector<Eigen::Vector2d> pts;
  pts.reserve(frame.size());
  for (const auto& f : frame.features) pts.emplace_back(f.x, f.y);
  return pts;
}

std::vector<Match> mutual_nn_match(const FrameFeatures& a, const FrameFeatures& b) {
  if (a.empty() || b.empty()) return {};
  if (a.descriptor_dim() != b.descriptor_dim()) {
    throw DimensionError("mutual_nn_match: descriptor dimensions differ");
  }
  const int na = static_cast<int>(a.size());
  const int nb = static_cast<int>(b.size());

  std::vector<double> dist(std::size_t(na) * nb);
  for (int i = 0; i < na; ++i)
    for (int j = 0; j < nb; ++j)
      dist[std::size_t(i) * nb + j] = descriptor_distance(a.features[i], b.features[j]);

  std::vector<int> nn_a(na), nn_b(nb);
  for (int i = 0; i < na; ++i) {
    int best = 0;
    for (int j = 1; j < nb; ++j)
      if (dist[std::size_t(i) * nb + j] < dist[std::size_t(i) * nb + best]) best = j;
    nn_a[i] = best;
  }
  for (int j = 0; j < nb; ++j) {
    int best = 0;
    for (int i = 1; i < na; ++i)
      if (dist[std::size_t(i) * nb + j] < dist[std::size_t(best) * nb + j]) best = i;
    nn_b[j] = best;
  }

  std::vector<Match> matches;
  for (int i = 0; i < na; ++i) {
    const int j = nn_a[i];
    if (nn_b[j] == i) matches.push_back({i, j, dist[std::size_t(i) * nb + j]});
  }
  return matches;
}

std::optional<PlanarTransform> ransac_homography(const std::vector<Match>& matches,
                                                 const std::vector<Eigen::Vector2d>& points_a,
                                                 const std::vector<Eigen::Vector2d>& points_b,
                                                 const RansacParams& params) {
  if (params.reprojection_threshold <= 0 || params.confidence <= 0 || params.confidence >= 1) {
    throw ParameterError("ransac: invalid threshold or confidence");
  }
  check_match_indices(matches, points_a, points_b);
  const int n = static_cast<int>(matches.size());
  const double th = params.reprojection_threshold;

  const auto fit_on = [&](const std::vector<int>& idx,
                          bool minimal) -> std::optional<Eigen::Matrix3d> {
    const auto pa = gather(points_a, matches, idx, true);
    const auto pb = gather(points_b, matches, idx, false);
    if (minimal && (degenerate_quad(pa) || degenerate_quad(pb))) return std::nullopt;
    return fit_homography(pa, pb);
  };
  const auto consensus_of = [&](const Eigen::Matrix3d& h) {
    Consensus consensus;
    const double th_sq = th * th;
    const Eigen::Matrix3d hinv = h.inverse();
    if (!hinv.allFinite()) {
      consensus.score = double(n) * th_sq;
      return consensus;
    }
    for (int i = 0; i < n; ++i) {
      double err = std::numeric_limits<double>::infinity();
      const auto fwd = project_or_null(h, points_a[matches[i].idx_a]);
      const auto bwd = project_or_null(hinv, points_b[matches[i].idx_b]);
      if (fwd && bwd) {
        err = std::max((*fwd - points_b[matches[i].idx_b]).norm(),
                       (*bwd - points_a[matches[i].idx_a]).norm());
      }
      if (err < th) {
        consensus.inliers.push_back(i);
        consensus.score += err * err;
      } else {
        consensus.score += th_sq;
      }
    }
    return consensus;
  };

  const auto result = ransac_loop(4, n, 4, params, fit_on, consensus_of);
  if (!result) return std::nullopt;
  return PlanarTransform{TransformKind::homography, result->first,
                         static_cast<int>(result->second.size()), th, result->second};
}

std::optional<PlanarTransform> ransac_fundamental(const std::vector<Match>& matches,
                                                  const std::vector<Eigen::Vector2d>& points_a,
                                                  const std::vector<Eigen::Vector2d>& points_b,
                                                  const RansacParams& params) {
  if (params.reprojection_threshold <= 0 || params.confidence <= 0 || params.confidence >= 1) {
    throw ParameterError("ransac: invalid threshold or confidence");
  }
  check_match_indices(matches, points_a, points_b);
  const int n = static_cast<int>(matches.size());
  const double th = params.reprojection_threshold;

  const auto fit_on = [&](const std::vector<int>& idx, bool) -> std::optional<Eigen::Matrix3d> {
    return fit_fundamental(gather(points_a, matches, idx, true),
                           gather(points_b, matches, idx, false));
  };
  const auto consensus_of = [&](const Eigen::Matrix3d& f) {
    Consensus consensus;
    const double th_sq = th * th;
    const Eigen::Matrix3d ft = f.transpose();
    for (int i = 0; i < n; ++i) {
      const Eigen::Vector2d& p = points_a[matches[i].idx_a];
      const Eigen::Vector2d& q = points_b[matches[i].idx_b];
      const double err = std::max(epipolar_distance(f, p, q), epipolar_distance(ft, q, p));
      if (err < th) {
        consensus.inliers.push_back(i);
        consensus.score += err * err;
      } else {
        consensus.score += th_sq;
      }
    }
    return consensus;
  };

  const auto result = ransac_loop(8, n, 8, params, fit_on, consensus_of);
  if (!result) return std::nullopt;
  return PlanarTransform{TransformKind::fundamental, result->first,
                         static_cast<int>(result->second.size()), th, result->second};
}

FmResult fm(const std::vector<Match>& m1, const std::vector<Eigen::Vector2d>& p1,
            const std::vector<Eigen::Vector2d>& p2, FmMode mode, const RansacParams& params) {
  FmResult result;
  if (m1.empty()) {
    result.bad_case = true;
    return result;
  }
  RansacParams fparams = params;
  fparams.rng_seed = split_seed(params.rng_seed, 0x464d);
  const auto h = ransac_homography(m1, p1, p2, params);
  const auto f = ransac_fundamental(m1, p1, p2, fparams);
  if (!h && !f) {
    result.bad_case = true;
    return result;
  }
  const int hc = h ? h->inlier_count : 0;
  const int fc = f ? f->inlier_count : 0;
  bool use_h = h && (!f || hc >= fc);
  // Planar degeneracy: on a (near-)planar scene F collapses to the family
  // compatible with the homography and can out-count H only through stray
  // inliers.  When H explains almost all of F's support, the scene is planar
  // and the homography is the valid model.
  if (!use_h && h && f) {
    const std::set<int> h_set(h->inliers.begin(), h->inliers.end());
    int shared = 0;
    for (const int idx : f->inliers) shared += h_set.count(idx) ? 1 : 0;
    if (double(shared) >= 0.8 * double(fc)) use_h = true;
  }
  const PlanarTransform& model = use_h ? *h : *f;
  result.model = model;

  if (mode == FmMode::verification) {
    result.matches.reserve(model.inliers.size());
    for (int idx : model.inliers) result.matches.push_back(m1[idx]);
    return result;
  }

  // projection: pair every image-1 key point with the nearest image-2 key
  // point within the search radius around its projected point / epipolar line.
  const double radius = params.reprojection_threshold;
  struct Cand {
    int i, j;
    double dist;
  };
  std::vector<Cand> cands;
  for (std::size_t i = 0; i < p1.size(); ++i) {
    int best_j = -1;
    double best_d = radius;
    if (use_h) {
      const auto proj = project_or_null(model.matrix, p1[i]);
      if (!proj) continue;
      for (std::size_t j = 0; j < p2.size(); ++j) {
        const double d = (*proj - p2[j]).norm();
        if (d < best_d) {
          best_d = d;
          best_j = static_cast<int>(j);
        }
      }
    } else {
      const Eigen::Vector3d l = model.matrix * p1[i].homogeneous();
      const double nl = std::hypot(l(0), l(1));
      if (nl < 1e-15) continue;
      for (std::size_t j = 0; j < p2.size(); ++j) {
        const double d = std::abs(l(0) * p2[j].x() + l(1) * p2[j].y() + l(2)) / nl;
        if (d < best_d) {
          best_d = d;
          best_j = static_cast<int>(j);
        }
      }
    }
    if (best_j >= 0) cands.push_back({static_cast<int>(i), best_j, best_d});
  }

  // closest projector wins; the loser is dropped
  std::vector<int> winner(p2.size(), -1);
  for (std::size_t c = 0; c < cands.size(); ++c) {
    int& w = winner[cands[c].j];
    if (w < 0 || cands[c].dist < cands[w].dist) w = static_cast<int>(c);
  }
  for (std::size_t j = 0; j < winner.size(); ++j) {
    if (winner[j] >= 0) {
      const Cand& c = cands[winner[j]];
      result.matches.push_back({c.i, c.j, 0.0});
    }
  }
  std::sort(result.matches.begin(), result.matches.end(),
            [](const Match& a, const Match& b) { return a.idx_a < b.idx_a; });
  return result;
}

TwoStepResult two_step_match(const FrameFeatures& a, const FrameFeatures& b,
                             const RansacParams& params) {
  TwoStepResult result;
  if (a.empty() || b.empty()) return result;

  const auto mn = mutual_nn_match(a, b);
  if (mn.empty()) return result;

  const auto pa = keypoints_of(a);
  const auto pb = keypoints_of(b);

  const auto mp = fm(mn, pa, pb, FmMode::projection, params);
  if (mp.bad_case || mp.matches.empty()) return result;

  RansacParams second = params;
  second.rng_seed = split_seed(params.rng_seed, 0x5632);
  const auto mv = fm(mp.matches, pa, pb, FmMode::verification, second);
  if (mv.bad_case || mv.matches.empty()) return result;

  result.matches = mv.matches;
  for (auto& m : result.matches) {
    m.descriptor_distance = descriptor_distance(a.features[m.idx_a], b.features[m.idx_b]);
  }
  result.frames_related = true;
  return result;
}

Eigen::Vector2d homography_project(const Eigen::Matrix3d& h, const Eigen::Vector2d& p) {
  const Eigen::Vector3d q = h * p.homogeneous();
  if (std::abs(q(2)) <= kInfinityScale) {
    throw ProjectionAtInfinityError("homography_project: homogeneous scale vanishes");
  }
  return {q(0) / q(2), q(1) / q(2)};
}

double epipolar_distance(const Eigen::Matrix3d& f, const Eigen::Vector2d& p,
                         const Eigen::Vector2d& q) {
  const Eigen::Vector3d l = f * p.homogeneous();
  const double n = std::hypot(l(0), l(1));
  if (n < 1e-15) return std::numeric_limits<double>::infinity();
  return std::abs(q.homogeneous().dot(l)) / n;
}

}  // namespace lcd
