#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace testutil {

namespace {

Eigen::Matrix3d similarity_matrix(double angle, double scale, double tx, double ty) {
  Eigen::Matrix3d m = Eigen::Matrix3d::Identity();
  m(0, 0) = scale * std::cos(angle);
  m(0, 1) = -scale * std::sin(angle);
  m(1, 0) = scale * std::sin(angle);
  m(1, 1) = scale * std::cos(angle);
  m(0, 2) = tx;
  m(1, 2) = ty;
  return m;
}

Eigen::Vector2d apply_h(const Eigen::Matrix3d& h, const Eigen::Vector2d& p) {
  const Eigen::Vector3d q = h * p.homogeneous();
  return {q(0) / q(2), q(1) / q(2)};
}

}  // namespace

HomographyScene make_homography_scene(int n_true, int n_outliers, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(50.0, 590.0);
  std::uniform_real_distribution<double> uy(50.0, 430.0);
  std::uniform_real_distribution<double> uangle(-0.5, 0.5);
  std::uniform_real_distribution<double> uscale(0.8, 1.25);
  std::uniform_real_distribution<double> utrans(-40.0, 40.0);

  HomographyScene scene;
  scene.n_true = n_true;
  scene.h = similarity_matrix(uangle(rng), uscale(rng), utrans(rng), utrans(rng));
  for (int i = 0; i < n_true; ++i) {
    const Eigen::Vector2d p(ux(rng), uy(rng));
    scene.points_a.push_back(p);
    scene.points_b.push_back(apply_h(scene.h, p));
    scene.matches.push_back({i, i, 0.0});
  }
  for (int i = 0; i < n_outliers; ++i) {
    scene.points_a.emplace_back(ux(rng), uy(rng));
    scene.points_b.emplace_back(ux(rng), uy(rng));
    scene.matches.push_back({n_true + i, n_true + i, 0.0});
  }
  return scene;
}

TwoViewScene make_two_view_scene(int n_true, int n_outliers, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> upx(-2.0, 2.0);
  std::uniform_real_distribution<double> upy(-1.5, 1.5);
  std::uniform_real_distribution<double> upz(4.0, 10.0);
  std::uniform_real_distribution<double> uimg_x(0.0, 640.0);
  std::uniform_real_distribution<double> uimg_y(0.0, 480.0);
  std::uniform_real_distribution<double> uang(-0.12, 0.12);

  Eigen::Matrix3d k;
  k << 500, 0, 320, 0, 500, 240, 0, 0, 1;

  const double yaw = 0.12 + uang(rng) * 0.5;
  const double pitch = uang(rng) * 0.3;
  const Eigen::Matrix3d r(Eigen::AngleAxisd(yaw, Eigen::Vector3d::UnitY()) *
                          Eigen::AngleAxisd(pitch, Eigen::Vector3d::UnitX()));
  const Eigen::Vector3d t(0.6, 0.05, 0.1);

  Eigen::Matrix3d t_cross;
  t_cross << 0, -t(2), t(1), t(2), 0, -t(0), -t(1), t(0), 0;
  const Eigen::Matrix3d e = t_cross * r;
  Eigen::Matrix3d f = k.transpose().inverse() * e * k.inverse();
  f /= f.norm();

  TwoViewScene scene;
  scene.n_true = n_true;
  scene.f = f;
  int made = 0;
  while (made < n_true) {
    const Eigen::Vector3d x(upx(rng), upy(rng), upz(rng));
    const Eigen::Vector3d x1 = k * x;
    const Eigen::Vector3d x2 = k * (r * x + t);
    if (x1(2) <= 0 || x2(2) <= 0) continue;
    const Eigen::Vector2d p1(x1(0) / x1(2), x1(1) / x1(2));
    const Eigen::Vector2d p2(x2(0) / x2(2), x2(1) / x2(2));
    if (p1.x() < 0 || p1.x() > 640 || p1.y() < 0 || p1.y() > 480) continue;
    if (p2.x() < 0 || p2.x() > 640 || p2.y() < 0 || p2.y() > 480) continue;
    scene.points_a.push_back(p1);
    scene.points_b.push_back(p2);
    scene.matches.push_back({made, made, 0.0});
    ++made;
  }
  for (int i = 0; i < n_outliers; ++i) {
    scene.points_a.emplace_back(uimg_x(rng), uimg_y(rng));
    scene.points_b.emplace_back(uimg_x(rng), uimg_y(rng));
    scene.matches.push_back({n_true + i, n_true + i, 0.0});
  }
  return scene;
}

FramePair make_frame_pair(int n_common, int n_clutter, double descriptor_sigma, int dim,
                          std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(60.0, 580.0);
  std::uniform_real_distribution<double> uy(60.0, 420.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> uangle(-0.17, 0.17);
  std::uniform_real_distribution<double> uscale(0.95, 1.05);
  std::uniform_real_distribution<double> utrans(-20.0, 20.0);

  FramePair pair;
  pair.n_common = n_common;
  pair.transform = similarity_matrix(uangle(rng), uscale(rng), utrans(rng), utrans(rng));

  const auto make_descriptor = [&]() {
    std::vector<float> d(dim);
    for (auto& v : d) v = static_cast<float>(gauss(rng));
    return d;
  };

  for (int i = 0; i < n_common; ++i) {
    const Eigen::Vector2d pa(ux(rng), uy(rng));
    const Eigen::Vector2d pb = apply_h(pair.transform, pa);
    const auto desc = make_descriptor();

    lcd::Feature fa;
    fa.x = static_cast<float>(pa.x());
    fa.y = static_cast<float>(pa.y());
    fa.descriptor = desc;
    pair.a.features.push_back(fa);

    lcd::Feature fb;
    fb.x = static_cast<float>(pb.x());
    fb.y = static_cast<float>(pb.y());
    fb.descriptor = desc;
    if (descriptor_sigma > 0) {
      std::normal_distribution<double> noise(0.0, descriptor_sigma);
      for (auto& v : fb.descriptor) v = static_cast<float>(double(v) + noise(rng));
    }
    pair.b.features.push_back(fb);
  }
  for (int i = 0; i < n_clutter; ++i) {
    lcd::Feature fa;
    fa.x = static_cast<float>(ux(rng));
    fa.y = static_cast<float>(uy(rng));
    fa.descriptor = make_descriptor();
    pair.a.features.push_back(fa);

    lcd::Feature fb;
    fb.x = static_cast<float>(ux(rng));
    fb.y = static_cast<float>(uy(rng));
    fb.descriptor = make_descriptor();
    pair.b.features.push_back(fb);
  }
  const auto assign_scores = [](lcd::FrameFeatures& frame) {
    const int n = static_cast<int>(frame.size());
    for (int i = 0; i < n; ++i) frame.features[i].score = 1.0f - float(i) / float(n + 1);
  };
  assign_scores(pair.a);
  assign_scores(pair.b);
  pair.b.frame_id = 1;
  return pair;
}

lcd::FrameFeatures random_frame(int n, int dim, std::uint64_t seed, int frame_id) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(10.0, 630.0);
  std::uniform_real_distribution<double> uy(10.0, 470.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  lcd::FrameFeatures frame;
  frame.frame_id = frame_id;
  for (int i = 0; i < n; ++i) {
    lcd::Feature f;
    f.x = static_cast<float>(ux(rng));
    f.y = static_cast<float>(uy(rng));
    f.score = 1.0f - float(i) / float(n + 1);
    f.descriptor.resize(dim);
    for (auto& v : f.descriptor) v = static_cast<float>(gauss(rng));
    frame.features.push_back(std::move(f));
  }
  return frame;
}

bool delaunay_empty_circumcircle_ok(const lcd::TopoGraph& g, double eps) {
  for (const auto& tri : g.triangles) {
    const Eigen::Vector2d& a = g.vertices[tri[0]];
    const Eigen::Vector2d& b = g.vertices[tri[1]];
    const Eigen::Vector2d& c = g.vertices[tri[2]];

    Eigen::Matrix2d m;
    m << 2 * (b.x() - a.x()), 2 * (b.y() - a.y()), 2 * (c.x() - a.x()), 2 * (c.y() - a.y());
    Eigen::Vector2d rhs(b.squaredNorm() - a.squaredNorm(), c.squaredNorm() - a.squaredNorm());
    if (std::abs(m.determinant()) < 1e-12) return false;  // degenerate triangle
    const Eigen::Vector2d center = m.inverse() * rhs;
    const double radius = (a - center).norm();

    for (std::size_t v = 0; v < g.vertices.size(); ++v) {
      if (int(v) == tri[0] || int(v) == tri[1] || int(v) == tri[2]) continue;
      const double dist = (g.vertices[v] - center).norm();
      if (radius - dist > eps * std::max(1.0, radius)) return false;
    }
  }
  return true;
}

double clustering_sse(const std::vector<std::vector<double>>& points,
                      const lcd::KMeansResult& result) {
  double sse = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& c = result.centers[result.assignments[i]];
    for (std::size_t d = 0; d < c.size(); ++d) {
      const double diff = points[i][d] - c[d];
      sse += diff * diff;
    }
  }
  return sse;
}

namespace {

double partition_sse(const std::vector<std::vector<double>>& points,
                     const std::vector<int>& assign, int k) {
  const std::size_t dim = points[0].size();
  double sse = 0.0;
  for (int c = 0; c < k; ++c) {
    std::vector<double> mean(dim, 0.0);
    int count = 0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (assign[i] != c) continue;
      for (std::size_t d = 0; d < dim; ++d) mean[d] += points[i][d];
      ++count;
    }
    if (count == 0) continue;
    for (auto& v : mean) v /= count;
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (assign[i] != c) continue;
      for (std::size_t d = 0; d < dim; ++d) {
        const double diff = points[i][d] - mean[d];
        sse += diff * diff;
      }
    }
  }
  return sse;
}

}  // namespace

double best_partition_sse(const std::vector<std::vector<double>>& points, int k) {
  const int n = static_cast<int>(points.size());
  std::vector<int> assign(n, 0);
  double best = std::numeric_limits<double>::max();
  // enumerate all k^n assignments
  while (true) {
    best = std::min(best, partition_sse(points, assign, k));
    int pos = 0;
    while (pos < n) {
      if (++assign[pos] < k) break;
      assign[pos] = 0;
      ++pos;
    }
    if (pos == n) break;
  }
  return best;
}

bool clustering_is_local_optimum(const std::vector<std::vector<double>>& points,
                                 const lcd::KMeansResult& result) {
  const int n = static_cast<int>(points.size());
  const int k = static_cast<int>(result.centers.size());
  const std::size_t dim = points[0].size();

  const auto d2 = [&](const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t d = 0; d < dim; ++d) s += (a[d] - b[d]) * (a[d] - b[d]);
    return s;
  };

  // no reassignment lowers the objective with the returned centers
  for (int i = 0; i < n; ++i) {
    const double own = d2(points[i], result.centers[result.assignments[i]]);
    for (int c = 0; c < k; ++c) {
      if (d2(points[i], result.centers[c]) < own - 1e-12 * std::max(1.0, own)) return false;
    }
  }
  // and the centers are the centroids of their members
  for (int c = 0; c < k; ++c) {
    std::vector<double> mean(dim, 0.0);
    int count = 0;
    for (int i = 0; i < n; ++i) {
      if (result.assignments[i] != c) continue;
      for (std::size_t d = 0; d < dim; ++d) mean[d] += points[i][d];
      ++count;
    }
    if (count == 0) continue;
    for (std::size_t d = 0; d < dim; ++d) {
      if (std::abs(mean[d] / count - result.centers[c][d]) > 1e-9) return false;
    }
  }
  return true;
}

std::optional<lcd::LoopCandidate> brute_force_query(const std::vector<lcd::BowVector>& database,
                                                    const lcd::BowVector& query, int query_id,
                                                    int eta, double alpha) {
  if (query.total == 0 || query_id <= eta) return std::nullopt;
  const int limit = query_id - eta;

  // recompute unit weights from raw counts
  const auto unit_of = [](const lcd::BowVector& v) {
    std::vector<std::pair<std::uint32_t, double>> unit;
    double norm_sq = 0.0;
    for (const auto& [word, entry] : v.entries) {
      const double tf = double(entry.count) / double(v.total);
      unit.emplace_back(word, tf);
      norm_sq += tf * tf;
    }
    const double norm = std::sqrt(norm_sq);
    for (auto& [word, w] : unit) w /= norm;
    return unit;
  };
  const auto q_unit = unit_of(query);

  int best_id = -1;
  double best_d = -1.0;
  for (int id = 0; id <= limit && id < static_cast<int>(database.size()); ++id) {
    if (database[id].total == 0) continue;
    const auto f_unit = unit_of(database[id]);
    double s = 0.0;
    std::size_t i = 0, j = 0;
    bool shares = false;
    while (i < q_unit.size() && j < f_unit.size()) {
      if (q_unit[i].first < f_unit[j].first) {
        ++i;
      } else if (f_unit[j].first < q_unit[i].first) {
        ++j;
      } else {
        s += q_unit[i].second * f_unit[j].second;
        shares = true;
        ++i;
        ++j;
      }
    }
    if (!shares) continue;
    s = std::min(1.0, std::max(0.0, s));
    const double d = 1.0 - std::sqrt(1.0 - s);
    if (d > best_d) {
      best_d = d;
      best_id = id;
    }
  }
  if (best_id < 0 || best_d < alpha) return std::nullopt;
  return lcd::LoopCandidate{query_id, best_id, best_d};
}

}  // namespace testutil
