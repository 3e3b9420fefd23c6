#include "lcd/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <set>
#include <string>
#include <utility>

#include "lcd/rng.hpp"

namespace lcd {

namespace {

constexpr double kImageW = 640.0;
constexpr double kImageH = 480.0;
constexpr double kMargin = 40.0;

struct Similarity {
  double angle = 0.0;      // radians, about the image center
  double log_scale = 0.0;
  double tx = 0.0;
  double ty = 0.0;

  Similarity compose_step(const Similarity& step) const {
    return {angle + step.angle, log_scale + step.log_scale, tx + step.tx, ty + step.ty};
  }

  std::pair<double, double> apply(double x, double y) const {
    const double cx = kImageW / 2.0, cy = kImageH / 2.0;
    const double s = std::exp(log_scale);
    const double ca = std::cos(angle), sa = std::sin(angle);
    const double dx = x - cx, dy = y - cy;
    return {cx + s * (ca * dx - sa * dy) + tx, cy + s * (sa * dx + ca * dy) + ty};
  }
};

struct PlaceContent {
  std::vector<std::pair<double, double>> keypoints;
  std::vector<float> scores;
  std::vector<std::vector<float>> descriptors;
};

struct Visit {
  int place = 0;
  int visit_index = 0;  // per-place visit counter
  int n_frames = 1;
  bool alias = false;
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_number(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("synth config: bad value for " + key + ": '" + value + "'");
  }
}

}  // namespace

SynthConfig SynthConfig::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open synth config: " + path.string());
  }
  SynthConfig cfg;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("synth config line " + std::to_string(line_no) + ": expected key=value");
    }
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (key == "places") {
      cfg.places = static_cast<int>(parse_number(key, value));
    } else if (key == "frames_per_place") {
      cfg.frames_per_place = static_cast<int>(parse_number(key, value));
    } else if (key == "revisits") {
      cfg.revisits = static_cast<int>(parse_number(key, value));
    } else if (key == "noise_sigma") {
      cfg.noise_sigma = parse_number(key, value);
    } else if (key == "jitter_px") {
      cfg.jitter_px = parse_number(key, value);
    } else if (key == "aliased_frames") {
      cfg.aliased_frames = static_cast<int>(parse_number(key, value));
    } else if (key == "outlier_frac") {
      cfg.outlier_frac = parse_number(key, value);
    } else if (key == "descriptor_dim") {
      cfg.descriptor_dim = static_cast<int>(parse_number(key, value));
    } else if (key == "features_per_frame") {
      cfg.features_per_frame = static_cast<int>(parse_number(key, value));
    } else if (key == "motion") {
      if (value == "identity") {
        cfg.motion = MotionModel::identity;
      } else if (value == "planar") {
        cfg.motion = MotionModel::planar;
      } else {
        throw ConfigError("synth config: unknown motion model '" + value + "'");
      }
    } else {
      throw ConfigError("synth config: unknown key '" + key + "'");
    }
  }
  cfg.validate();
  return cfg;
}

void SynthConfig::validate() const {
  if (places < 1) throw ConfigError("synth config: places must be >= 1");
  if (frames_per_place < 1) throw ConfigError("synth config: frames_per_place must be >= 1");
  if (revisits < 0) throw ConfigError("synth config: revisits must be >= 0");
  if (aliased_frames < 0) throw ConfigError("synth config: aliased_frames must be >= 0");
  if (noise_sigma < 0) throw ConfigError("synth config: noise_sigma must be >= 0");
  if (jitter_px < 0) throw ConfigError("synth config: jitter_px must be >= 0");
  if (outlier_frac < 0 || outlier_frac > 1) {
    throw ConfigError("synth config: outlier_frac must be in [0,1]");
  }
  if (descriptor_dim < 1) throw ConfigError("synth config: descriptor_dim must be >= 1");
  if (features_per_frame < 1) throw ConfigError("synth config: features_per_frame must be >= 1");
}

SynthSequence synth_generate_sequence(const SynthConfig& config, std::uint64_t seed) {
  config.validate();
  const int dim = config.descriptor_dim;
  const int n_feat = config.features_per_frame;

  std::mt19937_64 canon_rng(split_seed(seed, 0));
  std::uniform_real_distribution<double> ux(kMargin, kImageW - kMargin);
  std::uniform_real_distribution<double> uy(kMargin, kImageH - kMargin);
  std::uniform_real_distribution<double> uscore(0.3, 1.0);
  std::normal_distribution<double> unit_normal(0.0, 1.0);

  // Canonical content per place.
  std::vector<PlaceContent> places(config.places);
  for (auto& pc : places) {
    pc.keypoints.resize(n_feat);
    pc.scores.resize(n_feat);
    pc.descriptors.resize(n_feat);
    for (int i = 0; i < n_feat; ++i) {
      pc.keypoints[i] = {ux(canon_rng), uy(canon_rng)};
      pc.scores[i] = static_cast<float>(uscore(canon_rng));
      pc.descriptors[i].resize(dim);
      for (int d = 0; d < dim; ++d) {
        pc.descriptors[i][d] = static_cast<float>(unit_normal(canon_rng));
      }
    }
  }

  // Visit schedule: base pass over all places, then single-frame revisits of
  // early places interleaved with aliased distractors of late places.
  std::vector<Visit> visits;
  std::vector<int> visit_count(config.places, 0);
  for (int p = 0; p < config.places; ++p) {
    visits.push_back({p, visit_count[p]++, config.frames_per_place, false});
  }
  {
    int r = 0, a = 0;
    while (r < config.revisits || a < config.aliased_frames) {
      if (r < config.revisits) {
        const int p = r % config.places;
        visits.push_back({p, visit_count[p]++, 1, false});
        ++r;
      }
      if (a < config.aliased_frames) {
        // aliases mimic places right after the revisited ones, so their
        // originals are old enough to be retrievable yet never revisited
        const int p = (config.revisits + a) % config.places;
        visits.push_back({p, visit_count[p]++, 1, true});
        ++a;
      }
    }
  }

  std::mt19937_64 motion_rng(split_seed(seed, 1));
  std::uniform_real_distribution<double> step_angle(-0.03, 0.03);
  std::uniform_real_distribution<double> step_scale(-0.005, 0.005);
  std::uniform_real_distribution<double> step_trans(-2.0, 2.0);
  std::uniform_real_distribution<double> view_angle(-0.09, 0.09);
  std::uniform_real_distribution<double> view_scale(-0.03, 0.03);
  std::uniform_real_distribution<double> view_trans(-8.0, 8.0);

  SynthSequence seq;
  std::vector<std::pair<int, int>> frame_place_visit;  // per frame: (place, visit_index)
  std::vector<bool> frame_alias;

  int frame_id = 0;
  for (const auto& visit : visits) {
    Similarity pose;  // identity for the base visit
    Similarity step;
    if (config.motion == MotionModel::planar) {
      if (visit.visit_index > 0) {
        pose = {view_angle(motion_rng), view_scale(motion_rng), view_trans(motion_rng),
                view_trans(motion_rng)};
      }
      step = {step_angle(motion_rng), step_scale(motion_rng), step_trans(motion_rng),
              step_trans(motion_rng)};
    }

    const PlaceContent& pc = places[visit.place];
    for (int k = 0; k < visit.n_frames; ++k) {
      std::mt19937_64 frame_rng(split_seed(seed, 2 + std::uint64_t(frame_id)));
      FrameFeatures frame;
      frame.frame_id = frame_id;
      frame.features.resize(n_feat);

      for (int i = 0; i < n_feat; ++i) {
        Feature& f = frame.features[i];
        double x, y;
        if (visit.alias) {
          x = ux(frame_rng);
          y = uy(frame_rng);
        } else {
          std::tie(x, y) = pose.apply(pc.keypoints[i].first, pc.keypoints[i].second);
          if (config.jitter_px > 0) {
            std::normal_distribution<double> jitter(0.0, config.jitter_px);
            x += jitter(frame_rng);
            y += jitter(frame_rng);
          }
        }
        f.x = static_cast<float>(x);
        f.y = static_cast<float>(y);
        f.score = pc.scores[i];
        f.descriptor = pc.descriptors[i];
        if (config.noise_sigma > 0) {
          std::normal_distribution<double> noise(0.0, config.noise_sigma);
          for (int d = 0; d < dim; ++d) {
            f.descriptor[d] = static_cast<float>(double(f.descriptor[d]) + noise(frame_rng));
          }
        }
      }

      // Replace a fraction of the features with clutter present in this frame only.
      const int n_outliers = static_cast<int>(std::lround(config.outlier_frac * n_feat));
      if (n_outliers > 0) {
        std::vector<int> idx(n_feat);
        for (int i = 0; i < n_feat; ++i) idx[i] = i;
        for (int i = 0; i < n_outliers; ++i) {
          std::uniform_int_distribution<int> pick(i, n_feat - 1);
          std::swap(idx[i], idx[pick(frame_rng)]);
        }
        for (int i = 0; i < n_outliers; ++i) {
          Feature& f = frame.features[idx[i]];
          f.x = static_cast<float>(ux(frame_rng));
          f.y = static_cast<float>(uy(frame_rng));
          f.score = static_cast<float>(uscore(frame_rng));
          for (int d = 0; d < dim; ++d) {
            f.descriptor[d] = static_cast<float>(unit_normal(frame_rng));
          }
        }
      }

      std::stable_sort(frame.features.begin(), frame.features.end(),
                       [](const Feature& a, const Feature& b) { return a.score > b.score; });

      // No two features may share an exact key point.
      std::set<std::pair<float, float>> seen;
      for (auto& f : frame.features) {
        int bump = 0;
        while (!seen.insert({f.x, f.y}).second) {
          f.x += 0.25f * float(++bump);
        }
      }

      seq.frames.push_back(std::move(frame));
      frame_place_visit.emplace_back(visit.place, visit.visit_index);
      frame_alias.push_back(visit.alias);
      ++frame_id;

      pose = pose.compose_step(step);
    }
  }

  // Ground truth: cross-visit pairs of the same place, aliases excluded.
  for (std::size_t q = 0; q < seq.frames.size(); ++q) {
    if (frame_alias[q]) {
      seq.alias_frame_ids.push_back(static_cast<int>(q));
      continue;
    }
    for (std::size_t m = 0; m < q; ++m) {
      if (frame_alias[m]) continue;
      if (frame_place_visit[m].first == frame_place_visit[q].first &&
          frame_place_visit[m].second < frame_place_visit[q].second) {
        seq.ground_truth.push_back({static_cast<int>(q), static_cast<int>(m)});
      }
    }
  }
  std::sort(seq.ground_truth.begin(), seq.ground_truth.end(),
            [](const LoopPair& a, const LoopPair& b) {
              return std::tie(a.query_id, a.match_id) < std::tie(b.query_id, b.match_id);
            });
  return seq;
}

void write_sequence(const SynthSequence& seq, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  char name[16];
  for (std::size_t i = 0; i < seq.frames.size(); ++i) {
    std::snprintf(name, sizeof(name), "%06zu.lcdf", i);
    save_frame_features(seq.frames[i], dir / name);
  }
  std::ofstream gt(dir / "ground_truth.csv", std::ios::binary | std::ios::trunc);
  if (!gt) {
    throw IoError("cannot write ground truth: " + (dir / "ground_truth.csv").string());
  }
  for (const auto& pair : seq.ground_truth) {
    gt << pair.query_id << "," << pair.match_id << "\n";
  }
}

}  // namespace lcd
