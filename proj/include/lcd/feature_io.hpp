#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "lcd/errors.hpp"

namespace lcd {

// One local feature: a 2-d key point, a detector confidence and a
// real-valued descriptor of dataset-wide dimension D.
struct Feature {
  float x = 0.0f;
  float y = 0.0f;
  float score = 0.0f;
  std::vector<float> descriptor;
};

// Features of one frame, sorted by descending detector score.
struct FrameFeatures {
  int frame_id = 0;
  std::vector<Feature> features;

  bool empty() const { return features.empty(); }
  std::size_t size() const { return features.size(); }
  std::size_t descriptor_dim() const {
    return features.empty() ? 0 : features.front().descriptor.size();
  }
};

// Per-dimension standardization fitted on a training corpus.  Stddev entries
// below 1e-8 are floored to 1 so constant dimensions pass through unscaled.
struct Scaler {
  std::vector<float> mean;
  std::vector<float> stddev;

  std::size_t dim() const { return mean.size(); }
};

// Feature file layout (binary, little-endian):
//   magic "LCDF" | version u32 = 1 | feature_count u32 | descriptor_dim u32
//   then per feature: x f32, y f32, score f32, descriptor f32 x D.
//
// load_frame_features throws FormatError on a bad magic/version,
// CorruptionError when the payload does not match the declared count, and
// DimensionError when expected_dim is given and differs from the header.
// The frame_id is parsed from the file stem when it is numeric.
FrameFeatures load_frame_features(const std::filesystem::path& path,
                                  std::optional<std::uint32_t> expected_dim = std::nullopt);

// Inverse of load_frame_features; load(save(f)) == f bit-exactly.
void save_frame_features(const FrameFeatures& frame, const std::filesystem::path& path);

// Fits per-dimension mean and population stddev over every descriptor of
// every frame.  Throws EmptyCorpusError when no descriptor is present.
Scaler fit_scaler(const std::vector<FrameFeatures>& frames);

// descriptor' = (descriptor - mean) / stddev, elementwise; key points and
// scores are unchanged.
FrameFeatures apply_scaler(const Scaler& scaler, const FrameFeatures& frame);

// The NNNNNN.lcdf files of a sequence directory, in index order.
std::vector<std::filesystem::path> list_feature_files(const std::filesystem::path& dir);

}  // namespace lcd
