#include "lcd/feature_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>

namespace lcd {

namespace {

constexpr char kMagic[4] = {'L', 'C', 'D', 'F'};
constexpr std::uint32_t kVersion = 1;
constexpr double kStddevFloor = 1e-8;

void write_u32(std::ostream& out, std::uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

std::uint32_t read_u32(std::istream& in) {
  std::uint32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  return v;
}

int frame_id_from_stem(const std::filesystem::path& path) {
  const std::string stem = path.stem().string();
  if (stem.empty() || !std::all_of(stem.begin(), stem.end(),
                                   [](unsigned char c) { return std::isdigit(c); })) {
    return 0;
  }
  try {
    return std::stoi(stem);
  } catch (const std::exception&) {
    return 0;
  }
}

}  // namespace

FrameFeatures load_frame_features(const std::filesystem::path& path,
                                  std::optional<std::uint32_t> expected_dim) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open feature file: " + path.string());
  }
  in.seekg(0, std::ios::end);
  const std::streamoff file_size = in.tellg();
  in.seekg(0, std::ios::beg);

  char magic[4] = {};
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0) {
    throw FormatError("bad magic in feature file: " + path.string());
  }
  const std::uint32_t version = read_u32(in);
  if (version != kVersion) {
    throw FormatError("unsupported feature file version " + std::to_string(version) +
                      ": " + path.string());
  }
  const std::uint32_t count = read_u32(in);
  const std::uint32_t dim = read_u32(in);
  if (!in) {
    throw CorruptionError("truncated header: " + path.string());
  }
  // the declared dimension of an empty frame is vacuous
  if (expected_dim && count > 0 && dim != *expected_dim) {
    throw DimensionError("descriptor dim " + std::to_string(dim) + " does not match expected " +
                         std::to_string(*expected_dim) + ": " + path.string());
  }
  const std::uint64_t payload = std::uint64_t(count) * (3 + dim) * sizeof(float);
  if (std::uint64_t(file_size) != 16 + payload) {
    throw CorruptionError("payload size does not match declared feature count: " + path.string());
  }

  FrameFeatures frame;
  frame.frame_id = frame_id_from_stem(path);
  frame.features.resize(count);
  for (auto& f : frame.features) {
    float head[3];
    in.read(reinterpret_cast<char*>(head), sizeof(head));
    f.x = head[0];
    f.y = head[1];
    f.score = head[2];
    f.descriptor.resize(dim);
    in.read(reinterpret_cast<char*>(f.descriptor.data()), dim * sizeof(float));
    if (!in) {
      throw CorruptionError("truncated payload: " + path.string());
    }
  }
  return frame;
}

void save_frame_features(const FrameFeatures& frame, const std::filesystem::path& path) {
  const std::size_t dim = frame.descriptor_dim();
  for (const auto& f : frame.features) {
    if (f.descriptor.size() != dim) {
      throw DimensionError("save_frame_features: inconsistent descriptor dimensions");
    }
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError("cannot open feature file for writing: " + path.string());
  }
  out.write(kMagic, 4);
  write_u32(out, kVersion);
  write_u32(out, static_cast<std::uint32_t>(frame.features.size()));
  write_u32(out, static_cast<std::uint32_t>(frame.descriptor_dim()));
  for (const auto& f : frame.features) {
    const float head[3] = {f.x, f.y, f.score};
    out.write(reinterpret_cast<const char*>(head), sizeof(head));
    out.write(reinterpret_cast<const char*>(f.descriptor.data()),
              f.descriptor.size() * sizeof(float));
  }
  if (!out) {
    throw IoError("write failed: " + path.string());
  }
}

Scaler fit_scaler(const std::vector<FrameFeatures>& frames) {
  std::size_t dim = 0;
  for (const auto& frame : frames) {
    if (!frame.empty()) {
      dim = frame.descriptor_dim();
      break;
    }
  }
  if (dim == 0) {
    throw EmptyCorpusError("fit_scaler: no descriptors in corpus");
  }

  std::vector<double> sum(dim, 0.0), sum_sq(dim, 0.0);
  std::uint64_t n = 0;
  for (const auto& frame : frames) {
    for (const auto& f : frame.features) {
      if (f.descriptor.size() != dim) {
        throw DimensionError("fit_scaler: inconsistent descriptor dimension");
      }
      for (std::size_t d = 0; d < dim; ++d) {
        const double v = f.descriptor[d];
        sum[d] += v;
        sum_sq[d] += v * v;
      }
      ++n;
    }
  }

  Scaler scaler;
  scaler.mean.resize(dim);
  scaler.stddev.resize(dim);
  for (std::size_t d = 0; d < dim; ++d) {
    const double mean = sum[d] / double(n);
    const double var = std::max(0.0, sum_sq[d] / double(n) - mean * mean);
    const double sd = std::sqrt(var);
    scaler.mean[d] = static_cast<float>(mean);
    scaler.stddev[d] = sd < kStddevFloor ? 1.0f : static_cast<float>(sd);
  }
  return scaler;
}

FrameFeatures apply_scaler(const Scaler& scaler, const FrameFeatures& frame) {
  FrameFeatures out = frame;
  for (auto& f : out.features) {
    if (f.descriptor.size() != scaler.dim()) {
      throw DimensionError("apply_scaler: descriptor dim " + std::to_string(f.descriptor.size()) +
                           " vs scaler dim " + std::to_string(scaler.dim()));
    }
    for (std::size_t d = 0; d < f.descriptor.size(); ++d) {
      f.descriptor[d] = static_cast<float>((double(f.descriptor[d]) - double(scaler.mean[d])) /
                                           double(scaler.stddev[d]));
    }
  }
  return out;
}

std::vector<std::filesystem::path> list_feature_files(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw IoError("not a directory: " + dir.string());
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".lcdf") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  return files;
}

}  // namespace lcd
