#pragma once

#include <cmath>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "mssit/augment.hpp"
#include "mssit/io.hpp"

namespace mssit {

struct ManifestEntry {
  std::string id;
  std::string data_path;
  std::string target;  // scalar text for regression, label path for segmentation
  std::string split;   // train / val / test
};

enum class Task { kRegression, kSegmentation };

inline Task parse_task(const std::string& s) {
  if (s == "regression") return Task::kRegression;
  if (s == "segmentation") return Task::kSegmentation;
  throw DataError("unknown task: " + s);
}

// Manifest-backed sample collection. Samples are cached in memory on first
// load; per-channel normalisation statistics come from the train split.
class Dataset {
 public:
  static Dataset open(const std::string& manifest_path, Task task) {
    Dataset ds;
    ds.task_ = task;
    std::ifstream in(manifest_path);
    if (!in) throw DataError("cannot open manifest: " + manifest_path);
    const std::filesystem::path root =
        std::filesystem::path(manifest_path).parent_path();
    std::string line;
    bool header = true;
    std::set<std::string> ids;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto fields = split_csv_line(line);
      if (header && fields.size() >= 1 && fields[0] == "id") {
        header = false;
        continue;
      }
      header = false;
      if (fields.size() != 4) throw DataError("manifest rows need 4 columns");
      ManifestEntry e{fields[0], fields[1], fields[2], fields[3]};
      if (!ids.insert(e.id).second)
        throw DataError("duplicate sample id in manifest: " + e.id);
      if (!std::filesystem::path(e.data_path).is_absolute())
        e.data_path = (root / e.data_path).string();
      if (task == Task::kSegmentation &&
          !std::filesystem::path(e.target).is_absolute())
        e.target = (root / e.target).string();
      ds.entries_.push_back(std::move(e));
    }
    if (ds.entries_.empty()) throw DataError("manifest is empty: " + manifest_path);
    ds.load_all();
    ds.compute_stats();
    return ds;
  }

  Task task() const { return task_; }
  std::size_t size() const { return entries_.size(); }
  std::size_t channels() const { return channels_; }
  const std::vector<ManifestEntry>& entries() const { return entries_; }
  const std::vector<double>& channel_mean() const { return mean_; }
  const std::vector<double>& channel_std() const { return std_; }

  std::vector<std::uint32_t> split_indices(const std::string& split) const {
    std::vector<std::uint32_t> idx;
    for (std::size_t i = 0; i < entries_.size(); ++i)
      if (entries_[i].split == split) idx.push_back(static_cast<std::uint32_t>(i));
    return idx;
  }

  const SurfaceSample& sample(std::size_t i) const { return samples_[i]; }

  // Sample with (x - mean) / std applied per channel.
  SurfaceSample normalized_sample(std::size_t i) const {
    SurfaceSample s = samples_[i];
    for (std::size_t v = 0; v < s.data.size() / s.channels; ++v)
      for (std::size_t c = 0; c < s.channels; ++c)
        s.data[v * s.channels + c] = static_cast<float>(
            (s.data[v * s.channels + c] - mean_[c]) / std_[c]);
    return s;
  }

 private:
  void load_all() {
    samples_.reserve(entries_.size());
    for (const auto& e : entries_) {
      const Surface surf = read_surface(e.data_path);
      if (channels_ == 0) channels_ = surf.channels;
      if (surf.channels != channels_)
        throw DataError("channel count differs across samples: " + e.id);
      if (surf.vertex_count != ico_vertex_count(6))
        throw DataError("sample is not on ico6: " + e.id);
      SurfaceSample s;
      s.id = e.id;
      s.channels = surf.channels;
      s.data = surf.data;
      if (task_ == Task::kRegression) {
        try {
          s.target = std::stod(e.target);
        } catch (const std::exception&) {
          throw DataError("bad regression target for sample " + e.id);
        }
      } else {
        s.labels = read_labels(e.target);
        if (s.labels.size() != surf.vertex_count)
          throw DataError("label count mismatch for sample " + e.id);
      }
      samples_.push_back(std::move(s));
    }
  }

  void compute_stats() {
    mean_.assign(channels_, 0.0);
    std_.assign(channels_, 1.0);
    const auto train = split_indices("train");
    if (train.empty()) return;
    std::vector<double> sum(channels_, 0.0), sq(channels_, 0.0);
    std::size_t rows = 0;
    for (std::uint32_t i : train) {
      const auto& d = samples_[i].data;
      for (std::size_t v = 0; v < d.size() / channels_; ++v)
        for (std::size_t c = 0; c < channels_; ++c) {
          sum[c] += d[v * channels_ + c];
          sq[c] += static_cast<double>(d[v * channels_ + c]) * d[v * channels_ + c];
        }
      rows += d.size() / channels_;
    }
    for (std::size_t c = 0; c < channels_; ++c) {
      mean_[c] = sum[c] / rows;
      const double var = sq[c] / rows - mean_[c] * mean_[c];
      std_[c] = var > 1e-12 ? std::sqrt(var) : 1.0;
    }
  }

  Task task_ = Task::kRegression;
  std::vector<ManifestEntry> entries_;
  std::vector<SurfaceSample> samples_;
  std::size_t channels_ = 0;
  std::vector<double> mean_, std_;
};

}  // namespace mssit
