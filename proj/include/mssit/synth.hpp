#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "mssit/atlas.hpp"
#include "mssit/augment.hpp"
#include "mssit/io.hpp"
#include "mssit/rng.hpp"
#include "mssit/train/dataset.hpp"

namespace mssit {

// Real spherical harmonics up to degree L at a unit vector, ordered
// (l, m) = (0,0), (1,-1), (1,0), (1,1), (2,-2), ... giving (L+1)^2 values.
inline std::vector<double> sph_harm_basis(int degree_max, const Vec3& p) {
  const double ct = p.z;                      // cos(theta)
  const double st = std::sqrt(std::max(0.0, 1.0 - ct * ct));
  const double phi = std::atan2(p.y, p.x);
  const int lmx = degree_max;

  // associated Legendre P_l^m(ct) for 0 <= m <= l
  std::vector<double> plm((lmx + 1) * (lmx + 1), 0.0);
  auto at = [lmx](int l, int m) { return l * (lmx + 1) + m; };
  plm[at(0, 0)] = 1.0;
  for (int m = 1; m <= lmx; ++m)
    plm[at(m, m)] = -plm[at(m - 1, m - 1)] * (2 * m - 1) * st;
  for (int m = 0; m < lmx; ++m) plm[at(m + 1, m)] = ct * (2 * m + 1) * plm[at(m, m)];
  for (int m = 0; m <= lmx; ++m)
    for (int l = m + 2; l <= lmx; ++l)
      plm[at(l, m)] =
          (ct * (2 * l - 1) * plm[at(l - 1, m)] - (l + m - 1) * plm[at(l - 2, m)]) /
          (l - m);

  std::vector<double> basis;
  basis.reserve((lmx + 1) * (lmx + 1));
  for (int l = 0; l <= lmx; ++l) {
    for (int m = -l; m <= l; ++m) {
      const int am = std::abs(m);
      double k = std::sqrt((2.0 * l + 1.0) / (4.0 * M_PI));
      for (int i = l - am + 1; i <= l + am; ++i) k /= std::sqrt(static_cast<double>(i));
      const double p_lm = plm[at(l, am)];
      if (m == 0)
        basis.push_back(k * p_lm);
      else if (m > 0)
        basis.push_back(std::sqrt(2.0) * k * p_lm * std::cos(am * phi));
      else
        basis.push_back(std::sqrt(2.0) * k * p_lm * std::sin(am * phi));
    }
  }
  return basis;
}

// Band-limited random field: coefficients fall off as 1/(1+l), no DC term.
inline std::vector<double> random_band_limited_field(const Icosphere& ico,
                                                     int degree_max, Rng& rng,
                                                     double amplitude = 1.0) {
  const int n_coef = (degree_max + 1) * (degree_max + 1);
  std::vector<double> coef(n_coef, 0.0);
  int idx = 1;  // skip (0,0)
  for (int l = 1; l <= degree_max; ++l)
    for (int m = -l; m <= l; ++m, ++idx)
      coef[idx] = rng.normal() * amplitude / (1.0 + l);

  std::vector<double> field(ico.vertex_count(), 0.0);
  for (std::size_t v = 0; v < ico.vertex_count(); ++v) {
    const auto basis = sph_harm_basis(degree_max, ico.vertices[v]);
    double s = 0.0;
    for (int i = 1; i < n_coef; ++i) s += coef[i] * basis[i];
    field[v] = s;
  }
  return field;
}

// Geodesic-Voronoi labels from farthest-point seeds. Seeds are mesh vertices,
// so every one of the K cells keeps at least its own seed vertex non-empty.
inline std::vector<std::uint32_t> voronoi_labels(const Icosphere& ico, int k_classes,
                                                 Rng& rng) {
  require(k_classes >= 2 && k_classes <= 64, "class count must be in [2, 64]");
  std::vector<std::uint32_t> seeds;
  seeds.push_back(static_cast<std::uint32_t>(rng.index(ico.vertex_count())));
  std::vector<double> min_dot(ico.vertex_count());
  for (std::size_t v = 0; v < ico.vertex_count(); ++v)
    min_dot[v] = ico.vertices[v].dot(ico.vertices[seeds[0]]);
  while (static_cast<int>(seeds.size()) < k_classes) {
    std::size_t farthest = 0;
    for (std::size_t v = 1; v < ico.vertex_count(); ++v)
      if (min_dot[v] < min_dot[farthest]) farthest = v;
    seeds.push_back(static_cast<std::uint32_t>(farthest));
    for (std::size_t v = 0; v < ico.vertex_count(); ++v)
      min_dot[v] = std::max(min_dot[v], ico.vertices[v].dot(ico.vertices[farthest]));
  }
  std::vector<std::uint32_t> labels(ico.vertex_count(), 0);
  for (std::size_t v = 0; v < ico.vertex_count(); ++v) {
    double best = -2.0;
    std::uint32_t best_k = 0;
    for (std::uint32_t k = 0; k < seeds.size(); ++k) {
      const double d = ico.vertices[v].dot(ico.vertices[seeds[k]]);
      if (d > best) {  // strict: ties keep the lowest class
        best = d;
        best_k = k;
      }
    }
    labels[v] = best_k;
  }
  return labels;
}

// Regression sample: C channels of band-limited harmonics with a per-channel
// mean offset; the target mixes the channel means with a north-south contrast
// of channel 0 plus noise, so a linear readout of vertex means already
// explains part of it and the spatial term rewards real surface modelling.
inline SurfaceSample make_regression_sample(const Icosphere& ico6, std::size_t channels,
                                            Rng& rng) {
  static const double kMeanWeight[8] = {1.0, -0.7, 0.5, 0.3, -0.4, 0.2, -0.2, 0.1};
  SurfaceSample s;
  s.channels = channels;
  s.data.resize(ico6.vertex_count() * channels);
  std::vector<double> channel_mean(channels, 0.0);
  double contrast = 0.0;
  for (std::size_t c = 0; c < channels; ++c) {
    const double offset = rng.normal() * 0.5;
    const auto field = random_band_limited_field(ico6, 4, rng);
    double mean = 0.0, north = 0.0, south = 0.0;
    std::size_t n_north = 0;
    for (std::size_t v = 0; v < ico6.vertex_count(); ++v) {
      const double value = offset + field[v];
      s.data[v * channels + c] = static_cast<float>(value);
      mean += value;
      if (ico6.vertices[v].z > 0.0) {
        north += value;
        ++n_north;
      } else {
        south += value;
      }
    }
    mean /= static_cast<double>(ico6.vertex_count());
    channel_mean[c] = mean;
    if (c == 0)
      contrast = north / static_cast<double>(n_north) -
                 south / static_cast<double>(ico6.vertex_count() - n_north);
  }
  double target = contrast;
  for (std::size_t c = 0; c < channels; ++c)
    target += kMeanWeight[c % 8] * channel_mean[c];
  s.target = target + rng.normal() * 0.05;
  return s;
}

// Segmentation sample: per-region channel offsets over a smooth background
// field, labelled by the shared atlas-style parcellation.
inline SurfaceSample make_segmentation_sample(const Icosphere& ico6,
                                              const std::vector<std::uint32_t>& labels,
                                              std::size_t channels, int k_classes,
                                              Rng& rng) {
  SurfaceSample s;
  s.channels = channels;
  s.labels = labels;
  s.data.resize(ico6.vertex_count() * channels);
  std::vector<double> region_offset(static_cast<std::size_t>(k_classes) * channels);
  for (auto& v : region_offset) v = rng.normal() * 0.8;
  for (std::size_t c = 0; c < channels; ++c) {
    const auto field = random_band_limited_field(ico6, 3, rng, 0.5);
    for (std::size_t v = 0; v < ico6.vertex_count(); ++v)
      s.data[v * channels + c] = static_cast<float>(
          field[v] + region_offset[labels[v] * channels + c] + rng.normal() * 0.05);
  }
  return s;
}

struct SynthConfig {
  Task kind = Task::kRegression;
  int n = 10;
  std::uint64_t seed = 7;
  std::size_t channels = 4;
  int classes = 5;
  double train_fraction = 0.8;
  double val_fraction = 0.1;
  std::string out_dir = "synth";
};

// Writes sample files and the manifest; fully determined by the seed.
inline std::string synthesize_dataset(const SynthConfig& cfg, const Icosphere& ico6) {
  require(cfg.n >= 1, "need at least one sample");
  std::filesystem::create_directories(cfg.out_dir);
  Rng master(cfg.seed);

  std::vector<std::uint32_t> labels;
  if (cfg.kind == Task::kSegmentation) {
    Rng seed_rng = master.derive(0xabcd);
    labels = voronoi_labels(ico6, cfg.classes, seed_rng);
  }

  const std::string manifest_path = cfg.out_dir + "/manifest.csv";
  std::ofstream manifest(manifest_path);
  if (!manifest) throw DataError("cannot write manifest: " + manifest_path);
  manifest << "id,data_path,target,split\n";

  const int n_train = std::max(1, static_cast<int>(cfg.n * cfg.train_fraction));
  const int n_val = static_cast<int>(cfg.n * cfg.val_fraction);
  for (int i = 0; i < cfg.n; ++i) {
    Rng rng = master.derive(static_cast<std::uint64_t>(i) + 1);
    char name[64];
    std::snprintf(name, sizeof(name), "sample_%04d", i);
    const std::string surf_rel = std::string(name) + ".surf";
    std::string target_field;
    SurfaceSample s;
    if (cfg.kind == Task::kRegression) {
      s = make_regression_sample(ico6, cfg.channels, rng);
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%.9g", s.target);
      target_field = buf;
    } else {
      s = make_segmentation_sample(ico6, labels, cfg.channels, cfg.classes, rng);
      target_field = std::string(name) + ".labl";
      write_labels(cfg.out_dir + "/" + target_field, s.labels);
    }
    write_surface(cfg.out_dir + "/" + surf_rel, s.data, ico6.vertex_count(),
                  cfg.channels);
    const std::string split = i < n_train ? "train"
                              : i < n_train + n_val ? "val"
                                                    : "test";
    manifest << name << "," << surf_rel << "," << target_field << "," << split << "\n";
  }
  manifest.close();
  return manifest_path;
}

}  // namespace mssit
