#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "mssit/atlas.hpp"
#include "mssit/barycentric.hpp"
#include "mssit/geom.hpp"
#include "mssit/rng.hpp"

namespace mssit {

// One training example: per-vertex channels on ico6 plus either a scalar
// regression target or a per-vertex label map.
struct SurfaceSample {
  std::string id;
  std::size_t channels = 0;
  std::vector<float> data;  // row-major [40962 x C]
  double target = 0.0;
  std::vector<std::uint32_t> labels;  // empty for regression samples
};

struct AugmentConfig {
  double probability = 0.8;
  double rotation_range_deg = 30.0;
  int warp_coarse_level = 2;
  double warp_max_fraction = 1.0 / 8.0;

  void validate() const {
    require(probability >= 0.0 && probability <= 1.0, "augment probability in [0, 1]");
    require(rotation_range_deg > 0.0, "rotation range must be positive");
    require(warp_max_fraction > 0.0 && warp_max_fraction < 1.0,
            "warp fraction must be in (0, 1)");
    require(warp_coarse_level >= 0 && warp_coarse_level <= 5,
            "warp coarse level must be in [0, 5]");
  }
};

namespace detail {

// Deterministic orthonormal tangent basis at a unit vector.
inline std::pair<Vec3, Vec3> tangent_basis(const Vec3& v) {
  const Vec3 ref = std::abs(v.x) < 0.9 ? Vec3{1, 0, 0} : Vec3{0, 1, 0};
  const Vec3 e1 = v.cross(ref).normalized();
  const Vec3 e2 = v.cross(e1);
  return {e1, e2};
}

}  // namespace detail

// Composition order is fixed: R = Rz * Ry * Rx of the per-axis angles.
inline Mat3 rotation_from_angles(const std::array<double, 3>& angles_rad) {
  return matmul3(rotation_z(angles_rad[2]),
                 matmul3(rotation_y(angles_rad[1]), rotation_x(angles_rad[0])));
}

// Resampling map realising a rotation of the field by R: vertex v reads the
// input at R^-1 * position(v).
inline BarycentricMap rotation_resample_map(const SurfaceAtlas& atlas,
                                            const std::array<double, 3>& angles_rad) {
  const Icosphere& ico6 = atlas.ico(6);
  const Mat3 r_inv = transpose3(rotation_from_angles(angles_rad));
  std::vector<Vec3> targets(ico6.vertex_count());
  for (std::size_t i = 0; i < targets.size(); ++i)
    targets[i] = apply(r_inv, ico6.vertices[i]).normalized();
  return barycentric_map(ico6, targets, atlas.locator6.get());
}

// Elastic warp: random tangent displacements on a coarse grid, bounded by
// warp_max_fraction of the mean coarse edge length, reprojected to the sphere
// and barycentrically upsampled to ico6.
struct WarpField {
  std::vector<Vec3> warped_positions;  // per ico6 vertex, unit norm
  std::vector<Vec3> displacements;     // upsampled field before reprojection
  BarycentricMap resample_map;         // ico6 -> warped positions
};

inline WarpField make_warp(const SurfaceAtlas& atlas, const AugmentConfig& cfg,
                           Rng& rng) {
  const Icosphere& coarse = atlas.ico(cfg.warp_coarse_level);
  const Icosphere& ico6 = atlas.ico(6);
  const double max_len = cfg.warp_max_fraction * mean_edge_length(coarse);

  // Area-uniform sample in the tangent disc of radius max_len, then
  // reproject; the stored coarse displacement is the chord to the
  // reprojected point so upsampled magnitudes obey the same bound.
  std::vector<double> coarse_disp(coarse.vertex_count() * 3);
  for (std::size_t i = 0; i < coarse.vertex_count(); ++i) {
    const Vec3& v = coarse.vertices[i];
    const auto [e1, e2] = detail::tangent_basis(v);
    const double radius = max_len * std::sqrt(rng.uniform());
    const double angle = rng.uniform(0.0, 2.0 * M_PI);
    const Vec3 tangent = e1 * (radius * std::cos(angle)) + e2 * (radius * std::sin(angle));
    const Vec3 moved = (v + tangent).normalized();
    const Vec3 disp = moved - v;
    coarse_disp[3 * i] = disp.x;
    coarse_disp[3 * i + 1] = disp.y;
    coarse_disp[3 * i + 2] = disp.z;
  }

  const BarycentricMap* up = nullptr;
  BarycentricMap up_local;
  if (cfg.warp_coarse_level == 2 && atlas.warp_upsample != nullptr) {
    up = atlas.warp_upsample.get();
  } else {
    up_local = barycentric_map(coarse, ico6.vertices);
    up = &up_local;
  }
  const std::vector<double> fine_disp = resample(coarse_disp, 3, *up);

  WarpField field;
  field.displacements.resize(ico6.vertex_count());
  field.warped_positions.resize(ico6.vertex_count());
  std::vector<Vec3> targets(ico6.vertex_count());
  for (std::size_t i = 0; i < ico6.vertex_count(); ++i) {
    const Vec3 d{fine_disp[3 * i], fine_disp[3 * i + 1], fine_disp[3 * i + 2]};
    field.displacements[i] = d;
    field.warped_positions[i] = (ico6.vertices[i] + d).normalized();
    targets[i] = field.warped_positions[i];
  }
  field.resample_map = barycentric_map(ico6, targets, atlas.locator6.get());
  return field;
}

// Applies a resampling map to a sample: channels are interpolated, label maps
// use the nearest vertex of the hit face (categorical data is never blended).
inline SurfaceSample apply_resample_map(const SurfaceSample& sample,
                                        const BarycentricMap& map) {
  SurfaceSample out = sample;
  resample(sample.data.data(), sample.data.size() / sample.channels, sample.channels,
           map, out.data.data());
  if (!sample.labels.empty()) {
    for (std::size_t i = 0; i < map.size(); ++i)
      out.labels[i] = sample.labels[nearest_corner(map, i)];
  }
  return out;
}

inline SurfaceSample rotate_sample(const SurfaceSample& sample,
                                   const std::array<double, 3>& angles_rad,
                                   const SurfaceAtlas& atlas) {
  return apply_resample_map(sample, rotation_resample_map(atlas, angles_rad));
}

inline SurfaceSample warp_sample(const SurfaceSample& sample, const AugmentConfig& cfg,
                                 const SurfaceAtlas& atlas, Rng& rng) {
  return apply_resample_map(sample, make_warp(atlas, cfg, rng).resample_map);
}

// With probability (1-p) the sample passes through unchanged; otherwise
// exactly one of rotation or warp is applied, chosen 50/50.
inline SurfaceSample apply_augmentation(const SurfaceSample& sample,
                                        const AugmentConfig& cfg,
                                        const SurfaceAtlas& atlas, Rng& rng) {
  cfg.validate();
  if (!rng.bernoulli(cfg.probability)) return sample;
  if (rng.bernoulli(0.5)) {
    const double range = cfg.rotation_range_deg * M_PI / 180.0;
    const std::array<double, 3> angles = {rng.uniform(-range, range),
                                          rng.uniform(-range, range),
                                          rng.uniform(-range, range)};
    return rotate_sample(sample, angles, atlas);
  }
  return warp_sample(sample, cfg, atlas, rng);
}

}  // namespace mssit
