#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <memory>
#include <vector>

#include "mssit/common.hpp"
#include "mssit/geom.hpp"
#include "mssit/icosphere.hpp"

namespace mssit {

// Sparse interpolation from a source tessellation to arbitrary points on the
// unit sphere. Row i interpolates the three corners of face_hits[i] with the
// stored barycentric weights (each triple sums to 1, all entries >= 0).
struct BarycentricMap {
  int source_level = 0;
  std::size_t source_vertex_count = 0;
  std::vector<std::uint32_t> face_hits;
  std::vector<std::array<std::uint32_t, 3>> corner_ids;
  std::vector<std::array<double, 3>> weights;

  std::size_t size() const { return face_hits.size(); }
};

// Uniform grid over face centroids used to narrow down point-in-face
// candidates. Query results are sorted by face index so ties on shared edges
// resolve to the lowest face.
class FaceLocator {
 public:
  explicit FaceLocator(const Icosphere& src) : src_(&src) {
    // Cell edge ~ twice the largest centroid-to-corner distance keeps the
    // containing face within the 3x3x3 neighbourhood of any query point.
    double max_radius = 0.0;
    centroids_.reserve(src.face_count());
    for (const auto& f : src.faces) {
      const Vec3 c =
          (src.vertices[f[0]] + src.vertices[f[1]] + src.vertices[f[2]]) * (1.0 / 3.0);
      centroids_.push_back(c);
      for (int k = 0; k < 3; ++k)
        max_radius = std::max(max_radius, (src.vertices[f[k]] - c).norm());
    }
    cell_ = std::max(2.0 * max_radius, 1e-3);
    dim_ = static_cast<int>(std::floor(2.0 / cell_)) + 1;
    buckets_.resize(static_cast<std::size_t>(dim_) * dim_ * dim_);
    for (std::uint32_t f = 0; f < src.face_count(); ++f)
      buckets_[cell_index(centroids_[f])].push_back(f);
  }

  const Icosphere& source() const { return *src_; }

  // Faces whose centroid lies within `ring` cells of p's cell, ascending.
  void candidates(const Vec3& p, int ring, std::vector<std::uint32_t>& out) const {
    out.clear();
    const int cx = coord(p.x), cy = coord(p.y), cz = coord(p.z);
    for (int dx = -ring; dx <= ring; ++dx)
      for (int dy = -ring; dy <= ring; ++dy)
        for (int dz = -ring; dz <= ring; ++dz) {
          const int x = cx + dx, y = cy + dy, z = cz + dz;
          if (x < 0 || y < 0 || z < 0 || x >= dim_ || y >= dim_ || z >= dim_) continue;
          const auto& bucket =
              buckets_[(static_cast<std::size_t>(x) * dim_ + y) * dim_ + z];
          out.insert(out.end(), bucket.begin(), bucket.end());
        }
    std::sort(out.begin(), out.end());
  }

 private:
  int coord(double v) const {
    int c = static_cast<int>(std::floor((v + 1.0) / cell_));
    return std::clamp(c, 0, dim_ - 1);
  }
  std::size_t cell_index(const Vec3& p) const {
    return (static_cast<std::size_t>(coord(p.x)) * dim_ + coord(p.y)) * dim_ + coord(p.z);
  }

  const Icosphere* src_;
  std::vector<Vec3> centroids_;
  std::vector<std::vector<std::uint32_t>> buckets_;
  double cell_ = 0.0;
  int dim_ = 0;
};

namespace detail {

// Gnomonic (central projection) containment test: solve p = w0*A + w1*B + w2*C.
// Inside iff all components are non-negative up to tolerance and the solution
// points towards the face rather than its antipode.
inline bool face_weights(const Icosphere& src, std::uint32_t face, const Vec3& p,
                         std::array<double, 3>& w) {
  const auto& f = src.faces[face];
  const Vec3 a = src.vertices[f[0]], b = src.vertices[f[1]], c = src.vertices[f[2]];
  const double det = triple(a, b, c);
  if (std::abs(det) < 1e-15) return false;
  const double w0 = triple(p, b, c) / det;
  const double w1 = triple(a, p, c) / det;
  const double w2 = triple(a, b, p) / det;
  const double sum = w0 + w1 + w2;
  constexpr double kTol = 1e-12;
  if (sum <= 0.0 || w0 < -kTol || w1 < -kTol || w2 < -kTol) return false;
  w = {w0 / sum, w1 / sum, w2 / sum};
  return true;
}

// Snap near-vertex hits to exact corners and keep the triple a clean
// partition of unity.
inline void tidy_weights(std::array<double, 3>& w) {
  for (int k = 0; k < 3; ++k) {
    if (w[k] >= 1.0 - 1e-9) {
      w = {0.0, 0.0, 0.0};
      w[k] = 1.0;
      return;
    }
  }
  double sum = 0.0;
  for (int k = 0; k < 3; ++k) {
    w[k] = std::clamp(w[k], 0.0, 1.0);
    sum += w[k];
  }
  for (int k = 0; k < 3; ++k) w[k] /= sum;
}

}  // namespace detail

// Locates each target in the source tessellation. Targets must be unit
// vectors (tolerance 1e-9). A prebuilt locator for `src` may be supplied when
// mapping against the same source repeatedly.
inline BarycentricMap barycentric_map(const Icosphere& src,
                                      const std::vector<Vec3>& targets,
                                      const FaceLocator* locator = nullptr) {
  std::unique_ptr<FaceLocator> owned;
  if (locator == nullptr) {
    owned = std::make_unique<FaceLocator>(src);
    locator = owned.get();
  }

  BarycentricMap map;
  map.source_level = src.level;
  map.source_vertex_count = src.vertex_count();
  map.face_hits.resize(targets.size());
  map.corner_ids.resize(targets.size());
  map.weights.resize(targets.size());

  std::vector<std::uint32_t> cands;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const Vec3& p = targets[i];
    require(std::abs(p.norm() - 1.0) <= 1e-9, "barycentric target must be unit-norm");

    bool found = false;
    std::array<double, 3> w{};
    std::uint32_t hit = 0;
    for (int ring = 1; ring <= 3 && !found; ++ring) {
      locator->candidates(p, ring, cands);
      for (std::uint32_t f : cands) {
        if (detail::face_weights(src, f, p, w)) {
          hit = f;
          found = true;
          break;
        }
      }
    }
    if (!found) {
      // Floating-point corner case; fall back to a full scan.
      for (std::uint32_t f = 0; f < src.face_count() && !found; ++f) {
        if (detail::face_weights(src, f, p, w)) {
          hit = f;
          found = true;
        }
      }
    }
    require(found, "target point could not be located on the source tessellation");

    detail::tidy_weights(w);
    map.face_hits[i] = hit;
    map.corner_ids[i] = src.faces[hit];
    map.weights[i] = w;
  }
  return map;
}

// out[i] = sum_k weights[i][k] * data[corner_ids[i][k]]; data is row-major
// [vertex_count x channels].
template <typename T>
void resample(const T* data, std::size_t rows, std::size_t channels,
              const BarycentricMap& map, T* out) {
  require(rows == map.source_vertex_count, "resample: row count != source vertex count");
  for (std::size_t i = 0; i < map.size(); ++i) {
    const auto& ids = map.corner_ids[i];
    const auto& w = map.weights[i];
    T* dst = out + i * channels;
    const T* r0 = data + std::size_t{ids[0]} * channels;
    const T* r1 = data + std::size_t{ids[1]} * channels;
    const T* r2 = data + std::size_t{ids[2]} * channels;
    for (std::size_t c = 0; c < channels; ++c)
      dst[c] = static_cast<T>(w[0] * r0[c] + w[1] * r1[c] + w[2] * r2[c]);
  }
}

template <typename T>
std::vector<T> resample(const std::vector<T>& data, std::size_t channels,
                        const BarycentricMap& map) {
  require(channels > 0 && data.size() % channels == 0, "resample: bad data shape");
  std::vector<T> out(map.size() * channels);
  resample(data.data(), data.size() / channels, channels, map, out.data());
  return out;
}

// Index of the map corner carrying the largest weight: the nearest source
// vertex for near-equilateral tessellations. Used for categorical data.
inline std::uint32_t nearest_corner(const BarycentricMap& map, std::size_t i) {
  const auto& w = map.weights[i];
  int best = 0;
  for (int k = 1; k < 3; ++k)
    if (w[k] > w[best]) best = k;
  return map.corner_ids[i][best];
}

}  // namespace mssit
