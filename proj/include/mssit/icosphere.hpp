#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <utility>
#include <vector>

#include "mssit/common.hpp"
#include "mssit/geom.hpp"

namespace mssit {

// One level of the icosahedral tessellation hierarchy. Level n has
// 10*4^n + 2 vertices and 20*4^n faces. The vertex and face orderings are
// canonical: subdividing keeps parent vertices first, appends midpoints in
// sorted-edge order, and emits the 4 children of face f contiguously at
// 4f..4f+3 (the three corner children first, the centre child last).
struct Icosphere {
  int level = 0;
  std::vector<Vec3> vertices;
  std::vector<std::array<std::uint32_t, 3>> faces;
  // parent face index at level-1; empty for the base icosahedron.
  std::vector<std::uint32_t> face_parent;

  std::size_t vertex_count() const { return vertices.size(); }
  std::size_t face_count() const { return faces.size(); }
};

inline std::size_t ico_vertex_count(int level) {
  return 10u * (std::size_t{1} << (2 * level)) + 2;
}
inline std::size_t ico_face_count(int level) {
  return 20u * (std::size_t{1} << (2 * level));
}

// Base icosahedron from the golden-ratio construction. Vertex order is fixed:
// (-1,t,0),(1,t,0),(-1,-t,0),(1,-t,0),(0,-1,t),(0,1,t),(0,-1,-t),(0,1,-t),
// (t,0,-1),(t,0,1),(-t,0,-1),(-t,0,1), all normalised, with t the golden
// ratio. Faces wind counter-clockwise seen from outside.
inline Icosphere base_icosahedron() {
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  Icosphere ico;
  ico.level = 0;
  const Vec3 raw[12] = {{-1, t, 0}, {1, t, 0},  {-1, -t, 0}, {1, -t, 0},
                        {0, -1, t}, {0, 1, t},  {0, -1, -t}, {0, 1, -t},
                        {t, 0, -1}, {t, 0, 1},  {-t, 0, -1}, {-t, 0, 1}};
  ico.vertices.reserve(12);
  for (const Vec3& v : raw) ico.vertices.push_back(v.normalized());
  ico.faces = {{0, 11, 5},  {0, 5, 1},   {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
               {1, 5, 9},   {5, 11, 4},  {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
               {3, 9, 4},   {3, 4, 2},   {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
               {4, 9, 5},   {2, 4, 11},  {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
  return ico;
}

namespace detail {

// Unique undirected edges of a tessellation, sorted lexicographically. The
// rank of an edge in this list fixes the index of its midpoint vertex in the
// next level.
inline std::vector<std::pair<std::uint32_t, std::uint32_t>> sorted_edges(
    const Icosphere& ico) {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
  edges.reserve(ico.face_count() * 3);
  for (const auto& f : ico.faces) {
    for (int e = 0; e < 3; ++e) {
      std::uint32_t a = f[e], b = f[(e + 1) % 3];
      edges.emplace_back(std::min(a, b), std::max(a, b));
    }
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  return edges;
}

}  // namespace detail

// Midpoint subdivision projected onto the unit sphere. Child level keeps the
// parent vertices (same indices), then appends one midpoint per parent edge
// in sorted-edge order.
inline Icosphere subdivide(const Icosphere& parent) {
  const auto edges = detail::sorted_edges(parent);
  const std::uint32_t base = static_cast<std::uint32_t>(parent.vertex_count());

  Icosphere child;
  child.level = parent.level + 1;
  child.vertices = parent.vertices;
  child.vertices.reserve(parent.vertex_count() + edges.size());
  for (const auto& [a, b] : edges)
    child.vertices.push_back((parent.vertices[a] + parent.vertices[b]).normalized());

  auto mid = [&](std::uint32_t a, std::uint32_t b) {
    const auto key = std::make_pair(std::min(a, b), std::max(a, b));
    const auto it = std::lower_bound(edges.begin(), edges.end(), key);
    return base + static_cast<std::uint32_t>(it - edges.begin());
  };

  child.faces.reserve(parent.face_count() * 4);
  child.face_parent.reserve(parent.face_count() * 4);
  for (std::size_t f = 0; f < parent.face_count(); ++f) {
    const auto [v0, v1, v2] = parent.faces[f];
    const std::uint32_t a = mid(v0, v1), b = mid(v1, v2), c = mid(v2, v0);
    child.faces.push_back({v0, a, c});
    child.faces.push_back({v1, b, a});
    child.faces.push_back({v2, c, b});
    child.faces.push_back({a, b, c});
    for (int j = 0; j < 4; ++j)
      child.face_parent.push_back(static_cast<std::uint32_t>(f));
  }
  return child;
}

inline Icosphere build_icosphere(int level) {
  require(level >= 0 && level <= 7, "icosphere level must be in [0, 7]");
  Icosphere ico = base_icosahedron();
  for (int i = 0; i < level; ++i) ico = subdivide(ico);
  return ico;
}

// Levels 0..max_level, sharing the canonical ordering.
inline std::vector<Icosphere> build_hierarchy(int max_level) {
  require(max_level >= 0 && max_level <= 7, "icosphere level must be in [0, 7]");
  std::vector<Icosphere> levels;
  levels.reserve(max_level + 1);
  levels.push_back(base_icosahedron());
  for (int i = 1; i <= max_level; ++i) levels.push_back(subdivide(levels.back()));
  return levels;
}

inline double mean_edge_length(const Icosphere& ico) {
  const auto edges = detail::sorted_edges(ico);
  double total = 0.0;
  for (const auto& [a, b] : edges)
    total += (ico.vertices[a] - ico.vertices[b]).norm();
  return total / static_cast<double>(edges.size());
}

}  // namespace mssit
