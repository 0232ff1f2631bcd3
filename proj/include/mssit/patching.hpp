#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "mssit/common.hpp"
#include "mssit/icosphere.hpp"

namespace mssit {

// Index tables connecting per-vertex surface data to the token sequence and
// defining windows, shifts and merge groups at every level. All tables are
// pure index bookkeeping; the canonical face ordering makes windows and merge
// groups contiguous ranges, so shifting is a 1-D cyclic roll and merging is a
// reshape.
struct PatchMaps {
  // Each ico5 face as 6 ico6 vertices: the 3 corners then the 3 edge
  // midpoints (mid01, mid12, mid20).
  std::vector<std::array<std::uint32_t, 6>> patch_vertices;

  // Indexed by level 1..4 (entry 0 unused).
  std::array<std::vector<std::uint32_t>, 5> window_id;
  std::array<int, 5> window_size{};
  std::array<int, 5> shift_offset{};
  std::array<int, 5> level_length{};

  double shift_fraction = 0.5;

  static constexpr int kLevels = 4;
  static constexpr int kPatchSize = 6;
};

// CSR table mapping each ico6 vertex to the patches containing it, used to
// scatter patch features back onto vertices by averaging.
struct VertexCover {
  std::vector<std::uint32_t> offsets;  // size |V6|+1
  std::vector<std::uint32_t> patches;  // concatenated covering patch ids
};

inline VertexCover build_vertex_cover(const PatchMaps& maps, std::size_t vertex_count) {
  VertexCover cover;
  cover.offsets.assign(vertex_count + 1, 0);
  for (const auto& row : maps.patch_vertices)
    for (std::uint32_t v : row) ++cover.offsets[v + 1];
  for (std::size_t v = 0; v < vertex_count; ++v) cover.offsets[v + 1] += cover.offsets[v];
  cover.patches.resize(cover.offsets.back());
  std::vector<std::uint32_t> fill(vertex_count, 0);
  for (std::uint32_t p = 0; p < maps.patch_vertices.size(); ++p)
    for (std::uint32_t v : maps.patch_vertices[p])
      cover.patches[cover.offsets[v] + fill[v]++] = p;
  return cover;
}

// Builds every index table from hierarchy levels 2..6. Windows at level l are
// the descendant faces of each face of I_{6-(l+3)}, found by walking
// face_parent links; level 4 is a single global window.
inline PatchMaps build_patch_maps(const std::vector<Icosphere>& hierarchy,
                                  double shift_fraction = 0.5) {
  require(hierarchy.size() >= 7, "hierarchy must contain levels 0..6");
  for (int lv = 0; lv <= 6; ++lv) {
    require(hierarchy[lv].level == lv, "hierarchy levels must be ordered 0..6");
    require(lv == 0 || !hierarchy[lv].face_parent.empty(),
            "hierarchy is missing face_parent links");
  }
  require(shift_fraction >= 0.0 && shift_fraction <= 1.0,
          "shift fraction must be in [0, 1]");

  PatchMaps maps;
  maps.shift_fraction = shift_fraction;

  // Patches: corners of each ico5 face plus the midpoints created by the
  // 5->6 subdivision, whose ico6 indices follow the sorted-edge rule.
  const Icosphere& ico5 = hierarchy[5];
  const auto edges = detail::sorted_edges(ico5);
  const std::uint32_t base = static_cast<std::uint32_t>(ico5.vertex_count());
  auto mid = [&](std::uint32_t a, std::uint32_t b) {
    const auto key = std::make_pair(std::min(a, b), std::max(a, b));
    const auto it = std::lower_bound(edges.begin(), edges.end(), key);
    return base + static_cast<std::uint32_t>(it - edges.begin());
  };
  maps.patch_vertices.resize(ico5.face_count());
  for (std::uint32_t f = 0; f < ico5.face_count(); ++f) {
    const auto [v0, v1, v2] = ico5.faces[f];
    maps.patch_vertices[f] = {v0, v1, v2, mid(v0, v1), mid(v1, v2), mid(v2, v0)};
  }

  for (int l = 1; l <= 4; ++l) {
    const int seq_level = 6 - l;
    const std::size_t n = hierarchy[seq_level].face_count();
    maps.level_length[l] = static_cast<int>(n);
    maps.window_id[l].resize(n);
    if (l == 4) {
      // Attention is global on the I2 grid.
      maps.window_size[l] = static_cast<int>(n);
      maps.shift_offset[l] = 0;
      continue;
    }
    for (std::size_t t = 0; t < n; ++t) {
      std::uint32_t face = static_cast<std::uint32_t>(t);
      for (int up = 0; up < 3; ++up)
        face = hierarchy[seq_level - up].face_parent[face];
      maps.window_id[l][t] = face;
      require(face == t / 64, "canonical ordering violated: window not contiguous");
    }
    maps.window_size[l] = 64;
    maps.shift_offset[l] = static_cast<int>(shift_fraction * 64.0);
  }
  return maps;
}

// Gathers per-vertex data into the token sequence. Token i concatenates the
// 6 vertex values of patch i channel-major: all 6 values of channel 0, then
// channel 1, ... giving width 6*C.
template <typename T>
std::vector<T> sequence_from_surface(const T* data, std::size_t rows,
                                     std::size_t channels, const PatchMaps& maps) {
  require(rows == ico_vertex_count(6), "surface data must have 40962 rows");
  require(channels >= 1, "channel count must be >= 1");
  const std::size_t n = maps.patch_vertices.size();
  const std::size_t width = PatchMaps::kPatchSize * channels;
  std::vector<T> tokens(n * width);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& pv = maps.patch_vertices[i];
    T* dst = tokens.data() + i * width;
    for (std::size_t c = 0; c < channels; ++c)
      for (int k = 0; k < PatchMaps::kPatchSize; ++k)
        dst[c * PatchMaps::kPatchSize + k] = data[std::size_t{pv[k]} * channels + c];
  }
  return tokens;
}

template <typename T>
std::vector<T> sequence_from_surface(const std::vector<T>& data, std::size_t channels,
                                     const PatchMaps& maps) {
  require(channels > 0 && data.size() % channels == 0, "bad surface data shape");
  return sequence_from_surface(data.data(), data.size() / channels, channels, maps);
}

// out row i = in row (i + offset) mod n.
template <typename T>
std::vector<T> cyclic_shift(const std::vector<T>& tokens, std::size_t rows,
                            std::size_t cols, std::size_t offset) {
  require(rows * cols == tokens.size(), "cyclic_shift: shape mismatch");
  require(offset < rows, "cyclic_shift: offset out of range");
  std::vector<T> out(tokens.size());
  for (std::size_t i = 0; i < rows; ++i) {
    const std::size_t src = (i + offset) % rows;
    std::copy_n(tokens.data() + src * cols, cols, out.data() + i * cols);
  }
  return out;
}

// [4M x D] -> [M x 4D]: row f concatenates rows 4f..4f+3. With row-major
// storage this is a pure reinterpretation; the copy keeps value semantics.
template <typename T>
std::vector<T> merge_tokens(const std::vector<T>& tokens, std::size_t rows,
                            std::size_t cols) {
  require(rows * cols == tokens.size(), "merge_tokens: shape mismatch");
  require(rows % 4 == 0, "merge_tokens: row count must be divisible by 4");
  return tokens;
}

// [M x 4D] -> [4M x D]: exact inverse gather of merge_tokens.
template <typename T>
std::vector<T> partition_tokens(const std::vector<T>& tokens, std::size_t rows,
                                std::size_t cols) {
  require(rows * cols == tokens.size(), "partition_tokens: shape mismatch");
  require(cols % 4 == 0, "partition_tokens: channel dim must be divisible by 4");
  return tokens;
}

}  // namespace mssit
