#pragma once

#include <array>
#include <memory>
#include <vector>

#include "mssit/barycentric.hpp"
#include "mssit/icosphere.hpp"
#include "mssit/patching.hpp"
#include "mssit/tensor/ops.hpp"

namespace mssit {

// Everything derived from the icosphere hierarchy that the model, the
// augmentation pipeline and the CLI share: index tables, roll permutations,
// the patch->vertex averaging matrix and point locators. Immutable after
// construction and safe to share across threads.
struct SurfaceAtlas {
  std::vector<Icosphere> hierarchy;  // levels 0..6
  PatchMaps maps;
  VertexCover cover;

  // out row i = in row (i + offset) mod N, and its inverse.
  std::array<std::vector<std::uint32_t>, 5> roll_fwd;
  std::array<std::vector<std::uint32_t>, 5> roll_back;

  // Mean over the patches covering each vertex; rows = |V6|, cols = |F5|.
  std::shared_ptr<SparseMix> patch_to_vertex;

  std::unique_ptr<FaceLocator> locator6;  // for rotations / warp resampling
  std::unique_ptr<FaceLocator> locator2;

  // ico2 -> ico6 interpolation used to upsample elastic warp fields.
  std::unique_ptr<BarycentricMap> warp_upsample;

  const Icosphere& ico(int level) const { return hierarchy[level]; }

  static SurfaceAtlas build(double shift_fraction = 0.5) {
    SurfaceAtlas atlas;
    atlas.hierarchy = build_hierarchy(6);
    atlas.maps = build_patch_maps(atlas.hierarchy, shift_fraction);
    atlas.cover = build_vertex_cover(atlas.maps, atlas.hierarchy[6].vertex_count());

    for (int l = 1; l <= 4; ++l) {
      const std::size_t n = atlas.maps.level_length[l];
      const std::size_t s = atlas.maps.shift_offset[l];
      atlas.roll_fwd[l].resize(n);
      atlas.roll_back[l].resize(n);
      for (std::size_t i = 0; i < n; ++i) {
        atlas.roll_fwd[l][i] = static_cast<std::uint32_t>((i + s) % n);
        atlas.roll_back[l][i] = static_cast<std::uint32_t>((i + n - s) % n);
      }
    }

    auto mix = std::make_shared<SparseMix>();
    mix->rows = atlas.cover.offsets.size() - 1;
    mix->cols = atlas.maps.patch_vertices.size();
    mix->offsets = atlas.cover.offsets;
    mix->index = atlas.cover.patches;
    mix->weight.resize(atlas.cover.patches.size());
    for (std::size_t v = 0; v + 1 < atlas.cover.offsets.size(); ++v) {
      const double count = atlas.cover.offsets[v + 1] - atlas.cover.offsets[v];
      for (std::uint32_t e = atlas.cover.offsets[v]; e < atlas.cover.offsets[v + 1]; ++e)
        mix->weight[e] = 1.0 / count;
    }
    mix->finalize();
    atlas.patch_to_vertex = std::move(mix);

    atlas.locator6 = std::make_unique<FaceLocator>(atlas.hierarchy[6]);
    atlas.locator2 = std::make_unique<FaceLocator>(atlas.hierarchy[2]);
    atlas.warp_upsample = std::make_unique<BarycentricMap>(barycentric_map(
        atlas.hierarchy[2], atlas.hierarchy[6].vertices, atlas.locator2.get()));
    return atlas;
  }
};

}  // namespace mssit
