#include <gtest/gtest.h>

#include <map>
#include <set>

#include "mssit/patching.hpp"
#include "mssit/rng.hpp"

using namespace mssit;

namespace {

const std::vector<Icosphere>& hierarchy() {
  static const std::vector<Icosphere> h = build_hierarchy(6);
  return h;
}

const PatchMaps& maps() {
  static const PatchMaps m = build_patch_maps(hierarchy());
  return m;
}

}  // namespace

TEST(Patching, GridAnchorTable) {
  const PatchMaps& m = maps();
  const int expected_len[5] = {0, 20480, 5120, 1280, 320};
  const int expected_windows[5] = {0, 320, 80, 20, 1};
  const int expected_size[5] = {0, 64, 64, 64, 320};
  for (int l = 1; l <= 4; ++l) {
    EXPECT_EQ(m.level_length[l], expected_len[l]) << "level " << l;
    EXPECT_EQ(m.window_size[l], expected_size[l]) << "level " << l;
    const int windows = m.level_length[l] / m.window_size[l];
    EXPECT_EQ(windows, expected_windows[l]) << "level " << l;
  }
  EXPECT_EQ(m.shift_offset[1], 32);
  EXPECT_EQ(m.shift_offset[2], 32);
  EXPECT_EQ(m.shift_offset[3], 32);
}

TEST(Patching, WindowIdsAreContiguousRanges) {
  const PatchMaps& m = maps();
  for (int l = 1; l <= 3; ++l)
    for (std::size_t t = 0; t < m.window_id[l].size(); ++t)
      ASSERT_EQ(m.window_id[l][t], t / 64) << "level " << l << " token " << t;
}

TEST(Patching, WindowsAreDescendantFaces) {
  // Brute-force ancestor walk, independent of the builder's own walk order:
  // collect the descendant sets of each window face and compare to the
  // contiguous token ranges.
  const auto& h = hierarchy();
  const PatchMaps& m = maps();
  for (int l = 1; l <= 3; ++l) {
    const int seq_level = 6 - l;
    const int win_level = seq_level - 3;
    std::map<std::uint32_t, std::set<std::uint32_t>> members;
    for (std::uint32_t t = 0; t < h[seq_level].face_count(); ++t) {
      std::uint32_t face = t;
      for (int lv = seq_level; lv > win_level; --lv) face = h[lv].face_parent[face];
      members[face].insert(t);
    }
    ASSERT_EQ(members.size(), h[win_level].face_count());
    for (const auto& [w, tokens] : members) {
      ASSERT_EQ(tokens.size(), 64u);
      for (std::uint32_t t : tokens) EXPECT_EQ(m.window_id[l][t], w);
    }
  }
}

TEST(Patching, PatchVerticesAreCornersPlusMidpoints) {
  const auto& h = hierarchy();
  const PatchMaps& m = maps();
  ASSERT_EQ(m.patch_vertices.size(), 20480u);
  for (std::size_t i = 0; i < m.patch_vertices.size(); i += 97) {
    const auto& row = m.patch_vertices[i];
    std::set<std::uint32_t> distinct(row.begin(), row.end());
    EXPECT_EQ(distinct.size(), 6u);
    // corners are the ico5 face vertices
    for (int k = 0; k < 3; ++k) EXPECT_EQ(row[k], h[5].faces[i][k]);
    // midpoints coincide with the geometric midpoints of the face edges
    for (int k = 0; k < 3; ++k) {
      const Vec3 expected = (h[5].vertices[row[k]] + h[5].vertices[row[(k + 1) % 3]])
                                .normalized();
      const Vec3 got = h[6].vertices[row[3 + k]];
      EXPECT_NEAR((expected - got).norm(), 0.0, 1e-12);
    }
  }
}

TEST(Patching, PatchCoverMatchesBruteForce) {
  const PatchMaps& m = maps();
  std::vector<int> cover(ico_vertex_count(6), 0);
  for (const auto& row : m.patch_vertices)
    for (std::uint32_t v : row) ++cover[v];
  for (std::size_t v = 0; v < cover.size(); ++v) {
    EXPECT_GE(cover[v], 1) << "vertex " << v << " uncovered";
    EXPECT_LE(cover[v], 6);
    if (v >= ico_vertex_count(5)) {
      // edge-midpoint vertices belong to exactly the 2 faces sharing the edge
      EXPECT_EQ(cover[v], 2) << "vertex " << v;
    }
  }
}

TEST(Patching, VertexCoverTableMatchesMembership) {
  const PatchMaps& m = maps();
  const VertexCover cover = build_vertex_cover(m, ico_vertex_count(6));
  ASSERT_EQ(cover.offsets.size(), ico_vertex_count(6) + 1);
  for (std::size_t v = 0; v < 500; ++v) {
    std::set<std::uint32_t> expected;
    for (std::uint32_t p = 0; p < m.patch_vertices.size(); ++p)
      for (std::uint32_t pv : m.patch_vertices[p])
        if (pv == v) expected.insert(p);
    std::set<std::uint32_t> got(cover.patches.begin() + cover.offsets[v],
                                cover.patches.begin() + cover.offsets[v + 1]);
    EXPECT_EQ(got, expected) << "vertex " << v;
  }
}

TEST(Patching, SequenceFromSurfaceShapes) {
  const PatchMaps& m = maps();
  const std::size_t v6 = ico_vertex_count(6);
  std::vector<float> data(v6 * 4);
  Rng rng(5);
  for (auto& x : data) x = static_cast<float>(rng.normal());
  const auto tokens = sequence_from_surface(data, 4, m);
  EXPECT_EQ(tokens.size(), 20480u * 24u);
  // channel-major layout inside each token
  const auto& pv = m.patch_vertices[123];
  for (int c = 0; c < 4; ++c)
    for (int k = 0; k < 6; ++k)
      EXPECT_EQ(tokens[123 * 24 + c * 6 + k], data[pv[k] * 4 + c]);
}

TEST(Patching, SequenceConstantInput) {
  const PatchMaps& m = maps();
  std::vector<float> data(ico_vertex_count(6), 3.5f);
  const auto tokens = sequence_from_surface(data, 1, m);
  for (float t : tokens) EXPECT_EQ(t, 3.5f);
}

TEST(Patching, SequenceOneHotVertex) {
  const PatchMaps& m = maps();
  const std::size_t k = 31337;
  std::vector<float> data(ico_vertex_count(6), 0.0f);
  data[k] = 1.0f;
  const auto tokens = sequence_from_surface(data, 1, m);
  std::set<std::size_t> nonzero_patches;
  for (std::size_t i = 0; i < 20480; ++i)
    for (int j = 0; j < 6; ++j)
      if (tokens[i * 6 + j] != 0.0f) nonzero_patches.insert(i);
  std::set<std::size_t> expected;
  for (std::size_t p = 0; p < m.patch_vertices.size(); ++p)
    for (std::uint32_t pv : m.patch_vertices[p])
      if (pv == k) expected.insert(p);
  EXPECT_EQ(nonzero_patches, expected);
  EXPECT_GE(expected.size(), 1u);
  EXPECT_LE(expected.size(), 6u);
}

TEST(Patching, SequenceWrongRowCountRejected) {
  const PatchMaps& m = maps();
  std::vector<float> bad(100, 0.0f);
  EXPECT_THROW(sequence_from_surface(bad.data(), 100, 1, m), std::invalid_argument);
}

TEST(Patching, CyclicShiftSemantics) {
  Rng rng(9);
  const std::size_t n = 256, d = 3;
  std::vector<double> x(n * d);
  for (auto& v : x) v = rng.normal();

  const auto same = cyclic_shift(x, n, d, 0);
  EXPECT_EQ(same, x);

  const auto shifted = cyclic_shift(x, n, d, 32);
  for (std::size_t j = 0; j < d; ++j) EXPECT_EQ(shifted[j], x[32 * d + j]);

  const auto back = cyclic_shift(shifted, n, d, n - 32);
  EXPECT_EQ(back, x);

  EXPECT_THROW(cyclic_shift(x, n, d, n), std::invalid_argument);
}

TEST(Patching, ShiftOffsetMatchesTable4Default) {
  // w_s = 1/2 of a 64-token window rolls by 32: row 0 becomes old row 32.
  const PatchMaps& m = maps();
  std::vector<double> x(std::size_t{20480} * 2);
  Rng rng(2);
  for (auto& v : x) v = rng.normal();
  const auto shifted = cyclic_shift(x, 20480, 2, static_cast<std::size_t>(m.shift_offset[1]));
  EXPECT_EQ(shifted[0], x[32 * 2]);
  EXPECT_EQ(shifted[1], x[32 * 2 + 1]);
}

TEST(Patching, ShiftedWindowsDrawFromTwoOriginalWindows) {
  const PatchMaps& m = maps();
  for (int l = 1; l <= 3; ++l) {
    const std::size_t n = m.window_id[l].size();
    const std::size_t windows = n / 64;
    for (std::size_t w = 0; w < windows; ++w) {
      std::set<std::uint32_t> sources;
      for (std::size_t i = 64 * w; i < 64 * w + 64; ++i)
        sources.insert(m.window_id[l][(i + 32) % n]);
      EXPECT_GE(sources.size(), 2u);
      EXPECT_LE(sources.size(), 3u);
    }
  }
}

TEST(Patching, MergeConcatenatesGroupsOfFour) {
  Rng rng(12);
  const std::size_t rows = 16, cols = 5;
  std::vector<double> x(rows * cols);
  for (auto& v : x) v = rng.normal();
  const auto merged = merge_tokens(x, rows, cols);
  // independently gather the expected result
  for (std::size_t f = 0; f < rows / 4; ++f)
    for (std::size_t g = 0; g < 4; ++g)
      for (std::size_t c = 0; c < cols; ++c)
        EXPECT_EQ(merged[f * 4 * cols + g * cols + c], x[(4 * f + g) * cols + c]);
}

TEST(Patching, MergePartitionRoundTrip) {
  Rng rng(13);
  std::vector<double> x(std::size_t{5120} * 8);
  for (auto& v : x) v = rng.normal();
  const auto merged = merge_tokens(x, 5120, 8);        // 1280 x 32
  const auto back = partition_tokens(merged, 1280, 32);  // 5120 x 8
  EXPECT_EQ(back, x);
}

TEST(Patching, SingleGroupExamples) {
  const std::vector<double> abcd = {1, 2, 3, 4};
  const auto merged = merge_tokens(abcd, 4, 1);
  EXPECT_EQ(merged, abcd);  // one row (a,b,c,d)
  const auto parts = partition_tokens(abcd, 1, 4);
  EXPECT_EQ(parts, abcd);  // rows (a),(b),(c),(d)
}

TEST(Patching, MergePartitionShapeErrors) {
  std::vector<double> x(6, 0.0);
  EXPECT_THROW(merge_tokens(x, 3, 2), std::invalid_argument);
  EXPECT_THROW(partition_tokens(x, 2, 3), std::invalid_argument);
}

TEST(Patching, MissingHierarchyRejected) {
  auto partial = build_hierarchy(4);
  EXPECT_THROW(build_patch_maps(partial), std::invalid_argument);
}
