#include <gtest/gtest.h>

#include <cstring>
#include <map>
#include <set>

#include "mssit/icosphere.hpp"

using namespace mssit;

TEST(Icosphere, CountingLawLevels0To7) {
  Icosphere ico = base_icosahedron();
  for (int level = 0; level <= 7; ++level) {
    EXPECT_EQ(ico.vertex_count(), ico_vertex_count(level)) << "level " << level;
    EXPECT_EQ(ico.face_count(), ico_face_count(level)) << "level " << level;
    if (level < 7) ico = subdivide(ico);
  }
  EXPECT_EQ(ico_vertex_count(6), 40962u);
  EXPECT_EQ(ico_face_count(5), 20480u);
  EXPECT_EQ(ico_vertex_count(5), 10242u);
  EXPECT_EQ(ico_vertex_count(0), 12u);
  EXPECT_EQ(ico_face_count(0), 20u);
}

TEST(Icosphere, UnitNormVertices) {
  const Icosphere ico = build_icosphere(4);
  for (const Vec3& v : ico.vertices) EXPECT_NEAR(v.norm(), 1.0, 1e-12);
}

TEST(Icosphere, ManifoldAndEuler) {
  for (int level : {0, 2, 4}) {
    const Icosphere ico = build_icosphere(level);
    std::map<std::pair<std::uint32_t, std::uint32_t>, int> edge_faces;
    for (const auto& f : ico.faces) {
      for (int e = 0; e < 3; ++e) {
        std::uint32_t a = f[e], b = f[(e + 1) % 3];
        EXPECT_LT(a, ico.vertex_count());
        ++edge_faces[{std::min(a, b), std::max(a, b)}];
      }
    }
    for (const auto& [edge, count] : edge_faces) EXPECT_EQ(count, 2);
    const long v = static_cast<long>(ico.vertex_count());
    const long e = static_cast<long>(edge_faces.size());
    const long f = static_cast<long>(ico.face_count());
    EXPECT_EQ(v - e + f, 2) << "level " << level;
  }
}

TEST(Icosphere, OutwardFaceOrientation) {
  const Icosphere ico = build_icosphere(3);
  for (const auto& f : ico.faces)
    EXPECT_GT(triple(ico.vertices[f[0]], ico.vertices[f[1]], ico.vertices[f[2]]), 0.0);
}

TEST(Icosphere, SubdivisionKeepsParentVerticesFirst) {
  const Icosphere parent = build_icosphere(2);
  const Icosphere child = subdivide(parent);
  for (std::size_t i = 0; i < parent.vertex_count(); ++i) {
    EXPECT_EQ(child.vertices[i].x, parent.vertices[i].x);
    EXPECT_EQ(child.vertices[i].y, parent.vertices[i].y);
    EXPECT_EQ(child.vertices[i].z, parent.vertices[i].z);
  }
}

TEST(Icosphere, ChildFaceContiguity) {
  const Icosphere parent = build_icosphere(1);
  const Icosphere child = subdivide(parent);
  ASSERT_EQ(child.face_parent.size(), child.face_count());
  for (std::size_t f = 0; f < child.face_count(); ++f)
    EXPECT_EQ(child.face_parent[f], f / 4);
  // spot value from the contiguity rule
  EXPECT_EQ(child.face_parent[8], 2u);
  EXPECT_EQ(child.face_parent[9], 2u);
  EXPECT_EQ(child.face_parent[10], 2u);
  EXPECT_EQ(child.face_parent[11], 2u);
}

TEST(Icosphere, SubdivideCounts) {
  const Icosphere ico1 = subdivide(base_icosahedron());
  EXPECT_EQ(ico1.vertex_count(), 42u);
  EXPECT_EQ(ico1.face_count(), 80u);
  const Icosphere ico5 = subdivide(build_icosphere(4));
  EXPECT_EQ(ico5.face_count(), 20480u);
  EXPECT_EQ(build_icosphere(4).face_count(), 5120u);
}

TEST(Icosphere, HierarchyConsistency) {
  // The 4 children of face f cover exactly the face's 3 corners plus its 3
  // edge midpoints: 6 distinct vertices.
  const Icosphere parent = build_icosphere(2);
  const Icosphere child = subdivide(parent);
  for (std::size_t f = 0; f < parent.face_count(); ++f) {
    std::set<std::uint32_t> verts;
    for (std::size_t c = 4 * f; c < 4 * f + 4; ++c)
      for (std::uint32_t v : child.faces[c]) verts.insert(v);
    ASSERT_EQ(verts.size(), 6u);
    for (std::uint32_t corner : parent.faces[f]) EXPECT_TRUE(verts.count(corner));
  }
}

TEST(Icosphere, Deterministic) {
  const Icosphere a = build_icosphere(3);
  const Icosphere b = build_icosphere(3);
  ASSERT_EQ(a.vertex_count(), b.vertex_count());
  EXPECT_EQ(std::memcmp(a.vertices.data(), b.vertices.data(),
                        a.vertex_count() * sizeof(Vec3)),
            0);
  EXPECT_EQ(std::memcmp(a.faces.data(), b.faces.data(),
                        a.face_count() * sizeof(a.faces[0])),
            0);
}

TEST(Icosphere, LevelOutOfRange) {
  EXPECT_THROW(build_icosphere(-1), std::invalid_argument);
  EXPECT_THROW(build_icosphere(8), std::invalid_argument);
}
