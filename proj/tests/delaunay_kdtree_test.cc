#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "planemvs/delaunay.h"
#include "planemvs/kdtree.h"
#include "planemvs/rng.h"

namespace planemvs {
namespace {

// Exact for coordinates below 2^20.
bool strictly_inside_circumcircle(const IntPoint& a, const IntPoint& b, const IntPoint& c, const IntPoint& d) {
  const __int128 adx = a.x - d.x, ady = a.y - d.y;
  const __int128 bdx = b.x - d.x, bdy = b.y - d.y;
  const __int128 cdx = c.x - d.x, cdy = c.y - d.y;
  const __int128 det = (adx * adx + ady * ady) * (bdx * cdy - cdx * bdy) -
                          (bdx * bdx + bdy * bdy) * (adx * cdy - cdx * ady) +
                          (cdx * cdx + cdy * cdy) * (adx * bdy - bdx * ady);
  const int64_t o = orient2d(a, b, c);
  return o > 0 ? det > 0 : det < 0;
}

std::vector<IntPoint> random_points(uint64_t seed, int n, int range) {
  CounterRng rng{seed};
  std::set<std::pair<int64_t, int64_t>> seen;
  std::vector<IntPoint> pts;
  while (static_cast<int>(pts.size()) < n) {
    const IntPoint p{static_cast<int64_t>(rng.below(range)), static_cast<int64_t>(rng.below(range))};
    if (seen.insert({p.x, p.y}).second) pts.push_back(p);
  }
  return pts;
}

int hull_size(std::vector<IntPoint> p) {
  std::sort(p.begin(), p.end(), [](const IntPoint& a, const IntPoint& b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
  std::vector<IntPoint> h(2 * p.size());
  size_t k = 0;
  for (size_t i = 0; i < p.size(); ++i) {
    while (k >= 2 && orient2d(h[k - 2], h[k - 1], p[i]) <= 0) --k;
    h[k++] = p[i];
  }
  for (size_t i = p.size() - 1, t = k + 1; i > 0; --i) {
    while (k >= t && orient2d(h[k - 2], h[k - 1], p[i - 1]) <= 0) --k;
    h[k++] = p[i - 1];
  }
  return static_cast<int>(k) - 1;
}

TEST(Delaunay, Orient2d) {
  EXPECT_GT(orient2d({0, 0}, {1, 0}, {0, 1}), 0);
  EXPECT_LT(orient2d({0, 0}, {0, 1}, {1, 0}), 0);
  EXPECT_EQ(orient2d({0, 0}, {1, 1}, {2, 2}), 0);
}

TEST(Delaunay, SquareGivesTwoTriangles) {
  const DelaunayTriangulation dt({{0, 0}, {10, 0}, {10, 10}, {0, 10}});
  EXPECT_EQ(dt.triangles().size(), 2u);
}

TEST(Delaunay, EmptyCircumcircleAgainstBruteForce) {
  for (uint64_t seed = 1; seed <= 5; ++seed) {
    const auto pts = random_points(seed, 150, 100000);
    const DelaunayTriangulation dt(pts);
    const auto& tris = dt.triangles();
    // A triangulation of a point set in general position has 2n - 2 - h triangles.
    EXPECT_EQ(static_cast<int>(tris.size()), 2 * static_cast<int>(pts.size()) - 2 - hull_size(pts)) << seed;
    for (const auto& t : tris) {
      EXPECT_NE(orient2d(pts[t[0]], pts[t[1]], pts[t[2]]), 0);
      for (size_t i = 0; i < pts.size(); ++i) {
        if (static_cast<int>(i) == t[0] || static_cast<int>(i) == t[1] || static_cast<int>(i) == t[2]) continue;
        ASSERT_FALSE(strictly_inside_circumcircle(pts[t[0]], pts[t[1]], pts[t[2]], pts[i]))
            << "seed " << seed << " point " << i;
      }
    }
  }
}

TEST(Delaunay, GridInputWithCocircularPoints) {
  std::vector<IntPoint> pts;
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 8; ++x) pts.push_back({x * 5, y * 5});
  const DelaunayTriangulation dt(pts);
  EXPECT_EQ(dt.triangles().size(), 2u * 7 * 7);
}

TEST(Delaunay, CollinearInputHasNoTriangles) {
  const DelaunayTriangulation dt({{0, 0}, {1, 1}, {2, 2}, {5, 5}});
  EXPECT_TRUE(dt.triangles().empty());
}

TEST(KdTree, MatchesBruteForce) {
  CounterRng rng{21};
  std::vector<Vec3> pts(2000);
  for (auto& p : pts) p = Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
  const KdTree tree(pts);
  for (int q = 0; q < 50; ++q) {
    const Vec3 c(rng.uniform(-1.2, 1.2), rng.uniform(-1.2, 1.2), rng.uniform(-1.2, 1.2));
    for (int k : {1, 7, 20}) {
      std::vector<std::pair<double, int>> all;
      for (int i = 0; i < static_cast<int>(pts.size()); ++i) all.push_back({(pts[i] - c).squaredNorm(), i});
      std::sort(all.begin(), all.end());
      const auto got = tree.knn(c, k);
      ASSERT_EQ(static_cast<int>(got.size()), k);
      for (int j = 0; j < k; ++j) EXPECT_EQ(got[j], all[j].second);
    }
  }
}

TEST(KdTree, TiesResolveToLowerIndex) {
  std::vector<Vec3> pts(10, Vec3(1, 1, 1));
  pts.push_back(Vec3(0, 0, 0));
  const KdTree tree(pts);
  const auto got = tree.knn(Vec3(1, 1, 1), 3);
  EXPECT_EQ(got, (std::vector<int>{0, 1, 2}));
  EXPECT_EQ(tree.knn(Vec3::Zero(), 100).size(), pts.size());
}

}  // namespace
}  // namespace planemvs
