#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace planemvs {

struct IntPoint {
  int64_t x = 0, y = 0;
};

// Incremental Bowyer-Watson triangulation of distinct integer points with
// exact predicates. Triangles are counter-clockwise in (x right, y up); in
// image coordinates that reads clockwise, which does not matter to callers.
class DelaunayTriangulation {
 public:
  explicit DelaunayTriangulation(const std::vector<IntPoint>& points);

  // Vertex index triples into the input array, in creation order.
  const std::vector<std::array<int, 3>>& triangles() const { return result_; }

 private:
  struct Tri {
    std::array<int, 3> v;
    std::array<int, 3> n;  // neighbor across the edge opposite v[i], -1 for none
    bool alive = true;
  };
  void insert(int p);
  int locate(int p) const;
  bool in_circumcircle(const Tri& t, int p) const;
  int64_t orient(int a, int b, int c) const;

  std::vector<IntPoint> pts_;
  std::vector<Tri> tris_;
  std::vector<std::array<int, 3>> result_;
  std::vector<uint32_t> mark_;
  uint32_t stamp_ = 0;
  int last_ = 0;
};

// Exact orientation of (a, b, c): > 0 counter-clockwise, 0 collinear.
int64_t orient2d(const IntPoint& a, const IntPoint& b, const IntPoint& c);

}  // namespace planemvs
