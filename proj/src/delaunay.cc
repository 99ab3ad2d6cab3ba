#include "planemvs/delaunay.h"

#include <algorithm>
#include <map>

#include "planemvs/errors.h"

namespace planemvs {

namespace {

constexpr int64_t kSuper = 1 << 22;  // far outside any image coordinate
constexpr int64_t kMaxCoord = 1 << 20;

}  // namespace

int64_t orient2d(const IntPoint& a, const IntPoint& b, const IntPoint& c) {
  return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
}

int64_t DelaunayTriangulation::orient(int a, int b, int c) const {
  return orient2d(pts_[a], pts_[b], pts_[c]);
}

bool DelaunayTriangulation::in_circumcircle(const Tri& t, int p) const {
  using i128 = __int128;
  const IntPoint& d = pts_[p];
  i128 m[3][3];
  for (int i = 0; i < 3; ++i) {
    const i128 dx = pts_[t.v[i]].x - d.x;
    const i128 dy = pts_[t.v[i]].y - d.y;
    m[i][0] = dx;
    m[i][1] = dy;
    m[i][2] = dx * dx + dy * dy;
  }
  const i128 det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
                   m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
                   m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
  return det > 0;  // strictly inside for counter-clockwise t
}

DelaunayTriangulation::DelaunayTriangulation(const std::vector<IntPoint>& points) {
  const int n = static_cast<int>(points.size());
  if (n < 3) return;
  for (const IntPoint& p : points) {
    if (std::abs(p.x) > kMaxCoord || std::abs(p.y) > kMaxCoord) {
      throw DomainError("delaunay: coordinate out of range");
    }
  }
  pts_ = points;
  pts_.push_back({-kSuper, -kSuper});
  pts_.push_back({kSuper, -kSuper});
  pts_.push_back({0, kSuper});
  tris_.push_back({{n, n + 1, n + 2}, {-1, -1, -1}, true});
  for (int i = 0; i < n; ++i) insert(i);
  for (const Tri& t : tris_) {
    if (!t.alive) continue;
    if (t.v[0] >= n || t.v[1] >= n || t.v[2] >= n) continue;
    result_.push_back(t.v);
  }
}

int DelaunayTriangulation::locate(int p) const {
  int t = last_;
  if (!tris_[t].alive) {
    t = static_cast<int>(tris_.size()) - 1;
    while (!tris_[t].alive) --t;
  }
  // Visibility walk; terminates for Delaunay triangulations.
  for (size_t steps = 0; steps <= tris_.size() * 2 + 16; ++steps) {
    const Tri& tri = tris_[t];
    int next = -1;
    for (int i = 0; i < 3; ++i) {
      const int a = tri.v[(i + 1) % 3], b = tri.v[(i + 2) % 3];
      if (orient(a, b, p) < 0) {
        next = tri.n[i];
        break;
      }
    }
    if (next < 0) return t;
    t = next;
  }
  throw InvariantError("delaunay: point location did not terminate");
}

void DelaunayTriangulation::insert(int p) {
  const int start = locate(p);
  for (int v : tris_[start].v) {
    if (pts_[v].x == pts_[p].x && pts_[v].y == pts_[p].y) return;  // duplicate
  }
  // Cavity: triangles whose circumcircle strictly contains p, grown from start.
  ++stamp_;
  mark_.resize(tris_.size(), 0);
  auto in_cavity = [&](int t) { return mark_[t] == stamp_; };
  std::vector<int> cavity{start};
  mark_[start] = stamp_;
  for (size_t k = 0; k < cavity.size(); ++k) {
    for (int nb : tris_[cavity[k]].n) {
      if (nb < 0 || in_cavity(nb)) continue;
      if (in_circumcircle(tris_[nb], p)) {
        mark_[nb] = stamp_;
        cavity.push_back(nb);
      }
    }
  }
  // Boundary edges (a, b) keep the cavity's orientation and their outer neighbor.
  struct Edge {
    int a, b, outer;
  };
  std::vector<Edge> boundary;
  for (int t : cavity) {
    const Tri& tri = tris_[t];
    for (int i = 0; i < 3; ++i) {
      const int nb = tri.n[i];
      if (nb >= 0 && in_cavity(nb)) continue;
      boundary.push_back({tri.v[(i + 1) % 3], tri.v[(i + 2) % 3], nb});
    }
  }
  for (int t : cavity) tris_[t].alive = false;

  // New triangles keyed by their first and last boundary vertex.
  std::map<int, int> by_start, by_end;
  std::vector<int> created;
  for (const Edge& e : boundary) {
    const int id = static_cast<int>(tris_.size());
    // Triangle (p, a, b): edge opposite p is (a, b).
    tris_.push_back({{p, e.a, e.b}, {e.outer, -1, -1}, true});
    created.push_back(id);
    if (e.outer >= 0) {
      Tri& o = tris_[e.outer];
      for (int i = 0; i < 3; ++i) {
        const int a = o.v[(i + 1) % 3], b = o.v[(i + 2) % 3];
        if (a == e.b && b == e.a) o.n[i] = id;
      }
    }
    by_start[e.a] = id;
    by_end[e.b] = id;
  }
  for (int id : created) {
    Tri& t = tris_[id];
    const int a = t.v[1], b = t.v[2];
    // Edge (b, p) is opposite v[1]; its neighbor is the new triangle starting at b.
    t.n[1] = by_start.at(b);
    // Edge (p, a) is opposite v[2]; its neighbor is the new triangle ending at a.
    t.n[2] = by_end.at(a);
  }
  last_ = created.empty() ? last_ : created.back();
}

}  // namespace planemvs
