#pragma once

#include <vector>

#include "planemvs/types.h"

namespace planemvs {

// Static 3-D kd-tree for exact k-nearest-neighbor queries. Ties in distance
// resolve to the lower point index, so results are deterministic.
class KdTree {
 public:
  explicit KdTree(const std::vector<Vec3>& points);

  // Indices of the k points nearest to `q`, nearest first.
  std::vector<int> knn(const Vec3& q, int k) const;
  size_t size() const { return pts_.size(); }

 private:
  struct Node {
    int lo, hi;        // range in order_
    int axis = -1;     // -1 for leaves
    double split = 0;
    int left = -1, right = -1;
  };
  int build(int lo, int hi, int depth);
  void search(int node, const Vec3& q, int k, std::vector<std::pair<double, int>>& heap) const;

  std::vector<Vec3> pts_;
  std::vector<int> order_;
  std::vector<Node> nodes_;
};

}  // namespace planemvs
