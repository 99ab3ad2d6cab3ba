#include "planemvs/kdtree.h"

#include <algorithm>

namespace planemvs {

namespace {
constexpr int kLeafSize = 8;
}

KdTree::KdTree(const std::vector<Vec3>& points) : pts_(points), order_(points.size()) {
  for (size_t i = 0; i < order_.size(); ++i) order_[i] = static_cast<int>(i);
  if (!pts_.empty()) build(0, static_cast<int>(pts_.size()), 0);
}

int KdTree::build(int lo, int hi, int depth) {
  const int id = static_cast<int>(nodes_.size());
  nodes_.push_back({lo, hi});
  if (hi - lo <= kLeafSize) return id;
  Vec3 mn = pts_[order_[lo]], mx = mn;
  for (int i = lo; i < hi; ++i) {
    mn = mn.cwiseMin(pts_[order_[i]]);
    mx = mx.cwiseMax(pts_[order_[i]]);
  }
  int axis = 0;
  (mx - mn).maxCoeff(&axis);
  if (mx[axis] == mn[axis]) return id;  // all coincident
  const int mid = lo + (hi - lo) / 2;
  std::nth_element(order_.begin() + lo, order_.begin() + mid, order_.begin() + hi, [&](int a, int b) {
    const double pa = pts_[a][axis], pb = pts_[b][axis];
    return pa < pb || (pa == pb && a < b);
  });
  const double split = pts_[order_[mid]][axis];
  const int left = build(lo, mid, depth + 1);
  const int right = build(mid, hi, depth + 1);
  nodes_[id].axis = axis;
  nodes_[id].split = split;
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

void KdTree::search(int node, const Vec3& q, int k, std::vector<std::pair<double, int>>& heap) const {
  const Node& nd = nodes_[node];
  if (nd.axis < 0) {
    for (int i = nd.lo; i < nd.hi; ++i) {
      const int idx = order_[i];
      const std::pair<double, int> cand{(pts_[idx] - q).squaredNorm(), idx};
      if (static_cast<int>(heap.size()) < k) {
        heap.push_back(cand);
        std::push_heap(heap.begin(), heap.end());
      } else if (cand < heap.front()) {
        std::pop_heap(heap.begin(), heap.end());
        heap.back() = cand;
        std::push_heap(heap.begin(), heap.end());
      }
    }
    return;
  }
  const double diff = q[nd.axis] - nd.split;
  const int near = diff < 0 ? nd.left : nd.right;
  const int far = diff < 0 ? nd.right : nd.left;
  search(near, q, k, heap);
  // <= keeps equal-distance candidates reachable for the index tie-break.
  if (static_cast<int>(heap.size()) < k || diff * diff <= heap.front().first) search(far, q, k, heap);
}

std::vector<int> KdTree::knn(const Vec3& q, int k) const {
  k = std::min<int>(k, static_cast<int>(pts_.size()));
  if (k <= 0) return {};
  std::vector<std::pair<double, int>> heap;
  heap.reserve(k);
  search(0, q, k, heap);
  std::sort(heap.begin(), heap.end());
  std::vector<int> out;
  out.reserve(heap.size());
  for (const auto& [d, i] : heap) out.push_back(i);
  return out;
}

}  // namespace planemvs
