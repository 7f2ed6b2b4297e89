#include <clay/kdtree.hpp>

#include <algorithm>
#include <limits>
#include <numeric>

namespace clay {

KdTree::KdTree(const Points& pts) : pts_(pts) {
  if (pts_.rows() == 0) throw InvalidInputError("KdTree: empty point set");
  perm_.resize(static_cast<std::size_t>(pts_.rows()));
  std::iota(perm_.begin(), perm_.end(), Index{0});
  nodes_.reserve(static_cast<std::size_t>(2 * pts_.rows() / kLeafSize + 2));
  root_ = build(0, pts_.rows());
}

Index KdTree::build(Index begin, Index end) {
  const Index node_index = static_cast<Index>(nodes_.size());
  nodes_.emplace_back();

  if (end - begin <= kLeafSize) {
    // Keep leaf ranges in ascending point order so scans hit low indices first.
    std::sort(perm_.begin() + begin, perm_.begin() + end);
    nodes_[node_index].begin = begin;
    nodes_[node_index].end = end;
    return node_index;
  }

  Vec3 lo = pts_.row(perm_[static_cast<std::size_t>(begin)]).transpose();
  Vec3 hi = lo;
  for (Index i = begin + 1; i < end; ++i) {
    const Vec3 p = pts_.row(perm_[static_cast<std::size_t>(i)]).transpose();
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  int dim = 0;
  (hi - lo).maxCoeff(&dim);

  const Index mid = begin + (end - begin) / 2;
  std::nth_element(perm_.begin() + begin, perm_.begin() + mid, perm_.begin() + end,
                   [&](Index a, Index b) {
                     const double pa = pts_(a, dim);
                     const double pb = pts_(b, dim);
                     return pa < pb || (pa == pb && a < b);
                   });

  const double split = pts_(perm_[static_cast<std::size_t>(mid)], dim);
  const Index left = build(begin, mid);
  const Index right = build(mid, end);
  nodes_[node_index].split = split;
  nodes_[node_index].dim = dim;
  nodes_[node_index].left = left;
  nodes_[node_index].right = right;
  return node_index;
}

void KdTree::search(Index node, const Vec3& q, Best& best) const {
  const Node& n = nodes_[static_cast<std::size_t>(node)];
  if (n.dim < 0) {
    for (Index i = n.begin; i < n.end; ++i) {
      const Index idx = perm_[static_cast<std::size_t>(i)];
      const double d2 = squared_distance(q, pts_.row(idx).transpose());
      if (best.accepts(d2, idx)) best = {d2, idx};
    }
    return;
  }
  const double delta = q[n.dim] - n.split;
  const Index near = delta < 0.0 ? n.left : n.right;
  const Index far = delta < 0.0 ? n.right : n.left;
  search(near, q, best);
  // Strictly-greater prune keeps equal-distance candidates reachable so the
  // lowest-index tie rule holds.
  if (delta * delta <= best.d2) search(far, q, best);
}

std::pair<Index, double> KdTree::nearest(const Vec3& q) const {
  Best best{std::numeric_limits<double>::infinity(), pts_.rows()};
  search(root_, q, best);
  return {best.idx, best.d2};
}

namespace {

struct HeapEntry {
  double d2;
  Index idx;
  // Max-heap on (d2, idx): the worst kept candidate sits on top.
  bool operator<(const HeapEntry& o) const {
    return d2 < o.d2 || (d2 == o.d2 && idx < o.idx);
  }
};

}  // namespace

void KdTree::knearest(const Vec3& q, int k, std::vector<Index>& indices,
                      std::vector<double>& sq_dists) const {
  const Index want = std::min<Index>(k, pts_.rows());
  indices.clear();
  sq_dists.clear();
  if (want <= 0) return;

  std::vector<HeapEntry> heap;
  heap.reserve(static_cast<std::size_t>(want));

  // Iterative traversal with an explicit stack; visits near side first and
  // prunes only when the slab distance strictly exceeds the current worst.
  std::vector<Index> stack;
  stack.push_back(root_);
  while (!stack.empty()) {
    const Index node = stack.back();
    stack.pop_back();
    const Node& n = nodes_[static_cast<std::size_t>(node)];
    if (n.dim >= 0) {
      const double delta = q[n.dim] - n.split;
      const Index near = delta < 0.0 ? n.left : n.right;
      const Index far = delta < 0.0 ? n.right : n.left;
      if (static_cast<Index>(heap.size()) < want || delta * delta <= heap.front().d2) {
        stack.push_back(far);
      }
      stack.push_back(near);
      continue;
    }
    for (Index i = n.begin; i < n.end; ++i) {
      const Index idx = perm_[static_cast<std::size_t>(i)];
      const double d2 = squared_distance(q, pts_.row(idx).transpose());
      const HeapEntry cand{d2, idx};
      if (static_cast<Index>(heap.size()) < want) {
        heap.push_back(cand);
        std::push_heap(heap.begin(), heap.end());
      } else if (cand < heap.front()) {
        std::pop_heap(heap.begin(), heap.end());
        heap.back() = cand;
        std::push_heap(heap.begin(), heap.end());
      }
    }
  }

  std::sort_heap(heap.begin(), heap.end());
  indices.reserve(heap.size());
  sq_dists.reserve(heap.size());
  for (const HeapEntry& e : heap) {
    indices.push_back(e.idx);
    sq_dists.push_back(e.d2);
  }
}

}  // namespace clay
