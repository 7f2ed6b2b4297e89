#pragma once

#include <clay/types.hpp>

#include <utility>
#include <vector>

namespace clay {

/// Exact nearest-neighbor index over a fixed set of points. Queries return
/// the same result as a linear scan with the squared_distance kernel,
/// including the lowest-index rule on ties. Read-only after construction and
/// safe to share across threads.
class KdTree {
 public:
  explicit KdTree(const Points& pts);

  Index size() const { return pts_.rows(); }

  /// Nearest point to q: (index, squared distance). Ties by lowest index.
  std::pair<Index, double> nearest(const Vec3& q) const;

  double min_squared_distance(const Vec3& q) const { return nearest(q).second; }

  /// The k nearest points to q in ascending (squared distance, index) order.
  /// Ties by lowest index; k is clamped to size().
  void knearest(const Vec3& q, int k, std::vector<Index>& indices,
                std::vector<double>& sq_dists) const;

 private:
  struct Node {
    double split = 0.0;
    int dim = -1;        // -1 marks a leaf
    Index left = -1;     // node index
    Index right = -1;    // node index
    Index begin = 0;     // range into perm_ (leaves only)
    Index end = 0;
  };

  struct Best {
    double d2;
    Index idx;
    bool accepts(double cand_d2, Index cand_idx) const {
      return cand_d2 < d2 || (cand_d2 == d2 && cand_idx < idx);
    }
  };

  Index build(Index begin, Index end);
  void search(Index node, const Vec3& q, Best& best) const;

  static constexpr Index kLeafSize = 16;

  Points pts_;
  std::vector<Index> perm_;
  std::vector<Node> nodes_;
  Index root_ = -1;
};

}  // namespace clay
