#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "waam/types.hpp"

namespace waam {

/// Static 3-d tree over a point set. Queries are exact and report indices
/// ordered by (squared distance, index), so equidistant points resolve to
/// the lower index. Read-only after construction; safe for concurrent queries.
class KdTree3 {
 public:
  KdTree3() = default;
  explicit KdTree3(std::vector<Point3> points);

  std::size_t size() const noexcept { return points_.size(); }
  const std::vector<Point3>& points() const noexcept { return points_; }

  std::vector<std::size_t> knn(const Point3& q, std::size_t k) const;
  std::size_t nearest(const Point3& q) const;
  std::vector<std::size_t> radius(const Point3& q, double r) const;

 private:
  struct Node {
    std::size_t begin = 0, end = 0;  // range in order_
    int axis = -1;                   // -1 for leaves
    double split = 0.0;
    std::size_t left = 0, right = 0;
  };

  std::size_t build(std::size_t begin, std::size_t end);

  std::vector<Point3> points_;
  std::vector<std::size_t> order_;
  std::vector<Node> nodes_;
};

}  // namespace waam
