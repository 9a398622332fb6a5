#include "waam/kdtree.hpp"

#include <algorithm>
#include <queue>
#include <utility>

#include "waam/error.hpp"

namespace waam {

namespace {

constexpr std::size_t kLeafSize = 8;

using Candidate = std::pair<double, std::size_t>;  // (squared distance, index)

}  // namespace

KdTree3::KdTree3(std::vector<Point3> points) : points_(std::move(points)) {
  order_.resize(points_.size());
  for (std::size_t i = 0; i < order_.size(); ++i) order_[i] = i;
  if (!points_.empty()) {
    nodes_.reserve(2 * points_.size() / kLeafSize + 2);
    build(0, points_.size());
  }
}

std::size_t KdTree3::build(std::size_t begin, std::size_t end) {
  const std::size_t id = nodes_.size();
  nodes_.push_back({begin, end});
  if (end - begin <= kLeafSize) return id;

  Eigen::Vector3d lo = points_[order_[begin]], hi = lo;
  for (std::size_t i = begin; i < end; ++i) {
    lo = lo.cwiseMin(points_[order_[i]]);
    hi = hi.cwiseMax(points_[order_[i]]);
  }
  int axis;
  (hi - lo).maxCoeff(&axis);
  const std::size_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](std::size_t a, std::size_t b) { return points_[a][axis] < points_[b][axis]; });
  const double split = points_[order_[mid]][axis];

  const std::size_t left = build(begin, mid);
  const std::size_t right = build(mid, end);
  Node& node = nodes_[id];
  node.axis = axis;
  node.split = split;
  node.left = left;
  node.right = right;
  return id;
}

std::vector<std::size_t> KdTree3::knn(const Point3& q, std::size_t k) const {
  require(k <= points_.size(), ErrorCode::InvalidArgument,
          "requested " + std::to_string(k) + " neighbours from " + std::to_string(points_.size()) +
              " points");
  std::vector<std::size_t> out;
  if (k == 0) return out;

  // Max-heap on (d2, index): the top is the current worst accepted candidate.
  std::priority_queue<Candidate> heap;
  auto visit = [&](auto&& self, std::size_t id) -> void {
    const Node& node = nodes_[id];
    if (node.axis < 0) {
      for (std::size_t i = node.begin; i < node.end; ++i) {
        const std::size_t idx = order_[i];
        const Candidate c{(points_[idx] - q).squaredNorm(), idx};
        if (heap.size() < k) {
          heap.push(c);
        } else if (c < heap.top()) {
          heap.pop();
          heap.push(c);
        }
      }
      return;
    }
    const double diff = q[node.axis] - node.split;
    const std::size_t near = diff < 0.0 ? node.left : node.right;
    const std::size_t far = diff < 0.0 ? node.right : node.left;
    self(self, near);
    // Equality still descends so that lower-index ties are not pruned.
    if (heap.size() < k || diff * diff <= heap.top().first) self(self, far);
  };
  visit(visit, 0);

  out.resize(heap.size());
  for (std::size_t i = heap.size(); i-- > 0;) {
    out[i] = heap.top().second;
    heap.pop();
  }
  return out;
}

std::size_t KdTree3::nearest(const Point3& q) const {
  require(!points_.empty(), ErrorCode::InvalidArgument, "nearest query on an empty tree");
  return knn(q, 1).front();
}

std::vector<std::size_t> KdTree3::radius(const Point3& q, double r) const {
  std::vector<Candidate> found;
  if (points_.empty()) return {};
  const double r2 = r * r;
  auto visit = [&](auto&& self, std::size_t id) -> void {
    const Node& node = nodes_[id];
    if (node.axis < 0) {
      for (std::size_t i = node.begin; i < node.end; ++i) {
        const std::size_t idx = order_[i];
        const double d2 = (points_[idx] - q).squaredNorm();
        if (d2 <= r2) found.emplace_back(d2, idx);
      }
      return;
    }
    const double diff = q[node.axis] - node.split;
    if (diff <= r) self(self, node.left);
    if (diff >= -r) self(self, node.right);
  };
  visit(visit, 0);
  std::sort(found.begin(), found.end());
  std::vector<std::size_t> out;
  out.reserve(found.size());
  for (const auto& c : found) out.push_back(c.second);
  return out;
}

}  // namespace waam
