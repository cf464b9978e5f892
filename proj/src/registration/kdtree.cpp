#include <algorithm>
#include <limits>
#include <numeric>

#include "fieldreg/registration.hpp"

namespace fieldreg {

KdTree::KdTree(std::vector<Vec3> points) : points_(std::move(points)) {
  if (points_.empty()) throw Error(ErrorCode::kEmptyCloud, "k-d tree over an empty point set");
  std::vector<std::size_t> idx(points_.size());
  std::iota(idx.begin(), idx.end(), 0);
  nodes_.reserve(points_.size());
  root_ = build(idx, 0, idx.size(), 0);
}

std::int32_t KdTree::build(std::vector<std::size_t>& idx, std::size_t lo, std::size_t hi, int depth) {
  if (lo >= hi) return -1;
  // Split on the axis of largest spread.
  Vec3 mn = points_[idx[lo]];
  Vec3 mx = mn;
  for (std::size_t i = lo + 1; i < hi; ++i) {
    mn = mn.cwiseMin(points_[idx[i]]);
    mx = mx.cwiseMax(points_[idx[i]]);
  }
  int axis = 0;
  (mx - mn).maxCoeff(&axis);
  const std::size_t mid = lo + (hi - lo) / 2;
  std::nth_element(idx.begin() + static_cast<std::ptrdiff_t>(lo), idx.begin() + static_cast<std::ptrdiff_t>(mid),
                   idx.begin() + static_cast<std::ptrdiff_t>(hi), [&](std::size_t a, std::size_t b) {
                     const double va = points_[a](axis);
                     const double vb = points_[b](axis);
                     return va < vb || (va == vb && a < b);
                   });
  const auto id = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back({axis, idx[mid], -1, -1});
  const std::int32_t left = build(idx, lo, mid, depth + 1);
  const std::int32_t right = build(idx, mid + 1, hi, depth + 1);
  nodes_[static_cast<std::size_t>(id)].left = left;
  nodes_[static_cast<std::size_t>(id)].right = right;
  return id;
}

void KdTree::search(std::int32_t node, const Vec3& q, std::size_t& best, double& best_d) const {
  if (node < 0) return;
  const Node& nd = nodes_[static_cast<std::size_t>(node)];
  const Vec3& p = points_[nd.index];
  const double d = (p - q).squaredNorm();
  if (d < best_d || (d == best_d && nd.index < best)) {
    best_d = d;
    best = nd.index;
  }
  const double diff = q(nd.axis) - p(nd.axis);
  const std::int32_t near = diff < 0.0 ? nd.left : nd.right;
  const std::int32_t far = diff < 0.0 ? nd.right : nd.left;
  search(near, q, best, best_d);
  if (diff * diff <= best_d) search(far, q, best, best_d);
}

std::size_t KdTree::nearest(const Vec3& query, double* dist_sq) const {
  std::size_t best = std::numeric_limits<std::size_t>::max();
  double best_d = std::numeric_limits<double>::infinity();
  search(root_, query, best, best_d);
  if (dist_sq) *dist_sq = best_d;
  return best;
}

}  // namespace fieldreg
