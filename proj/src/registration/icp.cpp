#include <algorithm>
#include <numeric>
#include <random>

#include "fieldreg/registration.hpp"

namespace fieldreg {

namespace {

std::vector<Vec3> sample_positions(const ColoredGeoCloud& cloud, std::size_t max_points, std::mt19937_64& rng) {
  std::vector<std::size_t> idx(cloud.size());
  std::iota(idx.begin(), idx.end(), 0);
  if (max_points > 0 && idx.size() > max_points) {
    for (std::size_t i = 0; i < max_points; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, idx.size() - 1);
      std::swap(idx[i], idx[pick(rng)]);
    }
    idx.resize(max_points);
    std::sort(idx.begin(), idx.end());
  }
  std::vector<Vec3> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(cloud.points[i].position());
  return out;
}

}  // namespace

IcpResult baseline_affine_icp(const ColoredGeoCloud& target, const ColoredGeoCloud& moving, const AnisoAffine& init,
                              const IcpParams& params) {
  if (target.empty() || moving.empty()) throw Error(ErrorCode::kEmptyCloud, "ICP needs non-empty clouds");
  if (params.max_iterations < 1 || !(params.tolerance >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "ICP needs max_iterations >= 1 and tolerance >= 0");
  }
  // The target keeps full resolution for association; the moving set is
  // subsampled.
  const KdTree tree([&] {
    std::vector<Vec3> pts;
    pts.reserve(target.size());
    for (const GeoPoint& p : target.points) pts.push_back(p.position());
    return pts;
  }());
  std::mt19937_64 rng(params.seed);
  const std::vector<Vec3> q = sample_positions(moving, params.max_points, rng);

  IcpResult result;
  result.transform = init;
  std::vector<Correspondence3D> corr(q.size());
  PreliminaryParams solve;
  solve.model = params.model;
  for (int iter = 0; iter < params.max_iterations; ++iter) {
    for (std::size_t i = 0; i < q.size(); ++i) {
      corr[i] = {tree.point(tree.nearest(result.transform.apply(q[i]))), q[i]};
    }
    const AnisoAffine next = solve_preliminary(corr, solve);
    const double change = (next.matrix() - result.transform.matrix()).cwiseAbs().maxCoeff();
    result.transform = next;
    result.iterations = iter + 1;
    if (change < params.tolerance) {
      result.converged = true;
      break;
    }
  }
  return result;
}

}  // namespace fieldreg
