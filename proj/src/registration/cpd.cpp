#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <string>

#include "fieldreg/registration.hpp"

namespace fieldreg {

namespace {

// Terms this far below the row maximum contribute under 1e-17 relative.
constexpr double kLogCutoff = -40.0;

Eigen::MatrixX3d subsample(const ColoredGeoCloud& cloud, std::size_t max_points, std::mt19937_64& rng) {
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
  Eigen::MatrixX3d out(static_cast<Eigen::Index>(idx.size()), 3);
  for (std::size_t i = 0; i < idx.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = cloud.points[idx[i]].position();
  return out;
}

}  // namespace

CpdResult refine_cpd_points(const Eigen::MatrixX3d& target, const Eigen::MatrixX3d& moving, const CpdParams& params) {
  if (target.rows() == 0 || moving.rows() == 0) throw Error(ErrorCode::kEmptyCloud, "CPD needs non-empty point sets");
  if (!(params.outlier_weight >= 0.0 && params.outlier_weight < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "CPD outlier weight must lie in [0, 1)");
  }
  if (!(params.tolerance > 0.0) || params.max_iterations < 1) {
    throw Error(ErrorCode::kInvalidArgument, "CPD needs tolerance > 0 and max_iterations >= 1");
  }
  if (!target.allFinite() || !moving.allFinite() || !params.init.allFinite()) {
    throw Error(ErrorCode::kValidation, "CPD inputs must be finite");
  }
  constexpr double D = 3.0;
  const Eigen::Index n = target.rows();
  const Eigen::Index m = moving.rows();
  const double w = params.outlier_weight;

  // Work in coordinates centered on each set's mean.
  const Mat3 init_linear = params.init.topLeftCorner<3, 3>();
  const Vec3 init_t = params.init.topRightCorner<3, 1>();
  Eigen::MatrixX3d y0 = (moving * init_linear.transpose()).rowwise() + init_t.transpose();
  const Eigen::RowVector3d x_mean = target.colwise().mean();
  const Eigen::RowVector3d y_mean = y0.colwise().mean();
  const Eigen::MatrixX3d x = target.rowwise() - x_mean;
  const Eigen::MatrixX3d y = y0.rowwise() - y_mean;

  const double data_scale_sq = x.squaredNorm() / static_cast<double>(n);
  const double sigma2_floor = 1e-12 * std::max(data_scale_sq, 1e-300);

  double sigma2 = params.initial_sigma2;
  if (!(sigma2 > 0.0)) {
    sigma2 = (static_cast<double>(m) * x.squaredNorm() + static_cast<double>(n) * y.squaredNorm() -
              2.0 * x.colwise().sum().dot(y.colwise().sum())) /
             (D * static_cast<double>(n) * static_cast<double>(m));
  }

  Mat3 b = Mat3::Identity();
  Vec3 t = Vec3::Zero();
  CpdResult result;

  std::vector<double> ty(static_cast<std::size_t>(3 * m));
  std::vector<double> d2(static_cast<std::size_t>(m));
  Eigen::VectorXd p1(m), pt1(n);
  double prev_nll = 0.0;

  int iter = 0;
  for (; iter < params.max_iterations; ++iter) {
    if (!std::isfinite(sigma2) || sigma2 < 0.0) throw Error(ErrorCode::kDivergence, "CPD variance became non-finite");
    for (Eigen::Index j = 0; j < m; ++j) {
      const Vec3 v = b * y.row(j).transpose() + t;
      ty[3 * j] = v.x();
      ty[3 * j + 1] = v.y();
      ty[3 * j + 2] = v.z();
    }
    const double log_c = 0.5 * D * std::log(2.0 * std::numbers::pi * sigma2) +
                         (w > 0.0 ? std::log(w / (1.0 - w)) + std::log(static_cast<double>(m) / n)
                                  : -std::numeric_limits<double>::infinity());
    const double inv_2s2 = 1.0 / (2.0 * sigma2);

    // E-step fused with the sufficient statistics of the M-step.
    p1.setZero();
    pt1.setZero();
    Mat3 a_stat = Mat3::Zero();  // sum P_mn x_n y_m^T
    double nll = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double xi0 = x(i, 0), xi1 = x(i, 1), xi2 = x(i, 2);
      double best = std::numeric_limits<double>::infinity();
      for (Eigen::Index j = 0; j < m; ++j) {
        const double e0 = xi0 - ty[3 * j], e1 = xi1 - ty[3 * j + 1], e2 = xi2 - ty[3 * j + 2];
        const double v = e0 * e0 + e1 * e1 + e2 * e2;
        d2[j] = v;
        best = std::min(best, v);
      }
      const double amax = -best * inv_2s2;
      double sum = 0.0;
      for (Eigen::Index j = 0; j < m; ++j) {
        const double a = -d2[j] * inv_2s2 - amax;
        d2[j] = a < kLogCutoff ? 0.0 : std::exp(a);
        sum += d2[j];
      }
      // log(sum_m exp(a_m) + c), evaluated around the row maximum.
      const double lse = amax + std::log(sum);
      const double log_den = std::isfinite(log_c) ? std::max(lse, log_c) + std::log1p(std::exp(-std::abs(lse - log_c)))
                                                  : lse;
      nll -= std::log((1.0 - w) / static_cast<double>(m)) - 0.5 * D * std::log(2.0 * std::numbers::pi * sigma2) + log_den;
      const double scale = std::exp(amax - log_den);
      Vec3 v = Vec3::Zero();
      double row = 0.0;
      for (Eigen::Index j = 0; j < m; ++j) {
        if (d2[j] == 0.0) continue;
        const double pmn = d2[j] * scale;
        p1(j) += pmn;
        row += pmn;
        v += pmn * y.row(j).transpose();
      }
      pt1(i) = row;
      a_stat += x.row(i).transpose() * v.transpose();
    }
    result.nll_history.push_back(nll);
    if (!std::isfinite(nll)) throw Error(ErrorCode::kDivergence, "CPD likelihood became non-finite");
    if (iter > 0 && std::abs(prev_nll - nll) <= params.tolerance * std::abs(prev_nll)) {
      result.converged = true;
      break;
    }
    prev_nll = nll;

    // M-step.
    const double np = p1.sum();
    if (!(np > 0.0)) throw Error(ErrorCode::kDivergence, "CPD posterior mass vanished");
    const Vec3 mu_x = x.transpose() * pt1 / np;
    const Vec3 mu_y = y.transpose() * p1 / np;
    const Mat3 a = a_stat - np * mu_x * mu_y.transpose();
    const Mat3 yp = y.transpose() * p1.asDiagonal() * y - np * mu_y * mu_y.transpose();
    if (params.model == CpdModel::kAffine) {
      const Eigen::FullPivLU<Mat3> lu(yp);
      if (!lu.isInvertible()) throw Error(ErrorCode::kRankDeficient, "CPD moving set is degenerate");
      b = a * lu.inverse();
    } else {
      const Eigen::Matrix2d yp2 = yp.topLeftCorner<2, 2>();
      if (!(std::abs(yp2.determinant()) > 0.0)) throw Error(ErrorCode::kRankDeficient, "CPD moving set is degenerate in x,y");
      b.setZero();
      b.topLeftCorner<2, 2>() = a.topLeftCorner<2, 2>() * yp2.inverse();
      b(2, 2) = 1.0;
    }
    t = mu_x - b * mu_y;
    const double xpx = (x.array().square().rowwise().sum().matrix().transpose() * pt1)(0) - np * mu_x.squaredNorm();
    sigma2 = (xpx - 2.0 * (a * b.transpose()).trace() + (b * yp * b.transpose()).trace()) / (np * D);
    if (!std::isfinite(sigma2) || !b.allFinite()) throw Error(ErrorCode::kDivergence, "CPD update became non-finite");
    if (sigma2 <= sigma2_floor) {
      sigma2 = std::max(sigma2, 0.0);
      result.converged = true;
      ++iter;
      break;
    }
  }

  // Undo the centering: x = B (y - y_mean) + t + x_mean.
  Mat4 cpd = Mat4::Identity();
  cpd.topLeftCorner<3, 3>() = b;
  cpd.topRightCorner<3, 1>() = t + x_mean.transpose() - b * y_mean.transpose();
  result.cpd_only = cpd;
  result.affine = cpd * params.init;
  result.sigma2 = sigma2;
  result.iterations = iter;
  return result;
}

CpdResult refine_cpd(const ColoredGeoCloud& target, const ColoredGeoCloud& moving, const CpdParams& params) {
  if (target.empty() || moving.empty()) throw Error(ErrorCode::kEmptyCloud, "CPD needs non-empty clouds");
  std::mt19937_64 rng(params.seed);
  const Eigen::MatrixX3d x = subsample(target, params.max_points, rng);
  const Eigen::MatrixX3d y = subsample(moving, params.max_points, rng);
  return refine_cpd_points(x, y, params);
}

}  // namespace fieldreg
