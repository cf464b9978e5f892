#include <Eigen/Dense>

#include <cmath>
#include <string>

#include "fieldreg/registration.hpp"

namespace fieldreg {

namespace {

using Points = Eigen::Matrix<double, 3, Eigen::Dynamic>;

const char* axis_name(int k) { return k == 0 ? "x" : (k == 1 ? "y" : "z"); }

// Rotation maximizing sum_i z_i^T R q_i for H = sum_i z_i q_i^T.
Mat3 project_rotation(const Mat3& h) {
  Eigen::JacobiSVD<Mat3> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 d = Mat3::Identity();
  if ((svd.matrixU() * svd.matrixV().transpose()).determinant() < 0.0) d(2, 2) = -1.0;
  return svd.matrixU() * d * svd.matrixV().transpose();
}

double yaw_of(const Mat3& r) { return std::atan2(r(1, 0), r(0, 0)); }

double centered_objective(const Points& p, const Points& q, const Vec3& s, const Mat3& r) {
  return (p - s.asDiagonal() * r * q).squaredNorm();
}

void check_rank(const Points& p, const Points& q, PreliminaryModel model) {
  const int dims = model == PreliminaryModel::kPlanar ? 2 : 3;
  const Vec3 pvar = p.rowwise().squaredNorm() / static_cast<double>(p.cols());
  const double pmax = pvar.head(dims).maxCoeff();
  if (!(pmax > 0.0)) throw Error(ErrorCode::kRankDeficient, "aerial correspondences coincide; no axis is observable");
  if (model != PreliminaryModel::kIsotropic) {
    for (int k = 0; k < dims; ++k) {
      if (pvar(k) <= 1e-12 * pmax) {
        throw Error(ErrorCode::kRankDeficient,
                    std::string("scale along ") + axis_name(k) + " is unobservable: aerial points have no spread");
      }
    }
  }
  const Mat3 cov = q * q.transpose() / static_cast<double>(q.cols());
  if (dims == 2) {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(cov.topLeftCorner<2, 2>());
    const Eigen::Vector2d ev = eig.eigenvalues();
    if (ev(0) <= 1e-12 * ev(1)) {
      const Eigen::Vector2d dir = eig.eigenvectors().col(0);
      const int axis = std::abs(dir(0)) >= std::abs(dir(1)) ? 0 : 1;
      throw Error(ErrorCode::kRankDeficient, std::string("ground correspondences are collinear; ") + axis_name(axis) +
                                                 " is unobservable");
    }
    return;
  }
  Eigen::SelfAdjointEigenSolver<Mat3> eig(cov);
  const Vec3 ev = eig.eigenvalues();
  const int needed = model == PreliminaryModel::kIsotropic ? 1 : 0;  // smallest eigenvalue allowed to vanish
  if (ev(needed) <= 1e-12 * ev(2)) {
    const Vec3 dir = eig.eigenvectors().col(needed);
    int axis = 0;
    dir.cwiseAbs().maxCoeff(&axis);
    throw Error(ErrorCode::kRankDeficient, std::string("ground correspondences are degenerate; ") + axis_name(axis) +
                                               " is unobservable");
  }
}

}  // namespace

double preliminary_objective(const std::vector<Correspondence3D>& corr, const AnisoAffine& transform) {
  double sum = 0.0;
  for (const Correspondence3D& c : corr) sum += (c.p - transform.apply(c.q)).squaredNorm();
  return sum;
}

PreliminaryResult solve_preliminary_detailed(const std::vector<Correspondence3D>& corr,
                                             const PreliminaryParams& params) {
  if (corr.size() < kMinCorrespondences) {
    throw Error(ErrorCode::kInsufficientCorrespondences,
                "need at least 4 correspondences, got " + std::to_string(corr.size()));
  }
  if (params.max_iterations < 1 || !(params.tolerance >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "preliminary solver needs max_iterations >= 1 and tolerance >= 0");
  }
  const auto n = static_cast<Eigen::Index>(corr.size());
  Points p(3, n), q(3, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    p.col(i) = corr[static_cast<std::size_t>(i)].p;
    q.col(i) = corr[static_cast<std::size_t>(i)].q;
  }
  if (!p.allFinite() || !q.allFinite()) throw Error(ErrorCode::kValidation, "correspondences must be finite");
  const Vec3 p_mean = p.rowwise().mean();
  const Vec3 q_mean = q.rowwise().mean();
  p.colwise() -= p_mean;
  q.colwise() -= q_mean;
  check_rank(p, q, params.model);

  const PreliminaryModel model = params.model;
  Vec3 s = Vec3::Ones();
  Mat3 r = Mat3::Identity();
  PreliminaryResult result;

  // Majorized rotation step: with lambda >= max s_k^2 the quadratic term is
  // bounded by a function linear in R, giving a Procrustes problem.
  const auto rotation_step = [&]() {
    const double lambda = s.cwiseAbs2().maxCoeff();
    const Vec3 gap = (Vec3::Constant(lambda) - s.cwiseAbs2());
    const Points z = gap.asDiagonal() * (r * q) + s.asDiagonal() * p;
    if (model == PreliminaryModel::kPlanar) {
      double num = 0.0, den = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        num += q(0, i) * z(1, i) - q(1, i) * z(0, i);
        den += q(0, i) * z(0, i) + q(1, i) * z(1, i);
      }
      r = rotation_z(std::atan2(num, den));
    } else {
      r = project_rotation(z * q.transpose());
    }
  };

  const auto scale_step = [&]() {
    const Points rq = r * q;
    const int axes = model == PreliminaryModel::kPlanar ? 2 : 3;
    if (model == PreliminaryModel::kIsotropic) {
      const double den = rq.squaredNorm();
      const double value = p.cwiseProduct(rq).sum() / den;
      if (!(value > 0.0)) throw Error(ErrorCode::kRankDeficient, "isotropic scale is not positive");
      s = Vec3::Constant(value);
      return;
    }
    for (int k = 0; k < axes; ++k) {
      const double den = rq.row(k).squaredNorm();
      const double value = den > 0.0 ? p.row(k).dot(rq.row(k)) / den : 0.0;
      if (!(value > 0.0) || !std::isfinite(value)) {
        throw Error(ErrorCode::kRankDeficient,
                    std::string("scale along ") + axis_name(k) + " is unobservable from these correspondences");
      }
      s(k) = value;
    }
  };

  double objective = centered_objective(p, q, s, r);
  result.objective_history.push_back(objective);
  int iter = 0;
  for (; iter < params.max_iterations; ++iter) {
    const double before = objective;
    // A few majorization steps per sweep; each one is monotone.
    for (int inner = 0; inner < 8; ++inner) {
      const Mat3 r_prev = r;
      rotation_step();
      if ((r - r_prev).cwiseAbs().maxCoeff() < 1e-15) break;
    }
    result.objective_history.push_back(centered_objective(p, q, s, r));
    scale_step();
    objective = centered_objective(p, q, s, r);
    result.objective_history.push_back(objective);
    if (!std::isfinite(objective)) throw Error(ErrorCode::kDivergence, "preliminary objective is not finite");
    if (std::abs(before - objective) < params.tolerance) {
      ++iter;
      break;
    }
  }
  if (model == PreliminaryModel::kPlanar) r = rotation_z(yaw_of(r));

  const Vec3 t = p_mean - s.asDiagonal() * r * q_mean;
  result.transform = AnisoAffine(s, r, t);
  result.objective = preliminary_objective(corr, result.transform);
  result.iterations = iter;
  return result;
}

AnisoAffine solve_preliminary(const std::vector<Correspondence3D>& corr, const PreliminaryParams& params) {
  return solve_preliminary_detailed(corr, params).transform;
}

}  // namespace fieldreg
