#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "fieldreg/correspond.hpp"
#include "fieldreg/flow.hpp"
#include "fieldreg/gridmap.hpp"
#include "fieldreg/types.hpp"

namespace fieldreg {

// Preliminary anisotropic affine ----------------------------------------------

enum class PreliminaryModel {
  kFull3D,     // per-axis scale, full rotation
  kPlanar,     // yaw-only rotation, scale (sx, sy, 1)
  kIsotropic,  // single scale factor, full rotation
};

struct PreliminaryParams {
  PreliminaryModel model = PreliminaryModel::kFull3D;
  int max_iterations = 100;
  double tolerance = 1e-12;  // absolute objective change
};

struct PreliminaryResult {
  AnisoAffine transform;
  double objective = 0.0;
  int iterations = 0;
  std::vector<double> objective_history;  // after every sub-step
};

/// sum_i |p_i - diag(s) R q_i - t|^2
double preliminary_objective(const std::vector<Correspondence3D>& corr, const AnisoAffine& transform);

/// Alternating minimization from s = 1: rotation by a majorized Procrustes
/// step (exact whenever the scale is isotropic), then per-axis scale and
/// translation in closed form. Throws kInsufficientCorrespondences below 4
/// pairs and kRankDeficient naming the axis when a scale is unobservable.
PreliminaryResult solve_preliminary_detailed(const std::vector<Correspondence3D>& corr,
                                             const PreliminaryParams& params = {});
AnisoAffine solve_preliminary(const std::vector<Correspondence3D>& corr, const PreliminaryParams& params = {});

// Vegetation -------------------------------------------------------------------

enum class VegFilterMode { kFixed, kAutomatic };

struct VegFilterParams {
  VegFilterMode mode = VegFilterMode::kFixed;
  double threshold = 0.1;  // ExG, fixed mode
};

/// Otsu threshold over raw values: the midpoint of the split between
/// consecutive sorted values that maximizes between-class variance.
double otsu_threshold(std::vector<double> values);

/// Keeps points with ExG strictly above the threshold. Throws
/// kEmptyVegetation when nothing survives.
ColoredGeoCloud filter_vegetation(const ColoredGeoCloud& cloud, const VegFilterParams& params);

// CPD ----------------------------------------------------------------------------

/// kAffine fits all 12 parameters. kPlanar fits a 2x2 affine in x,y with
/// a free translation and keeps the vertical axis of `init`.
enum class CpdModel { kAffine, kPlanar };

struct CpdParams {
  CpdModel model = CpdModel::kAffine;
  double outlier_weight = 0.1;
  int max_iterations = 150;
  double tolerance = 1e-8;  // relative NLL change
  std::size_t max_points = 1500;
  std::uint64_t seed = 0;  // subsampling stream
  double initial_sigma2 = 0.0;  // <= 0: mean pairwise squared distance / D
  Mat4 init = Mat4::Identity();
};

struct CpdResult {
  Mat4 affine = Mat4::Identity();  // CPD affine composed with init
  Mat4 cpd_only = Mat4::Identity();
  double sigma2 = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> nll_history;  // at every E-step
};

/// Affine coherent point drift: `target` is the fixed set, `moving` is
/// mapped through `params.init` and then registered to it.
CpdResult refine_cpd(const ColoredGeoCloud& target, const ColoredGeoCloud& moving, const CpdParams& params);

/// Point-matrix form used by the cloud overload; no subsampling.
CpdResult refine_cpd_points(const Eigen::MatrixX3d& target, const Eigen::MatrixX3d& moving, const CpdParams& params);

// ICP baseline ------------------------------------------------------------------

class KdTree {
 public:
  explicit KdTree(std::vector<Vec3> points);
  /// Index of the nearest point; ties go to the lower index.
  std::size_t nearest(const Vec3& query, double* dist_sq = nullptr) const;
  std::size_t size() const { return points_.size(); }
  const Vec3& point(std::size_t i) const { return points_[i]; }

 private:
  struct Node {
    int axis = -1;
    std::size_t index = 0;
    std::int32_t left = -1;
    std::int32_t right = -1;
  };
  std::int32_t build(std::vector<std::size_t>& idx, std::size_t lo, std::size_t hi, int depth);
  void search(std::int32_t node, const Vec3& q, std::size_t& best, double& best_d) const;

  std::vector<Vec3> points_;
  std::vector<Node> nodes_;
  std::int32_t root_ = -1;
};

struct IcpParams {
  int max_iterations = 50;
  double tolerance = 1e-6;  // max change in the transform matrix entries
  std::size_t max_points = 1500;
  std::uint64_t seed = 0;
  PreliminaryModel model = PreliminaryModel::kPlanar;
};

struct IcpResult {
  AnisoAffine transform;
  int iterations = 0;
  bool converged = false;
};

/// Nearest-neighbor association then solve_preliminary, repeated.
IcpResult baseline_affine_icp(const ColoredGeoCloud& target, const ColoredGeoCloud& moving, const AnisoAffine& init,
                              const IcpParams& params);

// Full pipeline --------------------------------------------------------------------

/// One flow/vote/solve round. The pipeline runs a coarse round with a
/// wide search and large vote bins, then narrower rounds around the
/// current estimate.
struct PassParams {
  double bin_step = 1.0;        // vote bin, cells
  int pyramid_levels = 3;
  int finest_level = 0;
  int search_radius = 300;      // coarsest random search, finest cells
  double region_margin = 6.0;   // meters around the transformed ground footprint
  PreliminaryModel model = PreliminaryModel::kFull3D;
  /// Planar scale candidates tried before voting (ratio^k, k centered on 0).
  /// The candidate with the highest vote score wins.
  int scale_hypotheses = 1;
  double scale_ratio = 1.15;
};

struct PipelineParams {
  GridMapParams grid;
  FlowParams flow;
  VoteParams vote;
  VegFilterParams veg;
  CpdParams cpd{.model = CpdModel::kPlanar};
  PreliminaryParams preliminary{.model = PreliminaryModel::kPlanar};
  std::vector<PassParams> passes;  // empty: schedule derived from the fields below

  double coarse_bin_step = 8.0;    // cells
  double coarse_margin = 6.0;      // meters
  int refine_passes = 1;
  double refine_bin_step = 4.0;    // cells
  int refine_search_radius = 16;   // cells
  double refine_margin = 0.4;      // meters
  int scale_hypotheses = 5;        // coarse pass only
  double scale_ratio = 1.15;
  double cpd_crop_radius = 0.05;   // meters, planar distance to ground vegetation
  double baseline_crop_margin = 6.0;
  double geotag_sanity_radius = 1000.0;
  std::uint64_t seed = 1;
};

/// Explicit `passes` if given, otherwise: coarse planar round, refine
/// planar rounds, then a full-model round with vote.bin_step and the
/// configured pyramid.
std::vector<PassParams> pass_schedule(const PipelineParams& params);

struct PassStats {
  std::size_t seeds_total = 0;
  std::size_t seeds_consistent = 0;
  std::size_t winners = 0;
  std::size_t correspondences = 0;
};

struct PipelineResult {
  AnisoAffine initial;
  AnisoAffine preliminary;
  Mat4 refined = Mat4::Identity();
  AffineDecomposition decomposition;
  double cpd_sigma2 = 0.0;
  int cpd_iterations = 0;
  std::size_t veg_aerial = 0;
  std::size_t veg_ground = 0;
  std::vector<PassStats> passes;
  FlowField flow;  // final pass
  std::vector<Correspondence3D> correspondences;  // final pass
};

/// Geotag alignment, multi-pass flow matching and voting, preliminary
/// affine, vegetation filtering and CPD refinement. Stage errors carry the
/// stage name.
PipelineResult register_maps(const ColoredGeoCloud& aerial, const ColoredGeoCloud& ground, const PipelineParams& params);

/// CPD from the geotag alignment only, skipping flow and voting.
CpdResult register_cpd_only(const ColoredGeoCloud& aerial, const ColoredGeoCloud& ground, const PipelineParams& params);

/// ICP from the geotag alignment.
IcpResult register_icp(const ColoredGeoCloud& aerial, const ColoredGeoCloud& ground, const PipelineParams& params,
                       const IcpParams& icp);

/// Points of `cloud` inside `box` grown by `margin` on every side.
ColoredGeoCloud crop_to(const ColoredGeoCloud& cloud, const GridBounds& box, double margin);

/// Points of `cloud` within planar distance `radius` of some point of
/// `reference`.
ColoredGeoCloud crop_near(const ColoredGeoCloud& cloud, const ColoredGeoCloud& reference, double radius);

}  // namespace fieldreg
