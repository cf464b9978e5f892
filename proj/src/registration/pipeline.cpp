#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <string>

#include "fieldreg/io.hpp"
#include "fieldreg/correspond.hpp"
#include "fieldreg/registration.hpp"

namespace fieldreg {

namespace {

// Runs `fn`, tagging untagged library errors with the stage name.
template <typename Fn>
auto in_stage(const char* stage, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& e) {
    if (!e.stage().empty()) throw;
    throw Error(e.code(), stage, e.what());
  }
}

GridBounds grow(const GridBounds& b, double margin) {
  return {b.min_x - margin, b.min_y - margin, b.max_x + margin, b.max_y + margin};
}

}  // namespace

std::vector<PassParams> pass_schedule(const PipelineParams& params) {
  if (!params.passes.empty()) return params.passes;
  std::vector<PassParams> out;
  PassParams coarse;
  coarse.bin_step = params.coarse_bin_step;
  coarse.pyramid_levels = params.flow.pyramid_levels;
  coarse.finest_level = std::max(0, params.flow.pyramid_levels - 2);
  coarse.search_radius = params.flow.random_search_radius_init;
  coarse.region_margin = params.coarse_margin;
  coarse.model = PreliminaryModel::kPlanar;
  coarse.scale_hypotheses = params.scale_hypotheses;
  coarse.scale_ratio = params.scale_ratio;
  out.push_back(coarse);
  for (int i = 0; i < params.refine_passes; ++i) {
    PassParams refine;
    refine.bin_step = params.refine_bin_step;
    refine.pyramid_levels = std::min(2, params.flow.pyramid_levels);
    refine.search_radius = params.refine_search_radius;
    refine.region_margin = params.refine_margin;
    refine.model = PreliminaryModel::kPlanar;
    out.push_back(refine);
  }
  PassParams last;
  last.bin_step = params.vote.bin_step;
  last.pyramid_levels = std::min(2, params.flow.pyramid_levels);
  last.search_radius = params.refine_search_radius;
  last.region_margin = params.refine_margin;
  last.model = params.preliminary.model;
  out.push_back(last);
  return out;
}

ColoredGeoCloud crop_to(const ColoredGeoCloud& cloud, const GridBounds& box, double margin) {
  const GridBounds b = grow(box, margin);
  ColoredGeoCloud out;
  out.geo_origin = cloud.geo_origin;
  out.heading_rad = cloud.heading_rad;
  for (const GeoPoint& p : cloud.points) {
    if (p.x >= b.min_x && p.x <= b.max_x && p.y >= b.min_y && p.y <= b.max_y) out.points.push_back(p);
  }
  return out;
}

ColoredGeoCloud crop_near(const ColoredGeoCloud& cloud, const ColoredGeoCloud& reference, double radius) {
  ColoredGeoCloud out;
  out.geo_origin = cloud.geo_origin;
  out.heading_rad = cloud.heading_rad;
  if (reference.empty()) return out;
  std::vector<Vec3> flat;
  flat.reserve(reference.size());
  for (const GeoPoint& p : reference.points) flat.emplace_back(p.x, p.y, 0.0);
  const KdTree tree(std::move(flat));
  const double r2 = radius * radius;
  for (const GeoPoint& p : cloud.points) {
    double d2 = 0.0;
    tree.nearest(Vec3(p.x, p.y, 0.0), &d2);
    if (d2 <= r2) out.points.push_back(p);
  }
  return out;
}

namespace {

struct PassOutcome {
  AnisoAffine resample;
  std::shared_ptr<const ColoredGeoCloud> g_cloud;
  MultimodalGridMap a_map;
  MultimodalGridMap g_map;
  FlowField field;
  VoteResult vote;
};

// Planar rescale of `t` about the centroid of the ground cloud it moves.
AnisoAffine rescaled(const AnisoAffine& t, const ColoredGeoCloud& ground, double factor) {
  if (factor == 1.0) return t;
  Vec3 c = Vec3::Zero();
  for (const GeoPoint& p : ground.points) c += t.apply(p.position());
  c /= static_cast<double>(ground.size());
  const Vec3 f(factor, factor, 1.0);
  return AnisoAffine(t.scale().cwiseProduct(f), t.rotation(), f.cwiseProduct(t.translation() - c) + c);
}

// Order 1, r, 1/r, r^2, 1/r^2, ... so ties favor the smaller correction.
std::vector<double> scale_candidates(int count, double ratio) {
  std::vector<double> out{1.0};
  for (int k = 1; static_cast<int>(out.size()) < count; ++k) {
    out.push_back(std::pow(ratio, k));
    if (static_cast<int>(out.size()) < count) out.push_back(std::pow(ratio, -k));
  }
  return out;
}

PassOutcome run_pass(const std::shared_ptr<const ColoredGeoCloud>& a_ptr, const GridBounds& aerial_box,
                     const ColoredGeoCloud& ground, const AnisoAffine& resample, const PassParams& pass,
                     const PipelineParams& params, std::mt19937_64& rng) {
  auto g_ptr = std::make_shared<const ColoredGeoCloud>(apply_transform(resample, ground));
  // Search window around the footprint, clipped to where either map has data.
  const GridBounds footprint = cloud_bounds(*g_ptr);
  const GridBounds want = grow(footprint, pass.region_margin);
  const GridBounds hull{std::min(footprint.min_x, aerial_box.min_x), std::min(footprint.min_y, aerial_box.min_y),
                        std::max(footprint.max_x, aerial_box.max_x), std::max(footprint.max_y, aerial_box.max_y)};
  const GridBounds region{std::max(want.min_x, hull.min_x), std::max(want.min_y, hull.min_y),
                          std::min(want.max_x, hull.max_x), std::min(want.max_y, hull.max_y)};
  if (!(region.max_x > region.min_x) || !(region.max_y > region.min_y)) {
    throw Error(ErrorCode::kInsufficientOverlap, "flow", "ground footprint does not overlap the aerial map");
  }
  GridMapParams grid = params.grid;
  grid.bounds = region;
  MultimodalGridMap a_map = in_stage("rasterize", [&] { return rasterize(a_ptr, grid); });
  MultimodalGridMap g_map = in_stage("rasterize", [&] { return rasterize(g_ptr, grid); });

  FlowParams fp = params.flow;
  fp.pyramid_levels = pass.pyramid_levels;
  fp.finest_level = pass.finest_level;
  fp.random_search_radius_init = pass.search_radius;
  FlowField field = in_stage("flow", [&] { return estimate_flow(a_map, g_map, fp, rng); });

  VoteParams vp = params.vote;
  vp.bin_step = pass.bin_step;
  VoteResult vote = in_stage("vote", [&] { return vote_flows(field, vp); });
  return {resample, std::move(g_ptr), std::move(a_map), std::move(g_map), std::move(field), std::move(vote)};
}

}  // namespace

PipelineResult register_maps(const ColoredGeoCloud& aerial, const ColoredGeoCloud& ground, const PipelineParams& params) {
  PipelineResult result;
  in_stage("input", [&] {
    validate(aerial);
    validate(ground);
    validate(params.flow);
    if (!(params.cpd_crop_radius > 0.0)) throw Error(ErrorCode::kInvalidArgument, "cpd_crop_radius must be positive");
  });
  result.initial = in_stage("initial_alignment",
                            [&] { return initial_alignment(aerial, ground, params.geotag_sanity_radius); });

  // Filtering first lets bare-soil inputs fail before the expensive stages.
  const ColoredGeoCloud a_veg = in_stage("vegetation", [&] { return filter_vegetation(aerial, params.veg); });
  const ColoredGeoCloud g_veg = in_stage("vegetation", [&] { return filter_vegetation(ground, params.veg); });
  result.veg_aerial = a_veg.size();
  result.veg_ground = g_veg.size();

  const auto a_ptr = std::make_shared<const ColoredGeoCloud>(aerial);
  const GridBounds aerial_box = cloud_bounds(aerial);
  std::mt19937_64 rng(params.seed);
  AnisoAffine current = result.initial;

  const std::vector<PassParams> schedule = pass_schedule(params);
  for (std::size_t k = 0; k < schedule.size(); ++k) {
    const PassParams& pass = schedule[k];
    std::optional<PassOutcome> best;
    std::optional<Error> first_error;
    for (double factor : scale_candidates(std::max(1, pass.scale_hypotheses), pass.scale_ratio)) {
      try {
        PassOutcome out = run_pass(a_ptr, aerial_box, ground, rescaled(current, ground, factor), pass, params, rng);
        if (!best || out.vote.score > best->vote.score) best = std::move(out);
      } catch (const Error& e) {
        // A candidate that finds nothing loses; the pass fails only if all do.
        if (e.code() == ErrorCode::kInsufficientCorrespondences || e.code() == ErrorCode::kInsufficientOverlap) {
          if (!first_error) first_error = e;
          continue;
        }
        throw;
      }
    }
    if (!best) throw *first_error;

    std::vector<Correspondence3D> corr =
        in_stage("lift", [&] { return lift_to_3d(best->vote.winners, best->a_map, best->g_map, best->resample); });
    PreliminaryParams pp = params.preliminary;
    pp.model = pass.model;
    current = in_stage("preliminary", [&] { return solve_preliminary(corr, pp); });

    result.passes.push_back({best->field.seeds_total, best->field.seeds.size(), best->vote.winners.size(), corr.size()});
    if (k + 1 == schedule.size()) {
      result.flow = std::move(best->field);
      result.correspondences = std::move(corr);
    }
  }
  result.preliminary = current;

  const CpdResult cpd = in_stage("cpd", [&] {
    // Only aerial vegetation the ground map actually covers; extra target
    // mass would pull the affine outward.
    const ColoredGeoCloud g_moved = apply_transform(result.preliminary, g_veg);
    const ColoredGeoCloud target = crop_near(a_veg, g_moved, params.cpd_crop_radius);
    if (target.empty()) throw Error(ErrorCode::kInsufficientOverlap, "no aerial vegetation near the ground footprint");
    CpdParams cp = params.cpd;
    cp.init = result.preliminary.matrix();
    return refine_cpd(target, g_veg, cp);
  });
  result.refined = cpd.affine;
  result.cpd_sigma2 = cpd.sigma2;
  result.cpd_iterations = cpd.iterations;
  result.decomposition = decompose(result.refined);
  return result;
}

CpdResult register_cpd_only(const ColoredGeoCloud& aerial, const ColoredGeoCloud& ground, const PipelineParams& params) {
  const AnisoAffine init = in_stage("initial_alignment",
                                    [&] { return initial_alignment(aerial, ground, params.geotag_sanity_radius); });
  const ColoredGeoCloud a_veg = in_stage("vegetation", [&] { return filter_vegetation(aerial, params.veg); });
  const ColoredGeoCloud g_veg = in_stage("vegetation", [&] { return filter_vegetation(ground, params.veg); });
  return in_stage("cpd", [&] {
    const ColoredGeoCloud target = crop_to(a_veg, cloud_bounds(apply_transform(init, g_veg)), params.baseline_crop_margin);
    if (target.empty()) throw Error(ErrorCode::kInsufficientOverlap, "no aerial vegetation near the ground footprint");
    CpdParams cp = params.cpd;
    cp.init = init.matrix();
    return refine_cpd(target, g_veg, cp);
  });
}

IcpResult register_icp(const ColoredGeoCloud& aerial, const ColoredGeoCloud& ground, const PipelineParams& params,
                       const IcpParams& icp) {
  const AnisoAffine init = in_stage("initial_alignment",
                                    [&] { return initial_alignment(aerial, ground, params.geotag_sanity_radius); });
  const ColoredGeoCloud a_veg = in_stage("vegetation", [&] { return filter_vegetation(aerial, params.veg); });
  const ColoredGeoCloud g_veg = in_stage("vegetation", [&] { return filter_vegetation(ground, params.veg); });
  return in_stage("icp", [&] {
    const ColoredGeoCloud target = crop_to(a_veg, cloud_bounds(apply_transform(init, g_veg)), params.baseline_crop_margin);
    if (target.empty()) throw Error(ErrorCode::kInsufficientOverlap, "no aerial vegetation near the ground footprint");
    return baseline_affine_icp(target, g_veg, init, icp);
  });
}

}  // namespace fieldreg
