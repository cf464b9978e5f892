#include <algorithm>
#include <cmath>
#include <string>

#include "fieldreg/registration.hpp"

namespace fieldreg {

double otsu_threshold(std::vector<double> values) {
  if (values.empty()) throw Error(ErrorCode::kEmptyCloud, "Otsu threshold of an empty set");
  std::sort(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  double total = 0.0;
  for (double v : values) total += v;

  double best_score = -1.0;
  double best_threshold = values.front();
  double left_sum = 0.0;
  for (std::size_t i = 0; i + 1 < values.size(); ++i) {
    left_sum += values[i];
    if (values[i + 1] == values[i]) continue;  // only split between distinct values
    const double n0 = static_cast<double>(i + 1);
    const double n1 = n - n0;
    const double m0 = left_sum / n0;
    const double m1 = (total - left_sum) / n1;
    const double score = n0 * n1 * (m0 - m1) * (m0 - m1);
    if (score > best_score) {
      best_score = score;
      best_threshold = 0.5 * (values[i] + values[i + 1]);
    }
  }
  return best_threshold;
}

ColoredGeoCloud filter_vegetation(const ColoredGeoCloud& cloud, const VegFilterParams& params) {
  if (cloud.empty()) throw Error(ErrorCode::kEmptyCloud, "vegetation filter on an empty cloud");
  double threshold = params.threshold;
  if (params.mode == VegFilterMode::kFixed) {
    if (!(threshold >= -2.0 && threshold <= 2.0)) {
      throw Error(ErrorCode::kInvalidArgument, "fixed ExG threshold must lie in [-2, 2]");
    }
  } else {
    std::vector<double> values;
    values.reserve(cloud.size());
    for (const GeoPoint& p : cloud.points) values.push_back(exg(p.r, p.g, p.b));
    threshold = otsu_threshold(std::move(values));
  }
  ColoredGeoCloud out;
  out.geo_origin = cloud.geo_origin;
  out.heading_rad = cloud.heading_rad;
  for (const GeoPoint& p : cloud.points) {
    if (exg(p.r, p.g, p.b) > threshold) out.points.push_back(p);
  }
  if (out.empty()) {
    throw Error(ErrorCode::kEmptyVegetation,
                "no point has ExG above " + std::to_string(threshold) + "; the map looks like bare soil");
  }
  return out;
}

}  // namespace fieldreg
