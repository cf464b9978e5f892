#include "fieldreg/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace fieldreg {

ErrorMetrics compare(const AnisoAffine& estimate, const AnisoAffine& truth, ScaleErrorMode mode) {
  ErrorMetrics m;
  m.e_t = (estimate.translation() - truth.translation()).norm();
  const double trace = (estimate.rotation().transpose() * truth.rotation()).trace();
  m.e_R = std::acos(std::clamp((trace - 1.0) / 2.0, -1.0, 1.0));
  const Vec3 dev = estimate.scale().cwiseQuotient(truth.scale()) - Vec3::Ones();
  m.e_s = mode == ScaleErrorMode::kL2 ? dev.norm() : dev.cwiseAbs().maxCoeff();
  return m;
}

bool classify(const ErrorMetrics& e, const SuccessThresholds& t) {
  return e.e_t <= t.max_e_t && e.e_R <= t.max_e_R && e.e_s <= t.max_e_s;
}

void score(RegistrationReport& report, const AnisoAffine& estimate, const AnisoAffine& truth,
           const SuccessThresholds& thresholds) {
  const ErrorMetrics e = compare(estimate, truth, thresholds.scale_mode);
  report.e_t = e.e_t;
  report.e_R = e.e_R;
  report.e_s = e.e_s;
  report.success = classify(e, thresholds);
}

}  // namespace fieldreg
