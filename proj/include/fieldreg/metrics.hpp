#pragma once

#include "fieldreg/types.hpp"

namespace fieldreg {

enum class ScaleErrorMode {
  kL2,       // |s / s_true - 1|_2
  kMaxAxis,  // max_k |s_k / s_true_k - 1|
};

struct SuccessThresholds {
  double max_e_t = 0.05;  // meters
  double max_e_R = 0.1;   // radians
  double max_e_s = 0.025;
  ScaleErrorMode scale_mode = ScaleErrorMode::kL2;
};

struct ErrorMetrics {
  double e_t = 0.0;
  double e_R = 0.0;
  double e_s = 0.0;
};

/// e_t = |t - t~|, e_R = acos(clamp((tr(R^T R~) - 1) / 2)), e_s per mode.
ErrorMetrics compare(const AnisoAffine& estimate, const AnisoAffine& truth,
                     ScaleErrorMode mode = ScaleErrorMode::kL2);

/// Inclusive (<=) on every threshold.
bool classify(const ErrorMetrics& errors, const SuccessThresholds& thresholds);

/// Fills e_t, e_R, e_s and success of a report.
void score(RegistrationReport& report, const AnisoAffine& estimate, const AnisoAffine& truth,
           const SuccessThresholds& thresholds);

}  // namespace fieldreg
