#pragma once

#include <span>
#include <vector>

#include "rffp/feature_matrix.hpp"

namespace rffp {

// 1-D random-walk Kalman filter used to smooth each scalar feature sequence:
//   state        x_t = x_{t-1} + w,  w ~ N(0, q)
//   observation  z_t = x_t + v,      v ~ N(0, r)
// with x_1 = z_1, P_1 = r. q defaults to 1e-4 * Var(z) and r to the empirical
// Var(z) of the sequence; both are overridable.
struct KalmanConfig {
  enum class MeasurementVariance { kEmpirical, kFixed };

  double process_variance_scale = 1e-4;  // q = scale * Var(z)
  MeasurementVariance measurement_variance_mode = MeasurementVariance::kEmpirical;
  double fixed_measurement_variance = 0.0;  // required > 0 in kFixed mode
};

void validate(const KalmanConfig& cfg);

// Causal filtering of one sequence. output[0] == z[0] and the output length
// equals the input length. A constant sequence in empirical mode falls back
// to r = 1e-12 instead of dividing by zero. When `gains` is non-null the
// per-step Kalman gains K_2..K_n are appended to it.
std::vector<double> kalman_smooth(std::span<const double> z,
                                  const KalmanConfig& cfg = {},
                                  std::vector<double>* gains = nullptr);

// Smooths every (device, feature) column-sequence independently, taking each
// device's rows in their stored (capture) order. Labels and row order are
// preserved. Per-sequence failures carry the device label and feature name.
LabeledFeatureMatrix smooth_dataset(const LabeledFeatureMatrix& features,
                                    const KalmanConfig& cfg = {});

}  // namespace rffp
