#include "rffp/kalman.hpp"

#include <cmath>
#include <map>

#include "rffp/errors.hpp"

namespace rffp {

namespace {

double population_variance(std::span<const double> z) {
  double mean = 0.0;
  for (double v : z) mean += v;
  mean /= static_cast<double>(z.size());
  double sq = 0.0;
  for (double v : z) sq += (v - mean) * (v - mean);
  return sq / static_cast<double>(z.size());
}

}  // namespace

void validate(const KalmanConfig& cfg) {
  if (!(cfg.process_variance_scale > 0.0))
    throw InvalidArgumentError("KalmanConfig: process_variance_scale must be > 0");
  if (cfg.measurement_variance_mode == KalmanConfig::MeasurementVariance::kFixed &&
      !(cfg.fixed_measurement_variance > 0.0))
    throw InvalidArgumentError(
        "KalmanConfig: fixed_measurement_variance must be > 0 in fixed mode");
}

std::vector<double> kalman_smooth(std::span<const double> z,
                                  const KalmanConfig& cfg,
                                  std::vector<double>* gains) {
  validate(cfg);
  if (z.empty()) throw InvalidArgumentError("kalman_smooth: empty sequence");
  for (double v : z)
    if (!std::isfinite(v))
      throw InvalidArgumentError("kalman_smooth: non-finite observation");

  const double var = population_variance(z);
  double r = cfg.measurement_variance_mode ==
                     KalmanConfig::MeasurementVariance::kEmpirical
                 ? var
                 : cfg.fixed_measurement_variance;
  if (r <= 0.0) r = 1e-12;  // constant sequence in empirical mode
  const double q = cfg.process_variance_scale * var;

  std::vector<double> out(z.size());
  double x = z[0];
  double p = r;
  out[0] = x;
  for (std::size_t t = 1; t < z.size(); ++t) {
    p += q;                        // predict under the random-walk model
    double k = p / (p + r);        // in (0, 1) for p, r > 0
    x += k * (z[t] - x);
    p *= 1.0 - k;
    out[t] = x;
    if (gains) gains->push_back(k);
  }
  return out;
}

LabeledFeatureMatrix smooth_dataset(const LabeledFeatureMatrix& features,
                                    const KalmanConfig& cfg) {
  validate(features);
  LabeledFeatureMatrix out = features;

  // Rows grouped per device, preserving capture order within each device.
  std::map<std::string, std::vector<std::size_t>> device_rows;
  for (std::size_t i = 0; i < features.size(); ++i)
    device_rows[features.labels[i]].push_back(i);

  for (const auto& [label, rows] : device_rows) {
    std::vector<double> column(rows.size());
    for (std::size_t f = 0; f < kScalarFeatureCount; ++f) {
      for (std::size_t k = 0; k < rows.size(); ++k)
        column[k] = features.rows[rows[k]][f];
      std::vector<double> smoothed;
      try {
        smoothed = kalman_smooth(column, cfg);
      } catch (const Error& e) {
        throw InvalidArgumentError("smooth_dataset: device " + label +
                                   ", feature " +
                                   std::string(kScalarFeatureNames[f]) + ": " +
                                   e.what());
      }
      for (std::size_t k = 0; k < rows.size(); ++k)
        out.rows[rows[k]][f] = smoothed[k];
    }
  }
  return out;
}

}  // namespace rffp
