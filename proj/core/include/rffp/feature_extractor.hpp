#pragma once

#include <array>
#include <span>
#include <string>
#include <string_view>

#include "rffp/equalizer.hpp"
#include "rffp/signal_model.hpp"

namespace rffp {

// Per-frame RF fingerprint features computed from the measured LTS.
//
// iqi_k is NaN when the quadrature energy of the measured symbol is exactly
// zero, and frac_dimension_k is NaN when the ideal-subtracted symbol is
// constant. Both happen on noiseless synthetic frames, where the zero-forcing
// equalizer reproduces the ideal symbol exactly; real captures always carry
// noise and produce finite values.
struct FeatureRecord {
  std::string device_label;

  double short_freq = 0.0;  // coarse CFO, rad/sample
  double long_freq = 0.0;   // fine CFO, rad/sample
  double cfo = 0.0;         // total CFO == short_freq + long_freq

  std::array<double, kSymbolLength> phase_error_v1{};
  std::array<double, kSymbolLength> phase_error_v2{};
  std::array<double, kSymbolLength> mag_error_v1{};
  std::array<double, kSymbolLength> mag_error_v2{};

  double phase_error_mean_1 = 0.0, phase_error_var_1 = 0.0;
  double phase_error_mean_2 = 0.0, phase_error_var_2 = 0.0;
  double mag_error_mean_1 = 0.0, mag_error_var_1 = 0.0;
  double mag_error_mean_2 = 0.0, mag_error_var_2 = 0.0;

  double iqi_1 = 0.0, iqi_2 = 0.0;
  double frac_dimension_1 = 0.0, frac_dimension_2 = 0.0;
};

// The 15 scalar features in a frozen, documented order. Classifier feature
// importances are reported against this order, so it must never change.
inline constexpr std::size_t kScalarFeatureCount = 15;
using ScalarFeatureVector = std::array<double, kScalarFeatureCount>;

extern const std::array<std::string_view, kScalarFeatureCount> kScalarFeatureNames;

ScalarFeatureVector scalar_features(const FeatureRecord& rec);

// Per-subcarrier angle deviation from the ideal symbol, wrapped into
// (-pi, pi]. Null bins are 0.
std::array<double, kSymbolLength> phase_error(
    std::span<const ComplexSample> measured_half);

// Per-subcarrier magnitude deviation |l[j]| - |ideal[j]|. Null bins are 0.
std::array<double, kSymbolLength> magnitude_error(
    std::span<const ComplexSample> measured_half);

struct MeanVar {
  double mean = 0.0;
  double variance = 0.0;  // population variance
};

// Mean and population variance over the 52 active bins only; the null bins
// carry masked zeros, not data.
MeanVar vector_stats(std::span<const double> v);

// In-phase over quadrature energy ratio across all 64 entries.
// Throws UndefinedImbalanceError when the quadrature energy is zero.
double iq_gain_imbalance(std::span<const ComplexSample> measured_half);

// Roughness of the ideal-subtracted symbol at scale tau:
//   d[n] = l[n] - ideal[n]                      (0-based, n = 0..63)
//   D = 0.5 * (3 - (ln sum d_tau - ln sum d_1) / ln tau)
// with segment distances d_tau over strides of tau and d_1 over unit strides.
// Throws DegenerateSignalError when either distance sum is zero.
double fractal_dimension(std::span<const ComplexSample> measured_half,
                         std::size_t tau = 3);

// Full per-record pipeline: synchronize, estimate channel, equalize, compute
// every feature for both halves. Deterministic; identical inputs produce
// bit-identical records. Stage failures become PipelineError annotated with
// the device label and stage name (iqi/fractal degeneracies excepted, which
// are stored as NaN as described above).
FeatureRecord extract_features(const PreambleRecord& rec);

}  // namespace rffp
