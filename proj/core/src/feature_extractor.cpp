#include "rffp/feature_extractor.hpp"

#include <cmath>
#include <limits>

#include "rffp/errors.hpp"
#include "rffp/synchronizer.hpp"

namespace rffp {

const std::array<std::string_view, kScalarFeatureCount> kScalarFeatureNames = {
    "cfo",
    "short_freq",
    "long_freq",
    "phase_error_mean_1",
    "phase_error_mean_2",
    "phase_error_var_1",
    "phase_error_var_2",
    "iqi_1",
    "iqi_2",
    "mag_error_mean_1",
    "mag_error_mean_2",
    "mag_error_var_1",
    "mag_error_var_2",
    "frac_dimension_1",
    "frac_dimension_2",
};

ScalarFeatureVector scalar_features(const FeatureRecord& r) {
  return {r.cfo,
          r.short_freq,
          r.long_freq,
          r.phase_error_mean_1,
          r.phase_error_mean_2,
          r.phase_error_var_1,
          r.phase_error_var_2,
          r.iqi_1,
          r.iqi_2,
          r.mag_error_mean_1,
          r.mag_error_mean_2,
          r.mag_error_var_1,
          r.mag_error_var_2,
          r.frac_dimension_1,
          r.frac_dimension_2};
}

namespace {

void require_symbol(std::span<const ComplexSample> x, const char* what) {
  if (x.size() != kSymbolLength)
    throw InvalidArgumentError(std::string(what) + ": expected " +
                               std::to_string(kSymbolLength) +
                               " samples, got " + std::to_string(x.size()));
}

}  // namespace

std::array<double, kSymbolLength> phase_error(
    std::span<const ComplexSample> measured_half) {
  require_symbol(measured_half, "phase_error");
  const IdealLts& ideal = ideal_lts();
  const ActiveSubcarrierMask& mask = active_subcarrier_mask();

  std::array<double, kSymbolLength> p{};
  for (std::size_t j = 0; j < kSymbolLength; ++j) {
    if (!mask.active[j]) continue;
    double ideal_angle = ideal[j] > 0 ? 0.0 : M_PI;
    p[j] = wrap_angle(std::arg(measured_half[j]) - ideal_angle);
  }
  return p;
}

std::array<double, kSymbolLength> magnitude_error(
    std::span<const ComplexSample> measured_half) {
  require_symbol(measured_half, "magnitude_error");
  const IdealLts& ideal = ideal_lts();
  const ActiveSubcarrierMask& mask = active_subcarrier_mask();

  std::array<double, kSymbolLength> m{};
  for (std::size_t j = 0; j < kSymbolLength; ++j) {
    if (!mask.active[j]) continue;
    m[j] = std::abs(measured_half[j]) - std::abs(static_cast<double>(ideal[j]));
  }
  return m;
}

MeanVar vector_stats(std::span<const double> v) {
  if (v.size() != kSymbolLength)
    throw InvalidArgumentError("vector_stats: expected " +
                               std::to_string(kSymbolLength) +
                               " entries, got " + std::to_string(v.size()));
  const ActiveSubcarrierMask& mask = active_subcarrier_mask();
  double sum = 0.0;
  for (std::size_t j : mask.indices) sum += v[j];
  const double n = static_cast<double>(kActiveSubcarrierCount);
  const double mean = sum / n;
  double sq = 0.0;
  for (std::size_t j : mask.indices) {
    double d = v[j] - mean;
    sq += d * d;
  }
  return MeanVar{mean, sq / n};
}

double iq_gain_imbalance(std::span<const ComplexSample> measured_half) {
  require_symbol(measured_half, "iq_gain_imbalance");
  double re_energy = 0.0, im_energy = 0.0;
  for (const auto& v : measured_half) {
    re_energy += v.real() * v.real();
    im_energy += v.imag() * v.imag();
  }
  if (im_energy == 0.0)
    throw UndefinedImbalanceError(
        "iq_gain_imbalance: zero quadrature energy, ratio undefined");
  return re_energy / im_energy;
}

double fractal_dimension(std::span<const ComplexSample> measured_half,
                         std::size_t tau) {
  require_symbol(measured_half, "fractal_dimension");
  if (tau < 2 || tau >= kSymbolLength)
    throw InvalidArgumentError("fractal_dimension: invalid scale " +
                               std::to_string(tau));
  const IdealLts& ideal = ideal_lts();

  // Ideal-subtracted symbol, 0-based.
  std::array<ComplexSample, kSymbolLength> dev;
  for (std::size_t n = 0; n < kSymbolLength; ++n)
    dev[n] = measured_half[n] - static_cast<double>(ideal[n]);

  const std::size_t segments = kSymbolLength / tau;  // floor(64 / tau)
  double sum_tau = 0.0;
  for (std::size_t n = 1; n <= segments; ++n)
    sum_tau += std::abs(dev[n * tau] - dev[(n - 1) * tau]);
  double sum_one = 0.0;
  for (std::size_t n = 1; n <= segments * tau; ++n)
    sum_one += std::abs(dev[n] - dev[n - 1]);

  if (sum_tau == 0.0 || sum_one == 0.0)
    throw DegenerateSignalError(
        "fractal_dimension: constant ideal-subtracted symbol, scale sums are "
        "zero");
  return 0.5 * (3.0 - (std::log(sum_tau) - std::log(sum_one)) /
                          std::log(static_cast<double>(tau)));
}

FeatureRecord extract_features(const PreambleRecord& rec) {
  auto [est, corrected] = synchronize(rec);

  const auto run = [&rec](const char* stage, auto&& fn) {
    try {
      return fn();
    } catch (const PipelineError&) {
      throw;
    } catch (const Error& e) {
      throw PipelineError(rec.device_label, stage, e.what());
    }
  };

  ChannelGain h =
      run("estimate_channel", [&] { return estimate_channel(corrected); });
  MeasuredLts lts = run("equalize", [&] { return equalize(corrected, h); });

  FeatureRecord out;
  out.device_label = rec.device_label;
  out.short_freq = est.coarse;
  out.long_freq = est.fine;
  out.cfo = est.total;

  out.phase_error_v1 = run("phase_error", [&] { return phase_error(lts.l1); });
  out.phase_error_v2 = run("phase_error", [&] { return phase_error(lts.l2); });
  out.mag_error_v1 =
      run("magnitude_error", [&] { return magnitude_error(lts.l1); });
  out.mag_error_v2 =
      run("magnitude_error", [&] { return magnitude_error(lts.l2); });

  MeanVar pv1 = vector_stats(out.phase_error_v1);
  MeanVar pv2 = vector_stats(out.phase_error_v2);
  MeanVar mv1 = vector_stats(out.mag_error_v1);
  MeanVar mv2 = vector_stats(out.mag_error_v2);
  out.phase_error_mean_1 = pv1.mean;
  out.phase_error_var_1 = pv1.variance;
  out.phase_error_mean_2 = pv2.mean;
  out.phase_error_var_2 = pv2.variance;
  out.mag_error_mean_1 = mv1.mean;
  out.mag_error_var_1 = mv1.variance;
  out.mag_error_mean_2 = mv2.mean;
  out.mag_error_var_2 = mv2.variance;

  // A degenerate ratio or roughness (possible only on effectively noiseless
  // frames, where equalization is exact) is recorded as NaN rather than
  // aborting the record; the remaining features are still meaningful.
  constexpr double kNan = std::numeric_limits<double>::quiet_NaN();
  const auto value_or_nan = [](auto&& fn) {
    try {
      return fn();
    } catch (const UndefinedImbalanceError&) {
      return kNan;
    } catch (const DegenerateSignalError&) {
      return kNan;
    }
  };
  out.iqi_1 = value_or_nan([&] { return iq_gain_imbalance(lts.l1); });
  out.iqi_2 = value_or_nan([&] { return iq_gain_imbalance(lts.l2); });
  out.frac_dimension_1 = value_or_nan([&] { return fractal_dimension(lts.l1); });
  out.frac_dimension_2 = value_or_nan([&] { return fractal_dimension(lts.l2); });
  return out;
}

}  // namespace rffp
