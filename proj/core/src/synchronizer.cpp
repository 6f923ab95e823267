#include "rffp/synchronizer.hpp"

#include <cmath>

#include "rffp/errors.hpp"

namespace rffp {

namespace {

// arg of the lag-correlation sum over `count` pairs at distance `lag`.
// Throws when the sum is exactly zero (no phase information at all).
double correlation_angle(std::span<const ComplexSample> x, std::size_t lag,
                         std::size_t count, const char* what) {
  ComplexSample sum{0.0, 0.0};
  for (std::size_t i = 0; i < count; ++i)
    sum += std::conj(x[i]) * x[i + lag];
  if (sum == ComplexSample{0.0, 0.0})
    throw DegenerateSignalError(std::string(what) +
                                ": zero correlation sum, angle undefined");
  return std::arg(sum);
}

std::array<ComplexSample, kLtsLength> derotate(
    std::span<const ComplexSample> x, double alpha, const char* what) {
  if (x.size() != kLtsLength)
    throw InvalidArgumentError(std::string(what) + ": expected " +
                               std::to_string(kLtsLength) + " samples, got " +
                               std::to_string(x.size()));
  std::array<ComplexSample, kLtsLength> out;
  for (std::size_t i = 0; i < kLtsLength; ++i)
    out[i] = x[i] * std::polar(1.0, -alpha * static_cast<double>(i));
  return out;
}

}  // namespace

double wrap_angle(double radians) {
  double r = std::remainder(radians, 2.0 * M_PI);  // [-pi, pi]
  if (r <= -M_PI) r = M_PI;                        // convention: (-pi, pi]
  return r;
}

double estimate_coarse_cfo(std::span<const ComplexSample> sts) {
  if (sts.size() != kStsLength)
    throw InvalidArgumentError("estimate_coarse_cfo: expected " +
                               std::to_string(kStsLength) + " samples, got " +
                               std::to_string(sts.size()));
  return correlation_angle(sts, kStsPeriod, kStsLength - kStsPeriod,
                           "estimate_coarse_cfo") /
         static_cast<double>(kStsPeriod);
}

std::array<ComplexSample, kLtsLength> correct_coarse(
    std::span<const ComplexSample> lts_raw, double alpha_s) {
  return derotate(lts_raw, alpha_s, "correct_coarse");
}

double estimate_fine_cfo(std::span<const ComplexSample> lts_hat) {
  if (lts_hat.size() != kLtsLength)
    throw InvalidArgumentError("estimate_fine_cfo: expected " +
                               std::to_string(kLtsLength) + " samples, got " +
                               std::to_string(lts_hat.size()));
  return correlation_angle(lts_hat, kSymbolLength, kSymbolLength,
                           "estimate_fine_cfo") /
         static_cast<double>(kSymbolLength);
}

CorrectedLts correct_fine(std::span<const ComplexSample> lts_hat,
                          double alpha_l) {
  return CorrectedLts{derotate(lts_hat, alpha_l, "correct_fine")};
}

std::pair<CfoEstimate, CorrectedLts> synchronize(const PreambleRecord& rec) {
  PreambleView view = split_preamble(rec);

  const auto run = [&rec](const char* stage, auto&& fn) {
    try {
      return fn();
    } catch (const Error& e) {
      throw PipelineError(rec.device_label, stage, e.what());
    }
  };

  CfoEstimate est;
  est.coarse = run("estimate_coarse_cfo",
                   [&] { return estimate_coarse_cfo(view.sts); });
  auto lts_hat =
      run("correct_coarse", [&] { return correct_coarse(view.lts, est.coarse); });
  est.fine =
      run("estimate_fine_cfo", [&] { return estimate_fine_cfo(lts_hat); });
  auto corrected =
      run("correct_fine", [&] { return correct_fine(lts_hat, est.fine); });
  est.total = est.coarse + est.fine;
  return {est, corrected};
}

double cfo_to_hz(double rad_per_sample, double sample_rate_hz) {
  return rad_per_sample * sample_rate_hz / (2.0 * M_PI);
}

}  // namespace rffp
