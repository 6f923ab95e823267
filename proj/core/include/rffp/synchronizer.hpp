#pragma once

#include <array>
#include <span>
#include <utility>

#include "rffp/signal_model.hpp"

namespace rffp {

// Carrier frequency offset estimates, in radians per sample.
// total == coarse + fine always holds bit-exactly.
struct CfoEstimate {
  double coarse = 0.0;  // from the STS, in (-pi/16, pi/16]
  double fine = 0.0;    // from the coarse-corrected LTS, in (-pi/64, pi/64]
  double total = 0.0;
};

// The 128 LTS samples after coarse and fine CFO correction.
struct CorrectedLts {
  std::array<ComplexSample, kLtsLength> samples;
};

// Principal angle in (-pi, pi].
double wrap_angle(double radians);

// Coarse CFO from the 16-sample-periodic STS:
//   (1/16) * arg( sum_{i=1}^{112} sts[i]^* sts[i+16] )   (1-based)
// Throws DegenerateSignalError when the correlation sum is zero (angle
// undefined); a silent zero would poison every downstream feature.
double estimate_coarse_cfo(std::span<const ComplexSample> sts);

// De-rotates the raw LTS by alpha_s radians/sample. The phase index restarts
// at the LTS boundary, which leaves a constant rotation on the LTS that the
// channel estimate absorbs later.
std::array<ComplexSample, kLtsLength> correct_coarse(
    std::span<const ComplexSample> lts_raw, double alpha_s);

// Fine CFO from the two 64-sample LTS halves:
//   (1/64) * arg( sum_{i=1}^{64} x[i]^* x[i+64] )
double estimate_fine_cfo(std::span<const ComplexSample> lts_hat);

CorrectedLts correct_fine(std::span<const ComplexSample> lts_hat,
                          double alpha_l);

// Full synchronization chain over one record: coarse estimate from the STS,
// coarse correction of the LTS, fine estimate, fine correction.
// Stage failures are rethrown as PipelineError naming the stage.
std::pair<CfoEstimate, CorrectedLts> synchronize(const PreambleRecord& rec);

// Display conversion only; the library stores CFO in radians/sample.
double cfo_to_hz(double rad_per_sample, double sample_rate_hz = 20e6);

}  // namespace rffp
