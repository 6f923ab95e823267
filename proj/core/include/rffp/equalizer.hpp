#pragma once

#include <array>
#include <span>

#include "rffp/signal_model.hpp"
#include "rffp/synchronizer.hpp"

namespace rffp {

// Per-subcarrier channel gain in centered order, exactly zero at the 12 null
// bins.
struct ChannelGain {
  std::array<ComplexSample, kSymbolLength> gains;
};

// The two equalized long training symbols in centered order. Null bins are
// exactly zero: the channel has no estimate there, so masking is the only
// finite completion of the per-subcarrier division.
struct MeasuredLts {
  std::array<ComplexSample, kSymbolLength> l1;
  std::array<ComplexSample, kSymbolLength> l2;
};

// Unnormalized forward 64-point DFT (radix-2), output reordered to centered
// subcarrier order (subcarrier -32 first, DC at index 32). All 64-point
// spectra in this module share that ordering.
std::array<ComplexSample, kSymbolLength> dft64(std::span<const ComplexSample> x);

// Inverse of dft64: centered-order spectrum in, time samples out, normalized
// by 1/64 so that idft64(dft64(x)) == x.
std::array<ComplexSample, kSymbolLength> idft64(
    std::span<const ComplexSample> spectrum);

// Channel estimate from the two corrected LTS halves:
//   h[j] = 0.5 * (X1[j] + X2[j]) * ideal[j]
// where X1, X2 are the DFTs of the halves. Multiplying by the ideal symbol
// (+-1 at active bins) equals dividing by it; null bins come out exactly 0.
ChannelGain estimate_channel(const CorrectedLts& corrected);

// Zero-forcing equalization of both halves: l_k[j] = X_k[j] / h[j] at active
// bins, 0 at null bins. Throws SingularChannelError naming the bin when
// |h[j]| < 1e-12 at an active subcarrier.
MeasuredLts equalize(const CorrectedLts& corrected, const ChannelGain& h);

}  // namespace rffp
