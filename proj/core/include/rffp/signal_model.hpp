#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace rffp {

using ComplexSample = std::complex<double>;

// IEEE 802.11g preamble layout in samples at 20 MS/s. Captured records keep
// 8 of the 10 short training repetitions (the first two are dropped upstream
// to guard against packet-detection truncation), so the stored preamble is
//
//   [ STS x128 | GI2 x32 | LTS x128 ]
//
// where the LTS is two identical 64-sample long training symbols.
inline constexpr std::size_t kStsLength = 128;
inline constexpr std::size_t kGi2Length = 32;
inline constexpr std::size_t kLtsLength = 128;
inline constexpr std::size_t kPreambleLength = kStsLength + kGi2Length + kLtsLength;

inline constexpr std::size_t kStsPeriod = 16;     // short training repetition
inline constexpr std::size_t kSymbolLength = 64;  // long training symbol / DFT size
inline constexpr std::size_t kActiveSubcarrierCount = 52;

// One captured preamble: the transmitter's MAC address text used as an opaque
// class label, plus exactly 288 raw complex baseband samples.
struct PreambleRecord {
  std::string device_label;
  std::vector<ComplexSample> samples;
};

// Throws MalformedRecordError unless the record has a non-empty label and
// exactly kPreambleLength finite samples.
void validate(const PreambleRecord& rec);

struct PreambleView {
  std::span<const ComplexSample> sts;  // samples 1..128 (1-based)
  std::span<const ComplexSample> gi2;  // samples 129..160
  std::span<const ComplexSample> lts;  // samples 161..288
};

// Partitions a record into its three fields. The views alias the record's
// storage; concatenating them reproduces the record exactly.
PreambleView split_preamble(const PreambleRecord& rec);

// The ideal long training symbol in centered subcarrier order: index 0 is
// subcarrier -32, index 32 is DC, index 63 is subcarrier +31. 52 entries are
// +-1; the 12 guard-band and DC bins are 0.
using IdealLts = std::array<int, kSymbolLength>;
const IdealLts& ideal_lts();

// The 52 nonzero positions of the ideal long training symbol, 0-based in
// centered order. The null bins carry no channel estimate, so every
// per-subcarrier feature masks them out through this table.
struct ActiveSubcarrierMask {
  std::array<std::size_t, kActiveSubcarrierCount> indices;
  std::array<bool, kSymbolLength> active;
};
const ActiveSubcarrierMask& active_subcarrier_mask();

}  // namespace rffp
