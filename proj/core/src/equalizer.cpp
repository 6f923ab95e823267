#include "rffp/equalizer.hpp"

#include <cmath>

#include "rffp/errors.hpp"

namespace rffp {

namespace {

constexpr std::size_t kN = kSymbolLength;
constexpr std::size_t kLogN = 6;

// Radix-2 decimation-in-time FFT, fixed at 64 points. Twiddles are
// precomputed once; `inverse` flips the twiddle sign and applies the 1/N
// normalization so idft64(dft64(x)) == x.
struct FftTables {
  std::array<std::size_t, kN> bit_reverse;
  std::array<ComplexSample, kN / 2> twiddles;  // e^{-j 2 pi k / N}

  FftTables() {
    for (std::size_t i = 0; i < kN; ++i) {
      std::size_t r = 0;
      for (std::size_t b = 0; b < kLogN; ++b)
        if (i & (std::size_t{1} << b)) r |= std::size_t{1} << (kLogN - 1 - b);
      bit_reverse[i] = r;
    }
    for (std::size_t k = 0; k < kN / 2; ++k)
      twiddles[k] = std::polar(1.0, -2.0 * M_PI * static_cast<double>(k) /
                                        static_cast<double>(kN));
  }
};

const FftTables& tables() {
  static const FftTables t;
  return t;
}

void fft64_inplace(std::array<ComplexSample, kN>& data, bool inverse) {
  const FftTables& t = tables();
  for (std::size_t i = 0; i < kN; ++i) {
    std::size_t j = t.bit_reverse[i];
    if (i < j) std::swap(data[i], data[j]);
  }
  for (std::size_t len = 2; len <= kN; len <<= 1) {
    const std::size_t half = len >> 1;
    const std::size_t step = kN / len;
    for (std::size_t start = 0; start < kN; start += len) {
      for (std::size_t k = 0; k < half; ++k) {
        ComplexSample w = t.twiddles[k * step];
        if (inverse) w = std::conj(w);
        ComplexSample a = data[start + k];
        ComplexSample b = data[start + k + half] * w;
        data[start + k] = a + b;
        data[start + k + half] = a - b;
      }
    }
  }
  if (inverse) {
    const double scale = 1.0 / static_cast<double>(kN);
    for (auto& v : data) v *= scale;
  }
}

// DFT bin k <-> centered position (k + N/2) mod N.
std::array<ComplexSample, kN> to_centered(const std::array<ComplexSample, kN>& x) {
  std::array<ComplexSample, kN> out;
  for (std::size_t k = 0; k < kN; ++k) out[(k + kN / 2) % kN] = x[k];
  return out;
}

std::array<ComplexSample, kN> from_centered(std::span<const ComplexSample> c) {
  std::array<ComplexSample, kN> out;
  for (std::size_t k = 0; k < kN; ++k) out[k] = c[(k + kN / 2) % kN];
  return out;
}

void require_length(std::span<const ComplexSample> x, const char* what) {
  if (x.size() != kN)
    throw InvalidArgumentError(std::string(what) + ": expected " +
                               std::to_string(kN) + " samples, got " +
                               std::to_string(x.size()));
}

}  // namespace

std::array<ComplexSample, kN> dft64(std::span<const ComplexSample> x) {
  require_length(x, "dft64");
  std::array<ComplexSample, kN> data;
  std::copy(x.begin(), x.end(), data.begin());
  fft64_inplace(data, /*inverse=*/false);
  return to_centered(data);
}

std::array<ComplexSample, kN> idft64(std::span<const ComplexSample> spectrum) {
  require_length(spectrum, "idft64");
  std::array<ComplexSample, kN> data = from_centered(spectrum);
  fft64_inplace(data, /*inverse=*/true);
  return data;
}

ChannelGain estimate_channel(const CorrectedLts& corrected) {
  std::span<const ComplexSample> all(corrected.samples);
  auto x1 = dft64(all.subspan(0, kN));
  auto x2 = dft64(all.subspan(kN, kN));
  const IdealLts& ideal = ideal_lts();

  ChannelGain h{};
  for (std::size_t j = 0; j < kN; ++j)
    h.gains[j] = 0.5 * (x1[j] + x2[j]) * static_cast<double>(ideal[j]);
  return h;
}

MeasuredLts equalize(const CorrectedLts& corrected, const ChannelGain& h) {
  std::span<const ComplexSample> all(corrected.samples);
  auto x1 = dft64(all.subspan(0, kN));
  auto x2 = dft64(all.subspan(kN, kN));
  const ActiveSubcarrierMask& mask = active_subcarrier_mask();

  MeasuredLts out{};
  for (std::size_t j = 0; j < kN; ++j) {
    if (!mask.active[j]) continue;  // null bins stay exactly 0
    if (std::abs(h.gains[j]) < 1e-12)
      throw SingularChannelError(
          "channel gain below 1e-12 at active subcarrier position " +
          std::to_string(j + 1) + " (centered, 1-based)");
    out.l1[j] = x1[j] / h.gains[j];
    out.l2[j] = x2[j] / h.gains[j];
  }
  return out;
}

}  // namespace rffp
