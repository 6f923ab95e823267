#include <doctest.h>

#include <cmath>
#include <random>

#include "rffp/equalizer.hpp"
#include "rffp/errors.hpp"
#include "test_support.hpp"

using namespace rffp;
using test_support::direct_dft64_centered;

namespace {

std::vector<ComplexSample> random_symbol(std::mt19937_64& gen) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<ComplexSample> x(64);
  for (auto& v : x) v = ComplexSample(dist(gen), dist(gen));
  return x;
}

// Two noiseless repetitions of the time-domain ideal LTS symbol.
CorrectedLts clean_corrected(ComplexSample scale = {1.0, 0.0}) {
  std::array<ComplexSample, 64> freq;
  const IdealLts& ideal = ideal_lts();
  for (std::size_t j = 0; j < 64; ++j)
    freq[j] = ComplexSample(static_cast<double>(ideal[j]), 0.0);
  auto symbol = idft64(freq);
  CorrectedLts out{};
  for (std::size_t i = 0; i < 64; ++i) {
    out.samples[i] = symbol[i] * scale;
    out.samples[i + 64] = symbol[i] * scale;
  }
  return out;
}

}  // namespace

TEST_SUITE("equalizer") {

TEST_CASE("dft64 of a unit impulse is flat") {
  std::vector<ComplexSample> x(64, ComplexSample{0.0, 0.0});
  x[0] = ComplexSample{1.0, 0.0};
  auto spectrum = dft64(x);
  for (const auto& v : spectrum) {
    CHECK(v.real() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(v.imag()) < 1e-12);
  }
}

TEST_CASE("dft64 of a constant concentrates at DC (centered position 33)") {
  std::vector<ComplexSample> x(64, ComplexSample{1.0, 0.0});
  auto spectrum = dft64(x);
  for (std::size_t j = 0; j < 64; ++j) {
    if (j == 32) {
      CHECK(spectrum[j].real() == doctest::Approx(64.0));
      CHECK(std::abs(spectrum[j].imag()) < 1e-9);
    } else {
      CHECK(std::abs(spectrum[j]) < 1e-9);
    }
  }
}

TEST_CASE("dft64 maps the +3 tone to centered position 36") {
  std::vector<ComplexSample> x(64);
  for (std::size_t n = 0; n < 64; ++n)
    x[n] = std::polar(1.0, 2.0 * M_PI * 3.0 * static_cast<double>(n) / 64.0);
  auto spectrum = dft64(x);
  for (std::size_t j = 0; j < 64; ++j) {
    if (j == 35) {  // 1-based position 36
      CHECK(std::abs(spectrum[j] - ComplexSample{64.0, 0.0}) < 1e-9);
    } else {
      CHECK(std::abs(spectrum[j]) < 1e-9);
    }
  }
}

TEST_CASE("dft64 matches the direct summation oracle") {
  std::mt19937_64 gen(31337);
  for (int k = 0; k < 200; ++k) {
    auto x = random_symbol(gen);
    auto fast = dft64(x);
    auto direct = direct_dft64_centered(x);
    for (std::size_t j = 0; j < 64; ++j)
      CHECK(std::abs(fast[j] - direct[j]) < 1e-10);
  }
}

TEST_CASE("Parseval holds for dft64") {
  std::mt19937_64 gen(777);
  for (int k = 0; k < 200; ++k) {
    auto x = random_symbol(gen);
    double time_energy = 0.0, freq_energy = 0.0;
    for (const auto& v : x) time_energy += std::norm(v);
    for (const auto& v : dft64(x)) freq_energy += std::norm(v);
    CHECK(std::abs(freq_energy - 64.0 * time_energy) <=
          1e-9 * 64.0 * time_energy);
  }
}

TEST_CASE("idft64 inverts dft64") {
  std::mt19937_64 gen(2024);
  auto x = random_symbol(gen);
  auto back = idft64(dft64(x));
  for (std::size_t n = 0; n < 64; ++n) CHECK(std::abs(back[n] - x[n]) < 1e-12);
}

TEST_CASE("dft64 rejects wrong lengths") {
  std::vector<ComplexSample> x(63);
  CHECK_THROWS_AS(dft64(x), InvalidArgumentError);
}

TEST_CASE("channel estimate of a clean LTS is the all-ones active set") {
  ChannelGain h = estimate_channel(clean_corrected());
  const auto& mask = active_subcarrier_mask();
  for (std::size_t j = 0; j < 64; ++j) {
    if (mask.active[j]) {
      CHECK(std::abs(h.gains[j] - ComplexSample{1.0, 0.0}) < 1e-9);
    } else {
      CHECK(h.gains[j] == ComplexSample{0.0, 0.0});
    }
  }
}

TEST_CASE("channel estimate is linear in the input") {
  const ComplexSample c{0.3, -1.7};
  ChannelGain h1 = estimate_channel(clean_corrected());
  ChannelGain hc = estimate_channel(clean_corrected(c));
  for (std::size_t j = 0; j < 64; ++j)
    CHECK(std::abs(hc.gains[j] - c * h1.gains[j]) < 1e-9);
}

TEST_CASE("all-zero input gives an all-zero channel") {
  CorrectedLts zeros{};
  ChannelGain h = estimate_channel(zeros);
  for (const auto& g : h.gains) CHECK(g == ComplexSample{0.0, 0.0});
}

TEST_CASE("equalizing a flat noiseless channel returns the ideal symbol") {
  const ComplexSample c{0.8, 0.6};  // flat complex channel
  CorrectedLts corrected = clean_corrected(c);
  MeasuredLts lts = equalize(corrected, estimate_channel(corrected));
  const auto& mask = active_subcarrier_mask();
  const IdealLts& ideal = ideal_lts();
  for (std::size_t j = 0; j < 64; ++j) {
    if (mask.active[j]) {
      CHECK(std::abs(lts.l1[j] - ComplexSample(ideal[j], 0.0)) < 1e-9);
      CHECK(std::abs(lts.l2[j] - ComplexSample(ideal[j], 0.0)) < 1e-9);
    } else {
      CHECK(lts.l1[j] == ComplexSample{0.0, 0.0});
      CHECK(lts.l2[j] == ComplexSample{0.0, 0.0});
    }
  }
}

TEST_CASE("equalization is invariant to a complex scale of the input") {
  // Build a noisy-ish corrected LTS so the invariance is not about zeros.
  std::mt19937_64 gen(555);
  std::uniform_real_distribution<double> dist(-0.05, 0.05);
  CorrectedLts base = clean_corrected();
  for (auto& v : base.samples) v += ComplexSample(dist(gen), dist(gen));

  MeasuredLts ref = equalize(base, estimate_channel(base));

  const ComplexSample c{-2.5, 1.25};
  CorrectedLts scaled = base;
  for (auto& v : scaled.samples) v *= c;
  MeasuredLts out = equalize(scaled, estimate_channel(scaled));

  for (std::size_t j = 0; j < 64; ++j) {
    CHECK(std::abs(out.l1[j] - ref.l1[j]) < 1e-9);
    CHECK(std::abs(out.l2[j] - ref.l2[j]) < 1e-9);
  }
}

TEST_CASE("a vanished active bin raises a singular-channel error") {
  CorrectedLts corrected = clean_corrected();
  ChannelGain h = estimate_channel(corrected);
  const std::size_t bin = active_subcarrier_mask().indices[10];
  h.gains[bin] = ComplexSample{0.0, 0.0};
  try {
    equalize(corrected, h);
    FAIL("expected SingularChannelError");
  } catch (const SingularChannelError& e) {
    CHECK(std::string(e.what()).find(std::to_string(bin + 1)) !=
          std::string::npos);
  }
}

}  // TEST_SUITE
