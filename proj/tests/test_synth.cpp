#include <doctest.h>

#include <cmath>
#include <fstream>
#include <map>
#include <random>

#include "rffp/errors.hpp"
#include "rffp/feature_extractor.hpp"
#include "rffp/synth.hpp"
#include "test_support.hpp"

using namespace rffp;

TEST_SUITE("synth") {

TEST_CASE("ideal preamble has the documented frame structure") {
  const auto& p = ideal_preamble();
  REQUIRE(p.size() == kPreambleLength);

  // STS: 8 identical 16-sample repetitions.
  for (std::size_t i = 0; i < kStsLength; ++i)
    CHECK(std::abs(p[i] - p[i % kStsPeriod]) < 1e-12);

  // LTS: two identical 64-sample symbols (1-based samples 161..224 == 225..288).
  for (std::size_t i = 0; i < kSymbolLength; ++i)
    CHECK(p[160 + i] == p[224 + i]);

  // GI2 is the cyclic prefix (1-based 129..160 == 257..288).
  for (std::size_t i = 0; i < kGi2Length; ++i)
    CHECK(p[128 + i] == p[256 + i]);

  // Both fields are unit average power.
  double sts_power = 0.0, lts_power = 0.0;
  for (std::size_t i = 0; i < kStsLength; ++i) sts_power += std::norm(p[i]);
  for (std::size_t i = 160; i < 288; ++i) lts_power += std::norm(p[i]);
  CHECK(sts_power / 128.0 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(lts_power / 128.0 == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("full extraction of the clean preamble is self-consistent") {
  const auto& p = ideal_preamble();
  PreambleRecord rec{"02:00:00:00:00:aa", {p.begin(), p.end()}};
  FeatureRecord f = extract_features(rec);
  CHECK(std::abs(f.cfo) < 1e-12);
  const auto& mask = active_subcarrier_mask();
  for (std::size_t j = 0; j < kSymbolLength; ++j) {
    CHECK(std::abs(f.phase_error_v1[j]) < (mask.active[j] ? 1e-9 : 1e-300));
    CHECK(std::abs(f.mag_error_v1[j]) < (mask.active[j] ? 1e-9 : 1e-300));
    CHECK(std::abs(f.phase_error_v2[j]) < (mask.active[j] ? 1e-9 : 1e-300));
    CHECK(std::abs(f.mag_error_v2[j]) < (mask.active[j] ? 1e-9 : 1e-300));
  }
}

TEST_CASE("the identity spec is a bit-exact no-op") {
  ImpairmentSpec spec;  // defaults: no cfo, balanced, unit tap, no noise
  auto out = apply_impairments(ideal_preamble(), spec, 99);
  const auto& in = ideal_preamble();
  for (std::size_t i = 0; i < kPreambleLength; ++i) CHECK(out[i] == in[i]);
}

TEST_CASE("injected CFO is recovered through the pipeline") {
  ImpairmentSpec spec;
  spec.cfo = 0.012;
  auto samples = apply_impairments(ideal_preamble(), spec, 5);
  PreambleRecord rec{"x", {samples.begin(), samples.end()}};
  FeatureRecord f = extract_features(rec);
  CHECK(std::abs(f.cfo - 0.012) < 1e-9);
}

TEST_CASE("channel convolution matches the direct FIR oracle") {
  ImpairmentSpec spec;
  spec.channel_taps = {{0.9, 0.1}, {0.0, -0.2}, {0.05, 0.0}};
  auto out = apply_impairments(ideal_preamble(), spec, 1);
  auto expected = test_support::direct_fir(ideal_preamble(), spec.channel_taps);
  for (std::size_t i = 0; i < kPreambleLength; ++i)
    CHECK(std::abs(out[i] - expected[i]) < 1e-12);
}

TEST_CASE("I-branch gain scales only the real part") {
  ImpairmentSpec spec;
  spec.iq_gain = 1.25;
  auto out = apply_impairments(ideal_preamble(), spec, 1);
  const auto& in = ideal_preamble();
  for (std::size_t i = 0; i < kPreambleLength; ++i) {
    CHECK(out[i].real() == doctest::Approx(1.25 * in[i].real()).epsilon(1e-15));
    CHECK(out[i].imag() == in[i].imag());
  }
}

TEST_CASE("amplitude and phase apply as a single complex factor") {
  ImpairmentSpec spec;
  spec.amplitude = 2.5;
  spec.common_phase = 0.7;
  auto out = apply_impairments(ideal_preamble(), spec, 1);
  const auto& in = ideal_preamble();
  const ComplexSample factor = 2.5 * std::polar(1.0, 0.7);
  for (std::size_t i = 0; i < kPreambleLength; ++i)
    CHECK(std::abs(out[i] - factor * in[i]) < 1e-12);
}

TEST_CASE("empirical SNR lands within half a dB of the request") {
  ImpairmentSpec spec;
  spec.snr_db = 30.0;
  const auto& clean = ideal_preamble();
  double signal_power = 0.0, noise_power = 0.0;
  for (std::uint64_t f = 0; f < 100; ++f) {
    auto noisy = apply_impairments(clean, spec, 1000 + f);
    for (std::size_t i = 0; i < kPreambleLength; ++i) {
      signal_power += std::norm(clean[i]);
      noise_power += std::norm(noisy[i] - clean[i]);
    }
  }
  const double snr_db = 10.0 * std::log10(signal_power / noise_power);
  CHECK(snr_db > 29.5);
  CHECK(snr_db < 30.5);
}

TEST_CASE("noise is deterministic given the seed") {
  ImpairmentSpec spec;
  spec.snr_db = 10.0;
  auto a = apply_impairments(ideal_preamble(), spec, 31337);
  auto b = apply_impairments(ideal_preamble(), spec, 31337);
  CHECK(a == b);
  auto c = apply_impairments(ideal_preamble(), spec, 31338);
  CHECK(a != c);
}

TEST_CASE("invalid impairment specs are rejected") {
  ImpairmentSpec spec;
  spec.amplitude = 0.0;
  CHECK_THROWS_AS(validate(spec), InvalidArgumentError);
  spec = {};
  spec.iq_gain = -1.0;
  CHECK_THROWS_AS(validate(spec), InvalidArgumentError);
  spec = {};
  spec.channel_taps.clear();
  CHECK_THROWS_AS(validate(spec), InvalidArgumentError);
  spec = {};
  spec.channel_taps = {{0.0, 0.0}, {1.0, 0.0}};
  CHECK_THROWS_AS(validate(spec), InvalidArgumentError);
}

TEST_CASE("fleet generation is balanced and label-ordered") {
  std::vector<DeviceProfile> profiles;
  for (int d = 0; d < 10; ++d) {
    DeviceProfile p;
    p.label = "02:00:00:00:00:0" + std::to_string(d);
    p.impairments.cfo = 0.001 * d;
    p.impairments.snr_db = 20.0;
    profiles.push_back(p);
  }

  std::map<std::string, std::size_t> counts;
  std::vector<std::string> order;
  generate_fleet(profiles, 100, 7, [&](PreambleRecord&& rec) {
    ++counts[rec.device_label];
    order.push_back(rec.device_label);
  });
  CHECK(order.size() == 1000);
  for (const auto& p : profiles) CHECK(counts[p.label] == 100);
  CHECK(order.front() == profiles.front().label);
  CHECK(order.back() == profiles.back().label);
}

TEST_CASE("the same seed reproduces the stream bit-identically") {
  std::vector<DeviceProfile> profiles(2);
  profiles[0].label = "a";
  profiles[0].impairments.snr_db = 15.0;
  profiles[0].cfo_jitter = 1e-4;
  profiles[1].label = "b";
  profiles[1].impairments.cfo = 0.01;
  profiles[1].impairments.snr_db = 15.0;

  std::vector<PreambleRecord> first, second;
  generate_fleet(profiles, 50, 123,
                 [&](PreambleRecord&& r) { first.push_back(std::move(r)); });
  generate_fleet(profiles, 50, 123,
                 [&](PreambleRecord&& r) { second.push_back(std::move(r)); });
  REQUIRE(first.size() == second.size());
  for (std::size_t i = 0; i < first.size(); ++i) {
    CHECK(first[i].device_label == second[i].device_label);
    CHECK(first[i].samples == second[i].samples);
  }
}

TEST_CASE("duplicate labels are rejected") {
  std::vector<DeviceProfile> profiles(2);
  profiles[0].label = "same";
  profiles[1].label = "same";
  CHECK_THROWS_AS(generate_fleet(profiles, 1, 0, [](PreambleRecord&&) {}),
                  InvalidArgumentError);
}

TEST_CASE("recovered CFO spread shrinks as SNR grows") {
  const double snrs[] = {10.0, 20.0, 30.0, 40.0};
  double previous = 1e9;
  for (double snr : snrs) {
    ImpairmentSpec spec;
    spec.cfo = 0.01;
    spec.snr_db = snr;
    double sum = 0.0, sumsq = 0.0;
    const int frames = 500;
    for (int f = 0; f < frames; ++f) {
      auto samples = apply_impairments(
          ideal_preamble(), spec,
          static_cast<std::uint64_t>(snr * 1000) + static_cast<std::uint64_t>(f));
      PreambleRecord rec{"x", {samples.begin(), samples.end()}};
      FeatureRecord feat = extract_features(rec);
      sum += feat.cfo;
      sumsq += feat.cfo * feat.cfo;
    }
    const double mean = sum / frames;
    const double stdev = std::sqrt(sumsq / frames - mean * mean);
    CHECK(stdev < previous);
    previous = stdev;
  }
}

TEST_CASE("oracle closure on a batch of noiseless specs") {
  // Smoke-sized version of the acceptance property.
  std::mt19937_64 gen(2025);
  std::uniform_real_distribution<double> cfo_dist(-0.18, 0.18);
  std::uniform_real_distribution<double> phase_dist(-M_PI, M_PI);
  std::uniform_real_distribution<double> amp_dist(0.5, 2.0);
  for (int k = 0; k < 50; ++k) {
    ImpairmentSpec spec;
    spec.cfo = cfo_dist(gen);
    spec.common_phase = phase_dist(gen);
    spec.amplitude = amp_dist(gen);
    auto samples = apply_impairments(ideal_preamble(), spec, 50 + k);
    PreambleRecord rec{"x", {samples.begin(), samples.end()}};
    FeatureRecord f = extract_features(rec);
    CHECK(std::abs(f.cfo - spec.cfo) < 1e-9);
    CHECK(std::abs(f.phase_error_mean_1) < 1e-9);
    CHECK(std::abs(f.mag_error_mean_2) < 1e-9);
  }
}

TEST_CASE("fleet specs roundtrip through JSON") {
  std::vector<DeviceProfile> profiles(2);
  profiles[0].label = "02:00:00:00:00:01";
  profiles[0].impairments.cfo = 0.011;
  profiles[0].impairments.iq_gain = 1.02;
  profiles[0].impairments.channel_taps = {{1.0, 0.0}, {0.1, -0.05}};
  profiles[0].impairments.snr_db = 25.0;
  profiles[0].cfo_jitter = 1e-4;
  profiles[1].label = "02:00:00:00:00:02";
  profiles[1].impairments.common_phase = -0.3;

  auto dir = test_support::temp_dir("synth_spec");
  auto path = dir / "fleet.json";
  save_fleet_spec(profiles, path);
  auto loaded = load_fleet_spec(path);
  REQUIRE(loaded.size() == 2);
  CHECK(loaded[0].label == profiles[0].label);
  CHECK(loaded[0].impairments.cfo == profiles[0].impairments.cfo);
  CHECK(loaded[0].impairments.channel_taps ==
        profiles[0].impairments.channel_taps);
  REQUIRE(loaded[0].impairments.snr_db.has_value());
  CHECK(*loaded[0].impairments.snr_db == 25.0);
  CHECK_FALSE(loaded[1].impairments.snr_db.has_value());
  CHECK(loaded[1].impairments.common_phase == -0.3);

  SUBCASE("bad specs are rejected") {
    auto bad = dir / "bad.json";
    std::ofstream out(bad);
    out << "{\"devices\": [{\"cfo\": 0.01}]}\n";
    out.close();
    CHECK_THROWS_AS(load_fleet_spec(bad), Error);
  }
}

}  // TEST_SUITE
