#include "rffp/synth.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "rffp/equalizer.hpp"
#include "rffp/errors.hpp"
#include "rffp/rng.hpp"

namespace rffp {

namespace {

using json = nlohmann::json;

// Standard short training subcarriers, centered order (nonzero on every 4th
// subcarrier, which is what makes the time sequence 16-periodic). The common
// sqrt(13/6) factor washes out in the unit-power normalization below.
std::array<ComplexSample, kSymbolLength> short_training_spectrum() {
  std::array<ComplexSample, kSymbolLength> s{};
  const double a = std::sqrt(13.0 / 6.0);
  const ComplexSample pp{a, a}, mm{-a, -a};
  const std::pair<int, ComplexSample> entries[] = {
      {-24, pp}, {-20, mm}, {-16, pp}, {-12, mm}, {-8, mm}, {-4, pp},
      {4, mm},   {8, mm},   {12, pp},  {16, pp},  {20, pp}, {24, pp},
  };
  for (const auto& [sc, v] : entries)
    s[static_cast<std::size_t>(sc + 32)] = v;
  return s;
}

void normalize_unit_power(std::span<ComplexSample> x) {
  double power = 0.0;
  for (const auto& v : x) power += std::norm(v);
  power /= static_cast<double>(x.size());
  const double scale = 1.0 / std::sqrt(power);
  for (auto& v : x) v *= scale;
}

}  // namespace

void validate(const ImpairmentSpec& spec) {
  if (!(spec.amplitude > 0.0))
    throw InvalidArgumentError("ImpairmentSpec: amplitude must be > 0");
  if (!(spec.iq_gain > 0.0))
    throw InvalidArgumentError("ImpairmentSpec: iq_gain must be > 0");
  if (spec.channel_taps.empty())
    throw InvalidArgumentError("ImpairmentSpec: need at least one channel tap");
  if (spec.channel_taps.front() == ComplexSample{0.0, 0.0})
    throw InvalidArgumentError("ImpairmentSpec: first channel tap must be nonzero");
  for (double v : {spec.cfo, spec.common_phase})
    if (!std::isfinite(v))
      throw InvalidArgumentError("ImpairmentSpec: non-finite parameter");
  if (spec.snr_db && !std::isfinite(*spec.snr_db))
    throw InvalidArgumentError("ImpairmentSpec: non-finite snr_db");
}

void validate(const DeviceProfile& profile) {
  if (profile.label.empty())
    throw InvalidArgumentError("DeviceProfile: empty label");
  if (profile.cfo_jitter < 0.0 || profile.iq_gain_jitter < 0.0)
    throw InvalidArgumentError("DeviceProfile: jitter must be >= 0");
  validate(profile.impairments);
}

const std::array<ComplexSample, kPreambleLength>& ideal_preamble() {
  static const std::array<ComplexSample, kPreambleLength> preamble = [] {
    auto sts_symbol = idft64(short_training_spectrum());  // 4 x 16-periodic
    std::array<ComplexSample, kStsPeriod> sts_period;
    std::copy_n(sts_symbol.begin(), kStsPeriod, sts_period.begin());
    normalize_unit_power(sts_period);

    std::array<ComplexSample, kSymbolLength> lts_freq;
    const IdealLts& ideal = ideal_lts();
    for (std::size_t j = 0; j < kSymbolLength; ++j)
      lts_freq[j] = ComplexSample(static_cast<double>(ideal[j]), 0.0);
    auto lts_symbol = idft64(lts_freq);
    normalize_unit_power(lts_symbol);

    std::array<ComplexSample, kPreambleLength> out{};
    std::size_t at = 0;
    for (std::size_t rep = 0; rep < kStsLength / kStsPeriod; ++rep)
      for (std::size_t i = 0; i < kStsPeriod; ++i) out[at++] = sts_period[i];
    // GI2 is the cyclic prefix: the last 32 samples of one LTS symbol.
    for (std::size_t i = kSymbolLength - kGi2Length; i < kSymbolLength; ++i)
      out[at++] = lts_symbol[i];
    for (std::size_t rep = 0; rep < 2; ++rep)
      for (std::size_t i = 0; i < kSymbolLength; ++i) out[at++] = lts_symbol[i];
    return out;
  }();
  return preamble;
}

std::array<ComplexSample, kPreambleLength> apply_impairments(
    std::span<const ComplexSample, kPreambleLength> clean,
    const ImpairmentSpec& spec, std::uint64_t seed) {
  validate(spec);

  std::array<ComplexSample, kPreambleLength> x{};

  // FIR channel, zero-padded history.
  const auto& taps = spec.channel_taps;
  if (taps.size() == 1 && taps[0] == ComplexSample{1.0, 0.0}) {
    std::copy(clean.begin(), clean.end(), x.begin());
  } else {
    for (std::size_t n = 0; n < kPreambleLength; ++n) {
      ComplexSample acc{0.0, 0.0};
      const std::size_t t_max = std::min(taps.size(), n + 1);
      for (std::size_t t = 0; t < t_max; ++t) acc += taps[t] * clean[n - t];
      x[n] = acc;
    }
  }

  if (spec.iq_gain != 1.0)
    for (auto& v : x) v = ComplexSample(spec.iq_gain * v.real(), v.imag());

  if (spec.common_phase != 0.0) {
    const ComplexSample rot = std::polar(1.0, spec.common_phase);
    for (auto& v : x) v *= rot;
  }

  if (spec.cfo != 0.0)
    for (std::size_t n = 0; n < kPreambleLength; ++n)
      x[n] *= std::polar(1.0, spec.cfo * static_cast<double>(n));

  if (spec.amplitude != 1.0)
    for (auto& v : x) v *= spec.amplitude;

  if (spec.snr_db) {
    double power = 0.0;
    for (const auto& v : x) power += std::norm(v);
    power /= static_cast<double>(kPreambleLength);
    const double noise_power = power * std::pow(10.0, -*spec.snr_db / 10.0);
    const double component_sigma = std::sqrt(noise_power / 2.0);
    Rng rng(seed);
    for (auto& v : x)
      v += ComplexSample(component_sigma * rng.gaussian(),
                         component_sigma * rng.gaussian());
  }
  return x;
}

void generate_fleet(std::span<const DeviceProfile> profiles,
                    std::size_t frames_per_device, std::uint64_t seed,
                    const std::function<void(PreambleRecord&&)>& sink) {
  std::set<std::string> labels;
  for (const DeviceProfile& p : profiles) {
    validate(p);
    if (!labels.insert(p.label).second)
      throw InvalidArgumentError("generate_fleet: duplicate label " + p.label);
  }

  const auto& clean = ideal_preamble();
  for (std::size_t d = 0; d < profiles.size(); ++d) {
    const DeviceProfile& profile = profiles[d];
    for (std::size_t f = 0; f < frames_per_device; ++f) {
      Rng rng = Rng::derive(seed, d, f);
      ImpairmentSpec frame_spec = profile.impairments;
      if (profile.cfo_jitter > 0.0)
        frame_spec.cfo += profile.cfo_jitter * rng.gaussian();
      if (profile.iq_gain_jitter > 0.0)
        frame_spec.iq_gain = std::max(
            frame_spec.iq_gain + profile.iq_gain_jitter * rng.gaussian(), 1e-9);

      PreambleRecord rec;
      rec.device_label = profile.label;
      auto samples = apply_impairments(clean, frame_spec, rng.next_u64());
      rec.samples.assign(samples.begin(), samples.end());
      sink(std::move(rec));
    }
  }
}

std::vector<DeviceProfile> load_fleet_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("load_fleet_spec: cannot open " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw Error("load_fleet_spec: " + path.string() + ": " + e.what());
  }
  if (!doc.contains("devices") || !doc["devices"].is_array())
    throw Error("load_fleet_spec: " + path.string() +
                ": expected a top-level \"devices\" array");

  std::vector<DeviceProfile> profiles;
  for (const auto& d : doc["devices"]) {
    DeviceProfile p;
    try {
      p.label = d.at("label").get<std::string>();
      p.impairments.cfo = d.value("cfo", 0.0);
      p.impairments.iq_gain = d.value("iq_gain", 1.0);
      p.impairments.common_phase = d.value("common_phase", 0.0);
      p.impairments.amplitude = d.value("amplitude", 1.0);
      if (d.contains("snr_db") && !d["snr_db"].is_null())
        p.impairments.snr_db = d["snr_db"].get<double>();
      if (d.contains("channel_taps")) {
        p.impairments.channel_taps.clear();
        for (const auto& tap : d["channel_taps"]) {
          if (!tap.is_array() || tap.size() != 2)
            throw Error("channel_taps entries must be [re, im] pairs");
          p.impairments.channel_taps.emplace_back(tap[0].get<double>(),
                                                  tap[1].get<double>());
        }
      }
      p.cfo_jitter = d.value("cfo_jitter", 0.0);
      p.iq_gain_jitter = d.value("iq_gain_jitter", 0.0);
    } catch (const json::exception& e) {
      throw Error("load_fleet_spec: " + path.string() + ": " + e.what());
    }
    validate(p);
    profiles.push_back(std::move(p));
  }
  if (profiles.empty())
    throw Error("load_fleet_spec: " + path.string() + ": no devices");
  return profiles;
}

void save_fleet_spec(std::span<const DeviceProfile> profiles,
                     const std::filesystem::path& path) {
  json devices = json::array();
  for (const DeviceProfile& p : profiles) {
    json taps = json::array();
    for (const auto& tap : p.impairments.channel_taps)
      taps.push_back({tap.real(), tap.imag()});
    json d = {
        {"label", p.label},
        {"cfo", p.impairments.cfo},
        {"iq_gain", p.impairments.iq_gain},
        {"channel_taps", std::move(taps)},
        {"common_phase", p.impairments.common_phase},
        {"amplitude", p.impairments.amplitude},
        {"cfo_jitter", p.cfo_jitter},
        {"iq_gain_jitter", p.iq_gain_jitter},
    };
    if (p.impairments.snr_db) d["snr_db"] = *p.impairments.snr_db;
    devices.push_back(std::move(d));
  }
  std::ofstream out(path);
  if (!out) throw Error("save_fleet_spec: cannot open " + path.string());
  out << json{{"devices", std::move(devices)}}.dump(2) << '\n';
}

}  // namespace rffp
