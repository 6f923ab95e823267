#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rffp/signal_model.hpp"

namespace rffp {

// Ground-truth transmitter impairments injected into synthetic preambles.
// The impairment order is fixed: FIR channel, I-branch gain, common phase,
// per-sample CFO rotation, amplitude scale, AWGN. Real front-ends interleave
// these effects; a fixed order is what makes exact oracle closure possible.
struct ImpairmentSpec {
  double cfo = 0.0;      // rad/sample
  double iq_gain = 1.0;  // I-branch gain, 1.0 = balanced
  std::vector<ComplexSample> channel_taps = {ComplexSample{1.0, 0.0}};
  std::optional<double> snr_db;  // nullopt = noiseless
  double common_phase = 0.0;     // radians
  double amplitude = 1.0;
};

void validate(const ImpairmentSpec& spec);

// One simulated transmitter: nominal impairments plus per-frame Gaussian
// jitter on cfo and iq_gain (frame-to-frame oscillator and gain wander).
struct DeviceProfile {
  std::string label;
  ImpairmentSpec impairments;
  double cfo_jitter = 0.0;
  double iq_gain_jitter = 0.0;
};

void validate(const DeviceProfile& profile);

// The clean 288-sample preamble: 8 repetitions of the standard 16-sample
// short training pattern, the 32-sample cyclic prefix, and two 64-sample
// long training symbols. Both the STS period and the LTS symbol are
// normalized to unit average power.
const std::array<ComplexSample, kPreambleLength>& ideal_preamble();

// Applies `spec` to a clean preamble. Deterministic given `seed` (only the
// AWGN stage draws randomness).
std::array<ComplexSample, kPreambleLength> apply_impairments(
    std::span<const ComplexSample, kPreambleLength> clean,
    const ImpairmentSpec& spec, std::uint64_t seed);

// Emits frames_per_device records per profile in (device, frame) order.
// Every frame draws jitter and noise from an independent stream keyed by
// (seed, device index, frame index), so the stream is reproducible and
// frame-parallel generation would produce identical output.
// Throws InvalidArgumentError on duplicate labels.
void generate_fleet(std::span<const DeviceProfile> profiles,
                    std::size_t frames_per_device, std::uint64_t seed,
                    const std::function<void(PreambleRecord&&)>& sink);

// Fleet specification file (JSON): {"devices": [{label, cfo, iq_gain,
// channel_taps, snr_db, common_phase, amplitude, cfo_jitter,
// iq_gain_jitter}, ...]}. Missing fields take the defaults above.
std::vector<DeviceProfile> load_fleet_spec(const std::filesystem::path& path);
void save_fleet_spec(std::span<const DeviceProfile> profiles,
                     const std::filesystem::path& path);

}  // namespace rffp
