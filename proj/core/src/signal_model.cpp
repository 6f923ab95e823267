#include "rffp/signal_model.hpp"

#include <cmath>

#include "rffp/errors.hpp"

namespace rffp {

void validate(const PreambleRecord& rec) {
  if (rec.device_label.empty())
    throw MalformedRecordError("preamble record has an empty device label");
  if (rec.samples.size() != kPreambleLength)
    throw MalformedRecordError("preamble record has " +
                               std::to_string(rec.samples.size()) +
                               " samples, expected " +
                               std::to_string(kPreambleLength));
  for (std::size_t i = 0; i < rec.samples.size(); ++i) {
    const auto& s = rec.samples[i];
    if (!std::isfinite(s.real()) || !std::isfinite(s.imag()))
      throw MalformedRecordError("non-finite sample at position " +
                                 std::to_string(i + 1));
  }
}

PreambleView split_preamble(const PreambleRecord& rec) {
  validate(rec);
  std::span<const ComplexSample> all(rec.samples);
  return PreambleView{
      all.subspan(0, kStsLength),
      all.subspan(kStsLength, kGi2Length),
      all.subspan(kStsLength + kGi2Length, kLtsLength),
  };
}

const IdealLts& ideal_lts() {
  // Centered order, subcarrier -32 first, DC at index 32 (0-based).
  static const IdealLts table = {
      0,  0,  0,  0,  0,  0,  1,  1,  -1, -1, 1,  1,  -1, 1,  -1, 1,
      1,  1,  1,  1,  1,  -1, -1, 1,  1,  -1, 1,  -1, 1,  1,  1,  1,
      0,  1,  -1, -1, 1,  1,  -1, 1,  -1, 1,  -1, -1, -1, -1, -1, 1,
      1,  -1, -1, 1,  -1, 1,  -1, 1,  1,  1,  1,  0,  0,  0,  0,  0,
  };
  return table;
}

const ActiveSubcarrierMask& active_subcarrier_mask() {
  static const ActiveSubcarrierMask mask = [] {
    ActiveSubcarrierMask m{};
    const IdealLts& lts = ideal_lts();
    std::size_t k = 0;
    for (std::size_t j = 0; j < kSymbolLength; ++j) {
      m.active[j] = lts[j] != 0;
      if (m.active[j]) m.indices[k++] = j;
    }
    return m;
  }();
  return mask;
}

}  // namespace rffp
