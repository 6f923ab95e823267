#include "rffp/feature_matrix.hpp"

#include <cmath>

#include "rffp/errors.hpp"

namespace rffp {

LabeledFeatureMatrix make_feature_matrix(std::size_t reserve) {
  LabeledFeatureMatrix m;
  m.feature_names.assign(kScalarFeatureNames.begin(), kScalarFeatureNames.end());
  if (reserve) {
    m.rows.reserve(reserve);
    m.labels.reserve(reserve);
  }
  return m;
}

void validate(const LabeledFeatureMatrix& m) {
  if (m.rows.empty())
    throw InvalidArgumentError("feature matrix is empty");
  if (m.rows.size() != m.labels.size())
    throw InvalidArgumentError("feature matrix has " +
                               std::to_string(m.rows.size()) + " rows but " +
                               std::to_string(m.labels.size()) + " labels");
  if (m.feature_names.size() != kScalarFeatureCount)
    throw InvalidArgumentError("feature matrix must carry the 15 feature names");
  for (std::size_t i = 0; i < m.rows.size(); ++i) {
    if (m.labels[i].empty())
      throw InvalidArgumentError("empty label at row " + std::to_string(i + 1));
    for (std::size_t f = 0; f < kScalarFeatureCount; ++f)
      if (!std::isfinite(m.rows[i][f]))
        throw InvalidArgumentError("non-finite value at row " +
                                   std::to_string(i + 1) + ", feature " +
                                   m.feature_names[f]);
  }
}

void append_record(LabeledFeatureMatrix& m, const FeatureRecord& rec) {
  m.rows.push_back(scalar_features(rec));
  m.labels.push_back(rec.device_label);
}

}  // namespace rffp
