#pragma once

#include <string>
#include <vector>

#include "rffp/feature_extractor.hpp"

namespace rffp {

// N x 15 scalar feature matrix with per-row device labels, the classifier's
// input. Rows keep capture order; smoothing and stratified splitting both
// rely on that.
struct LabeledFeatureMatrix {
  std::vector<ScalarFeatureVector> rows;
  std::vector<std::string> labels;
  std::vector<std::string> feature_names;  // kScalarFeatureNames order

  std::size_t size() const { return rows.size(); }
};

LabeledFeatureMatrix make_feature_matrix(std::size_t reserve = 0);

// Throws InvalidArgumentError when empty, ragged, label-less, or containing
// non-finite entries.
void validate(const LabeledFeatureMatrix& m);

void append_record(LabeledFeatureMatrix& m, const FeatureRecord& rec);

}  // namespace rffp
