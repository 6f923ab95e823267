#pragma once

#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rffp/feature_extractor.hpp"
#include "rffp/feature_matrix.hpp"
#include "rffp/signal_model.hpp"

namespace rffp {

enum class SchemaKind { kRawPreamble, kFeatureFull };

// Serialization of one complex sample inside a CSV cell. Published datasets
// disagree on the convention, so readers auto-detect per file by default;
// the canonical format written by this library is the parenthesized pair
// "(re,im)" with 17 significant digits.
enum class ComplexFormat { kAuto, kParenPair, kAPlusBj, kJsonList };

// Frequency columns are read as-is; the hint records what the file claims,
// no conversion is ever applied.
enum class UnitHint { kRadPerSample, kHz, kUnknown };

enum class ParseMode { kLenient, kStrict };

struct CsvSchemaDescriptor {
  SchemaKind kind = SchemaKind::kRawPreamble;
  ComplexFormat complex_format = ComplexFormat::kAuto;
  UnitHint unit_hint = UnitHint::kUnknown;
};

struct RowError {
  std::size_t row = 0;  // 1-based data row (header not counted)
  std::string message;
};

struct ReadStats {
  std::size_t records = 0;
  std::vector<RowError> errors;
};

// --- complex literal handling (exposed for tests and tooling) ---

std::string format_complex(ComplexSample v);  // canonical "(re,im)"
ComplexFormat detect_complex_format(std::string_view element);
ComplexSample parse_complex(std::string_view element, ComplexFormat format);

// Splits a vector cell like "[(a,b),(c,d)]" or "['(a+bj)', ...]" into
// top-level elements (outer brackets optional, nesting respected).
std::vector<std::string_view> split_vector_cell(std::string_view cell);

// --- streaming CSV primitives ---

// Minimal RFC-4180 reader: quoted fields may contain commas, doubled quotes
// and newlines; rows stream one at a time so memory stays independent of
// file length.
class CsvReader {
 public:
  explicit CsvReader(const std::filesystem::path& path);
  // Fills `fields` with the next row. Returns false at end of file.
  bool next_row(std::vector<std::string>& fields);

 private:
  int get();
  std::ifstream in_;
  std::filesystem::path path_;
};

// --- raw preamble dataset (columns: mac_address, preamble) ---

// Streams records to `sink` without loading the file. Per-row failures are
// reported with their 1-based row number; lenient mode records them in the
// returned stats and keeps going, strict mode throws CsvRowError at the
// first one. Header problems always throw CsvSchemaError.
ReadStats read_preambles(const std::filesystem::path& path,
                         const CsvSchemaDescriptor& schema, ParseMode mode,
                         const std::function<void(PreambleRecord&&)>& sink);

class PreambleCsvWriter {
 public:
  explicit PreambleCsvWriter(const std::filesystem::path& path);
  void write(const PreambleRecord& rec);

 private:
  std::ofstream out_;
};

// --- feature dataset (Fig.-2-style schema) ---

// Column order of feature CSV files written by this library. Readers locate
// columns by name, so files with extra columns (e.g. raw iq dumps) load fine.
const std::vector<std::string>& feature_csv_columns();

class FeatureCsvWriter {
 public:
  explicit FeatureCsvWriter(const std::filesystem::path& path);
  void write(const FeatureRecord& rec);

 private:
  std::ofstream out_;
};

// Writes feature records either combined into a single CSV or split into one
// "<label>_pre.csv" per device under `path` (then a directory). Returns the
// list of files written, sorted.
class FeatureCsvSink {
 public:
  FeatureCsvSink(const std::filesystem::path& path, bool per_device);
  void write(const FeatureRecord& rec);
  std::vector<std::filesystem::path> files() const;

 private:
  std::filesystem::path path_;
  bool per_device_;
  std::unique_ptr<FeatureCsvWriter> combined_;
  std::map<std::string, std::unique_ptr<FeatureCsvWriter>> per_device_writers_;
};

// Reads full feature records (scalars + vectors). Requires the complete
// column set written by FeatureCsvWriter.
ReadStats read_feature_records(const std::filesystem::path& path,
                               const CsvSchemaDescriptor& schema, ParseMode mode,
                               const std::function<void(FeatureRecord&&)>& sink);

// Extracts the 15 scalar features + labels into `out`, appending in file
// order. Only mac_address and the 15 scalar columns are required; unknown
// columns are ignored. With validate_vectors, rows that carry the error
// vector columns are checked for scalar/vector consistency (1e-12).
ReadStats read_features(const std::filesystem::path& path,
                        const CsvSchemaDescriptor& schema, ParseMode mode,
                        LabeledFeatureMatrix& out, bool validate_vectors = false);

// Scalar-only feature CSV (mac_address + the 15 features), used for smoothed
// matrices where the error vectors no longer correspond to the scalars.
void write_feature_matrix(const LabeledFeatureMatrix& m,
                          const std::filesystem::path& path);

}  // namespace rffp
