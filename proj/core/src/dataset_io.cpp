#include "rffp/dataset_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>

#include "rffp/errors.hpp"

namespace rffp {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

// Strips one layer of matching single or double quotes (python repr lists
// wrap every element in quotes).
std::string_view strip_quotes(std::string_view s) {
  s = trim(s);
  if (s.size() >= 2 && (s.front() == '\'' || s.front() == '"') &&
      s.back() == s.front()) {
    s.remove_prefix(1);
    s.remove_suffix(1);
    s = trim(s);
  }
  return s;
}

double parse_double(std::string_view s, const char* what) {
  s = trim(s);
  // from_chars rejects a leading '+', which python-style reprs emit freely.
  bool negate = false;
  if (!s.empty() && (s.front() == '+' || s.front() == '-')) {
    negate = s.front() == '-';
    s.remove_prefix(1);
  }
  double value = 0.0;
  const char* begin = s.data();
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (s.empty() || ec != std::errc{} || ptr != end)
    throw InvalidArgumentError(std::string(what) + ": cannot parse number '" +
                               std::string(s) + "'");
  return negate ? -value : value;
}

// Splits on top-level commas, respecting () and [] nesting.
std::vector<std::string_view> split_top_level(std::string_view s) {
  std::vector<std::string_view> parts;
  int depth = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    char c = s[i];
    if (c == '(' || c == '[') ++depth;
    else if (c == ')' || c == ']') --depth;
    else if (c == ',' && depth == 0) {
      parts.push_back(trim(s.substr(start, i - start)));
      start = i + 1;
    }
  }
  parts.push_back(trim(s.substr(start)));
  return parts;
}

ComplexSample parse_paren_pair(std::string_view s) {
  if (s.size() < 2 || s.front() != '(' || s.back() != ')')
    throw InvalidArgumentError("complex literal '" + std::string(s) +
                               "' is not a parenthesized pair");
  auto parts = split_top_level(s.substr(1, s.size() - 2));
  if (parts.size() != 2)
    throw InvalidArgumentError("complex literal '" + std::string(s) +
                               "' does not have two components");
  return {parse_double(parts[0], "paren pair"),
          parse_double(parts[1], "paren pair")};
}

ComplexSample parse_a_plus_bj(std::string_view s) {
  if (s.size() >= 2 && s.front() == '(' && s.back() == ')')
    s = trim(s.substr(1, s.size() - 2));
  if (s.empty())
    throw InvalidArgumentError("empty complex literal");

  const bool imaginary_suffix = s.back() == 'j' || s.back() == 'J';
  std::string_view body = imaginary_suffix ? s.substr(0, s.size() - 1) : s;

  // Last +/- that is not an exponent sign splits real and imaginary parts.
  std::size_t split = std::string_view::npos;
  for (std::size_t i = 1; i < body.size(); ++i) {
    char c = body[i];
    if ((c == '+' || c == '-') && body[i - 1] != 'e' && body[i - 1] != 'E')
      split = i;
  }

  if (!imaginary_suffix) {
    if (split != std::string_view::npos)
      throw InvalidArgumentError("complex literal '" + std::string(s) +
                                 "' has two parts but no imaginary suffix");
    return {parse_double(body, "complex real part"), 0.0};
  }
  if (split == std::string_view::npos) {
    // pure imaginary: "1.5j", "j", "-j"
    if (body.empty() || body == "+") return {0.0, 1.0};
    if (body == "-") return {0.0, -1.0};
    return {0.0, parse_double(body, "complex imaginary part")};
  }
  std::string_view im = body.substr(split);
  double im_value;
  if (im == "+") im_value = 1.0;
  else if (im == "-") im_value = -1.0;
  else im_value = parse_double(im, "complex imaginary part");
  return {parse_double(body.substr(0, split), "complex real part"), im_value};
}

ComplexSample parse_json_list(std::string_view s) {
  if (s.size() < 2 || s.front() != '[' || s.back() != ']')
    throw InvalidArgumentError("complex literal '" + std::string(s) +
                               "' is not a two-element list");
  auto parts = split_top_level(s.substr(1, s.size() - 2));
  if (parts.size() != 2)
    throw InvalidArgumentError("complex literal '" + std::string(s) +
                               "' does not have two components");
  return {parse_double(parts[0], "list pair"),
          parse_double(parts[1], "list pair")};
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string csv_quote(const std::string& field) {
  if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::size_t find_column(const std::vector<std::string>& header,
                        const std::string& name,
                        const std::filesystem::path& path) {
  auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end())
    throw CsvSchemaError(path.string() + ": missing required column '" + name +
                         "'");
  return static_cast<std::size_t>(it - header.begin());
}

std::optional<std::size_t> find_optional_column(
    const std::vector<std::string>& header, const std::string& name) {
  auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) return std::nullopt;
  return static_cast<std::size_t>(it - header.begin());
}

}  // namespace

std::string format_complex(ComplexSample v) {
  return "(" + format_double(v.real()) + "," + format_double(v.imag()) + ")";
}

ComplexFormat detect_complex_format(std::string_view element) {
  std::string_view s = strip_quotes(element);
  if (s.empty())
    throw InvalidArgumentError("cannot detect complex format of empty element");
  if (s.front() == '[') return ComplexFormat::kJsonList;
  const bool has_j = s.find_first_of("jJ") != std::string_view::npos;
  if (has_j) return ComplexFormat::kAPlusBj;
  if (s.front() == '(') return ComplexFormat::kParenPair;
  return ComplexFormat::kAPlusBj;  // bare real number
}

ComplexSample parse_complex(std::string_view element, ComplexFormat format) {
  std::string_view s = strip_quotes(element);
  if (format == ComplexFormat::kAuto) format = detect_complex_format(s);
  ComplexSample v;
  switch (format) {
    case ComplexFormat::kParenPair: v = parse_paren_pair(s); break;
    case ComplexFormat::kAPlusBj: v = parse_a_plus_bj(s); break;
    case ComplexFormat::kJsonList: v = parse_json_list(s); break;
    default:
      throw InvalidArgumentError("parse_complex: unresolved format");
  }
  return v;
}

std::vector<std::string_view> split_vector_cell(std::string_view cell) {
  std::string_view s = trim(cell);
  if (s.size() >= 2 && s.front() == '[' && s.back() == ']')
    s = trim(s.substr(1, s.size() - 2));
  if (s.empty()) return {};
  return split_top_level(s);
}

// --- CsvReader ---

CsvReader::CsvReader(const std::filesystem::path& path)
    : in_(path, std::ios::binary), path_(path) {
  if (!in_) throw CsvSchemaError(path.string() + ": cannot open file");
}

int CsvReader::get() { return in_.get(); }

bool CsvReader::next_row(std::vector<std::string>& fields) {
  fields.clear();
  std::string field;
  bool in_quotes = false;
  bool saw_any = false;
  bool field_started = false;

  while (true) {
    int c = get();
    if (c == std::char_traits<char>::eof()) {
      if (!saw_any) return false;
      fields.push_back(std::move(field));
      return true;
    }
    if (in_quotes) {
      if (c == '"') {
        int d = get();
        if (d == '"') {
          field += '"';
        } else {
          in_quotes = false;
          if (d == std::char_traits<char>::eof()) {
            fields.push_back(std::move(field));
            return true;
          }
          if (d == ',') {
            fields.push_back(std::move(field));
            field.clear();
            field_started = false;
          } else if (d == '\n') {
            fields.push_back(std::move(field));
            return true;
          } else if (d == '\r') {
            int e = get();
            if (e != '\n' && e != std::char_traits<char>::eof()) in_.unget();
            fields.push_back(std::move(field));
            return true;
          } else {
            field += static_cast<char>(d);  // lenient: stray char after quote
          }
        }
      } else {
        field += static_cast<char>(c);
      }
      saw_any = true;
      continue;
    }
    if (c == '\n' || c == '\r') {
      if (c == '\r') {
        int d = get();
        if (d != '\n' && d != std::char_traits<char>::eof()) in_.unget();
      }
      if (!saw_any) continue;  // skip blank lines
      fields.push_back(std::move(field));
      return true;
    }
    saw_any = true;
    if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
      field_started = false;
    } else if (c == '"' && !field_started) {
      in_quotes = true;
      field_started = true;
    } else {
      field += static_cast<char>(c);
      field_started = true;
    }
  }
}

// --- raw preamble dataset ---

ReadStats read_preambles(const std::filesystem::path& path,
                         const CsvSchemaDescriptor& schema, ParseMode mode,
                         const std::function<void(PreambleRecord&&)>& sink) {
  CsvReader reader(path);
  std::vector<std::string> fields;
  if (!reader.next_row(fields))
    throw CsvSchemaError(path.string() + ": empty file, missing header");
  const std::size_t mac_col = find_column(fields, "mac_address", path);
  const std::size_t pre_col = find_column(fields, "preamble", path);
  const std::size_t min_fields = std::max(mac_col, pre_col) + 1;

  ComplexFormat format = schema.complex_format;
  ReadStats stats;
  std::size_t row = 0;

  while (reader.next_row(fields)) {
    ++row;
    try {
      if (fields.size() < min_fields)
        throw CsvRowError(row, "expected at least " +
                                   std::to_string(min_fields) +
                                   " fields, got " +
                                   std::to_string(fields.size()));
      PreambleRecord rec;
      rec.device_label = std::string(trim(fields[mac_col]));

      auto elements = split_vector_cell(fields[pre_col]);
      if (elements.size() != kPreambleLength)
        throw CsvRowError(row, "preamble has " +
                                   std::to_string(elements.size()) +
                                   " samples, expected " +
                                   std::to_string(kPreambleLength));
      ComplexFormat row_format = format;
      if (row_format == ComplexFormat::kAuto)
        row_format = detect_complex_format(elements[0]);

      rec.samples.reserve(kPreambleLength);
      for (std::size_t i = 0; i < elements.size(); ++i) {
        try {
          rec.samples.push_back(parse_complex(elements[i], row_format));
        } catch (const Error& e) {
          throw CsvRowError(row, "sample " + std::to_string(i + 1) + ": " +
                                     e.what());
        }
      }
      try {
        validate(rec);
      } catch (const Error& e) {
        throw CsvRowError(row, e.what());
      }
      format = row_format;  // latch the detected per-file format
      sink(std::move(rec));
      ++stats.records;
    } catch (const CsvRowError& e) {
      if (mode == ParseMode::kStrict) throw;
      stats.errors.push_back({e.row(), e.what()});
    }
  }
  return stats;
}

PreambleCsvWriter::PreambleCsvWriter(const std::filesystem::path& path)
    : out_(path, std::ios::binary) {
  if (!out_)
    throw Error("PreambleCsvWriter: cannot open " + path.string());
  out_ << "mac_address,preamble\n";
}

void PreambleCsvWriter::write(const PreambleRecord& rec) {
  std::string cell = "[";
  cell.reserve(kPreambleLength * 24);
  for (std::size_t i = 0; i < rec.samples.size(); ++i) {
    if (i) cell += ',';
    cell += format_complex(rec.samples[i]);
  }
  cell += ']';
  out_ << rec.device_label << ',' << csv_quote(cell) << '\n';
}

// --- feature dataset ---

const std::vector<std::string>& feature_csv_columns() {
  static const std::vector<std::string> cols = {
      "mac_address",
      "short_freq",
      "long_freq",
      "cfo",
      "phase_error_v1",
      "phase_error_v2",
      "mag_error_v1",
      "mag_error_v2",
      "phase_error_mean_1",
      "phase_error_var_1",
      "phase_error_mean_2",
      "phase_error_var_2",
      "mag_error_mean_1",
      "mag_error_var_1",
      "mag_error_mean_2",
      "mag_error_var_2",
      "iqi_1",
      "iqi_2",
      "frac_dimension_1",
      "frac_dimension_2",
  };
  return cols;
}

namespace {

std::string format_real_vector(std::span<const double> v) {
  std::string cell = "[";
  cell.reserve(v.size() * 20);
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) cell += ',';
    cell += format_double(v[i]);
  }
  cell += ']';
  return cell;
}

std::array<double, kSymbolLength> parse_real_vector(std::string_view cell,
                                                    const char* what) {
  auto elements = split_vector_cell(cell);
  if (elements.size() != kSymbolLength)
    throw InvalidArgumentError(std::string(what) + ": expected " +
                               std::to_string(kSymbolLength) +
                               " entries, got " +
                               std::to_string(elements.size()));
  std::array<double, kSymbolLength> out{};
  for (std::size_t i = 0; i < kSymbolLength; ++i)
    out[i] = parse_double(strip_quotes(elements[i]), what);
  return out;
}

}  // namespace

FeatureCsvWriter::FeatureCsvWriter(const std::filesystem::path& path)
    : out_(path, std::ios::binary) {
  if (!out_) throw Error("FeatureCsvWriter: cannot open " + path.string());
  const auto& cols = feature_csv_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (i) out_ << ',';
    out_ << cols[i];
  }
  out_ << '\n';
}

void FeatureCsvWriter::write(const FeatureRecord& r) {
  std::string line;
  line.reserve(6000);
  line += r.device_label;
  for (double v : {r.short_freq, r.long_freq, r.cfo}) {
    line += ',';
    line += format_double(v);
  }
  for (const auto* vec : {&r.phase_error_v1, &r.phase_error_v2,
                          &r.mag_error_v1, &r.mag_error_v2}) {
    line += ',';
    line += csv_quote(format_real_vector(*vec));
  }
  for (double v : {r.phase_error_mean_1, r.phase_error_var_1,
                   r.phase_error_mean_2, r.phase_error_var_2,
                   r.mag_error_mean_1, r.mag_error_var_1, r.mag_error_mean_2,
                   r.mag_error_var_2, r.iqi_1, r.iqi_2, r.frac_dimension_1,
                   r.frac_dimension_2}) {
    line += ',';
    line += format_double(v);
  }
  line += '\n';
  out_ << line;
}

FeatureCsvSink::FeatureCsvSink(const std::filesystem::path& path,
                               bool per_device)
    : path_(path), per_device_(per_device) {
  if (per_device_) {
    std::filesystem::create_directories(path_);
  } else {
    if (path_.has_parent_path())
      std::filesystem::create_directories(path_.parent_path());
    combined_ = std::make_unique<FeatureCsvWriter>(path_);
  }
}

void FeatureCsvSink::write(const FeatureRecord& rec) {
  if (!per_device_) {
    combined_->write(rec);
    return;
  }
  auto it = per_device_writers_.find(rec.device_label);
  if (it == per_device_writers_.end()) {
    auto writer = std::make_unique<FeatureCsvWriter>(
        path_ / (rec.device_label + "_pre.csv"));
    it = per_device_writers_.emplace(rec.device_label, std::move(writer)).first;
  }
  it->second->write(rec);
}

std::vector<std::filesystem::path> FeatureCsvSink::files() const {
  std::vector<std::filesystem::path> out;
  if (!per_device_) {
    out.push_back(path_);
    return out;
  }
  for (const auto& [label, writer] : per_device_writers_)
    out.push_back(path_ / (label + "_pre.csv"));
  return out;
}

ReadStats read_feature_records(const std::filesystem::path& path,
                               const CsvSchemaDescriptor& schema,
                               ParseMode mode,
                               const std::function<void(FeatureRecord&&)>& sink) {
  (void)schema;
  CsvReader reader(path);
  std::vector<std::string> fields;
  if (!reader.next_row(fields))
    throw CsvSchemaError(path.string() + ": empty file, missing header");

  std::vector<std::size_t> col(feature_csv_columns().size());
  for (std::size_t i = 0; i < feature_csv_columns().size(); ++i)
    col[i] = find_column(fields, feature_csv_columns()[i], path);
  const std::size_t min_fields =
      *std::max_element(col.begin(), col.end()) + 1;

  ReadStats stats;
  std::size_t row = 0;
  while (reader.next_row(fields)) {
    ++row;
    try {
      if (fields.size() < min_fields)
        throw CsvRowError(row, "expected at least " +
                                   std::to_string(min_fields) +
                                   " fields, got " +
                                   std::to_string(fields.size()));
      FeatureRecord r;
      std::size_t k = 0;
      const auto next = [&]() -> const std::string& {
        return fields[col[k++]];
      };
      try {
        r.device_label = std::string(trim(next()));
        if (r.device_label.empty())
          throw InvalidArgumentError("empty mac_address");
        r.short_freq = parse_double(next(), "short_freq");
        r.long_freq = parse_double(next(), "long_freq");
        r.cfo = parse_double(next(), "cfo");
        r.phase_error_v1 = parse_real_vector(next(), "phase_error_v1");
        r.phase_error_v2 = parse_real_vector(next(), "phase_error_v2");
        r.mag_error_v1 = parse_real_vector(next(), "mag_error_v1");
        r.mag_error_v2 = parse_real_vector(next(), "mag_error_v2");
        r.phase_error_mean_1 = parse_double(next(), "phase_error_mean_1");
        r.phase_error_var_1 = parse_double(next(), "phase_error_var_1");
        r.phase_error_mean_2 = parse_double(next(), "phase_error_mean_2");
        r.phase_error_var_2 = parse_double(next(), "phase_error_var_2");
        r.mag_error_mean_1 = parse_double(next(), "mag_error_mean_1");
        r.mag_error_var_1 = parse_double(next(), "mag_error_var_1");
        r.mag_error_mean_2 = parse_double(next(), "mag_error_mean_2");
        r.mag_error_var_2 = parse_double(next(), "mag_error_var_2");
        r.iqi_1 = parse_double(next(), "iqi_1");
        r.iqi_2 = parse_double(next(), "iqi_2");
        r.frac_dimension_1 = parse_double(next(), "frac_dimension_1");
        r.frac_dimension_2 = parse_double(next(), "frac_dimension_2");
      } catch (const Error& e) {
        throw CsvRowError(row, e.what());
      }
      sink(std::move(r));
      ++stats.records;
    } catch (const CsvRowError& e) {
      if (mode == ParseMode::kStrict) throw;
      stats.errors.push_back({e.row(), e.what()});
    }
  }
  return stats;
}

ReadStats read_features(const std::filesystem::path& path,
                        const CsvSchemaDescriptor& schema, ParseMode mode,
                        LabeledFeatureMatrix& out, bool validate_vectors) {
  (void)schema;
  CsvReader reader(path);
  std::vector<std::string> fields;
  if (!reader.next_row(fields))
    throw CsvSchemaError(path.string() + ": empty file, missing header");

  const std::size_t mac_col = find_column(fields, "mac_address", path);
  std::array<std::size_t, kScalarFeatureCount> col{};
  for (std::size_t f = 0; f < kScalarFeatureCount; ++f)
    col[f] = find_column(fields, std::string(kScalarFeatureNames[f]), path);

  // Error vector columns are optional; when present they can be checked for
  // scalar consistency.
  struct VectorCheck {
    std::optional<std::size_t> column;
    std::size_t mean_feature;
    std::size_t var_feature;
    const char* name;
  };
  std::vector<VectorCheck> checks;
  if (validate_vectors) {
    const auto feature_index = [](std::string_view name) {
      for (std::size_t f = 0; f < kScalarFeatureCount; ++f)
        if (kScalarFeatureNames[f] == name) return f;
      throw InvalidArgumentError("unknown feature name");
    };
    checks = {
        {find_optional_column(fields, "phase_error_v1"),
         feature_index("phase_error_mean_1"), feature_index("phase_error_var_1"),
         "phase_error_v1"},
        {find_optional_column(fields, "phase_error_v2"),
         feature_index("phase_error_mean_2"), feature_index("phase_error_var_2"),
         "phase_error_v2"},
        {find_optional_column(fields, "mag_error_v1"),
         feature_index("mag_error_mean_1"), feature_index("mag_error_var_1"),
         "mag_error_v1"},
        {find_optional_column(fields, "mag_error_v2"),
         feature_index("mag_error_mean_2"), feature_index("mag_error_var_2"),
         "mag_error_v2"},
    };
  }

  std::size_t min_fields = mac_col + 1;
  for (std::size_t c : col) min_fields = std::max(min_fields, c + 1);

  if (out.feature_names.empty())
    out.feature_names.assign(kScalarFeatureNames.begin(),
                             kScalarFeatureNames.end());

  ReadStats stats;
  std::size_t row = 0;
  while (reader.next_row(fields)) {
    ++row;
    try {
      if (fields.size() < min_fields)
        throw CsvRowError(row, "expected at least " +
                                   std::to_string(min_fields) +
                                   " fields, got " +
                                   std::to_string(fields.size()));
      std::string label(trim(fields[mac_col]));
      if (label.empty()) throw CsvRowError(row, "empty mac_address");
      ScalarFeatureVector values{};
      for (std::size_t f = 0; f < kScalarFeatureCount; ++f) {
        try {
          values[f] = parse_double(fields[col[f]],
                                   std::string(kScalarFeatureNames[f]).c_str());
        } catch (const Error& e) {
          throw CsvRowError(row, e.what());
        }
      }
      for (const VectorCheck& check : checks) {
        if (!check.column || *check.column >= fields.size()) continue;
        std::array<double, kSymbolLength> vec;
        try {
          vec = parse_real_vector(fields[*check.column], check.name);
        } catch (const Error& e) {
          throw CsvRowError(row, e.what());
        }
        MeanVar stats_from_vec = vector_stats(vec);
        if (std::abs(stats_from_vec.mean - values[check.mean_feature]) > 1e-12 ||
            std::abs(stats_from_vec.variance - values[check.var_feature]) > 1e-12)
          throw CsvRowError(row, std::string(check.name) +
                                     ": stored mean/variance do not match the "
                                     "stored vector");
      }
      out.rows.push_back(values);
      out.labels.push_back(std::move(label));
      ++stats.records;
    } catch (const CsvRowError& e) {
      if (mode == ParseMode::kStrict) throw;
      stats.errors.push_back({e.row(), e.what()});
    }
  }
  return stats;
}

void write_feature_matrix(const LabeledFeatureMatrix& m,
                          const std::filesystem::path& path) {
  validate(m);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("write_feature_matrix: cannot open " + path.string());
  out << "mac_address";
  for (const std::string& name : m.feature_names) out << ',' << name;
  out << '\n';
  for (std::size_t i = 0; i < m.size(); ++i) {
    out << m.labels[i];
    for (double v : m.rows[i]) out << ',' << format_double(v);
    out << '\n';
  }
  if (!out) throw Error("write_feature_matrix: write failed for " + path.string());
}

}  // namespace rffp
