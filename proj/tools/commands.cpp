#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "rffp/errors.hpp"
#include "rffp/feature_extractor.hpp"
#include "rffp/parallel.hpp"
#include "rffp/synth.hpp"
#include "rffp/version.hpp"

namespace rffp::cli {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;
using Clock = std::chrono::steady_clock;

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

ComplexFormat parse_complex_format(const std::string& name) {
  if (name == "auto") return ComplexFormat::kAuto;
  if (name == "paren") return ComplexFormat::kParenPair;
  if (name == "bj") return ComplexFormat::kAPlusBj;
  if (name == "list") return ComplexFormat::kJsonList;
  throw InvalidArgumentError("unknown complex format '" + name +
                             "' (expected auto|paren|bj|list)");
}

UnitHint parse_unit_hint(const std::string& name) {
  if (name == "rad-per-sample") return UnitHint::kRadPerSample;
  if (name == "hz") return UnitHint::kHz;
  if (name == "unknown") return UnitHint::kUnknown;
  throw InvalidArgumentError("unknown unit hint '" + name +
                             "' (expected rad-per-sample|hz|unknown)");
}

KalmanConfig make_kalman_config(double q_scale, const std::string& r_mode,
                                double r_value) {
  KalmanConfig cfg;
  cfg.process_variance_scale = q_scale;
  if (r_mode == "empirical") {
    cfg.measurement_variance_mode = KalmanConfig::MeasurementVariance::kEmpirical;
  } else if (r_mode == "fixed") {
    cfg.measurement_variance_mode = KalmanConfig::MeasurementVariance::kFixed;
    cfg.fixed_measurement_variance = r_value;
  } else {
    throw InvalidArgumentError("unknown measurement variance mode '" + r_mode +
                               "' (expected empirical|fixed)");
  }
  validate(cfg);
  return cfg;
}

// CSV inputs: a file as-is, or every *.csv in a directory, sorted for a
// deterministic processing order.
std::vector<fs::path> gather_csv_inputs(const fs::path& input) {
  if (fs::is_directory(input)) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(input))
      if (entry.is_regular_file() && entry.path().extension() == ".csv")
        files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    if (files.empty())
      throw Error("no .csv files found in " + input.string());
    return files;
  }
  if (!fs::exists(input)) throw Error("input not found: " + input.string());
  return {input};
}

void write_manifest(const fs::path& directory, const std::string& subcommand,
                    const json& parameters, const json& inputs,
                    const json& outputs, const json& seed,
                    double duration_seconds) {
  json doc = {
      {"tool", "rffp"},
      {"version", kVersion},
      {"subcommand", subcommand},
      {"parameters", parameters},
      {"inputs", inputs},
      {"outputs", outputs},
      {"seed", seed},
      {"duration_seconds", duration_seconds},
  };
  fs::create_directories(directory);
  std::ofstream out(directory / (subcommand + ".manifest.json"));
  if (!out) throw Error("cannot write manifest in " + directory.string());
  out << doc.dump(2) << '\n';
}

json to_json(const ExtractOptions& o) {
  return {{"input", o.input},
          {"output", o.output},
          {"combined", o.combined},
          {"complex_format", o.complex_format},
          {"unit_hint", o.unit_hint},
          {"strict", o.strict},
          {"threads", o.threads}};
}

ExtractOptions extract_from_json(const json& j) {
  ExtractOptions o;
  o.input = j.at("input").get<std::string>();
  o.output = j.at("output").get<std::string>();
  o.combined = j.value("combined", false);
  o.complex_format = j.value("complex_format", std::string("auto"));
  o.unit_hint = j.value("unit_hint", std::string("unknown"));
  o.strict = j.value("strict", false);
  o.threads = j.value("threads", std::size_t{0});
  return o;
}

json to_json(const SynthOptions& o) {
  return {{"fleet_spec", o.fleet_spec},
          {"output", o.output},
          {"frames", o.frames},
          {"seed", o.seed}};
}

SynthOptions synth_from_json(const json& j) {
  SynthOptions o;
  o.fleet_spec = j.at("fleet_spec").get<std::string>();
  o.output = j.at("output").get<std::string>();
  o.frames = j.value("frames", std::size_t{1000});
  o.seed = j.value("seed", std::uint64_t{42});
  return o;
}

json to_json(const SmoothingOptions& o) {
  return {{"mode", o.mode},
          {"order", o.order},
          {"kf_q_scale", o.kf_q_scale},
          {"kf_r_mode", o.kf_r_mode},
          {"kf_r_value", o.kf_r_value}};
}

SmoothingOptions smoothing_from_json(const json& j) {
  SmoothingOptions o;
  o.mode = j.value("mode", std::string("off"));
  o.order = j.value("order", std::string("pre-split"));
  o.kf_q_scale = j.value("kf_q_scale", 1e-4);
  o.kf_r_mode = j.value("kf_r_mode", std::string("empirical"));
  o.kf_r_value = j.value("kf_r_value", 0.0);
  return o;
}

json to_json(const BenchmarkOptions& o) {
  return {{"input", o.input},       {"output", o.output},
          {"folds", o.folds},       {"trees", o.trees},
          {"seed", o.seed},         {"threads", o.threads},
          {"strict", o.strict},     {"smoothing", to_json(o.smoothing)},
          {"save_model", o.save_model}};
}

BenchmarkOptions benchmark_from_json(const json& j) {
  BenchmarkOptions o;
  o.input = j.at("input").get<std::string>();
  o.output = j.at("output").get<std::string>();
  o.folds = j.value("folds", std::size_t{5});
  o.trees = j.value("trees", std::size_t{128});
  o.seed = j.value("seed", std::uint64_t{42});
  o.threads = j.value("threads", std::size_t{0});
  o.strict = j.value("strict", false);
  if (j.contains("smoothing")) o.smoothing = smoothing_from_json(j["smoothing"]);
  o.save_model = j.value("save_model", std::string());
  return o;
}

json to_json(const CorrelateOptions& o) {
  return {{"input", o.input}, {"output", o.output}, {"strict", o.strict}};
}

CorrelateOptions correlate_from_json(const json& j) {
  CorrelateOptions o;
  o.input = j.at("input").get<std::string>();
  o.output = j.at("output").get<std::string>();
  o.strict = j.value("strict", false);
  return o;
}

json to_json(const SmoothOptions& o) {
  return {{"input", o.input},
          {"output", o.output},
          {"strict", o.strict},
          {"kf_q_scale", o.kf_q_scale},
          {"kf_r_mode", o.kf_r_mode},
          {"kf_r_value", o.kf_r_value}};
}

SmoothOptions smooth_from_json(const json& j) {
  SmoothOptions o;
  o.input = j.at("input").get<std::string>();
  o.output = j.at("output").get<std::string>();
  o.strict = j.value("strict", false);
  o.kf_q_scale = j.value("kf_q_scale", 1e-4);
  o.kf_r_mode = j.value("kf_r_mode", std::string("empirical"));
  o.kf_r_value = j.value("kf_r_value", 0.0);
  return o;
}

LabeledFeatureMatrix load_feature_matrix(const fs::path& input, ParseMode mode,
                                         std::ostream& diag) {
  LabeledFeatureMatrix matrix = make_feature_matrix();
  for (const fs::path& file : gather_csv_inputs(input)) {
    ReadStats stats = read_features(file, {}, mode, matrix);
    diag << file.filename().string() << ": " << stats.records << " rows";
    if (!stats.errors.empty()) diag << ", " << stats.errors.size() << " bad rows";
    diag << '\n';
  }
  validate(matrix);
  return matrix;
}

}  // namespace

int run_extract(const ExtractOptions& options, std::ostream&,
                std::ostream& diag) {
  const auto started = Clock::now();
  CsvSchemaDescriptor schema;
  schema.kind = SchemaKind::kRawPreamble;
  schema.complex_format = parse_complex_format(options.complex_format);
  schema.unit_hint = parse_unit_hint(options.unit_hint);
  const ParseMode mode =
      options.strict ? ParseMode::kStrict : ParseMode::kLenient;

  const std::vector<fs::path> inputs = gather_csv_inputs(options.input);
  fs::create_directories(options.output);
  FeatureCsvSink sink(options.combined
                          ? fs::path(options.output) / "features.csv"
                          : fs::path(options.output),
                      /*per_device=*/!options.combined);

  std::size_t total_records = 0, total_parse_errors = 0, total_stage_errors = 0;

  for (const fs::path& file : inputs) {
    std::size_t stage_errors = 0;
    std::vector<PreambleRecord> batch;
    batch.reserve(512);

    struct Slot {
      std::optional<FeatureRecord> record;
      std::string error;
    };

    const auto flush = [&] {
      if (batch.empty()) return;
      std::vector<Slot> slots(batch.size());
      parallel_for(batch.size(), options.threads,
                   [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
          try {
            slots[i].record = extract_features(batch[i]);
          } catch (const Error& e) {
            slots[i].error = e.what();
          }
        }
      });
      for (Slot& slot : slots) {
        if (slot.record) {
          sink.write(*slot.record);
        } else {
          ++stage_errors;
          if (options.strict) throw Error(slot.error);
          diag << "  extraction error: " << slot.error << '\n';
        }
      }
      batch.clear();
    };

    ReadStats stats = read_preambles(file, schema, mode,
                                     [&](PreambleRecord&& rec) {
      batch.push_back(std::move(rec));
      if (batch.size() >= 512) flush();
    });
    flush();

    total_records += stats.records;
    total_parse_errors += stats.errors.size();
    total_stage_errors += stage_errors;
    diag << file.filename().string() << ": " << stats.records << " records";
    if (!stats.errors.empty())
      diag << ", " << stats.errors.size() << " parse errors (first at row "
           << stats.errors.front().row << ")";
    if (stage_errors) diag << ", " << stage_errors << " extraction errors";
    diag << '\n';
  }

  json outputs = json::array();
  for (const auto& f : sink.files()) outputs.push_back(f.string());
  json input_list = json::array();
  for (const auto& f : inputs) input_list.push_back(f.string());
  const double elapsed =
      std::chrono::duration<double>(Clock::now() - started).count();
  write_manifest(options.output, "extract", to_json(options), input_list,
                 outputs, nullptr, elapsed);

  diag << "extract: " << total_records << " records, " << total_parse_errors
       << " parse errors, " << total_stage_errors << " extraction errors, "
       << fmt17(elapsed) << " s\n";
  return 0;
}

int run_synth(const SynthOptions& options, std::ostream&, std::ostream& diag) {
  const auto started = Clock::now();
  const std::vector<DeviceProfile> profiles = load_fleet_spec(options.fleet_spec);
  fs::create_directories(options.output);

  std::map<std::string, std::unique_ptr<PreambleCsvWriter>> writers;
  std::vector<std::string> outputs;
  std::size_t records = 0;
  generate_fleet(profiles, options.frames, options.seed,
                 [&](PreambleRecord&& rec) {
    auto it = writers.find(rec.device_label);
    if (it == writers.end()) {
      fs::path path = fs::path(options.output) / (rec.device_label + "_pre.csv");
      it = writers.emplace(rec.device_label,
                           std::make_unique<PreambleCsvWriter>(path)).first;
      outputs.push_back(path.string());
    }
    it->second->write(rec);
    ++records;
  });

  std::sort(outputs.begin(), outputs.end());
  const double elapsed =
      std::chrono::duration<double>(Clock::now() - started).count();
  write_manifest(options.output, "synth", to_json(options),
                 json::array({options.fleet_spec}), outputs, options.seed,
                 elapsed);
  diag << "synth: " << profiles.size() << " devices x " << options.frames
       << " frames = " << records << " records, " << fmt17(elapsed) << " s\n";
  return 0;
}

int run_benchmark(const BenchmarkOptions& options, std::ostream& out,
                  std::ostream& diag) {
  const auto started = Clock::now();
  const ParseMode mode =
      options.strict ? ParseMode::kStrict : ParseMode::kLenient;
  LabeledFeatureMatrix matrix = load_feature_matrix(options.input, mode, diag);

  CrossValidationOptions cv;
  cv.folds = options.folds;
  cv.forest.tree_count = options.trees;
  cv.forest.seed = options.seed;
  cv.forest.threads = options.threads;
  if (options.smoothing.mode == "on") cv.smoothing = SmoothingMode::kOn;
  else if (options.smoothing.mode != "off")
    throw InvalidArgumentError("unknown smoothing mode '" +
                               options.smoothing.mode + "' (expected on|off)");
  if (options.smoothing.order == "pre-split")
    cv.smoothing_order = SmoothingOrder::kPreSplit;
  else if (options.smoothing.order == "post-split")
    cv.smoothing_order = SmoothingOrder::kPostSplit;
  else
    throw InvalidArgumentError("unknown smoothing order '" +
                               options.smoothing.order +
                               "' (expected pre-split|post-split)");
  cv.kalman = make_kalman_config(options.smoothing.kf_q_scale,
                                 options.smoothing.kf_r_mode,
                                 options.smoothing.kf_r_value);

  EvalReport report = cross_validate(matrix, cv);

  // Human-readable summary.
  char line[256];
  std::snprintf(line, sizeof(line),
                "%zu classes, %zu rows, %zu features\n"
                "%zu-fold stratified cross-validation, %zu trees, seed %llu, "
                "smoothing %s (%s)\n",
                report.classes.size(), matrix.size(), kScalarFeatureCount,
                options.folds, options.trees,
                static_cast<unsigned long long>(options.seed),
                options.smoothing.mode.c_str(), options.smoothing.order.c_str());
  out << line;
  for (std::size_t f = 0; f < report.per_fold_accuracies.size(); ++f) {
    std::snprintf(line, sizeof(line), "  fold %zu accuracy: %.4f\n", f + 1,
                  report.per_fold_accuracies[f]);
    out << line;
  }
  std::snprintf(line, sizeof(line), "overall accuracy: %.4f  (%.2f%%)\n",
                report.accuracy, 100.0 * report.accuracy);
  out << line;

  out << "feature importances (descending):\n";
  std::array<std::size_t, kScalarFeatureCount> order;
  for (std::size_t f = 0; f < kScalarFeatureCount; ++f) order[f] = f;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return report.feature_importances[a] > report.feature_importances[b];
  });
  for (std::size_t f : order) {
    std::snprintf(line, sizeof(line), "  %-22s %.4f\n",
                  std::string(kScalarFeatureNames[f]).c_str(),
                  report.feature_importances[f]);
    out << line;
  }

  // Machine-readable reports.
  fs::create_directories(options.output);
  const fs::path summary_path = fs::path(options.output) / "eval_summary.csv";
  const fs::path confusion_path =
      fs::path(options.output) / "confusion_matrix.csv";
  const fs::path importance_path =
      fs::path(options.output) / "feature_importances.csv";
  {
    std::ofstream f(summary_path);
    f << "fold,accuracy\n";
    for (std::size_t i = 0; i < report.per_fold_accuracies.size(); ++i)
      f << (i + 1) << ',' << fmt17(report.per_fold_accuracies[i]) << '\n';
    f << "overall," << fmt17(report.accuracy) << '\n';
  }
  {
    std::ofstream f(confusion_path);
    f << "actual";
    for (const auto& c : report.classes) f << ',' << c;
    f << '\n';
    for (std::size_t a = 0; a < report.classes.size(); ++a) {
      f << report.classes[a];
      for (std::size_t p = 0; p < report.classes.size(); ++p)
        f << ',' << report.confusion[a][p];
      f << '\n';
    }
  }
  {
    std::ofstream f(importance_path);
    f << "feature,importance\n";
    for (std::size_t i = 0; i < kScalarFeatureCount; ++i)
      f << kScalarFeatureNames[i] << ','
        << fmt17(report.feature_importances[i]) << '\n';
  }

  std::vector<std::string> outputs = {summary_path.string(),
                                      confusion_path.string(),
                                      importance_path.string()};
  if (!options.save_model.empty()) {
    ForestParams params;
    params.tree_count = options.trees;
    params.seed = options.seed;
    params.threads = options.threads;
    save_model(train(matrix, params), options.save_model);
    outputs.push_back(options.save_model);
  }

  const double elapsed =
      std::chrono::duration<double>(Clock::now() - started).count();
  write_manifest(options.output, "benchmark", to_json(options),
                 json::array({options.input}), outputs, options.seed, elapsed);
  diag << "benchmark: done in " << fmt17(elapsed) << " s\n";
  return 0;
}

int run_correlate(const CorrelateOptions& options, std::ostream& out,
                  std::ostream& diag) {
  const auto started = Clock::now();
  const ParseMode mode =
      options.strict ? ParseMode::kStrict : ParseMode::kLenient;
  LabeledFeatureMatrix matrix = load_feature_matrix(options.input, mode, diag);
  CorrelationMatrix corr = pearson_correlation_matrix(matrix);

  out << "Pearson correlation matrix (" << matrix.size() << " rows)\n";
  char cell[64];
  out << "                      ";
  for (std::size_t j = 0; j < kScalarFeatureCount; ++j) {
    std::snprintf(cell, sizeof(cell), " %6zu", j + 1);
    out << cell;
  }
  out << '\n';
  for (std::size_t i = 0; i < kScalarFeatureCount; ++i) {
    std::snprintf(cell, sizeof(cell), "%2zu %-19s", i + 1,
                  std::string(kScalarFeatureNames[i]).c_str());
    out << cell;
    for (std::size_t j = 0; j < kScalarFeatureCount; ++j) {
      if (std::isnan(corr.r[i][j])) std::snprintf(cell, sizeof(cell), "    nan");
      else std::snprintf(cell, sizeof(cell), " %6.3f", corr.r[i][j]);
      out << cell;
    }
    out << '\n';
  }
  bool any_undefined = false;
  for (std::size_t i = 0; i < kScalarFeatureCount; ++i)
    if (!corr.defined[i]) {
      if (!any_undefined) out << "undefined (constant) columns:";
      any_undefined = true;
      out << ' ' << kScalarFeatureNames[i];
    }
  if (any_undefined) out << '\n';

  fs::create_directories(options.output);
  const fs::path matrix_path =
      fs::path(options.output) / "correlation_matrix.csv";
  {
    std::ofstream f(matrix_path);
    f << "feature";
    for (const auto& name : kScalarFeatureNames) f << ',' << name;
    f << '\n';
    for (std::size_t i = 0; i < kScalarFeatureCount; ++i) {
      f << kScalarFeatureNames[i];
      for (std::size_t j = 0; j < kScalarFeatureCount; ++j)
        f << ',' << fmt17(corr.r[i][j]);
      f << '\n';
    }
  }

  const double elapsed =
      std::chrono::duration<double>(Clock::now() - started).count();
  write_manifest(options.output, "correlate", to_json(options),
                 json::array({options.input}),
                 json::array({matrix_path.string()}), nullptr, elapsed);
  diag << "correlate: done in " << fmt17(elapsed) << " s\n";
  return 0;
}

int run_smooth(const SmoothOptions& options, std::ostream&,
               std::ostream& diag) {
  const auto started = Clock::now();
  const ParseMode mode =
      options.strict ? ParseMode::kStrict : ParseMode::kLenient;
  LabeledFeatureMatrix matrix = load_feature_matrix(options.input, mode, diag);
  const KalmanConfig cfg = make_kalman_config(
      options.kf_q_scale, options.kf_r_mode, options.kf_r_value);
  LabeledFeatureMatrix smoothed = smooth_dataset(matrix, cfg);

  const fs::path output(options.output);
  if (output.has_parent_path()) fs::create_directories(output.parent_path());
  write_feature_matrix(smoothed, output);

  const double elapsed =
      std::chrono::duration<double>(Clock::now() - started).count();
  write_manifest(output.has_parent_path() ? output.parent_path()
                                          : fs::path("."),
                 "smooth", to_json(options), json::array({options.input}),
                 json::array({output.string()}), nullptr, elapsed);
  diag << "smooth: " << smoothed.size() << " rows in " << fmt17(elapsed)
       << " s\n";
  return 0;
}

int run_rerun(const std::filesystem::path& manifest, std::ostream& out,
              std::ostream& diag) {
  std::ifstream in(manifest);
  if (!in) throw Error("cannot open manifest " + manifest.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw Error("bad manifest " + manifest.string() + ": " + e.what());
  }
  const std::string subcommand = doc.value("subcommand", "");
  const json& parameters = doc.at("parameters");
  diag << "rerun: " << subcommand << " from " << manifest.string() << '\n';
  if (subcommand == "extract")
    return run_extract(extract_from_json(parameters), out, diag);
  if (subcommand == "synth")
    return run_synth(synth_from_json(parameters), out, diag);
  if (subcommand == "benchmark")
    return run_benchmark(benchmark_from_json(parameters), out, diag);
  if (subcommand == "correlate")
    return run_correlate(correlate_from_json(parameters), out, diag);
  if (subcommand == "smooth")
    return run_smooth(smooth_from_json(parameters), out, diag);
  throw Error("manifest names unknown subcommand '" + subcommand + "'");
}

}  // namespace rffp::cli
