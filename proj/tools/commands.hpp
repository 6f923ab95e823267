#pragma once

// Subcommand implementations for the rffp tool, callable in-process so tests
// can drive them without spawning the binary. Every run writes a JSON
// manifest ("<subcommand>.manifest.json") beside its outputs recording the
// resolved parameters; `run_rerun` replays such a manifest.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>

#include "rffp/dataset_io.hpp"
#include "rffp/forest.hpp"
#include "rffp/kalman.hpp"

namespace rffp::cli {

struct ExtractOptions {
  std::string input;   // raw preamble CSV file or directory of them
  std::string output;  // output directory
  bool combined = false;
  std::string complex_format = "auto";  // auto|paren|bj|list
  std::string unit_hint = "unknown";    // rad-per-sample|hz|unknown
  bool strict = false;
  std::size_t threads = 0;
};

struct SynthOptions {
  std::string fleet_spec;  // JSON device list
  std::string output;      // output directory
  std::size_t frames = 1000;
  std::uint64_t seed = 42;
};

struct SmoothingOptions {
  std::string mode = "off";            // on|off
  std::string order = "pre-split";     // pre-split|post-split
  double kf_q_scale = 1e-4;
  std::string kf_r_mode = "empirical";  // empirical|fixed
  double kf_r_value = 0.0;
};

struct BenchmarkOptions {
  std::string input;   // feature CSV file or directory
  std::string output;  // report directory
  std::size_t folds = 5;
  std::size_t trees = 128;
  std::uint64_t seed = 42;
  std::size_t threads = 0;
  bool strict = false;
  SmoothingOptions smoothing;
  std::string save_model;  // optional path for a full-data model
};

struct CorrelateOptions {
  std::string input;
  std::string output;  // report directory
  bool strict = false;
};

struct SmoothOptions {
  std::string input;
  std::string output;  // scalar feature CSV to write
  bool strict = false;
  double kf_q_scale = 1e-4;
  std::string kf_r_mode = "empirical";
  double kf_r_value = 0.0;
};

// Each returns a process exit code (0 = success) and reports diagnostics to
// `diag` (the data tables go to `out`).
int run_extract(const ExtractOptions& options, std::ostream& out,
                std::ostream& diag);
int run_synth(const SynthOptions& options, std::ostream& out,
              std::ostream& diag);
int run_benchmark(const BenchmarkOptions& options, std::ostream& out,
                  std::ostream& diag);
int run_correlate(const CorrelateOptions& options, std::ostream& out,
                  std::ostream& diag);
int run_smooth(const SmoothOptions& options, std::ostream& out,
               std::ostream& diag);
int run_rerun(const std::filesystem::path& manifest, std::ostream& out,
              std::ostream& diag);

}  // namespace rffp::cli
