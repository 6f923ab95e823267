#include <CLI11.hpp>
#include <iostream>

#include "commands.hpp"
#include "rffp/errors.hpp"
#include "rffp/version.hpp"

int main(int argc, char** argv) {
  CLI::App app{"RF fingerprinting pipeline for IEEE 802.11g preambles"};
  app.set_version_flag("--version", rffp::kVersion);
  app.require_subcommand(1);

  rffp::cli::ExtractOptions extract;
  auto* extract_cmd = app.add_subcommand(
      "extract", "Compute RF features from raw preamble CSVs");
  extract_cmd->add_option("--input", extract.input,
                          "Raw preamble CSV file or directory")->required();
  extract_cmd->add_option("--output", extract.output, "Output directory")
      ->required();
  extract_cmd->add_flag("--combined", extract.combined,
                        "Write one combined features.csv instead of one file "
                        "per device");
  extract_cmd->add_option("--complex-format", extract.complex_format,
                          "Complex literal format: auto|paren|bj|list");
  extract_cmd->add_option("--unit-hint", extract.unit_hint,
                          "Frequency unit claimed by the file (recorded, "
                          "never converted): rad-per-sample|hz|unknown");
  extract_cmd->add_flag("--strict", extract.strict,
                        "Abort on the first bad row (default: report and "
                        "continue)");
  extract_cmd->add_option("--threads", extract.threads,
                          "Worker threads (0 = all cores)");

  rffp::cli::SynthOptions synth;
  auto* synth_cmd = app.add_subcommand(
      "synth", "Generate a synthetic device fleet with known impairments");
  synth_cmd->add_option("--fleet", synth.fleet_spec,
                        "Fleet specification JSON")->required();
  synth_cmd->add_option("--output", synth.output, "Output directory")
      ->required();
  synth_cmd->add_option("--frames", synth.frames, "Frames per device");
  synth_cmd->add_option("--seed", synth.seed, "RNG seed");

  rffp::cli::BenchmarkOptions benchmark;
  auto* benchmark_cmd = app.add_subcommand(
      "benchmark", "Cross-validated Random Forest identification benchmark");
  benchmark_cmd->add_option("--input", benchmark.input,
                            "Feature CSV file or directory")->required();
  benchmark_cmd->add_option("--output", benchmark.output, "Report directory")
      ->required();
  benchmark_cmd->add_option("--folds", benchmark.folds, "Fold count");
  benchmark_cmd->add_option("--trees", benchmark.trees, "Trees per forest");
  benchmark_cmd->add_option("--seed", benchmark.seed, "RNG seed");
  benchmark_cmd->add_option("--threads", benchmark.threads,
                            "Worker threads (0 = all cores)");
  benchmark_cmd->add_flag("--strict", benchmark.strict,
                          "Abort on the first bad row");
  benchmark_cmd->add_option("--smoothing", benchmark.smoothing.mode,
                            "Kalman smoothing: on|off");
  benchmark_cmd->add_option("--smoothing-order", benchmark.smoothing.order,
                            "pre-split: smooth whole sequences before "
                            "folding; post-split: smooth train/test "
                            "separately per fold");
  benchmark_cmd->add_option("--kf-q-scale", benchmark.smoothing.kf_q_scale,
                            "Process variance as a fraction of Var(z)");
  benchmark_cmd->add_option("--kf-r-mode", benchmark.smoothing.kf_r_mode,
                            "Measurement variance: empirical|fixed");
  benchmark_cmd->add_option("--kf-r-value", benchmark.smoothing.kf_r_value,
                            "Measurement variance when --kf-r-mode fixed");
  benchmark_cmd->add_option("--save-model", benchmark.save_model,
                            "Also train on the full dataset and save the "
                            "model JSON here");

  rffp::cli::CorrelateOptions correlate;
  auto* correlate_cmd = app.add_subcommand(
      "correlate", "Pearson correlation matrix of the 15 scalar features");
  correlate_cmd->add_option("--input", correlate.input,
                            "Feature CSV file or directory")->required();
  correlate_cmd->add_option("--output", correlate.output, "Report directory")
      ->required();
  correlate_cmd->add_flag("--strict", correlate.strict,
                          "Abort on the first bad row");

  rffp::cli::SmoothOptions smooth;
  auto* smooth_cmd = app.add_subcommand(
      "smooth", "Kalman-smooth each per-device feature sequence");
  smooth_cmd->add_option("--input", smooth.input,
                         "Feature CSV file or directory")->required();
  smooth_cmd->add_option("--output", smooth.output,
                         "Scalar feature CSV to write")->required();
  smooth_cmd->add_flag("--strict", smooth.strict,
                       "Abort on the first bad row");
  smooth_cmd->add_option("--kf-q-scale", smooth.kf_q_scale,
                         "Process variance as a fraction of Var(z)");
  smooth_cmd->add_option("--kf-r-mode", smooth.kf_r_mode,
                         "Measurement variance: empirical|fixed");
  smooth_cmd->add_option("--kf-r-value", smooth.kf_r_value,
                         "Measurement variance when --kf-r-mode fixed");

  std::string rerun_manifest;
  auto* rerun_cmd = app.add_subcommand(
      "rerun", "Re-execute a recorded run from its manifest");
  rerun_cmd->add_option("manifest", rerun_manifest, "Manifest JSON path")
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (extract_cmd->parsed())
      return rffp::cli::run_extract(extract, std::cout, std::cerr);
    if (synth_cmd->parsed())
      return rffp::cli::run_synth(synth, std::cout, std::cerr);
    if (benchmark_cmd->parsed())
      return rffp::cli::run_benchmark(benchmark, std::cout, std::cerr);
    if (correlate_cmd->parsed())
      return rffp::cli::run_correlate(correlate, std::cout, std::cerr);
    if (smooth_cmd->parsed())
      return rffp::cli::run_smooth(smooth, std::cout, std::cerr);
    if (rerun_cmd->parsed())
      return rffp::cli::run_rerun(rerun_manifest, std::cout, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "rffp: error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
