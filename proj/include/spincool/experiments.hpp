#pragma once

#include <string>
#include <vector>

#include "spincool/config.hpp"

namespace spincool {

// The batch jobs the command-line tool dispatches to.  Each one turns a run
// configuration into a directory of CSV tables plus a manifest; names match
// the subcommands one to one.
enum class Experiment {
  run,           // single ensemble: per-cycle aggregates and steady state
  sweep_noise,   // steady-state energy density against the error rate
  sweep_size,    // steady-state energy density against the chain length
  trap,          // steady-state bond correlators (impurity localization)
  occupations,   // final eigenstate occupations against the error rate
  theory_delta,  // sweep kernel against its slow-sweep closed form
  rate_model,    // coarse-grained density: closed form vs integration
  kz,            // cooled vs quench-limited defect-density scaling
};

const char* experiment_name(Experiment e);
// Throws config_error for unknown names, listing the valid ones.
Experiment experiment_by_name(const std::string& name);

// Grid and toggle knobs that are not part of the physical configuration.
// Defaults reproduce the standard survey; every field is echoed into the
// manifest so a rerun sees the exact values.
struct ExperimentOptions {
  bool plots = false;  // also render SVG plots next to the tables

  // sweep-noise: integrated error rates to scan.
  std::vector<double> eta_grid = {0.0, 2e-3, 1e-2, 2e-2};
  // sweep-size: chain lengths to scan.  Positional settings (bath mask,
  // trap) reset per size; couplings and schedule carry over.
  std::vector<int> size_grid = {4, 6, 8, 10};
  // occupations: error rates per panel.
  std::vector<double> occupation_eta_grid = {0.0, 2e-2, 2e-1, 2.0};

  // theory-delta: transition frequencies and total ramp times.
  std::vector<double> omega_grid = {1.0, 2.0};
  std::vector<double> ramp_time_grid = {0.3, 0.5, 1.0,  2.0,   5.0,  10.0,
                                        20.0, 50.0, 100.0, 200.0, 300.0};

  // rate-model and kz: noise generation rates and process orders.
  std::vector<double> noise_rate_grid = default_noise_rate_grid();
  std::vector<int> rate_m_grid = {1, 2, 3};

  // kz: universality inputs for the quench comparison.
  int kz_d = 2;
  double kz_nu = 0.63;
  double kz_z = 1.0;
  int kz_m = 1;

  // 16 points log-spaced over [1e-6, 1e-1].
  static std::vector<double> default_noise_rate_grid();
};

struct ExperimentResult {
  std::vector<std::string> outputs;  // file names written inside out_dir
  std::string manifest_path;
  double wall_seconds = 0.0;
};

// Runs one experiment into config.out_dir.  The directory is created and
// probed for writability before any computation starts (io_error
// otherwise).  Tables are deterministic for a fixed build: rerunning with
// the same configuration and options reproduces them byte for byte,
// regardless of thread count.  A manifest.json capturing the configuration,
// options, and output list is written last.
ExperimentResult run_experiment(const RunConfig& config, Experiment e,
                                const ExperimentOptions& options = {});

// Everything needed to repeat a run, as recovered from its manifest.
struct ManifestData {
  RunConfig config;
  Experiment experiment = Experiment::run;
  ExperimentOptions options;
};

// Loads manifest.json content back into a runnable description.  A missing
// or unreadable file raises io_error; malformed content raises config_error.
ManifestData read_manifest(const std::string& path);

// Renders the SVG plots for an experiment from the CSV tables already
// present in `dir`, returning the file names written.  Reads only the
// tables, so it can run long after the compute, or again with a newer
// renderer.  Missing tables raise io_error.
std::vector<std::string> emit_plots(const std::string& dir, Experiment e);

}  // namespace spincool
