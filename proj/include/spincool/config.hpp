#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "spincool/evolve.hpp"
#include "spincool/model.hpp"
#include "spincool/protocol.hpp"

namespace spincool {

// Everything one run needs, gathered from plain-text key = value documents.
// Noise is given either as a per-spin, per-insertion-point probability
// (p_err) or as a per-spin error budget for the whole sweep (eta_e); the two
// are related by eta_e = 2 * n_steps * p_err and exactly one may be set.
struct RunConfig {
  // Chain.
  double J = 1.0;
  double h_x = 0.0;
  double h_z = 0.0;
  double J_x = 0.0;
  int n_system = 0;
  Boundary boundary = Boundary::periodic;
  int trap_bond = -1;     // >= 0: replace that bond's coupling with trap_J
  double trap_J = 0.0;    // absolute coupling on the trap bond
  std::string bath_mask;  // '0'/'1' per site; empty = every site coupled

  // Sweep schedule.
  double T = 0.0;
  double B_i = 0.0;
  double B_f = 0.0;
  double g_0 = 0.0;
  double t_1 = -1.0;  // < 0: T/4
  double t_2 = -1.0;  // < 0: 3T/4

  // Trotterization.
  int n_steps = 0;
  double dtau = 0.0;  // > 0 overrides the derived T / n_steps

  // Protocol.
  int n_cycles = 0;
  int n_init = 0;
  bool stopping = false;  // halt a trajectory once the rule fires
  int stopping_k = 5;
  InitialState initial_state = InitialState::random_basis;

  // Noise, exactly one engaged after validation.
  std::optional<double> p_err;
  std::optional<double> eta_e;

  std::uint64_t seed = 1;
  std::string out_dir = "out";

  bool operator==(const RunConfig&) const = default;
};

// One parsed document: order preserved, comments stripped, duplicate keys
// already rejected.  The name labels error messages ("fig3", a file path).
struct ConfigDoc {
  struct Entry {
    std::string key, value;
    int line;
  };
  std::string name;
  std::vector<Entry> entries;
};

// Splits a document into entries.  Grammar: one `key = value` per line,
// blank lines skipped, '#' starts a comment anywhere.  Unknown keys,
// malformed lines and repeated keys raise config_error with the document
// name and line number.
ConfigDoc parse_config_doc(const std::string& text, const std::string& name);

// Merges documents in order (later keys override earlier ones; setting one
// noise key drops the other unless both came from the same document), then
// validates every invariant.  Missing required keys, malformed values and
// out-of-range parameters raise config_error naming the offending entry.
RunConfig build_config(const std::vector<ConfigDoc>& layers);

// Single-document shorthand for build_config.
RunConfig parse_config(const std::string& text,
                       const std::string& name = "<config>");

// Reads and parses one file; unreadable path raises io_error.
RunConfig load_config(const std::string& path);

// Canonical document listing every explicitly meaningful key of the config;
// parse_config(render_config(c)) reproduces c exactly.  This is the form
// echoed into run manifests.
std::string render_config(const RunConfig& config);

// Named parameter bundles shipped with the tool, one per reference
// experiment.  preset_text returns the canonical document (also the
// `presets` subcommand output); unknown names raise config_error.
const std::vector<std::string>& preset_names();
const std::string& preset_text(const std::string& name);
RunConfig preset_config(const std::string& name);

// Engine-facing views of a validated config.
SpinModelSpec model_from(const RunConfig& config);
ScheduleSpec schedule_from(const RunConfig& config);
SweepSpec sweep_from(const RunConfig& config);
ProtocolSpec protocol_from(const RunConfig& config);

// The two noise parametrizations, derived from whichever key was given.
double p_err_of(const RunConfig& config);
double eta_e_of(const RunConfig& config);

}  // namespace spincool
