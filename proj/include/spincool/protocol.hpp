#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "spincool/evolve.hpp"
#include "spincool/model.hpp"
#include "spincool/rng.hpp"
#include "spincool/state_vector.hpp"

namespace spincool {

// How each trajectory starts.  random_basis draws one uniformly random
// computational basis state of the system register; haar_product draws an
// independent Haar-random single-qubit state per system spin; ground starts
// from the lowest eigenvector.  The bath always starts fully polarized.
enum class InitialState { random_basis, haar_product, ground };

// What to do when the stopping rule fires: ignore it, cut the trajectory
// short, or record the cycle index and keep going.
enum class StoppingMode { off, stop, mark };

struct ProtocolSpec {
  SpinModelSpec model;
  ScheduleSpec schedule;
  int n_steps = 0;   // Trotter steps per sweep
  double dtau = 0.0; // > 0 overrides the derived T / n_steps
  NoiseSpec noise;
  int n_cycles = 0;  // cycles per trajectory, must be >= 1
  InitialState initial_state = InitialState::random_basis;
  StoppingMode stopping = StoppingMode::off;
  int stopping_k = 5;
  bool record_final_occupations = false;
};

// One cooling cycle as seen from the outside: measurement outcomes plus the
// observables of the post-measurement, post-reset state.
struct CycleRecord {
  int cycle_index = 0;              // 1-based
  std::uint64_t bath_outcomes = 0;  // bit s set: s-th bath spin read down
  int n_flips = 0;                  // popcount of bath_outcomes
  double energy_above_gs = 0.0;     // <H_s> - E_0
  double fidelity = 0.0;            // ground-multiplet weight
  std::vector<double> bond_correlators;
  int noise_insertions = 0;         // Pauli errors applied during the sweep
};

struct TrajectoryRecord {
  std::uint64_t seed = 0;
  std::vector<CycleRecord> cycles;
  std::optional<int> stopped_at;  // first cycle where the rule held
  std::optional<std::vector<double>> final_occupations;
};

// True iff the last k records all have n_flips = 0 (false when fewer than
// k records exist).
bool stopping_rule(const std::vector<CycleRecord>& records, int k = 5);

// Draws the configured initial state.  Stream use, in order: random_basis
// takes one bits(n_system) draw; haar_product takes two uniforms per system
// qubit, qubits ascending; ground takes nothing.
StateVector make_initial_state(const ProtocolSpec& spec,
                               const SpectralData& spectral, RngStream& rng);

// One cycle in place: sweep, projective measurement of every bath qubit in
// ascending register order, observables on the post-measurement and
// post-reset state, bath reset by flipping each spin that read down.  The
// returned state always has a fully polarized bath.
CycleRecord run_cycle(StateVector& psi, const TrotterPlan& plan,
                      const SweepSpec& sweep, const SpinModelSpec& model,
                      const SpectralData& spectral, int cycle_index,
                      RngStream& rng);

// Up to n_cycles cycles from a fresh state.  The stopping rule, when
// enabled, is evaluated after every cycle; stop mode truncates the record,
// mark mode only notes the first cycle where it held.
TrajectoryRecord run_trajectory(const ProtocolSpec& spec,
                                const SpectralData& spectral,
                                std::uint64_t seed);

// Ensemble reduction of one cycle index.  Trajectories cut short by the
// stopping rule drop out of later cycles, so n_trajectories can shrink;
// aggregates over an empty set are NaN.
struct CycleAggregate {
  int cycle_index = 0;
  int n_trajectories = 0;
  double mean_energy_above_gs = 0.0;
  double median_energy_above_gs = 0.0;
  double mean_energy_density = 0.0;  // e = (<H_s> - E_0) / |E_0|
  double median_energy_density = 0.0;
  double mean_fidelity = 0.0;
  double median_fidelity = 0.0;
  double mean_flips = 0.0;
  double flip_fraction = 0.0;  // fraction with n_flips >= 1
};

struct EnsembleSummary {
  std::uint64_t base_seed = 0;
  double ground_energy = 0.0;
  double gap = 0.0;
  std::vector<TrajectoryRecord> trajectories;  // index order
  std::vector<CycleAggregate> per_cycle;

  // Steady-state window [n_cycles/2, n_cycles] (1-based, inclusive): one
  // window mean per trajectory.  A trajectory cut short before the window
  // contributes its final recorded value (its state no longer changes once
  // the protocol has stopped).
  int steady_window_begin = 0;
  std::vector<double> steady_energy_above_gs;
  std::vector<double> steady_energy_density;

  // Post-selection on the stopping rule, evaluated retrospectively over
  // each trajectory's records whatever the stopping mode was.
  std::vector<int> selected;
  double mean_steady_energy_density = 0.0;
  double mean_steady_energy_density_selected = 0.0;  // NaN when none
};

// n_init independent trajectories with seeds derive_seed(base_seed, index).
// n_threads = 0 reads SPINCOOL_THREADS, falling back to the machine's
// parallelism.  Summaries are reduced in trajectory index order, so the
// result is bitwise independent of the thread count.
EnsembleSummary run_ensemble(const ProtocolSpec& spec,
                             const SpectralData& spectral, int n_init,
                             std::uint64_t base_seed, int n_threads = 0);

}  // namespace spincool
