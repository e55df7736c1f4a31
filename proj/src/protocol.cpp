#include "spincool/protocol.hpp"

#include <atomic>
#include <bit>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <numbers>
#include <string>
#include <thread>

#include "spincool/errors.hpp"
#include "spincool/observables.hpp"
#include "spincool/stats.hpp"

namespace spincool {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

void validate(const ProtocolSpec& spec) {
  if (spec.n_cycles < 1)
    throw config_error("a trajectory needs at least one cycle");
  if (spec.stopping_k < 1)
    throw config_error("the stopping rule needs k >= 1");
  if (spec.n_steps < 1) throw config_error("a sweep needs at least one step");
}

SweepSpec make_protocol_sweep(const ProtocolSpec& spec) {
  if (spec.dtau > 0.0)
    return make_sweep_fixed_dt(spec.schedule, spec.n_steps, spec.dtau);
  return make_sweep(spec.schedule, spec.n_steps);
}

// Energy density e = (E - E_0)/|E_0|, positive for states above the ground
// energy; undefined (NaN) for the pathological E_0 = 0.
double energy_density(double energy_above_gs, double e0) {
  const double denom = std::abs(e0);
  if (denom == 0.0) return kNan;
  return energy_above_gs / denom;
}

int resolve_thread_count(int n_threads, int n_init) {
  int n = n_threads;
  if (n <= 0) {
    if (const char* env = std::getenv("SPINCOOL_THREADS")) {
      char* end = nullptr;
      const long parsed = std::strtol(env, &end, 10);
      if (end != env && *end == '\0' && parsed > 0) n = int(parsed);
    }
  }
  if (n <= 0) n = int(std::thread::hardware_concurrency());
  if (n <= 0) n = 1;
  return n < n_init ? n : n_init;
}

}  // namespace

bool stopping_rule(const std::vector<CycleRecord>& records, int k) {
  if (k < 1 || records.size() < std::size_t(k)) return false;
  for (std::size_t i = records.size() - std::size_t(k); i < records.size();
       ++i)
    if (records[i].n_flips != 0) return false;
  return true;
}

StateVector make_initial_state(const ProtocolSpec& spec,
                               const SpectralData& spectral, RngStream& rng) {
  const auto& m = spec.model;
  const int n_sys = m.n_system;
  switch (spec.initial_state) {
    case InitialState::random_basis:
      return StateVector::basis_state(m.n_total(), rng.bits(n_sys));
    case InitialState::haar_product: {
      StateVector psi(m.n_total());
      auto& a = psi.amps();
      std::vector<cplx> up(n_sys), down(n_sys);
      for (int q = 0; q < n_sys; ++q) {
        const double theta = std::acos(1.0 - 2.0 * rng.uniform());
        const double phi = 2.0 * std::numbers::pi * rng.uniform();
        up[q] = cplx{std::cos(0.5 * theta), 0.0};
        down[q] = std::polar(std::sin(0.5 * theta), phi);
      }
      const std::uint64_t sys_dim = std::uint64_t{1} << n_sys;
      for (std::uint64_t b = 0; b < sys_dim; ++b) {
        cplx amp{1.0, 0.0};
        for (int q = 0; q < n_sys; ++q)
          amp *= (b >> q) & 1 ? down[q] : up[q];
        a[b] = amp;
      }
      return psi;
    }
    case InitialState::ground: {
      StateVector psi(m.n_total());
      auto& a = psi.amps();
      const std::uint64_t sys_dim = std::uint64_t{1} << n_sys;
      for (std::uint64_t b = 0; b < sys_dim; ++b)
        a[b] = cplx{spectral.vectors(b, 0), 0.0};
      return psi;
    }
  }
  throw config_error("unknown initial state option");
}

CycleRecord run_cycle(StateVector& psi, const TrotterPlan& plan,
                      const SweepSpec& sweep, const SpinModelSpec& model,
                      const SpectralData& spectral, int cycle_index,
                      RngStream& rng) {
  CycleRecord rec;
  rec.cycle_index = cycle_index;
  rec.noise_insertions = int(run_sweep(psi, plan, sweep, rng).size());

  const auto sites = model.masked_sites();
  for (std::size_t s = 0; s < sites.size(); ++s) {
    if (measure_qubit(psi, model.bath_qubit(sites[s]), rng) == 1)
      rec.bath_outcomes |= std::uint64_t{1} << s;
  }
  rec.n_flips = std::popcount(rec.bath_outcomes);

  // Reset before recording: the observables below are those of the state
  // the next cycle starts from.
  for (std::size_t s = 0; s < sites.size(); ++s)
    if ((rec.bath_outcomes >> s) & 1)
      apply_pauli(psi, model.bath_qubit(sites[s]), 0);

  rec.energy_above_gs = energy_expectation(psi, model) - spectral.e0;
  rec.fidelity = fidelity_to_ground_space(psi, model, spectral);
  rec.bond_correlators = bond_correlators(psi, model);
  return rec;
}

TrajectoryRecord run_trajectory(const ProtocolSpec& spec,
                                const SpectralData& spectral,
                                std::uint64_t seed) {
  validate(spec);
  const SweepSpec sweep = make_protocol_sweep(spec);
  const TrotterPlan plan(spec.model, spec.schedule, sweep.dtau, spec.noise);

  TrajectoryRecord traj;
  traj.seed = seed;
  RngStream rng(seed);
  StateVector psi = make_initial_state(spec, spectral, rng);

  for (int c = 1; c <= spec.n_cycles; ++c) {
    traj.cycles.push_back(
        run_cycle(psi, plan, sweep, spec.model, spectral, c, rng));
    if (spec.stopping != StoppingMode::off && !traj.stopped_at &&
        stopping_rule(traj.cycles, spec.stopping_k)) {
      traj.stopped_at = c;
      if (spec.stopping == StoppingMode::stop) break;
    }
  }
  if (spec.record_final_occupations)
    traj.final_occupations =
        eigenstate_occupations(psi, spec.model, spectral);
  return traj;
}

EnsembleSummary run_ensemble(const ProtocolSpec& spec,
                             const SpectralData& spectral, int n_init,
                             std::uint64_t base_seed, int n_threads) {
  validate(spec);
  if (n_init < 1) throw config_error("an ensemble needs n_init >= 1");

  EnsembleSummary sum;
  sum.base_seed = base_seed;
  sum.ground_energy = spectral.e0;
  sum.gap = spectral.gap;
  sum.trajectories.resize(n_init);

  const int workers = resolve_thread_count(n_threads, n_init);
  std::atomic<int> next{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;
  auto work = [&] {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= n_init) return;
      try {
        sum.trajectories[i] =
            run_trajectory(spec, spectral, derive_seed(base_seed, i));
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  // All reductions below run single threaded in trajectory index order, so
  // the summary is bitwise reproducible whatever the pool size was.
  const double e0 = spectral.e0;
  sum.per_cycle.reserve(spec.n_cycles);
  for (int c = 1; c <= spec.n_cycles; ++c) {
    CycleAggregate agg;
    agg.cycle_index = c;
    std::vector<double> de, dens, fid;
    double flips = 0.0, flipped = 0.0;
    for (const auto& traj : sum.trajectories) {
      if (traj.cycles.size() < std::size_t(c)) continue;
      const auto& rec = traj.cycles[c - 1];
      de.push_back(rec.energy_above_gs);
      dens.push_back(energy_density(rec.energy_above_gs, e0));
      fid.push_back(rec.fidelity);
      flips += rec.n_flips;
      flipped += rec.n_flips >= 1 ? 1.0 : 0.0;
    }
    agg.n_trajectories = int(de.size());
    if (de.empty()) {
      agg.mean_energy_above_gs = agg.median_energy_above_gs = kNan;
      agg.mean_energy_density = agg.median_energy_density = kNan;
      agg.mean_fidelity = agg.median_fidelity = kNan;
      agg.mean_flips = agg.flip_fraction = kNan;
    } else {
      agg.mean_energy_above_gs = stats::mean(de);
      agg.median_energy_above_gs = stats::median(de);
      agg.mean_energy_density = stats::mean(dens);
      agg.median_energy_density = stats::median(dens);
      agg.mean_fidelity = stats::mean(fid);
      agg.median_fidelity = stats::median(fid);
      agg.mean_flips = flips / double(de.size());
      agg.flip_fraction = flipped / double(de.size());
    }
    sum.per_cycle.push_back(std::move(agg));
  }

  sum.steady_window_begin = std::max(1, spec.n_cycles / 2);
  for (int i = 0; i < n_init; ++i) {
    const auto& cycles = sum.trajectories[i].cycles;
    double acc = 0.0;
    int count = 0;
    for (const auto& rec : cycles) {
      if (rec.cycle_index < sum.steady_window_begin) continue;
      acc += rec.energy_above_gs;
      ++count;
    }
    const double window_mean =
        count > 0 ? acc / double(count) : cycles.back().energy_above_gs;
    sum.steady_energy_above_gs.push_back(window_mean);
    sum.steady_energy_density.push_back(energy_density(window_mean, e0));

    int quiet_run = 0;
    for (const auto& rec : cycles) {
      quiet_run = rec.n_flips == 0 ? quiet_run + 1 : 0;
      if (quiet_run >= spec.stopping_k) {
        sum.selected.push_back(i);
        break;
      }
    }
  }

  sum.mean_steady_energy_density = stats::mean(sum.steady_energy_density);
  if (sum.selected.empty()) {
    sum.mean_steady_energy_density_selected = kNan;
  } else {
    double acc = 0.0;
    for (int i : sum.selected) acc += sum.steady_energy_density[i];
    sum.mean_steady_energy_density_selected = acc / double(sum.selected.size());
  }
  return sum;
}

}  // namespace spincool
