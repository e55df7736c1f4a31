#include "spincool/experiments.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <thread>

#include <json.hpp>

#include "spincool/errors.hpp"
#include "spincool/evolve.hpp"
#include "spincool/model.hpp"
#include "spincool/observables.hpp"
#include "spincool/protocol.hpp"
#include "spincool/rng.hpp"
#include "spincool/stats.hpp"
#include "spincool/svg_plot.hpp"
#include "spincool/theory.hpp"

namespace spincool {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

const struct {
  Experiment e;
  const char* name;
} kExperiments[] = {
    {Experiment::run, "run"},
    {Experiment::sweep_noise, "sweep-noise"},
    {Experiment::sweep_size, "sweep-size"},
    {Experiment::trap, "trap"},
    {Experiment::occupations, "occupations"},
    {Experiment::theory_delta, "theory-delta"},
    {Experiment::rate_model, "rate-model"},
    {Experiment::kz, "kz"},
};

// Shortest representations that parse back to the identical value, so a
// rerun from the manifest reproduces every table byte for byte.
std::string num(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string num_i(long long v) {
  char buf[24];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string num_u(unsigned long long v) {
  char buf[24];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double safe_mean(const std::vector<double>& v) {
  return v.empty() ? kNaN : stats::mean(v);
}

double safe_se(const std::vector<double>& v) {
  return v.size() < 2 ? kNaN : stats::standard_error(v);
}

// Mirrors the ensemble runner's resolution so the manifest can record the
// worker count that was actually used.
int resolved_threads(int n_init) {
  int n = 0;
  if (const char* env = std::getenv("SPINCOOL_THREADS")) {
    char* end = nullptr;
    const long parsed = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && parsed > 0) n = int(parsed);
  }
  if (n <= 0) n = int(std::thread::hardware_concurrency());
  if (n <= 0) n = 1;
  return n < n_init ? n : n_init;
}

void ensure_writable(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec)
    throw io_error("cannot create output directory '" + dir +
                   "': " + ec.message());
  const std::string probe = dir + "/.write_probe";
  {
    std::ofstream f(probe, std::ios::binary | std::ios::trunc);
    if (!f)
      throw io_error("output directory '" + dir + "' is not writable");
    f << "ok";
    f.flush();
    if (!f)
      throw io_error("output directory '" + dir + "' is not writable");
  }
  std::filesystem::remove(probe, ec);
}

void write_table(const std::string& dir, const std::string& name,
                 const std::vector<std::string>& columns,
                 const std::vector<std::vector<std::string>>& rows) {
  const std::string path = dir + "/" + name;
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw io_error("cannot open '" + path + "' for writing");
  for (std::size_t c = 0; c < columns.size(); ++c)
    f << (c ? "," : "") << columns[c];
  f << '\n';
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c)
      f << (c ? "," : "") << row[c];
    f << '\n';
  }
  f.flush();
  if (!f) throw io_error("failed writing '" + path + "'");
}

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

Table read_table(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw io_error("cannot open '" + path + "'");
  Table t;
  std::string line;
  auto split = [](const std::string& s) {
    std::vector<std::string> cells;
    std::size_t start = 0;
    for (;;) {
      const std::size_t comma = s.find(',', start);
      if (comma == std::string::npos) {
        cells.push_back(s.substr(start));
        return cells;
      }
      cells.push_back(s.substr(start, comma - start));
      start = comma + 1;
    }
  };
  if (std::getline(f, line)) t.columns = split(line);
  while (std::getline(f, line))
    if (!line.empty()) t.rows.push_back(split(line));
  return t;
}

// Columns are matched by name with the unit suffix stripped, so plot
// recipes stay valid if a unit annotation is ever refined.
int must_col(const Table& t, const std::string& path, const std::string& name) {
  for (std::size_t c = 0; c < t.columns.size(); ++c) {
    const std::string& h = t.columns[c];
    if (h == name) return int(c);
    if (h.size() > name.size() + 2 && h.compare(0, name.size(), name) == 0 &&
        h.compare(name.size(), 2, " (") == 0)
      return int(c);
  }
  throw io_error("table '" + path + "' has no column '" + name + "'");
}

double cell_num(const std::string& s) {
  double v = kNaN;
  const char* begin = s.data();
  const char* end = begin + s.size();
  const auto res = std::from_chars(begin, end, v);
  if (res.ec != std::errc() || res.ptr != end) return kNaN;
  return v;
}

std::vector<double> col_values(const Table& t, int col) {
  std::vector<double> v;
  v.reserve(t.rows.size());
  for (const auto& row : t.rows)
    v.push_back(col < int(row.size()) ? cell_num(row[std::size_t(col)])
                                      : kNaN);
  return v;
}

// Distinct values of one column, in first-appearance order, compared as the
// literal cell text (which the writer keeps canonical).
std::vector<std::string> distinct_cells(const Table& t, int col) {
  std::vector<std::string> keys;
  for (const auto& row : t.rows) {
    if (col >= int(row.size())) continue;
    const std::string& k = row[std::size_t(col)];
    if (std::find(keys.begin(), keys.end(), k) == keys.end())
      keys.push_back(k);
  }
  return keys;
}

struct EnsembleOut {
  SpinModelSpec model;
  SpectralData spectral;
  EnsembleSummary summary;
};

EnsembleOut run_bundle(const RunConfig& cfg, bool record_occupations = false) {
  EnsembleOut out;
  out.model = model_from(cfg);
  out.spectral = exact_spectrum(out.model);
  ProtocolSpec spec = protocol_from(cfg);
  spec.record_final_occupations = record_occupations;
  out.summary = run_ensemble(spec, out.spectral, cfg.n_init, cfg.seed);
  return out;
}

void check_eta_grid(const RunConfig& cfg, const std::vector<double>& grid,
                    const char* which) {
  if (grid.empty())
    throw config_error(std::string("config error: ") + which + " is empty");
  for (double eta : grid) {
    if (!std::isfinite(eta) || eta < 0.0)
      throw config_error(std::string("config error: ") + which + " value " +
                         num(eta) + " is not a rate >= 0");
    if (p_err_from_eta(eta, cfg.n_steps) > 1.0)
      throw config_error(std::string("config error: ") + which + " value " +
                         num(eta) + " exceeds one error per insertion point");
  }
}

void validate_options(const RunConfig& cfg, Experiment e,
                      const ExperimentOptions& opt) {
  switch (e) {
    case Experiment::run:
      break;
    case Experiment::sweep_noise:
      check_eta_grid(cfg, opt.eta_grid, "eta_grid");
      break;
    case Experiment::sweep_size:
      if (opt.size_grid.empty())
        throw config_error("config error: size_grid is empty");
      for (int n : opt.size_grid)
        if (n < 2 || n > 12)
          throw config_error("config error: size_grid value " +
                             num_i(n) +
                             " outside [2, 12] (dense engine limit)");
      break;
    case Experiment::trap:
      if (cfg.trap_bond < 0)
        throw config_error(
            "config error: the trap experiment needs trap_bond set");
      break;
    case Experiment::occupations:
      check_eta_grid(cfg, opt.occupation_eta_grid, "occupation_eta_grid");
      break;
    case Experiment::theory_delta:
      if (opt.ramp_time_grid.empty() || opt.omega_grid.empty())
        throw config_error(
            "config error: theory-delta needs non-empty ramp_time_grid and "
            "omega_grid");
      for (double T : opt.ramp_time_grid)
        if (!(T > 0.0) || !std::isfinite(T))
          throw config_error("config error: ramp_time_grid value " + num(T) +
                             " is not a positive time");
      for (double w : opt.omega_grid)
        if (!std::isfinite(w))
          throw config_error("config error: omega_grid value is not finite");
      if (!(cfg.B_i > cfg.B_f))
        throw config_error(
            "config error: theory-delta needs B_i > B_f to define a "
            "downward sweep");
      break;
    case Experiment::rate_model:
    case Experiment::kz:
      if (opt.noise_rate_grid.empty())
        throw config_error("config error: noise_rate_grid is empty");
      for (double g : opt.noise_rate_grid) {
        if (!std::isfinite(g) || g < 0.0)
          throw config_error("config error: noise_rate_grid value " + num(g) +
                             " is not a rate >= 0");
        if (e == Experiment::kz && g <= 0.0)
          throw config_error(
              "config error: kz needs strictly positive noise rates");
      }
      if (e == Experiment::rate_model) {
        if (opt.rate_m_grid.empty())
          throw config_error("config error: rate_m_grid is empty");
        for (int m : opt.rate_m_grid)
          if (m < 1 || m > 3)
            throw config_error("config error: rate_m_grid value " + num_i(m) +
                               " outside [1, 3]");
      } else {
        if (opt.kz_d < 1 || opt.kz_d > 3)
          throw config_error("config error: kz_d outside [1, 3]");
        if (!(opt.kz_nu > 0.0) || !(opt.kz_z > 0.0))
          throw config_error("config error: kz_nu and kz_z must be > 0");
        if (opt.kz_m < 1 || opt.kz_m > 3)
          throw config_error("config error: kz_m outside [1, 3]");
      }
      break;
  }
}

std::vector<std::string> run_single(const RunConfig& cfg,
                                    const std::string& dir) {
  std::fprintf(stderr, "run: n_system=%d, %d trajectories x %d cycles\n",
               cfg.n_system, cfg.n_init, cfg.n_cycles);
  const EnsembleOut out = run_bundle(cfg);
  const EnsembleSummary& s = out.summary;

  std::vector<std::vector<std::string>> cyc;
  for (const CycleAggregate& a : s.per_cycle)
    cyc.push_back({num_i(a.cycle_index), num_i(a.n_trajectories),
                   num(a.mean_energy_above_gs), num(a.median_energy_above_gs),
                   num(a.mean_energy_density), num(a.median_energy_density),
                   num(a.mean_fidelity), num(a.median_fidelity),
                   num(a.mean_flips), num(a.flip_fraction)});
  write_table(dir, "cycles.csv",
              {"cycle (1)", "n_trajectories (1)",
               "mean_energy_above_gs (energy)",
               "median_energy_above_gs (energy)", "mean_energy_density (1)",
               "median_energy_density (1)", "mean_fidelity (1)",
               "median_fidelity (1)", "mean_flips (1)", "flip_fraction (1)"},
              cyc);

  // `selected` lists the chosen trajectory indices; flatten to a flag.
  std::vector<char> is_selected(s.trajectories.size(), 0);
  for (int idx : s.selected)
    if (idx >= 0 && idx < int(is_selected.size())) is_selected[idx] = 1;

  std::vector<std::vector<std::string>> st;
  for (std::size_t i = 0; i < s.trajectories.size(); ++i) {
    const TrajectoryRecord& t = s.trajectories[i];
    st.push_back({num_i(static_cast<long long>(i)), num_u(t.seed),
                  num(s.steady_energy_above_gs[i]),
                  num(s.steady_energy_density[i]), num_i(is_selected[i]),
                  num_i(t.stopped_at ? *t.stopped_at : -1)});
  }
  write_table(dir, "steady.csv",
              {"trajectory (1)", "seed (1)", "steady_energy_above_gs (energy)",
               "steady_energy_density (1)", "selected (1)",
               "stopped_at_cycle (1)"},
              st);

  write_table(
      dir, "summary.csv",
      {"ground_energy (energy)", "gap (energy)", "n_trajectories (1)",
       "n_selected (1)", "steady_window_begin (1)",
       "mean_steady_energy_density (1)",
       "mean_steady_energy_density_selected (1)", "eta_e (1)", "p_err (1)"},
      {{num(s.ground_energy), num(s.gap), num_i(static_cast<long long>(s.trajectories.size())),
        num_i(static_cast<long long>(s.selected.size())),
        num_i(s.steady_window_begin),
        num(s.mean_steady_energy_density),
        num(s.mean_steady_energy_density_selected), num(eta_e_of(cfg)),
        num(p_err_of(cfg))}});
  return {"cycles.csv", "steady.csv", "summary.csv"};
}

std::vector<std::string> run_noise_sweep(const RunConfig& cfg,
                                         const ExperimentOptions& opt,
                                         const std::string& dir) {
  std::vector<std::vector<std::string>> rows;
  for (std::size_t gi = 0; gi < opt.eta_grid.size(); ++gi) {
    RunConfig c = cfg;
    c.p_err.reset();
    c.eta_e = opt.eta_grid[gi];
    std::fprintf(stderr, "sweep-noise %zu/%zu: eta_e=%g, %d trajectories\n",
                 gi + 1, opt.eta_grid.size(), *c.eta_e, c.n_init);
    const EnsembleOut out = run_bundle(c);
    const EnsembleSummary& s = out.summary;
    std::vector<double> selected;
    for (int idx : s.selected)
      selected.push_back(s.steady_energy_density[std::size_t(idx)]);
    rows.push_back(
        {num(*c.eta_e), num(p_err_of(c)),
         num_i(static_cast<long long>(s.trajectories.size())),
         num(safe_mean(s.steady_energy_density)),
         num(safe_se(s.steady_energy_density)),
         num_i(static_cast<long long>(selected.size())), num(safe_mean(selected)),
         num(safe_se(selected)), num(safe_mean(s.steady_energy_above_gs)),
         num(s.gap)});
  }
  write_table(dir, "noise_sweep.csv",
              {"eta_e (1)", "p_err (1)", "n_trajectories (1)",
               "mean_steady_energy_density (1)",
               "se_steady_energy_density (1)", "n_selected (1)",
               "mean_steady_energy_density_selected (1)",
               "se_steady_energy_density_selected (1)",
               "mean_steady_energy_above_gs (energy)", "gap (energy)"},
              rows);
  return {"noise_sweep.csv"};
}

std::vector<std::string> run_size_sweep(const RunConfig& cfg,
                                        const ExperimentOptions& opt,
                                        const std::string& dir) {
  std::vector<std::vector<std::string>> rows;
  for (std::size_t gi = 0; gi < opt.size_grid.size(); ++gi) {
    RunConfig c = cfg;
    c.n_system = opt.size_grid[gi];
    c.bath_mask.clear();   // every spin coupled again
    c.trap_bond = -1;      // traps are positional; a size sweep is uniform
    c.trap_J = 0.0;
    const SpinModelSpec model = model_from(c);
    const SpectralData spectral = exact_spectrum(model);
    const ProtocolSpec spec = protocol_from(c);
    if (c.n_system >= 10) {
      // One timed cycle up front: doubling the chain multiplies the state
      // by four, so surprise stalls are worth a heads-up on stderr.
      ProtocolSpec probe = spec;
      probe.n_cycles = 1;
      const auto t0 = std::chrono::steady_clock::now();
      run_trajectory(probe, spectral, derive_seed(c.seed, 0));
      const double sec =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
              .count();
      std::fprintf(stderr,
                   "sweep-size: n=%d takes ~%.1f s per cycle; %d cycles x %d "
                   "trajectories over %d threads queued\n",
                   c.n_system, sec, c.n_cycles, c.n_init,
                   resolved_threads(c.n_init));
    } else {
      std::fprintf(stderr, "sweep-size %zu/%zu: n=%d\n", gi + 1,
                   opt.size_grid.size(), c.n_system);
    }
    const EnsembleSummary s = run_ensemble(spec, spectral, c.n_init, c.seed);
    rows.push_back({num_i(c.n_system), num_i(static_cast<long long>(s.trajectories.size())),
                    num(safe_mean(s.steady_energy_density)),
                    num(safe_se(s.steady_energy_density)),
                    num(s.ground_energy), num(s.gap)});
  }
  write_table(dir, "size_sweep.csv",
              {"n_system (1)", "n_trajectories (1)",
               "mean_steady_energy_density (1)",
               "se_steady_energy_density (1)", "ground_energy (energy)",
               "gap (energy)"},
              rows);
  return {"size_sweep.csv"};
}

std::vector<std::string> run_trap(const RunConfig& cfg,
                                  const std::string& dir) {
  std::fprintf(stderr, "trap: n_system=%d, %d trajectories x %d cycles\n",
               cfg.n_system, cfg.n_init, cfg.n_cycles);
  const EnsembleOut out = run_bundle(cfg);
  const EnsembleSummary& s = out.summary;
  const auto& bonds = out.model.zz_bonds;
  std::vector<std::vector<std::string>> rows;
  for (std::size_t b = 0; b < bonds.size(); ++b) {
    // One steady-window mean per trajectory; a trajectory stopped before
    // the window opens contributes its final (frozen) value.
    std::vector<double> per_traj;
    for (const TrajectoryRecord& t : s.trajectories) {
      std::vector<double> window;
      for (const CycleRecord& r : t.cycles)
        if (r.cycle_index >= s.steady_window_begin)
          window.push_back(r.bond_correlators[b]);
      if (window.empty() && !t.cycles.empty())
        window.push_back(t.cycles.back().bond_correlators[b]);
      if (!window.empty()) per_traj.push_back(stats::mean(window));
    }
    rows.push_back({num_i(static_cast<long long>(b)), num_i(bonds[b].i), num_i(bonds[b].j),
                    num(bonds[b].J), num(safe_mean(per_traj)),
                    num(safe_se(per_traj))});
  }
  write_table(dir, "trap_bonds.csv",
              {"bond (1)", "site_i (1)", "site_j (1)", "J (energy)",
               "mean_zz (1)", "se_zz (1)"},
              rows);
  return {"trap_bonds.csv"};
}

std::vector<std::string> run_occupations(const RunConfig& cfg,
                                         const ExperimentOptions& opt,
                                         const std::string& dir) {
  std::vector<std::vector<std::string>> rows;
  for (std::size_t gi = 0; gi < opt.occupation_eta_grid.size(); ++gi) {
    RunConfig c = cfg;
    c.p_err.reset();
    c.eta_e = opt.occupation_eta_grid[gi];
    std::fprintf(stderr, "occupations %zu/%zu: eta_e=%g, %d trajectories\n",
                 gi + 1, opt.occupation_eta_grid.size(), *c.eta_e, c.n_init);
    const EnsembleOut out = run_bundle(c, /*record_occupations=*/true);
    const auto dim = std::size_t(out.spectral.energies.size());
    std::vector<double> occ(dim, 0.0);
    int counted = 0;
    for (const TrajectoryRecord& t : out.summary.trajectories) {
      if (!t.final_occupations) continue;
      for (std::size_t k = 0; k < dim; ++k) occ[k] += (*t.final_occupations)[k];
      ++counted;
    }
    for (std::size_t k = 0; k < dim; ++k)
      occ[k] = counted ? occ[k] / counted : kNaN;
    for (std::size_t k = 0; k < dim; ++k)
      rows.push_back(
          {num(*c.eta_e), num_i(static_cast<long long>(k)),
           num(out.spectral.energies[Eigen::Index(k)] - out.spectral.e0),
           num(occ[k]),
           num_i(domain_wall_label(out.spectral, int(k), out.model))});
  }
  write_table(dir, "occupations.csv",
              {"eta_e (1)", "state (1)", "energy_above_gs (energy)",
               "occupation (1)", "domain_walls (1)"},
              rows);
  return {"occupations.csv"};
}

std::vector<std::string> run_theory_delta(const RunConfig& cfg,
                                          const ExperimentOptions& opt,
                                          const std::string& dir) {
  std::vector<std::vector<std::string>> rows;
  for (double T : opt.ramp_time_grid) {
    // Same coupler shape and splitting endpoints as the protocol, rescaled
    // to the requested total time, with the splitting swept across the
    // whole window so the slow-sweep plateau applies to every frequency in
    // (2 B_f, 2 B_i).
    const ScheduleSpec sched = make_schedule(T, cfg.g_0, cfg.B_i, cfg.B_f);
    const RampSpec ramp = linear_ramp(sched, cfg.B_i, (cfg.B_i - cfg.B_f) / T);
    for (double omega : opt.omega_grid) {
      const double d_plus = delta_c(T, omega, ramp);
      const double d_minus = delta_c(T, -omega, ramp);
      const double d_s = d_plus - d_minus;
      double d_s_adiabatic = kNaN;
      double ratio = kNaN;
      try {
        // In the slow limit the absorbing channel saturates the plateau and
        // the emitting channel vanishes, so delta_s tends to its negative.
        d_s_adiabatic = -adiabatic_delta(ramp, omega);
        ratio = d_s / d_s_adiabatic;
      } catch (const std::invalid_argument&) {
        // Frequency outside the swept window: no plateau to compare with.
      }
      rows.push_back({num(T), num(omega), num(d_plus), num(d_minus), num(d_s),
                      num(d_s_adiabatic), num(ratio)});
    }
  }
  write_table(dir, "theory_delta.csv",
              {"T (time)", "omega (energy)", "delta_c_plus (1)",
               "delta_c_minus (1)", "delta_s (1)", "delta_s_adiabatic (1)",
               "ratio (1)"},
              rows);
  return {"theory_delta.csv"};
}

std::vector<std::string> run_rate_model(const RunConfig& cfg,
                                        const ExperimentOptions& opt,
                                        const std::string& dir) {
  std::vector<std::vector<std::string>> rows;
  for (int m : opt.rate_m_grid) {
    for (double gamma : opt.noise_rate_grid) {
      RateModelSpec rs;
      rs.gamma_noise = gamma;
      rs.gamma_c = 1.0;
      rs.M = m;
      rs.V = double(cfg.n_system);
      const double n_ss = rate_steady_state(rs);
      // Integrate long enough to relax: the linearized decay time near the
      // fixed point is 1 / (M n_ss^{M-1}).
      const double tau =
          n_ss > 0.0 ? 1.0 / (double(m) * std::pow(n_ss, m - 1)) : 1.0;
      const double t_end = 50.0 * tau;
      const double dt = std::min(0.05, t_end / 2000.0);
      const RateTrajectory traj = rate_evolve(rs, 1.0, t_end, dt);
      const FiniteSizeDensity fin = rate_finite_size(rs);
      rows.push_back({num(gamma), num_i(m), num(n_ss), num(traj.n.back()),
                      num(rs.V), num(fin.n), num_i(fin.valid ? 1 : 0)});
    }
  }
  write_table(dir, "rate_model.csv",
              {"gamma_noise (1/time)", "M (1)", "n_steady_closed (1)",
               "n_terminal_evolved (1)", "V (1)", "n_finite_V (1)",
               "finite_V_valid (1)"},
              rows);
  return {"rate_model.csv"};
}

std::vector<std::string> run_kz(const ExperimentOptions& opt,
                                const std::string& dir) {
  std::vector<std::vector<std::string>> rows;
  for (double gamma : opt.noise_rate_grid) {
    const KzComparison kc =
        kz_comparison(gamma, opt.kz_d, opt.kz_nu, opt.kz_z, opt.kz_m);
    rows.push_back({num(gamma), num(kc.n_cooling), num(kc.n_kz),
                    num(kc.n_kz_opt), num(kc.cooling_exponent),
                    num(kc.kz_exponent), num(kc.kz_opt_exponent),
                    num_i(kc.cooling_beats_kz ? 1 : 0),
                    num_i(kc.cooling_beats_kz_opt ? 1 : 0),
                    num(kc.nu_boundary),
                    num_i(kc.boundary_applicable ? 1 : 0)});
  }
  write_table(dir, "kz_comparison.csv",
              {"gamma_noise (1/time)", "n_cooling (1)", "n_kz (1)",
               "n_kz_opt (1)", "cooling_exponent (1)", "kz_exponent (1)",
               "kz_opt_exponent (1)", "cooling_beats_kz (1)",
               "cooling_beats_kz_opt (1)", "nu_boundary (1)",
               "boundary_applicable (1)"},
              rows);
  return {"kz_comparison.csv"};
}

// -- plotting recipes -------------------------------------------------------

PlotSeries series_from(const Table& t, int xc, int yc, std::string label,
                       bool points, bool line) {
  PlotSeries s;
  s.label = std::move(label);
  s.x = col_values(t, xc);
  s.y = col_values(t, yc);
  s.points = points;
  s.line = line;
  return s;
}

// One series per distinct value of the group column.
std::vector<PlotSeries> grouped_series(const Table& t, int gc, int xc, int yc,
                                       const std::string& label_prefix,
                                       bool points, bool line) {
  std::vector<PlotSeries> out;
  for (const std::string& key : distinct_cells(t, gc)) {
    PlotSeries s;
    s.label = label_prefix + "=" + key;
    s.points = points;
    s.line = line;
    for (const auto& row : t.rows) {
      if (gc >= int(row.size()) || row[std::size_t(gc)] != key) continue;
      s.x.push_back(cell_num(row[std::size_t(xc)]));
      s.y.push_back(cell_num(row[std::size_t(yc)]));
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<std::string> plots_run(const std::string& dir) {
  const std::string path = dir + "/cycles.csv";
  const Table t = read_table(path);
  const int xc = must_col(t, path, "cycle");

  PlotSpec energy;
  energy.title = "Energy density per cycle";
  energy.x_label = "cycle";
  energy.y_label = "energy density e";
  energy.log_y = true;
  energy.series.push_back(series_from(
      t, xc, must_col(t, path, "median_energy_density"), "median", false, true));
  energy.series.push_back(series_from(
      t, xc, must_col(t, path, "mean_energy_density"), "mean", false, true));
  write_svg_plot(energy, dir + "/cycles_energy.svg");

  PlotSpec fid;
  fid.title = "Ground-space weight per cycle";
  fid.x_label = "cycle";
  fid.y_label = "fidelity";
  fid.series.push_back(series_from(
      t, xc, must_col(t, path, "median_fidelity"), "median", false, true));
  fid.series.push_back(series_from(
      t, xc, must_col(t, path, "mean_fidelity"), "mean", false, true));
  write_svg_plot(fid, dir + "/cycles_fidelity.svg");
  return {"cycles_energy.svg", "cycles_fidelity.svg"};
}

std::vector<std::string> plots_noise(const std::string& dir) {
  const std::string path = dir + "/noise_sweep.csv";
  const Table t = read_table(path);
  PlotSpec p;
  p.title = "Steady state vs error rate";
  p.x_label = "eta_e";
  p.y_label = "energy density e";
  const int xc = must_col(t, path, "eta_e");
  p.series.push_back(series_from(
      t, xc, must_col(t, path, "mean_steady_energy_density"), "all", true,
      true));
  p.series.push_back(series_from(
      t, xc, must_col(t, path, "mean_steady_energy_density_selected"),
      "post-selected", true, true));
  write_svg_plot(p, dir + "/noise_sweep.svg");
  return {"noise_sweep.svg"};
}

std::vector<std::string> plots_size(const std::string& dir) {
  const std::string path = dir + "/size_sweep.csv";
  const Table t = read_table(path);
  PlotSpec p;
  p.title = "Steady state vs chain length";
  p.x_label = "n_system";
  p.y_label = "energy density e";
  p.series.push_back(series_from(t, must_col(t, path, "n_system"),
                                 must_col(t, path, "mean_steady_energy_density"),
                                 "", true, true));
  write_svg_plot(p, dir + "/size_sweep.svg");
  return {"size_sweep.svg"};
}

std::vector<std::string> plots_trap(const std::string& dir) {
  const std::string path = dir + "/trap_bonds.csv";
  const Table t = read_table(path);
  PlotSpec p;
  p.title = "Steady-state bond correlators";
  p.x_label = "bond index";
  p.y_label = "<z z>";
  p.series.push_back(series_from(t, must_col(t, path, "bond"),
                                 must_col(t, path, "mean_zz"), "", true, true));
  write_svg_plot(p, dir + "/trap_bonds.svg");
  return {"trap_bonds.svg"};
}

std::vector<std::string> plots_occupations(const std::string& dir) {
  const std::string path = dir + "/occupations.csv";
  const Table t = read_table(path);
  PlotSpec p;
  p.title = "Final eigenstate occupations";
  p.x_label = "energy above ground state";
  p.y_label = "occupation";
  p.log_y = true;
  p.series = grouped_series(t, must_col(t, path, "eta_e"),
                            must_col(t, path, "energy_above_gs"),
                            must_col(t, path, "occupation"), "eta_e", true,
                            false);
  write_svg_plot(p, dir + "/occupations.svg");
  return {"occupations.svg"};
}

std::vector<std::string> plots_theory_delta(const std::string& dir) {
  const std::string path = dir + "/theory_delta.csv";
  const Table t = read_table(path);
  PlotSpec p;
  p.title = "Sweep kernel vs slow-sweep plateau";
  p.x_label = "ramp time T";
  p.y_label = "delta_s / plateau";
  p.log_x = true;
  p.series = grouped_series(t, must_col(t, path, "omega"),
                            must_col(t, path, "T"), must_col(t, path, "ratio"),
                            "omega", true, true);
  write_svg_plot(p, dir + "/delta_ratio.svg");
  return {"delta_ratio.svg"};
}

std::vector<std::string> plots_rate_model(const std::string& dir) {
  const std::string path = dir + "/rate_model.csv";
  const Table t = read_table(path);
  PlotSpec p;
  p.title = "Defect density: closed form and integration";
  p.x_label = "noise rate";
  p.y_label = "steady density n";
  p.log_x = true;
  p.log_y = true;
  const int gc = must_col(t, path, "M");
  const int xc = must_col(t, path, "gamma_noise");
  auto closed = grouped_series(t, gc, xc, must_col(t, path, "n_steady_closed"),
                               "M", false, true);
  auto evolved = grouped_series(
      t, gc, xc, must_col(t, path, "n_terminal_evolved"), "M", true, false);
  for (auto& s : closed) p.series.push_back(std::move(s));
  for (auto& s : evolved) {
    s.label.clear();  // markers share the closed-form legend entry
    p.series.push_back(std::move(s));
  }
  write_svg_plot(p, dir + "/rate_model.svg");
  return {"rate_model.svg"};
}

std::vector<std::string> plots_kz(const std::string& dir) {
  const std::string path = dir + "/kz_comparison.csv";
  const Table t = read_table(path);
  PlotSpec p;
  p.title = "Cooled vs quench-limited defect density";
  p.x_label = "noise rate";
  p.y_label = "defect density n";
  p.log_x = true;
  p.log_y = true;
  const int xc = must_col(t, path, "gamma_noise");
  p.series.push_back(series_from(t, xc, must_col(t, path, "n_cooling"),
                                 "cooled", true, true));
  p.series.push_back(
      series_from(t, xc, must_col(t, path, "n_kz"), "quench", true, true));
  p.series.push_back(series_from(t, xc, must_col(t, path, "n_kz_opt"),
                                 "quench, optimal ramp", true, true));
  write_svg_plot(p, dir + "/kz_comparison.svg");
  return {"kz_comparison.svg"};
}

nlohmann::json options_json(const ExperimentOptions& opt) {
  nlohmann::json o;
  o["plots"] = opt.plots;
  o["eta_grid"] = opt.eta_grid;
  o["size_grid"] = opt.size_grid;
  o["occupation_eta_grid"] = opt.occupation_eta_grid;
  o["omega_grid"] = opt.omega_grid;
  o["ramp_time_grid"] = opt.ramp_time_grid;
  o["noise_rate_grid"] = opt.noise_rate_grid;
  o["rate_m_grid"] = opt.rate_m_grid;
  o["kz_d"] = opt.kz_d;
  o["kz_nu"] = opt.kz_nu;
  o["kz_z"] = opt.kz_z;
  o["kz_m"] = opt.kz_m;
  return o;
}

void write_manifest(const std::string& path, const RunConfig& cfg,
                    Experiment e, const ExperimentOptions& opt,
                    const std::vector<std::string>& outputs,
                    double wall_seconds) {
  nlohmann::json j;
  j["version"] = "0.1.0";
  j["experiment"] = experiment_name(e);
  j["config"] = render_config(cfg);
  j["options"] = options_json(opt);
  j["outputs"] = outputs;
  j["threads"] = resolved_threads(cfg.n_init);
  j["wall_seconds"] = wall_seconds;
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw io_error("cannot open '" + path + "' for writing");
  f << j.dump(2) << '\n';
  f.flush();
  if (!f) throw io_error("failed writing '" + path + "'");
}

}  // namespace

const char* experiment_name(Experiment e) {
  for (const auto& entry : kExperiments)
    if (entry.e == e) return entry.name;
  return "run";
}

Experiment experiment_by_name(const std::string& name) {
  std::string all;
  for (const auto& entry : kExperiments) {
    if (name == entry.name) return entry.e;
    if (!all.empty()) all += ", ";
    all += entry.name;
  }
  throw config_error("unknown experiment '" + name + "'; expected one of " +
                     all);
}

std::vector<double> ExperimentOptions::default_noise_rate_grid() {
  std::vector<double> grid;
  grid.reserve(16);
  for (int k = 0; k < 16; ++k)
    grid.push_back(std::pow(10.0, -6.0 + double(k) / 3.0));
  return grid;
}

ExperimentResult run_experiment(const RunConfig& config, Experiment e,
                                const ExperimentOptions& options) {
  validate_options(config, e, options);
  const std::string dir = config.out_dir;
  ensure_writable(dir);

  const auto t0 = std::chrono::steady_clock::now();
  std::vector<std::string> outputs;
  switch (e) {
    case Experiment::run:
      outputs = run_single(config, dir);
      break;
    case Experiment::sweep_noise:
      outputs = run_noise_sweep(config, options, dir);
      break;
    case Experiment::sweep_size:
      outputs = run_size_sweep(config, options, dir);
      break;
    case Experiment::trap:
      outputs = run_trap(config, dir);
      break;
    case Experiment::occupations:
      outputs = run_occupations(config, options, dir);
      break;
    case Experiment::theory_delta:
      outputs = run_theory_delta(config, options, dir);
      break;
    case Experiment::rate_model:
      outputs = run_rate_model(config, options, dir);
      break;
    case Experiment::kz:
      outputs = run_kz(options, dir);
      break;
  }
  if (options.plots) {
    const std::vector<std::string> svgs = emit_plots(dir, e);
    outputs.insert(outputs.end(), svgs.begin(), svgs.end());
  }

  ExperimentResult result;
  result.outputs = outputs;
  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  result.manifest_path = dir + "/manifest.json";
  write_manifest(result.manifest_path, config, e, options, outputs,
                 result.wall_seconds);
  return result;
}

ManifestData read_manifest(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw io_error("cannot open manifest '" + path + "'");
  nlohmann::json j;
  try {
    f >> j;
  } catch (const nlohmann::json::exception& ex) {
    throw config_error("manifest '" + path + "' is not valid JSON: " +
                       ex.what());
  }
  ManifestData m;
  try {
    m.experiment = experiment_by_name(j.at("experiment").get<std::string>());
    m.config = parse_config(j.at("config").get<std::string>(), "<manifest>");
    const nlohmann::json& o = j.at("options");
    m.options.plots = o.at("plots").get<bool>();
    m.options.eta_grid = o.at("eta_grid").get<std::vector<double>>();
    m.options.size_grid = o.at("size_grid").get<std::vector<int>>();
    m.options.occupation_eta_grid =
        o.at("occupation_eta_grid").get<std::vector<double>>();
    m.options.omega_grid = o.at("omega_grid").get<std::vector<double>>();
    m.options.ramp_time_grid =
        o.at("ramp_time_grid").get<std::vector<double>>();
    m.options.noise_rate_grid =
        o.at("noise_rate_grid").get<std::vector<double>>();
    m.options.rate_m_grid = o.at("rate_m_grid").get<std::vector<int>>();
    m.options.kz_d = o.at("kz_d").get<int>();
    m.options.kz_nu = o.at("kz_nu").get<double>();
    m.options.kz_z = o.at("kz_z").get<double>();
    m.options.kz_m = o.at("kz_m").get<int>();
  } catch (const nlohmann::json::exception& ex) {
    throw config_error("manifest '" + path + "' is missing fields: " +
                       ex.what());
  }
  return m;
}

std::vector<std::string> emit_plots(const std::string& dir, Experiment e) {
  switch (e) {
    case Experiment::run:
      return plots_run(dir);
    case Experiment::sweep_noise:
      return plots_noise(dir);
    case Experiment::sweep_size:
      return plots_size(dir);
    case Experiment::trap:
      return plots_trap(dir);
    case Experiment::occupations:
      return plots_occupations(dir);
    case Experiment::theory_delta:
      return plots_theory_delta(dir);
    case Experiment::rate_model:
      return plots_rate_model(dir);
    case Experiment::kz:
      return plots_kz(dir);
  }
  return {};
}

}  // namespace spincool
