#pragma once

#include <cstdint>
#include <vector>

#include "spincool/model.hpp"
#include "spincool/rng.hpp"
#include "spincool/state_vector.hpp"

namespace spincool {

// Depolarizing-style stochastic Pauli noise: at each insertion point every
// qubit (system and bath alike) independently suffers one uniformly chosen
// X/Y/Z with probability p_err.  A sweep of n_steps Trotter steps has two
// insertion points per step, so the per-spin error budget is
// eta_e = 2 * n_steps * p_err.
struct NoiseSpec {
  double p_err = 0.0;
};

inline double eta_from_p_err(double p_err, int n_steps) {
  return 2.0 * n_steps * p_err;
}
inline double p_err_from_eta(double eta, int n_steps) {
  return eta / (2.0 * n_steps);
}

struct NoiseEvent {
  int step;    // Trotter step index within the sweep
  int point;   // insertion point, 1 (after the leading half-Z) or 2 (after Y)
  int qubit;   // register index
  int pauli;   // 0 = X, 1 = Y, 2 = Z
};

// One sweep: n_steps second-order steps of size dtau, coefficients frozen at
// t_n = n * dtau.  In derived mode dtau = T / n_steps; fixed mode keeps a
// caller-chosen dtau (which must keep every t_n inside the sweep).
struct SweepSpec {
  ScheduleSpec schedule;
  int n_steps = 0;
  double dtau = 0.0;
};

SweepSpec make_sweep(const ScheduleSpec& schedule, int n_steps);
SweepSpec make_sweep_fixed_dt(const ScheduleSpec& schedule, int n_steps,
                              double dtau);

// Applies one step of the symmetric splitting
//   exp(-i dt/2 H_Z) exp(-i dt H_Y) exp(-i dt H_X) exp(-i dt/2 H_Z)
// right to left, with stochastic Pauli insertions after the first half-Z
// factor and after the Y factor.  The random stream is consumed in a fixed
// order: per step, insertion point 1 then 2, qubits ascending; each hit
// draws one extra value for the Pauli choice.  Events are appended to log.
//
// Precomputes everything reusable across the steps of a sweep (term groups,
// the system part of the diagonal phase, rotation angles), so construct one
// plan per (model, schedule, dtau) and reuse it; step() is const and
// thread-safe for distinct states.
class TrotterPlan {
 public:
  TrotterPlan(const SpinModelSpec& model, const ScheduleSpec& schedule,
              double dtau, const NoiseSpec& noise);

  void step(StateVector& psi, int step_index, double t, RngStream& rng,
            std::vector<NoiseEvent>* log) const;

  // Whole-sweep driver.  Merges the trailing diagonal half of each step with
  // the leading diagonal half of the next one (nothing sits between them, so
  // the merge is exact up to rounding) and skips the per-step re-dispatch.
  // Consumes the random stream in the same order as repeated step() calls
  // and returns the identical event log.
  std::vector<NoiseEvent> run(StateVector& psi, const SweepSpec& sweep,
                              RngStream& rng) const;

  double dtau() const { return dtau_; }

 private:
  // Diagonal factor over a half or full step (selects the matching phase
  // table), with the bath Zeeman angle proportional to B_sum, optionally
  // fused with the whole X group.
  void z_x_pass(StateVector& psi, bool full_step, double B_sum,
                bool with_x_group) const;
  void x_group_block(cplx* blk, std::size_t ds) const;
  void x_group_generic(StateVector& psi) const;
  void yy_pass(StateVector& psi, double g) const;
  void draw_hits(int step_index, RngStream& rng, std::vector<NoiseEvent>& hits1,
                 std::vector<NoiseEvent>& hits2) const;

  const SpinModelSpec model_;
  ScheduleSpec schedule_;
  double dtau_;
  double p_err_;
  int n_sys_, n_bath_, n_total_;
  std::vector<cplx> low_half_;         // exp(-i dtau/2 E_sys(l)), l < 2^n_sys
  std::vector<cplx> low_full_;         // exp(-i dtau   E_sys(l)), merged halves
  std::vector<double> x_angles_;       // dtau * (-h_x_i)
  double xx_angle_ = 0.0;              // dtau * (-J_x)
  std::vector<int> even_bonds_, odd_bonds_;
  std::vector<std::pair<int, int>> yy_pairs_;  // (system site, bath rank)
  DiagonalTerms sys_diag_;             // fallback path (no bath register)
};

// Single public step; builds a throwaway plan.  Consumes the random stream
// and orders events exactly as the sweep driver does; the states agree to
// rounding accuracy (the driver merges adjacent diagonal half-steps).
std::vector<NoiseEvent> trotter_step(StateVector& psi,
                                     const SpinModelSpec& model,
                                     const ScheduleSpec& schedule, double t,
                                     double dtau, const NoiseSpec& noise,
                                     RngStream& rng, int step_index = 0);

// One full noise layer over every qubit of the state, in qubit order.
std::vector<NoiseEvent> noise_layer(StateVector& psi, double p_err,
                                    RngStream& rng, int step = -1,
                                    int point = -1);

// Runs all n_steps of the sweep (no measurements).  Returns the noise log.
std::vector<NoiseEvent> run_sweep(StateVector& psi, const TrotterPlan& plan,
                                  const SweepSpec& sweep, RngStream& rng);

}  // namespace spincool
