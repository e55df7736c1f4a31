#pragma once

#include <vector>

#include "spincool/model.hpp"
#include "spincool/observables.hpp"
#include "spincool/quadrature.hpp"

namespace spincool {

// Linear bath-splitting ramp paired with a piecewise-linear coupler profile.
// B(t) = B_i - gamma_B * t until it reaches B_f at t_B, constant after; the
// coupler g(t) comes from the profile schedule (whose own B fields are
// ignored here).  theta_B(t) = -Int_0^t B dt' has a closed quadratic form,
// so sweep phases never need nested numerical integration.
struct RampSpec {
  ScheduleSpec profile;
  double B_i = 0.0;
  double B_f = 0.0;
  double gamma_B = 0.0;
  double t_B = 0.0;
};

// Ramp matching the cooling protocol: B runs from schedule.B_i to
// schedule.B_f over [0, t2] and holds after, g follows the same schedule.
RampSpec protocol_ramp(const ScheduleSpec& schedule);

// Free-standing ramp B(t) = B_i - gamma_B * t across the whole profile
// window (no floor), for sweeps quoted by rate rather than endpoint.
RampSpec linear_ramp(const ScheduleSpec& g_profile, double B_i,
                     double gamma_B);

double ramp_g(const RampSpec& ramp, double t);
double ramp_B(const RampSpec& ramp, double t);
double theta_B(const RampSpec& ramp, double t);

// Time at which the bath splitting 2B(t) crosses |omega|.  Throws
// std::invalid_argument when |omega| lies outside the swept window
// (2 B_f, 2 B_i).
double t_star(const RampSpec& ramp, double omega);

// Golden-rule plateau pi * g(t*)^2 / gamma_B that a slow sweep approaches
// for frequencies inside the swept window.
double adiabatic_delta(const RampSpec& ramp, double omega);

// Sweep-integrated transition kernel
//   Delta_c(T, w) = Int_0^T dt Int_0^t dt' g(t) g(t')
//                   e^{2i(theta_B(t') - theta_B(t))} e^{i w (t - t')} + c.c.
// evaluated through its factorized form |Int_0^T g e^{i(w t - 2 theta_B)}|^2,
// which is real and non-negative by construction.  The oscillatory integral
// is done with adaptive Gauss-Kronrod panels seeded at profile kinks and
// pre-split against the local phase rate |w + 2B(t)|; the tolerance is
// relative to the non-oscillatory envelope Int g dt.  An unreachable
// tolerance raises convergence_error with the value reached.
double delta_c(double T, double omega, const RampSpec& ramp,
               const QuadratureControl& control = {});

// Antisymmetrized kernel Delta_s(T, w) = Delta_c(T, w) - Delta_c(T, -w).
double delta_s(double T, double omega, const RampSpec& ramp,
               const QuadratureControl& control = {});

// Golden-rule cooling power per site at the instantaneous resonance
// w = -2B:
//   Gamma_c / N = -2 g^2 [1 + n_B(w)] w chi''(w),
// with n_B the Bose factor at inverse temperature beta and chi'' linearly
// interpolated off the grid.  The dimensionless prefactor is fixed against
// the small-system simulator (energy extracted per sweep equals
// 2 |<m|s^y|n>|^2 Delta_c at the transition frequency), not quoted from a
// secondary source.  Throws std::invalid_argument when -2B falls outside
// the grid.
double cooling_rate_pt(const SusceptibilityGrid& chi, double g, double B,
                       double beta);

// Rate-model constants: noise generation Gamma_noise (per time per volume),
// cooling coefficient gamma_c, process order M in {1,2,3} (number of
// excitations consumed per cooling event), volume V >= 1, and the
// Kibble-Zurek inputs: dimension d in {1,2,3}, correlation exponent nu > 0,
// dynamic exponent z > 0, and the defect-scaling amplitude c.
struct RateModelSpec {
  double gamma_noise = 0.0;
  double gamma_c = 1.0;
  int M = 1;
  double V = 1.0;
  int d = 1;
  double nu = 1.0;
  double z = 1.0;
  double c = 1.0;
};

// Steady state of dn/dt = Gamma_noise - gamma_c n^M, i.e.
// (Gamma_noise / gamma_c)^{1/M}.
double rate_steady_state(const RateModelSpec& spec);

// Clustered small-volume steady state n = (Gamma_noise / gamma_c) V^{M-1},
// valid while collisions stay rare: the flag records n <= M / V.
struct FiniteSizeDensity {
  double n = 0.0;
  bool valid = true;
};
FiniteSizeDensity rate_finite_size(const RateModelSpec& spec);

// Fixed-step RK4 integration of dn/dt = Gamma_noise - gamma_c n^M from
// n(0) = n_0 to t_end.  A negative density at any stage means the step size
// is too large for the stiffness and raises convergence_error.
struct RateTrajectory {
  std::vector<double> t;
  std::vector<double> n;
};
RateTrajectory rate_evolve(const RateModelSpec& spec, double n_0,
                           double t_end, double dt);

// Minimizes the ramp-time tradeoff f(T) = Gamma_noise T + c T^{-d nu /
// (1 + z nu)} over T > 0 and reports the minimum density, the optimal ramp
// time, and the closed-form scaling exponent d nu / (1 + (d + z) nu) of the
// minimized density in Gamma_noise.
struct KzResult {
  double density = 0.0;
  double t_opt = 0.0;
  double exponent = 0.0;
};
KzResult kz_defect_density(double gamma_noise, int d, double nu, double z,
                           double c);

// Compares the small-noise scaling of cooled (n ~ Gamma^{1/M}), fixed-ramp
// Kibble-Zurek (n ~ Gamma^{d nu / (1 + (d+z) nu)}), and noise-optimized
// Kibble-Zurek (n ~ Gamma^{d/(d+z)}) defect densities; the larger exponent
// wins as Gamma_noise -> 0.  Densities are quoted at the given Gamma_noise
// with the non-universal constants gamma_c and c set to one.  The crossover
// coupling-exponent boundary nu = 1/(d - z) only exists for d > z;
// boundary_applicable records that.
struct KzComparison {
  double cooling_exponent = 0.0;
  double kz_exponent = 0.0;
  double kz_opt_exponent = 0.0;
  double n_cooling = 0.0;
  double n_kz = 0.0;
  double n_kz_opt = 0.0;
  bool cooling_beats_kz = false;
  bool cooling_beats_kz_opt = false;
  double nu_boundary = 0.0;
  bool boundary_applicable = false;
};
KzComparison kz_comparison(double gamma_noise, int d, double nu, double z,
                           int M);

}  // namespace spincool
