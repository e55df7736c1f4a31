#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <limits>
#include <vector>

#include "spincool/evolve.hpp"
#include "spincool/rng.hpp"
#include "spincool/stats.hpp"
#include "spincool/theory.hpp"
#include "test_support.hpp"

using namespace spincool;
using namespace testsup;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Literal two-time form of the sweep kernel: cumulative trapezoid for the
// inner integral over t' < t, trapezoid for the outer one, plus the complex
// conjugate.  Independent of the factorized single-integral fast path.
double delta_c_two_time(double T, double w, const RampSpec& ramp, int n) {
  const double h = T / n;
  std::vector<cplx> F(n + 1);
  for (int k = 0; k <= n; ++k) {
    const double t = k * h;
    const double phase = w * t - 2.0 * theta_B(ramp, t);
    F[k] = ramp_g(ramp, t) * std::exp(cplx{0.0, phase});
  }
  cplx inner{0.0, 0.0};
  cplx outer{0.0, 0.0};
  cplx p_prev{0.0, 0.0};
  for (int k = 1; k <= n; ++k) {
    inner += 0.5 * h * (std::conj(F[k - 1]) + std::conj(F[k]));
    const cplx p = F[k] * inner;
    outer += 0.5 * h * (p_prev + p);
    p_prev = p;
  }
  return 2.0 * std::real(outer);
}

double coupler_area(const ScheduleSpec& s) {
  return 0.5 * s.g0 * s.t1 + s.g0 * (s.t2 - s.t1) + 0.5 * s.g0 * (s.T - s.t2);
}

}  // namespace

TEST_CASE("ramp bookkeeping and the closed-form phase accumulator") {
  const auto s = make_schedule(8.0, 0.5, 3.0, 0.5);
  const auto ramp = protocol_ramp(s);
  CHECK(ramp.gamma_B == doctest::Approx(2.5 / 6.0).epsilon(1e-15));
  CHECK(ramp.t_B == 6.0);
  CHECK(ramp_B(ramp, 0.0) == 3.0);
  CHECK(ramp_B(ramp, 6.0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(ramp_B(ramp, 7.0) == 0.5);
  CHECK(theta_B(ramp, 0.0) == 0.0);
  CHECK(theta_B(ramp, 8.0) == doctest::Approx(-11.5).epsilon(1e-14));

  // Closed form against a fine trapezoid of -Int B dt.
  for (double t : {2.5, 6.0, 7.3}) {
    const int n = 200000;
    double acc = 0.0;
    for (int k = 1; k <= n; ++k) {
      const double a = (k - 1) * t / n, b = k * t / n;
      acc -= 0.5 * (ramp_B(ramp, a) + ramp_B(ramp, b)) * (b - a);
    }
    CHECK(theta_B(ramp, t) == doctest::Approx(acc).epsilon(1e-10));
  }

  CHECK(t_star(ramp, -2.2) == doctest::Approx(4.56).epsilon(1e-14));
  CHECK(t_star(ramp, 2.2) == doctest::Approx(4.56).epsilon(1e-14));
  CHECK(adiabatic_delta(ramp, -2.2) ==
        doctest::Approx(M_PI * 0.25 * 6.0 / 2.5).epsilon(1e-14));

  const auto lin = linear_ramp(make_schedule(10.0, 0.3, 0.0, 0.0), 5.0, 0.5);
  CHECK(lin.B_f == doctest::Approx(0.0));
  CHECK(lin.t_B == 10.0);
  CHECK(theta_B(lin, 10.0) == doctest::Approx(-25.0).epsilon(1e-14));

  CHECK_THROWS_AS(ramp_B(ramp, -0.1), std::invalid_argument);
  CHECK_THROWS_AS(theta_B(ramp, 8.5), std::invalid_argument);
  CHECK_THROWS_AS(t_star(ramp, -6.2), std::invalid_argument);
  CHECK_THROWS_AS(t_star(ramp, -0.9), std::invalid_argument);
  CHECK_THROWS_AS(t_star(lin, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(protocol_ramp(make_schedule(8.0, 0.5, 1.0, 1.0)),
                  std::invalid_argument);
  CHECK_THROWS_AS(linear_ramp(make_schedule(10.0, 0.3, 0.0, 0.0), 5.0, -0.1),
                  std::invalid_argument);
  CHECK_THROWS_AS(delta_c(0.0, -1.0, ramp), std::invalid_argument);
  CHECK_THROWS_AS(delta_c(9.0, -1.0, ramp), std::invalid_argument);
}

TEST_CASE("sweep kernel matches a direct two-time quadrature") {
  const auto ramp = protocol_ramp(make_schedule(4.0, 0.4, 2.0, 0.2));
  for (double w : {-1.0, -3.0}) {
    const double fast = delta_c(4.0, w, ramp);
    const double oracle = delta_c_two_time(4.0, w, ramp, 120000);
    CHECK(fast == doctest::Approx(oracle).epsilon(3e-5));
    CHECK(fast >= 0.0);
  }
  // The counter-rotating side is orders of magnitude smaller but must still
  // agree with the literal definition.
  const double fast = delta_c(4.0, 1.0, ramp);
  const double oracle = delta_c_two_time(4.0, 1.0, ramp, 120000);
  CHECK(std::abs(fast - oracle) <= 1e-3 * std::abs(oracle) + 1e-12);
}

TEST_CASE("zero coupling gives an exactly vanishing kernel") {
  const auto ramp = protocol_ramp(make_schedule(6.0, 0.0, 2.0, 0.2));
  CHECK(delta_c(6.0, -1.0, ramp) == 0.0);
  CHECK(delta_s(6.0, 1.0, ramp) == 0.0);
}

TEST_CASE("kernel tolerance tightening and panel budget exhaustion") {
  const auto s = make_schedule(120.0, 0.3, 2.0, 0.2);
  const auto ramp = protocol_ramp(s);
  const double env = coupler_area(s);

  const double coarse = delta_c(120.0, -2.2, ramp, {1e-4, 40000});
  const double finer = delta_c(120.0, -2.2, ramp, {5e-5, 40000});
  // Halving the tolerance moves the value by less than the coarser
  // tolerance's guaranteed band.
  CHECK(std::abs(coarse - finer) <= 3.0 * 1e-4 * env * env);
  CHECK(coarse == doctest::Approx(delta_c(120.0, -2.2, ramp, {1e-8, 200000}))
                      .epsilon(1e-4));

  try {
    delta_c(120.0, -40.0, ramp, {1e-6, 8});
    FAIL("an 8-panel budget cannot resolve a fast oscillation");
  } catch (const convergence_error& e) {
    CHECK(e.achieved >= 0.0);
    CHECK(e.error_estimate > 0.0);
  }
}

TEST_CASE("slow sweeps reach the golden-rule plateau inside the window") {
  // Interior resonance: |omega| = 2B is crossed mid-plateau.  Over a decade
  // of ramp rates the plateau mismatch shrinks essentially monotonically.
  std::vector<double> err;
  for (double T : {30.0, 60.0, 120.0, 300.0}) {
    const auto ramp = protocol_ramp(make_schedule(T, 0.3, 2.0, 0.2));
    const double ratio = delta_c(T, -2.2, ramp) / adiabatic_delta(ramp, -2.2);
    err.push_back(std::abs(ratio - 1.0));
  }
  for (std::size_t i = 0; i + 1 < err.size(); ++i)
    CHECK(err[i + 1] <= err[i] * 1.05 + 1e-6);
  CHECK(err.front() > err.back());
  CHECK(err.back() < 0.05);

  // Far outside the swept window the kernel is negligible on the plateau
  // scale; frequencies parked near -2 B_f stay resonant through the tail
  // and are deliberately not tested here.
  const auto s = make_schedule(120.0, 0.3, 2.0, 0.2);
  const auto ramp = protocol_ramp(s);
  const double scale = M_PI * s.g0 * s.g0 / ramp.gamma_B;
  CHECK(delta_c(120.0, -5.0, ramp) < 0.05 * scale);
  CHECK(delta_c(120.0, 2.2, ramp) < 0.05 * scale);
  CHECK(delta_c(120.0, -2.2, ramp) > 0.5 * scale);
}

TEST_CASE("antisymmetrized kernel vanishes without a ramp and saturates "
          "inside the window") {
  const auto still = linear_ramp(make_schedule(5.0, 0.3, 0.0, 0.0), 0.0, 0.0);
  const double dc = delta_c(5.0, 1.3, still);
  CHECK(dc > 0.0);
  CHECK(std::abs(delta_s(5.0, 1.3, still)) <= 1e-14 * dc);

  const auto ramp = protocol_ramp(make_schedule(120.0, 0.3, 2.0, 0.2));
  const double ds = delta_s(120.0, 2.2, ramp);
  CHECK(ds < 0.0);
  CHECK(std::abs(ds) / adiabatic_delta(ramp, 2.2) ==
        doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("full-window ramp with a tapered coupler approaches its plateau") {
  // B sweeps all the way to zero over [0, T] while g keeps its quarter
  // ramps, so the omega = 1 resonance is crossed inside the coupler taper.
  const auto make = [](double T) {
    return linear_ramp(make_schedule(T, 0.4, 0.0, 0.0), 5.0, 5.0 / T);
  };
  const QuadratureControl ctl{1e-6, 200000};
  for (double w : {1.0, 2.0}) {
    const auto slow = make(300.0);
    const double r_slow = std::abs(delta_s(300.0, w, slow, ctl)) /
                          adiabatic_delta(slow, w);
    CHECK(r_slow == doctest::Approx(1.0).epsilon(0.05));

    const auto fast = make(0.3);
    const double r_fast = std::abs(delta_s(0.3, w, fast, ctl)) /
                          adiabatic_delta(fast, w);
    CHECK(r_fast < 0.5);
  }
}

TEST_CASE("response-driven cooling rate matches the sweep simulation") {
  // One spin in a transverse field plus its polarized partner: the sweep de-
  // excites it with probability Delta_c at the transition frequency, which
  // pins the golden-rule prefactor against the simulator.
  const auto model = build_ising(1, 0.0, 1.0, 0.0, Boundary::open);
  const auto sched = make_schedule(60.0, 0.04, 2.0, 0.2, 0.0, 60.0);
  const auto ramp = protocol_ramp(sched);
  const auto spectral = exact_spectrum(model);
  REQUIRE(spectral.energies(0) == doctest::Approx(-1.0));

  const double dc_res = delta_c(60.0, -2.0, ramp);
  const double dc_anti = delta_c(60.0, 2.0, ramp);
  CHECK(dc_anti < 0.01 * dc_res);

  const NoiseSpec quiet{0.0};
  const TrotterPlan plan(model, sched, 0.01, quiet);
  const auto sweep = make_sweep(sched, 6000);
  double dE[2];
  for (int k = 0; k < 2; ++k) {
    StateVector psi(model.n_total());
    auto& a = psi.amps();
    a[0] = cplx{spectral.vectors(0, k), 0.0};
    a[1] = cplx{spectral.vectors(1, k), 0.0};
    RngStream rng(7);
    const double before = energy_expectation(psi, model);
    run_sweep(psi, plan, sweep, rng);
    dE[k] = energy_expectation(psi, model) - before;
  }
  // Energy extracted from the excited state equals twice the de-excitation
  // probability; the polarized ground state barely heats.
  CHECK(std::abs(dE[1] + 2.0 * dc_res) <= 0.2 * 2.0 * dc_res);
  CHECK(std::abs(dE[0]) < 0.02 * std::abs(dE[1]));

  // Rate formula integrated along the sweep against the thermally weighted
  // simulated energy change.
  const double beta = 0.5;
  const auto grid = make_omega_grid(-4.4, 0.4, 4801);
  const auto chi = local_susceptibility(spectral, model, 0, beta, grid, 0.05);
  double predicted_loss = 0.0;
  const int nt = 6000;
  for (int i = 0; i < nt; ++i) {
    const double t = (i + 0.5) * 60.0 / nt;
    predicted_loss +=
        cooling_rate_pt(chi, sched.g0, ramp_B(ramp, t), beta) * 60.0 / nt;
  }
  CHECK(predicted_loss > 0.0);
  double w_gs = std::exp(-beta * spectral.energies(0));
  double w_exc = std::exp(-beta * spectral.energies(1));
  const double z = w_gs + w_exc;
  w_gs /= z;
  w_exc /= z;
  const double thermal_dE = w_gs * dE[0] + w_exc * dE[1];
  CHECK(std::abs(thermal_dE + predicted_loss) <= 0.2 * predicted_loss);
}

TEST_CASE("cooling rate interpolation, limits and argument checking") {
  SusceptibilityGrid grid;
  grid.omega = {-3.0, -1.0};
  grid.chi = {-0.6, -0.2};
  grid.eta = 0.05;
  grid.beta = 2.0;

  const double g = 0.3, beta = 2.0;
  const double bose = 1.0 + 1.0 / std::expm1(beta * -2.0);
  const double expected = -2.0 * g * g * bose * (-2.0) * (-0.4);
  CHECK(cooling_rate_pt(grid, g, 1.0, beta) ==
        doctest::Approx(expected).epsilon(1e-14));
  // Exactly on a grid node.
  const double at_node = -2.0 * g * g *
                         (1.0 + 1.0 / std::expm1(beta * -3.0)) * (-3.0) *
                         (-0.6);
  CHECK(cooling_rate_pt(grid, g, 1.5, beta) ==
        doctest::Approx(at_node).epsilon(1e-14));

  // A zero-temperature system yields nothing to extract.
  CHECK(cooling_rate_pt(grid, g, 1.0, kInf) == 0.0);

  SusceptibilityGrid dead = grid;
  dead.chi = {0.0, 0.0};
  CHECK(cooling_rate_pt(dead, g, 1.0, beta) == 0.0);

  CHECK_THROWS_AS(cooling_rate_pt(grid, g, 0.4, beta), std::invalid_argument);
  CHECK_THROWS_AS(cooling_rate_pt(grid, g, 2.0, beta), std::invalid_argument);
  CHECK_THROWS_AS(cooling_rate_pt(grid, g, 0.0, beta), std::invalid_argument);
  CHECK_THROWS_AS(cooling_rate_pt(grid, g, 1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(cooling_rate_pt(grid, g, 1.0, -1.0), std::invalid_argument);
  SusceptibilityGrid ragged = grid;
  ragged.chi = {-0.6};
  CHECK_THROWS_AS(cooling_rate_pt(ragged, g, 1.0, beta),
                  std::invalid_argument);
}

TEST_CASE("steady-state and small-volume closed forms") {
  CHECK(rate_steady_state({2.0, 4.0, 1, 1.0, 1, 1.0, 1.0, 1.0}) == 0.5);
  CHECK(rate_steady_state({1e-4, 1.0, 2, 1.0, 1, 1.0, 1.0, 1.0}) ==
        doctest::Approx(1e-2).epsilon(1e-14));
  CHECK(rate_steady_state({8e-6, 1.0, 3, 1.0, 1, 1.0, 1.0, 1.0}) ==
        doctest::Approx(0.02).epsilon(1e-14));
  CHECK(rate_steady_state({0.0, 1.0, 2, 1.0, 1, 1.0, 1.0, 1.0}) == 0.0);

  // First-order decay is volume independent and matches the steady state.
  RateModelSpec m1{0.3, 2.0, 1, 7.0, 1, 1.0, 1.0, 1.0};
  CHECK(rate_finite_size(m1).n == doctest::Approx(0.15).epsilon(1e-15));
  RateModelSpec m1b = m1;
  m1b.V = 16.0;
  CHECK(rate_finite_size(m1).n == rate_finite_size(m1b).n);
  CHECK(rate_finite_size(m1).n ==
        doctest::Approx(rate_steady_state(m1)).epsilon(1e-15));

  // Pair annihilation in a small volume: density doubles with the volume.
  RateModelSpec m2{1e-4, 1.0, 2, 10.0, 1, 1.0, 1.0, 1.0};
  const auto f2 = rate_finite_size(m2);
  CHECK(f2.n == doctest::Approx(1e-3).epsilon(1e-15));
  CHECK(f2.valid);
  RateModelSpec m2b = m2;
  m2b.V = 20.0;
  CHECK(rate_finite_size(m2b).n == doctest::Approx(2.0 * f2.n).epsilon(1e-15));
  RateModelSpec crowded = m2;
  crowded.V = 1000.0;
  CHECK_FALSE(rate_finite_size(crowded).valid);

  CHECK_THROWS_AS(rate_steady_state({1.0, 1.0, 0, 1.0, 1, 1.0, 1.0, 1.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(rate_steady_state({1.0, 1.0, 4, 1.0, 1, 1.0, 1.0, 1.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(rate_steady_state({1.0, 0.0, 1, 1.0, 1, 1.0, 1.0, 1.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(rate_steady_state({-1.0, 1.0, 1, 1.0, 1, 1.0, 1.0, 1.0}),
                  std::invalid_argument);
  RateModelSpec tiny_v{1.0, 1.0, 1, 0.5, 1, 1.0, 1.0, 1.0};
  CHECK_THROWS_AS(rate_finite_size(tiny_v), std::invalid_argument);
}

TEST_CASE("rate integration reproduces closed-form decay") {
  RateModelSpec decay{0.0, 1.0, 1, 1.0, 1, 1.0, 1.0, 1.0};
  const auto tr = rate_evolve(decay, 1.0, 5.0, 1e-3);
  REQUIRE(tr.t.size() == tr.n.size());
  CHECK(tr.t.front() == 0.0);
  CHECK(tr.t.back() == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(std::abs(tr.n.back() - std::exp(-5.0)) < 1e-8);
  const std::size_t mid = 1000;
  CHECK(std::abs(tr.n[mid] - std::exp(-tr.t[mid])) < 1e-8);

  RateModelSpec pair{0.0, 1.0, 2, 1.0, 1, 1.0, 1.0, 1.0};
  const auto tp = rate_evolve(pair, 1.0, 9.0, 1e-3);
  CHECK(std::abs(tp.n.back() - 0.1) < 1e-6);

  // Long horizons land on the steady state.
  RateModelSpec driven{0.3, 1.2, 2, 1.0, 1, 1.0, 1.0, 1.0};
  const auto td = rate_evolve(driven, 0.0, 25.0, 1e-3);
  CHECK(std::abs(td.n.back() - rate_steady_state(driven)) < 1e-8);

  const auto still = rate_evolve(driven, 0.25, 0.0, 0.1);
  CHECK(still.t.size() == 1);
  CHECK(still.n[0] == 0.25);

  CHECK_THROWS_AS(rate_evolve(pair, 1.0, 20.0, 4.0), convergence_error);
  CHECK_THROWS_AS(rate_evolve(pair, -1.0, 1.0, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(rate_evolve(pair, 1.0, 1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(rate_evolve(pair, 1.0, -1.0, 0.1), std::invalid_argument);
}

TEST_CASE("ramp-time optimum follows the closed form") {
  const double nu = 0.63, c = 1.3;
  const auto r = kz_defect_density(1e-4, 2, nu, 1.0, c);
  CHECK(r.exponent == doctest::Approx(1.26 / 2.89).epsilon(1e-14));
  CHECK(std::abs(r.exponent - 0.4360) < 1e-4);
  CHECK(kz_defect_density(1e-4, 3, 0.5, 1.0, 1.0).exponent == 0.5);

  // The argmin is resolved to roughly sqrt(eps): rounding noise in the
  // objective is flat across the bottom of the basin.
  const double a = 2.0 * nu / (1.0 + nu);
  const double t_closed = std::pow(a * c / 1e-4, 1.0 / (1.0 + a));
  CHECK(r.t_opt == doctest::Approx(t_closed).epsilon(1e-6));
  const double f_closed = 1e-4 * t_closed + c * std::pow(t_closed, -a);
  CHECK(r.density == doctest::Approx(f_closed).epsilon(1e-10));

  // Minimized density follows a pure power law in the noise rate.
  std::vector<double> lg, ln;
  for (int k = 0; k <= 12; ++k) {
    const double gamma = 1e-6 * std::pow(10.0, k / 4.0);
    lg.push_back(std::log(gamma));
    ln.push_back(std::log(kz_defect_density(gamma, 2, nu, 1.0, c).density));
  }
  const auto fit = stats::linfit(lg, ln);
  CHECK(std::abs(fit.slope - r.exponent) < 1e-6);
  CHECK(std::abs(fit.slope - r.exponent) < 0.02 * r.exponent);

  CHECK_THROWS_AS(kz_defect_density(0.0, 2, nu, 1.0, c),
                  std::invalid_argument);
  CHECK_THROWS_AS(kz_defect_density(1e-4, 0, nu, 1.0, c),
                  std::invalid_argument);
  CHECK_THROWS_AS(kz_defect_density(1e-4, 2, 0.0, 1.0, c),
                  std::invalid_argument);
  CHECK_THROWS_AS(kz_defect_density(1e-4, 2, nu, 0.0, c),
                  std::invalid_argument);
  CHECK_THROWS_AS(kz_defect_density(1e-4, 2, nu, 1.0, 0.0),
                  std::invalid_argument);
}

TEST_CASE("scaling comparison verdicts") {
  const auto single = kz_comparison(1e-6, 2, 0.63, 1.0, 1);
  CHECK(single.cooling_exponent == 1.0);
  CHECK(single.kz_exponent == doctest::Approx(1.26 / 2.89).epsilon(1e-14));
  CHECK(single.kz_opt_exponent == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(single.cooling_beats_kz);
  CHECK(single.cooling_beats_kz_opt);
  CHECK(single.n_cooling == doctest::Approx(1e-6).epsilon(1e-12));
  CHECK(single.n_cooling < single.n_kz);

  const auto pair = kz_comparison(1e-6, 2, 0.63, 1.0, 2);
  CHECK(pair.cooling_exponent == 0.5);
  CHECK(pair.cooling_beats_kz);
  CHECK_FALSE(pair.cooling_beats_kz_opt);
  CHECK(pair.boundary_applicable);
  CHECK(pair.nu_boundary == 1.0);

  // Beyond the boundary coupling exponent the fixed ramp overtakes pair
  // cooling.
  CHECK_FALSE(kz_comparison(1e-6, 2, 1.2, 1.0, 2).cooling_beats_kz);
  CHECK(kz_comparison(1e-6, 2, 0.9, 1.0, 2).cooling_beats_kz);

  // d <= z has no boundary, and the optimized ramp only beats pair cooling
  // above one dimension (at z = 1).
  const auto flat = kz_comparison(1e-6, 1, 0.63, 1.0, 2);
  CHECK_FALSE(flat.boundary_applicable);
  CHECK(flat.kz_opt_exponent == 0.5);
  CHECK_FALSE(flat.cooling_beats_kz_opt);
  const auto bulk = kz_comparison(1e-6, 3, 0.5, 1.0, 2);
  CHECK(bulk.boundary_applicable);
  CHECK(bulk.nu_boundary == 0.5);
  CHECK(bulk.kz_opt_exponent == 0.75);

  CHECK_THROWS_AS(kz_comparison(1e-6, 2, 0.63, 1.0, 0),
                  std::invalid_argument);
  CHECK_THROWS_AS(kz_comparison(0.0, 2, 0.63, 1.0, 1),
                  std::invalid_argument);
}
