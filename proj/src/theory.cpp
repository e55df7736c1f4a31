#include "spincool/theory.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>

#include "spincool/errors.hpp"

namespace spincool {

namespace {

constexpr std::complex<double> kImagUnit{0.0, 1.0};

void check_rate_spec(const RateModelSpec& spec) {
  if (spec.M < 1 || spec.M > 3)
    throw std::invalid_argument("process order M must be 1, 2 or 3");
  if (!(spec.gamma_c > 0.0))
    throw std::invalid_argument("cooling coefficient must be positive");
  if (spec.gamma_noise < 0.0)
    throw std::invalid_argument("noise rate must be non-negative");
}

void check_kz_inputs(int d, double nu, double z) {
  if (d < 1 || d > 3)
    throw std::invalid_argument("dimension d must be 1, 2 or 3");
  if (!(nu > 0.0))
    throw std::invalid_argument("correlation exponent nu must be positive");
  if (!(z > 0.0))
    throw std::invalid_argument("dynamic exponent z must be positive");
}

double pow_int(double x, int m) {
  double r = 1.0;
  for (int i = 0; i < m; ++i) r *= x;
  return r;
}

}  // namespace

RampSpec protocol_ramp(const ScheduleSpec& schedule) {
  if (!(schedule.t2 > 0.0) || !(schedule.B_i > schedule.B_f))
    throw std::invalid_argument(
        "protocol ramp needs a decreasing splitting over a positive window");
  RampSpec r;
  r.profile = schedule;
  r.B_i = schedule.B_i;
  r.B_f = schedule.B_f;
  r.t_B = schedule.t2;
  r.gamma_B = (schedule.B_i - schedule.B_f) / schedule.t2;
  return r;
}

RampSpec linear_ramp(const ScheduleSpec& g_profile, double B_i,
                     double gamma_B) {
  if (gamma_B < 0.0)
    throw std::invalid_argument("splitting ramp rate must be non-negative");
  RampSpec r;
  r.profile = g_profile;
  r.B_i = B_i;
  r.gamma_B = gamma_B;
  r.t_B = g_profile.T;
  r.B_f = B_i - gamma_B * g_profile.T;
  return r;
}

double ramp_g(const RampSpec& ramp, double t) {
  return schedule_eval(ramp.profile, t).g;
}

double ramp_B(const RampSpec& ramp, double t) {
  if (t < 0.0 || t > ramp.profile.T)
    throw std::invalid_argument("ramp evaluated outside [0, T]");
  return t <= ramp.t_B ? ramp.B_i - ramp.gamma_B * t : ramp.B_f;
}

double theta_B(const RampSpec& ramp, double t) {
  if (t < 0.0 || t > ramp.profile.T)
    throw std::invalid_argument("ramp evaluated outside [0, T]");
  const double tc = std::min(t, ramp.t_B);
  double theta = -(ramp.B_i * tc - 0.5 * ramp.gamma_B * tc * tc);
  if (t > ramp.t_B) theta -= ramp.B_f * (t - ramp.t_B);
  return theta;
}

double t_star(const RampSpec& ramp, double omega) {
  if (!(ramp.gamma_B > 0.0))
    throw std::invalid_argument("resonance crossing needs a moving splitting");
  const double w = std::abs(omega);
  if (!(w > 2.0 * ramp.B_f && w < 2.0 * ramp.B_i))
    throw std::invalid_argument(
        "frequency is outside the swept splitting window");
  return (ramp.B_i - 0.5 * w) / ramp.gamma_B;
}

double adiabatic_delta(const RampSpec& ramp, double omega) {
  const double g = ramp_g(ramp, t_star(ramp, omega));
  return M_PI * g * g / ramp.gamma_B;
}

double delta_c(double T, double omega, const RampSpec& ramp,
               const QuadratureControl& control) {
  if (!(T > 0.0)) throw std::invalid_argument("sweep time must be positive");
  if (T > ramp.profile.T * (1.0 + 1e-12))
    throw std::invalid_argument("sweep time exceeds the profile window");
  const double end = std::min(T, ramp.profile.T);

  // Breakpoints at every kink of g or B, then pre-split each piece so a
  // single Kronrod panel never spans more than a few radians of phase.
  std::vector<double> marks{0.0, ramp.profile.t1, ramp.profile.t2, ramp.t_B,
                            end};
  std::sort(marks.begin(), marks.end());
  marks.erase(std::unique(marks.begin(), marks.end()), marks.end());
  std::vector<double> breaks;
  double envelope = 0.0;
  const double phase_rate =
      std::abs(omega) + 2.0 * std::max(std::abs(ramp.B_i), std::abs(ramp.B_f));
  for (std::size_t i = 0; i + 1 < marks.size(); ++i) {
    const double a = std::clamp(marks[i], 0.0, end);
    const double b = std::clamp(marks[i + 1], 0.0, end);
    if (!(b > a)) continue;
    envelope += 0.5 * (ramp_g(ramp, a) + ramp_g(ramp, b)) * (b - a);
    int pieces = static_cast<int>(std::ceil(phase_rate * (b - a) / 5.0));
    pieces = std::clamp(pieces, 1, std::max(1, control.max_panels / 4));
    for (int k = 0; k < pieces; ++k)
      breaks.push_back(a + (b - a) * k / pieces);
    breaks.push_back(b);
  }
  if (envelope == 0.0) return 0.0;

  const auto integrand = [&](double t) {
    const double phase = omega * t - 2.0 * theta_B(ramp, t);
    return ramp_g(ramp, t) * std::exp(kImagUnit * phase);
  };
  const double abs_tol = control.rel_tol * envelope;
  const auto result =
      integrate_adaptive(integrand, breaks, abs_tol, control.max_panels);
  return std::norm(result.value);
}

double delta_s(double T, double omega, const RampSpec& ramp,
               const QuadratureControl& control) {
  return delta_c(T, omega, ramp, control) - delta_c(T, -omega, ramp, control);
}

double cooling_rate_pt(const SusceptibilityGrid& chi, double g, double B,
                       double beta) {
  if (!(B > 0.0))
    throw std::invalid_argument("bath splitting must be positive");
  if (!(beta > 0.0))
    throw std::invalid_argument("inverse temperature must be positive");
  if (chi.omega.size() < 2 || chi.chi.size() != chi.omega.size())
    throw std::invalid_argument("response grid needs matched frequency and "
                                "amplitude columns with at least two points");
  const double w = -2.0 * B;
  if (w < chi.omega.front() || w > chi.omega.back())
    throw std::invalid_argument(
        "resonance frequency falls outside the response grid");

  const auto hi = std::lower_bound(chi.omega.begin(), chi.omega.end(), w);
  double chi_w;
  if (hi == chi.omega.begin()) {
    chi_w = chi.chi.front();
  } else {
    const std::size_t j = static_cast<std::size_t>(hi - chi.omega.begin());
    const std::size_t i = j == chi.omega.size() ? j - 1 : j;
    const double x0 = chi.omega[i - 1], x1 = chi.omega[i];
    const double f = (w - x0) / (x1 - x0);
    chi_w = (1.0 - f) * chi.chi[i - 1] + f * chi.chi[i];
  }

  // 1 + n_B(w) at w < 0 vanishes as beta -> inf: a zero-temperature system
  // has no occupied level for the sweep to de-excite.
  double bose;
  if (std::isinf(beta)) {
    bose = 0.0;
  } else {
    bose = 1.0 + 1.0 / std::expm1(beta * w);
  }
  return -2.0 * g * g * bose * w * chi_w;
}

double rate_steady_state(const RateModelSpec& spec) {
  check_rate_spec(spec);
  return std::pow(spec.gamma_noise / spec.gamma_c, 1.0 / spec.M);
}

FiniteSizeDensity rate_finite_size(const RateModelSpec& spec) {
  check_rate_spec(spec);
  if (!(spec.V >= 1.0))
    throw std::invalid_argument("volume must be at least one");
  FiniteSizeDensity out;
  out.n = spec.gamma_noise / spec.gamma_c * pow_int(spec.V, spec.M - 1);
  out.valid = out.n <= static_cast<double>(spec.M) / spec.V;
  return out;
}

RateTrajectory rate_evolve(const RateModelSpec& spec, double n_0, double t_end,
                           double dt) {
  check_rate_spec(spec);
  if (n_0 < 0.0) throw std::invalid_argument("density must be non-negative");
  if (!(dt > 0.0)) throw std::invalid_argument("step size must be positive");
  if (t_end < 0.0) throw std::invalid_argument("horizon must be non-negative");

  const auto flow = [&](double n) {
    return spec.gamma_noise - spec.gamma_c * pow_int(n, spec.M);
  };
  const auto stage = [&](double n) {
    if (n < 0.0)
      throw convergence_error(
          "rate integration went negative; reduce the step size", n, dt);
    return n;
  };

  RateTrajectory out;
  out.t.push_back(0.0);
  out.n.push_back(n_0);
  double t = 0.0;
  double n = n_0;
  while (t < t_end - 1e-12 * std::max(1.0, t_end)) {
    const double h = std::min(dt, t_end - t);
    const double k1 = flow(n);
    const double k2 = flow(stage(n + 0.5 * h * k1));
    const double k3 = flow(stage(n + 0.5 * h * k2));
    const double k4 = flow(stage(n + h * k3));
    n = stage(n + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
    t += h;
    out.t.push_back(t);
    out.n.push_back(n);
  }
  return out;
}

KzResult kz_defect_density(double gamma_noise, int d, double nu, double z,
                           double c) {
  check_kz_inputs(d, nu, z);
  if (!(gamma_noise > 0.0))
    throw std::invalid_argument("noise rate must be positive");
  if (!(c > 0.0))
    throw std::invalid_argument("defect amplitude must be positive");

  const double a = d * nu / (1.0 + z * nu);
  const auto f = [&](double log_t) {
    const double T = std::exp(log_t);
    return gamma_noise * T + c * std::pow(T, -a);
  };
  // Golden-section search in log T around the stationary point of the
  // power-law tradeoff; the objective is unimodal there.
  const double center = std::log(a * c / gamma_noise) / (1.0 + a);
  double lo = center - 8.0, hi = center + 8.0;
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
  double f1 = f(x1), f2 = f(x2);
  while (hi - lo > 1e-13) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - gr * (hi - lo);
      f1 = f(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + gr * (hi - lo);
      f2 = f(x2);
    }
  }
  KzResult out;
  out.t_opt = std::exp(0.5 * (lo + hi));
  out.density = gamma_noise * out.t_opt + c * std::pow(out.t_opt, -a);
  out.exponent = d * nu / (1.0 + (d + z) * nu);
  return out;
}

KzComparison kz_comparison(double gamma_noise, int d, double nu, double z,
                           int M) {
  check_kz_inputs(d, nu, z);
  if (M < 1 || M > 3)
    throw std::invalid_argument("process order M must be 1, 2 or 3");
  if (!(gamma_noise > 0.0))
    throw std::invalid_argument("noise rate must be positive");

  KzComparison out;
  out.cooling_exponent = 1.0 / M;
  out.kz_exponent = d * nu / (1.0 + (d + z) * nu);
  out.kz_opt_exponent = static_cast<double>(d) / (d + z);
  out.n_cooling = std::pow(gamma_noise, out.cooling_exponent);
  out.n_kz = kz_defect_density(gamma_noise, d, nu, z, 1.0).density;
  out.n_kz_opt = std::pow(gamma_noise, out.kz_opt_exponent);
  out.cooling_beats_kz = out.cooling_exponent > out.kz_exponent;
  out.cooling_beats_kz_opt = out.cooling_exponent > out.kz_opt_exponent;
  out.boundary_applicable = static_cast<double>(d) > z;
  out.nu_boundary = out.boundary_applicable ? 1.0 / (d - z) : 0.0;
  return out;
}

}  // namespace spincool
