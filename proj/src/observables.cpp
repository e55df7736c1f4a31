#include "spincool/observables.hpp"

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "spincool/stats.hpp"

namespace spincool {

namespace {

DiagonalTerms system_diagonal(const SpinModelSpec& m) {
  DiagonalTerms t;
  for (const auto& b : m.zz_bonds)
    if (b.J != 0.0) t.zz.push_back({b.i, b.j, -b.J});
  for (int i = 0; i < m.n_system; ++i)
    if (m.z_fields[i] != 0.0) t.z.push_back({i, -m.z_fields[i]});
  return t;
}

void check_state(const StateVector& psi, const SpinModelSpec& m) {
  if (psi.n_qubits() != m.n_total())
    throw std::invalid_argument("state size does not match the model");
}

// 2 sum_{b: bit q of b = 0} Re(conj(a_b) a_{b^flip}) for a fixed flip mask;
// this is <psi| X-word |psi> when flip is the word's support.
double flip_word_expectation(const std::vector<cplx>& a, std::uint64_t flip) {
  double s = 0.0;
  for (std::uint64_t b = 0; b < a.size(); ++b) {
    if (b & flip & -flip) continue;  // visit each pair once (lowest flip bit)
    s += std::real(std::conj(a[b]) * a[b ^ flip]);
  }
  return 2.0 * s;
}

// Thermal weights over the spectrum; beta may be +infinity (exactly
// degenerate ground states share all the weight).
Eigen::VectorXd thermal_weights(const SpectralData& sp, double beta) {
  const auto n = sp.energies.size();
  Eigen::VectorXd w(n);
  if (std::isinf(beta)) {
    double count = 0;
    for (Eigen::Index k = 0; k < n; ++k)
      if (sp.energies(k) - sp.e0 <= 1e-12) count += 1.0;
    for (Eigen::Index k = 0; k < n; ++k)
      w(k) = sp.energies(k) - sp.e0 <= 1e-12 ? 1.0 / count : 0.0;
    return w;
  }
  if (beta < 0) throw std::invalid_argument("beta must be >= 0");
  double z = 0;
  for (Eigen::Index k = 0; k < n; ++k) {
    w(k) = std::exp(-beta * (sp.energies(k) - sp.e0));
    z += w(k);
  }
  w /= z;
  return w;
}

// W = V^T K V where s^y = i K, K real antisymmetric (K|0> = |1>,
// K|1> = -|0>); |W_nm| = |<n|s^y_site|m>|.
Eigen::MatrixXd sy_matrix_elements(const SpectralData& sp, int site) {
  const auto dim = sp.vectors.rows();
  const std::uint64_t bit = std::uint64_t{1} << site;
  Eigen::MatrixXd KV(dim, sp.vectors.cols());
  for (Eigen::Index b = 0; b < dim; ++b) {
    if (b & Eigen::Index(bit)) continue;
    KV.row(b | Eigen::Index(bit)) = sp.vectors.row(b);
    KV.row(b) = -sp.vectors.row(b | Eigen::Index(bit));
  }
  return sp.vectors.transpose() * KV;
}

struct LehmannTerm {
  double weight;  // pi (w_n - w_m) |W_nm|^2
  double center;  // E_m - E_n
};

std::vector<LehmannTerm> lehmann_terms(const SpectralData& sp,
                                       const Eigen::MatrixXd& W,
                                       const Eigen::VectorXd& w) {
  std::vector<LehmannTerm> terms;
  const auto n = sp.energies.size();
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index b = 0; b < n; ++b) {
      const double wd = w(a) - w(b);
      if (wd == 0.0) continue;
      const double wt = std::numbers::pi * wd * W(a, b) * W(a, b);
      if (std::abs(wt) < 1e-300) continue;
      terms.push_back({wt, sp.energies(b) - sp.energies(a)});
    }
  }
  return terms;
}

SusceptibilityGrid broaden(const std::vector<LehmannTerm>& terms,
                           const std::vector<double>& grid, double eta,
                           double beta) {
  if (!(eta > 0)) throw std::invalid_argument("broadening must be positive");
  SusceptibilityGrid out;
  out.omega = grid;
  out.chi.assign(grid.size(), 0.0);
  out.eta = eta;
  out.beta = beta;
  const double norm = 1.0 / (eta * std::sqrt(2.0 * std::numbers::pi));
  for (std::size_t i = 0; i < grid.size(); ++i) {
    double s = 0;
    for (const auto& t : terms) {
      const double x = (grid[i] - t.center) / eta;
      s += t.weight * std::exp(-0.5 * x * x);
    }
    out.chi[i] = s * norm;
  }
  return out;
}

}  // namespace

double energy_expectation(const StateVector& psi, const SpinModelSpec& m) {
  check_state(psi, m);
  const auto& a = psi.amps();
  const int n = m.n_system;
  const std::uint64_t sys_dim = std::uint64_t{1} << n;
  const std::uint64_t sys_mask = sys_dim - 1;

  // Diagonal part through a system-size table.
  const DiagonalTerms diag = system_diagonal(m);
  std::vector<double> tab(sys_dim);
  for (std::uint64_t l = 0; l < sys_dim; ++l) tab[l] = diagonal_angle(diag, l);
  double e = 0.0;
  for (std::uint64_t b = 0; b < a.size(); ++b)
    e += std::norm(a[b]) * tab[b & sys_mask];

  for (int i = 0; i < n; ++i) {
    if (m.x_fields[i] == 0.0) continue;
    e -= m.x_fields[i] * flip_word_expectation(a, std::uint64_t{1} << i);
  }
  if (m.J_x != 0.0) {
    for (const auto& bond : m.zz_bonds) {
      const std::uint64_t flip =
          (std::uint64_t{1} << bond.i) | (std::uint64_t{1} << bond.j);
      e -= m.J_x * flip_word_expectation(a, flip);
    }
  }
  return e;
}

double fidelity_to_ground_space(const StateVector& psi,
                                const SpinModelSpec& m,
                                const SpectralData& sp) {
  check_state(psi, m);
  const std::uint64_t sys_dim = std::uint64_t{1} << m.n_system;
  if (sp.vectors.rows() != Eigen::Index(sys_dim))
    throw std::invalid_argument("spectral data does not match the model");
  double f = 0.0;
  for (int k = 0; k < sp.multiplet_size; ++k) {
    cplx overlap{0.0, 0.0};
    for (std::uint64_t l = 0; l < sys_dim; ++l)
      overlap += sp.vectors(l, k) * psi.amp(l);
    f += std::norm(overlap);
  }
  return f;
}

std::vector<double> bond_correlators(const StateVector& psi,
                                     const SpinModelSpec& m) {
  check_state(psi, m);
  std::vector<double> corr(m.zz_bonds.size(), 0.0);
  const auto& a = psi.amps();
  for (std::uint64_t b = 0; b < a.size(); ++b) {
    const double p = std::norm(a[b]);
    if (p == 0.0) continue;
    for (std::size_t k = 0; k < m.zz_bonds.size(); ++k) {
      const bool zi = (b >> m.zz_bonds[k].i) & 1;
      const bool zj = (b >> m.zz_bonds[k].j) & 1;
      corr[k] += zi == zj ? p : -p;
    }
  }
  return corr;
}

std::vector<double> eigenstate_occupations(const StateVector& psi,
                                           const SpinModelSpec& m,
                                           const SpectralData& sp) {
  check_state(psi, m);
  const std::uint64_t sys_dim = std::uint64_t{1} << m.n_system;
  Eigen::VectorXd ar(sys_dim), ai(sys_dim);
  for (std::uint64_t l = 0; l < sys_dim; ++l) {
    ar(l) = psi.amp(l).real();
    ai(l) = psi.amp(l).imag();
  }
  Eigen::VectorXd orr = sp.vectors.transpose() * ar;
  Eigen::VectorXd oi = sp.vectors.transpose() * ai;
  std::vector<double> p(sys_dim);
  for (std::uint64_t k = 0; k < sys_dim; ++k)
    p[k] = orr(k) * orr(k) + oi(k) * oi(k);
  return p;
}

int domain_wall_number(std::uint64_t basis_index, const SpinModelSpec& m) {
  int walls = 0;
  for (const auto& b : m.zz_bonds)
    walls += ((basis_index >> b.i) & 1) != ((basis_index >> b.j) & 1);
  return walls;
}

int domain_wall_label(const SpectralData& sp, int k,
                      const SpinModelSpec& m) {
  const auto dim = sp.vectors.rows();
  double d = 0.0;
  for (Eigen::Index l = 0; l < dim; ++l) {
    const double p = sp.vectors(l, k) * sp.vectors(l, k);
    if (p > 0.0) d += p * domain_wall_number(std::uint64_t(l), m);
  }
  if (m.boundary == Boundary::periodic)
    return 2 * int(std::lround(d / 2.0));
  return int(std::lround(d));
}

std::vector<double> make_omega_grid(double w_min, double w_max, int n_points) {
  if (n_points < 2) throw std::invalid_argument("grid needs >= 2 points");
  if (!(w_max > w_min)) throw std::invalid_argument("empty frequency window");
  std::vector<double> g(n_points);
  for (int i = 0; i < n_points; ++i)
    g[i] = w_min + (w_max - w_min) * double(i) / double(n_points - 1);
  return g;
}

SusceptibilityGrid local_susceptibility(const SpectralData& sp,
                                        const SpinModelSpec& m, int site,
                                        double beta,
                                        const std::vector<double>& grid,
                                        double eta) {
  if (site < 0 || site >= m.n_system)
    throw std::invalid_argument("site index out of range");
  const auto w = thermal_weights(sp, beta);
  const auto W = sy_matrix_elements(sp, site);
  return broaden(lehmann_terms(sp, W, w), grid, eta, beta);
}

SusceptibilityGrid site_averaged_susceptibility(
    const SpectralData& sp, const SpinModelSpec& m, double beta,
    const std::vector<double>& grid, double eta) {
  const auto w = thermal_weights(sp, beta);
  std::vector<LehmannTerm> all;
  for (int site = 0; site < m.n_system; ++site) {
    const auto W = sy_matrix_elements(sp, site);
    auto terms = lehmann_terms(sp, W, w);
    for (auto& t : terms) t.weight /= m.n_system;
    all.insert(all.end(), terms.begin(), terms.end());
  }
  return broaden(all, grid, eta, beta);
}

double lehmann_weight_total(const SpectralData& sp, const SpinModelSpec& m,
                            int site, double beta) {
  const auto w = thermal_weights(sp, beta);
  const auto W = sy_matrix_elements(sp, site);
  double total = 0.0;
  for (const auto& t : lehmann_terms(sp, W, w))
    if (t.center > 0) total += t.weight;
  return total;
}

double fit_effective_beta(const std::vector<double>& occupations,
                          const SpectralData& sp, double floor) {
  std::vector<double> es, logs;
  for (std::size_t k = 0;
       k < occupations.size() && Eigen::Index(k) < sp.energies.size(); ++k) {
    if (occupations[k] > floor) {
      es.push_back(sp.energies(k));
      logs.push_back(std::log(occupations[k]));
    }
  }
  if (es.size() < 2)
    throw std::invalid_argument(
        "effective-temperature fit needs two occupied states");
  return -stats::linfit(es, logs).slope;
}

}  // namespace spincool
