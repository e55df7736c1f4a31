#include "spincool/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace spincool {

int SpinModelSpec::n_bath() const {
  return static_cast<int>(std::count(bath_mask.begin(), bath_mask.end(), true));
}

int SpinModelSpec::bath_qubit(int site) const {
  if (site < 0 || site >= n_system || !bath_mask[site])
    throw std::invalid_argument("site has no bath partner");
  int rank = 0;
  for (int i = 0; i < site; ++i)
    if (bath_mask[i]) ++rank;
  return n_system + rank;
}

std::vector<int> SpinModelSpec::masked_sites() const {
  std::vector<int> out;
  for (int i = 0; i < n_system; ++i)
    if (bath_mask[i]) out.push_back(i);
  return out;
}

SpinModelSpec build_ising(int n_system, double J, double h_x, double h_z,
                          Boundary boundary, double J_x, int trap_bond,
                          double trap_J) {
  if (n_system < 1) throw std::invalid_argument("n_system must be >= 1");
  SpinModelSpec m;
  m.n_system = n_system;
  m.boundary = boundary;
  m.J_x = J_x;
  m.x_fields.assign(n_system, h_x);
  m.z_fields.assign(n_system, h_z);
  m.bath_mask.assign(n_system, true);
  const int n_bonds =
      boundary == Boundary::periodic ? n_system : n_system - 1;
  for (int b = 0; b < n_bonds; ++b)
    m.zz_bonds.push_back({b, (b + 1) % n_system, J});
  if (trap_bond >= 0) {
    if (trap_bond >= n_bonds)
      throw std::invalid_argument("trap bond index out of range");
    m.zz_bonds[trap_bond].J = trap_J;
  }
  return m;
}

ScheduleSpec make_schedule(double T, double g0, double B_i, double B_f,
                           double t1, double t2) {
  if (!(T > 0.0)) throw std::invalid_argument("sweep duration must be positive");
  ScheduleSpec s;
  s.T = T;
  s.g0 = g0;
  s.B_i = B_i;
  s.B_f = B_f;
  s.t1 = t1 < 0.0 ? T / 4.0 : t1;
  s.t2 = t2 < 0.0 ? 3.0 * T / 4.0 : t2;
  if (s.t1 < 0.0 || s.t1 > s.t2 || s.t2 > T)
    throw std::invalid_argument("schedule requires 0 <= t1 <= t2 <= T");
  return s;
}

ScheduleValue schedule_eval(const ScheduleSpec& s, double t) {
  if (t < 0.0 || t > s.T)
    throw std::invalid_argument("schedule evaluated outside [0, T]");
  double g;
  if (t < s.t1)
    g = s.t1 > 0.0 ? s.g0 * (t / s.t1) : s.g0;
  else if (t <= s.t2)
    g = s.g0;
  else
    g = s.g0 * ((s.T - t) / (s.T - s.t2));
  double B;
  if (t <= s.t2)
    B = s.t2 > 0.0 ? s.B_i + (s.B_f - s.B_i) * (t / s.t2) : s.B_f;
  else
    B = s.B_f;
  return {g, B};
}

TermGroups assemble_full_hamiltonian_terms(const SpinModelSpec& model,
                                           double g, double B) {
  TermGroups tg;
  for (const auto& b : model.zz_bonds)
    if (b.J != 0.0) tg.z_group.zz.push_back({b.i, b.j, -b.J});
  for (int i = 0; i < model.n_system; ++i)
    if (model.z_fields[i] != 0.0)
      tg.z_group.z.push_back({i, -model.z_fields[i]});
  for (int i = 0; i < model.n_system; ++i)
    if (model.x_fields[i] != 0.0) tg.x_fields.push_back({i, -model.x_fields[i]});
  if (model.J_x != 0.0) {
    const int n_bonds = model.boundary == Boundary::periodic
                            ? model.n_system
                            : model.n_system - 1;
    for (int b = 0; b < n_bonds; ++b)
      tg.xx_bonds.push_back({b, (b + 1) % model.n_system, -model.J_x});
  }
  for (int site : model.masked_sites()) {
    const int bq = model.bath_qubit(site);
    if (B != 0.0) tg.z_group.z.push_back({bq, -B});
    if (g != 0.0) tg.yy_couplers.push_back({site, bq, g});
  }
  return tg;
}

namespace {

bool is_symmetric_fm_phase(const SpinModelSpec& m) {
  // h_z = 0 keeps the global spin-flip symmetry; uniform |J| > |h_x| puts
  // the chain in the ordered phase where the lowest pair is asymptotically
  // degenerate (split only by a tunneling amplitude ~ (h/J)^N).
  for (double hz : m.z_fields)
    if (hz != 0.0) return false;
  if (m.zz_bonds.empty()) return false;
  const double J = m.zz_bonds.front().J;
  for (const auto& b : m.zz_bonds)
    if (b.J != J) return false;
  const double h = m.x_fields.empty() ? 0.0 : m.x_fields.front();
  for (double hx : m.x_fields)
    if (hx != h) return false;
  return std::abs(J) > std::abs(h);
}

}  // namespace

SpectralData exact_spectrum(const SpinModelSpec& model, double degeneracy_tol) {
  const int n = model.n_system;
  if (n > 14)
    throw std::invalid_argument(
        "dense diagonalization capped at 14 system spins");
  const std::uint64_t dim = std::uint64_t{1} << n;
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(dim, dim);

  auto zs = [](std::uint64_t b, int q) { return (b >> q) & 1 ? -1.0 : 1.0; };
  for (std::uint64_t b = 0; b < dim; ++b) {
    double diag = 0.0;
    for (const auto& bond : model.zz_bonds)
      diag -= bond.J * zs(b, bond.i) * zs(b, bond.j);
    for (int i = 0; i < n; ++i) diag -= model.z_fields[i] * zs(b, i);
    H(b, b) = diag;
    for (int i = 0; i < n; ++i)
      H(b ^ (std::uint64_t{1} << i), b) -= model.x_fields[i];
    if (model.J_x != 0.0) {
      const int n_bonds =
          model.boundary == Boundary::periodic ? n : n - 1;
      for (int bd = 0; bd < n_bonds; ++bd) {
        std::uint64_t mask = (std::uint64_t{1} << bd) |
                             (std::uint64_t{1} << ((bd + 1) % n));
        H(b ^ mask, b) -= model.J_x;
      }
    }
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("eigendecomposition failed");

  SpectralData sd;
  sd.energies = es.eigenvalues();
  sd.vectors = es.eigenvectors();
  sd.e0 = sd.energies(0);

  sd.multiplet_size = 1;
  while (sd.multiplet_size < static_cast<int>(dim) &&
         sd.energies(sd.multiplet_size) - sd.e0 <= degeneracy_tol)
    ++sd.multiplet_size;
  if (is_symmetric_fm_phase(model) && dim >= 2)
    sd.multiplet_size = std::max(sd.multiplet_size, 2);
  sd.gap = sd.multiplet_size < static_cast<int>(dim)
               ? sd.energies(sd.multiplet_size) - sd.e0
               : 0.0;
  return sd;
}

namespace {

double dispersion(double J, double h, double k) {
  return 2.0 * std::sqrt(J * J + h * h - 2.0 * J * h * std::cos(k));
}

FreeFermionSpectrum periodic_free_fermion(int n, double J, double h) {
  if (n % 2 != 0)
    throw std::invalid_argument(
        "closed-form periodic fermionization implemented for even chains");
  const double pi = std::numbers::pi;
  FreeFermionSpectrum out;

  // Even fermion parity: antiperiodic momenta k = +-(2m+1) pi / n.  The
  // Bogoliubov vacuum lies in this sector, E = -1/2 sum eps(k).
  double e_even = 0.0;
  for (int m = 0; m < n; ++m) {
    double k = pi * (2.0 * m + 1.0 - n) / n;
    double eps = dispersion(J, h, k);
    out.single_particle.push_back(eps);
    e_even -= 0.5 * eps;
  }

  // Odd parity: periodic momenta 2 pi m / n including the unpaired k = 0
  // and k = pi modes, whose signed energies are 2(h - J) and 2(h + J).  The
  // sector constraint is an odd quasiparticle count: when 2(h - J) < 0 the
  // minimum fills exactly the k = 0 mode; otherwise the cheapest single
  // excitation must be added on top of the (even-count) vacuum.
  const double lam0 = 2.0 * (h - J);
  const double lampi = 2.0 * (h + J);
  double e_vac = -0.5 * (lam0 + lampi);
  double cheapest = std::min(lam0, lampi);
  for (int m = 1; m < n / 2; ++m) {
    double k = 2.0 * pi * m / n;
    double eps = dispersion(J, h, k);
    e_vac -= eps;  // the +-k pair contributes -eps(k)/2 twice
    cheapest = std::min(cheapest, eps);
  }
  double e_odd = lam0 < 0.0 ? e_vac + lam0 : e_vac + cheapest;

  out.e_even_sector = e_even;
  out.e_odd_sector = e_odd;
  out.ground_energy = std::min(e_even, e_odd);
  std::sort(out.single_particle.begin(), out.single_particle.end());
  return out;
}

FreeFermionSpectrum open_free_fermion(int n, double J, double h) {
  // Quadratic-form route: after rotating the chain so the coupling sits in
  // x and the field in z, H = sum c^dag A c + 1/2 (c^dag B c^dag + h.c.)
  // with A_ii = 2h, A_{i,i+1} = -J, B_{i,i+1} = -B_{i+1,i} = -J.  Since
  // A - B = (A + B)^T, the single-particle energies are the singular values
  // of A + B, and E_0 = -1/2 sum eps_m.
  Eigen::MatrixXd apb = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) apb(i, i) = 2.0 * h;
  for (int i = 0; i + 1 < n; ++i) {
    apb(i, i + 1) += -2.0 * J;  // A and B add on the upper diagonal
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(apb);
  FreeFermionSpectrum out;
  double e0 = 0.0;
  for (int i = 0; i < n; ++i) {
    double eps = svd.singularValues()(i);
    out.single_particle.push_back(eps);
    e0 -= 0.5 * eps;
  }
  out.ground_energy = e0;
  std::sort(out.single_particle.begin(), out.single_particle.end());
  return out;
}

}  // namespace

FreeFermionSpectrum free_fermion_spectrum(const SpinModelSpec& model) {
  const int n = model.n_system;
  for (double hz : model.z_fields)
    if (hz != 0.0)
      throw std::invalid_argument("fermionization requires h_z = 0");
  if (model.J_x != 0.0)
    throw std::invalid_argument("fermionization requires J_x = 0");
  // A single open site has no bonds; any J is consistent then.
  const double J =
      model.zz_bonds.empty() ? 0.0 : model.zz_bonds.front().J;
  for (const auto& b : model.zz_bonds)
    if (b.J != J)
      throw std::invalid_argument("fermionization requires uniform coupling");
  const double h = model.x_fields.front();
  for (double hx : model.x_fields)
    if (hx != h)
      throw std::invalid_argument("fermionization requires uniform field");

  return model.boundary == Boundary::periodic ? periodic_free_fermion(n, J, h)
                                              : open_free_fermion(n, J, h);
}

}  // namespace spincool
