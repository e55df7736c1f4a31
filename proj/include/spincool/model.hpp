#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "spincool/state_vector.hpp"

namespace spincool {

enum class Boundary { periodic, open };

// Transverse/longitudinal-field Ising chain of n_system spins,
//   H_s = - sum_b J_b s^z_i s^z_{i+1} - sum_i (h_x s^x_i + h_z s^z_i)
//         - J_x sum_i s^x_i s^x_{i+1},
// with spin operators equal to Pauli matrices (eigenvalues +-1).  Each
// system spin i with bath_mask[i] set is paired with one ancilla bath spin;
// bath spins are appended after the system register, compactly in site
// order, so the register is [system 0..n-1 | bath ...].
struct SpinModelSpec {
  int n_system = 0;
  Boundary boundary = Boundary::periodic;
  struct Bond {
    int i, j;
    double J;
  };
  std::vector<Bond> zz_bonds;
  std::vector<double> x_fields;  // h_x per site
  std::vector<double> z_fields;  // h_z per site
  double J_x = 0.0;              // uniform XX coupling (0 disables)
  std::vector<bool> bath_mask;   // which sites carry a bath spin

  int n_bath() const;
  int n_total() const { return n_system + n_bath(); }
  // Register index of the bath partner of system site i (mask must be set).
  int bath_qubit(int site) const;
  std::vector<int> masked_sites() const;
};

// Uniform chain constructor.  trap_bond >= 0 replaces that bond's coupling
// with trap_J (absolute value, not a ratio).  Bond b joins sites (b, b+1);
// a periodic chain has n_system bonds, an open chain n_system - 1.
SpinModelSpec build_ising(int n_system, double J, double h_x, double h_z,
                          Boundary boundary, double J_x = 0.0,
                          int trap_bond = -1, double trap_J = 0.0);

// Piecewise-linear control schedule over one sweep of duration T:
//   g(t): 0 -> g0 on [0, t1], g0 on [t1, t2], g0 -> 0 on [t2, T]
//   B(t): B_i -> B_f linearly on [0, t2], B_f on [t2, T]
// Defaults t1 = T/4, t2 = 3T/4 are filled in by make_schedule.
struct ScheduleSpec {
  double T = 0.0;
  double g0 = 0.0;
  double B_i = 0.0;
  double B_f = 0.0;
  double t1 = 0.0;
  double t2 = 0.0;
};

ScheduleSpec make_schedule(double T, double g0, double B_i, double B_f,
                           double t1 = -1.0, double t2 = -1.0);

struct ScheduleValue {
  double g, B;
};

// Evaluates (g(t), B(t)); throws std::invalid_argument outside [0, T].
ScheduleValue schedule_eval(const ScheduleSpec& s, double t);

// The full generator H(t) = H_s + sum_masked [ g s^y_i sigma^y_i - B sigma^z_i ]
// split into the three mutually commuting groups used by the second-order
// splitting: Z (all-diagonal), Y (disjoint system-bath couplers), X (pure
// X words, which all commute with one another).  Zero-coefficient terms are
// dropped, so g = 0 gives an empty Y group.
struct TermGroups {
  DiagonalTerms z_group;  // -J zz bonds, -h_z fields, -B bath Zeeman
  struct XTerm {
    int q;
    double c;  // -h_x
  };
  struct XXTerm {
    int i, j;
    double c;  // -J_x
  };
  struct YYTerm {
    int sys, bath;
    double c;  // +g
  };
  std::vector<XTerm> x_fields;
  std::vector<XXTerm> xx_bonds;
  std::vector<YYTerm> yy_couplers;
};

TermGroups assemble_full_hamiltonian_terms(const SpinModelSpec& model,
                                           double g, double B);

// Dense eigendecomposition of the system Hamiltonian (system register only;
// H_s is real symmetric in the computational basis).  Refuses n_system > 14.
//
// The ground multiplet is every state within degeneracy_tol of E_0.  In the
// symmetry-broken ferromagnetic phase (h_z = 0, uniform |J| > |h_x|) the
// two lowest states are split only by an exponentially small finite-size
// amount that still dwarfs any fixed tiny tolerance, so there the multiplet
// is pinned to the lowest two states and the gap is E_2 - E_0.
struct SpectralData {
  Eigen::VectorXd energies;     // ascending
  Eigen::MatrixXd vectors;      // column k = eigenvector k (real)
  double e0 = 0.0;
  double gap = 0.0;             // first excitation above the ground multiplet
  int multiplet_size = 1;
};

SpectralData exact_spectrum(const SpinModelSpec& model,
                            double degeneracy_tol = 1e-8);

// Jordan-Wigner single-particle data for the uniform pure transverse-field
// chain (h_z = 0, J_x = 0, no trap).  Periodic chains use the closed form
//   eps(k) = 2 sqrt(J^2 + h^2 - 2 J h cos k)
// over the two fermion-parity momentum sets (even system size only); open
// chains diagonalize the N x N quadratic form numerically.  The many-body
// ground energy lets tests cross-check exact_spectrum through an entirely
// independent route.
struct FreeFermionSpectrum {
  std::vector<double> single_particle;  // ascending
  double ground_energy = 0.0;
  double e_even_sector = 0.0;  // periodic only
  double e_odd_sector = 0.0;   // periodic only
};

FreeFermionSpectrum free_fermion_spectrum(const SpinModelSpec& model);

}  // namespace spincool
