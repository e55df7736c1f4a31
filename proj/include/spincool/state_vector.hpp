#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <string_view>
#include <vector>

#include "spincool/rng.hpp"

namespace spincool {

using cplx = std::complex<double>;

// Dense state vector of n qubits, 2^n complex amplitudes.
//
// Conventions (fixed throughout the code base):
//   * qubit k corresponds to bit k of the basis index (little endian);
//   * |0> is spin up, sigma^z |0> = +|0>;
//   * basis_state(n, "010...") reads the string left to right as qubit
//     0, 1, 2, ..., so "10" on two qubits is index 1.
class StateVector {
 public:
  StateVector() = default;

  // |00...0> on n qubits.
  explicit StateVector(int n_qubits);

  // All amplitudes zero except the given computational basis state.
  static StateVector basis_state(int n_qubits, std::uint64_t index);
  static StateVector basis_state(int n_qubits, std::string_view bits);

  int n_qubits() const { return n_qubits_; }
  std::uint64_t dim() const { return amps_.size(); }

  const std::vector<cplx>& amps() const { return amps_; }
  std::vector<cplx>& amps() { return amps_; }
  cplx amp(std::uint64_t i) const { return amps_[i]; }

  double norm() const;       // sqrt(sum |a|^2), summed in index order
  void normalize();          // throws std::runtime_error if norm < 1e-14

  // <this|other>
  cplx inner_product(const StateVector& other) const;

 private:
  int n_qubits_ = 0;
  std::vector<cplx> amps_;
};

// One- or two-qubit unitary acting on explicit qubit indices.  For a
// two-qubit gate on support {a, b}, the local index of a basis state is
// bit_a + 2*bit_b, i.e. the first listed qubit is the low bit of the 2x2x2x2
// matrix.  Matrices are stored row major: m[row * dim + col].
struct LocalUnitary {
  int n_targets = 0;
  std::array<int, 2> targets{};
  std::array<cplx, 16> m{};

  static LocalUnitary one_qubit(int q, const std::array<cplx, 4>& u);
  static LocalUnitary two_qubit(int a, int b, const std::array<cplx, 16>& u);

  // max |(U U^dag - 1)_{ij}|
  double unitarity_defect() const;
};

// Applies u to the state in place.  Throws std::invalid_argument if targets
// are out of range or duplicated, or if the matrix is not unitary to 1e-12.
void apply_local_unitary(StateVector& psi, const LocalUnitary& u);

// Diagonal Hamiltonian terms: angle(b) = sum_zz c * z_i(b) * z_j(b)
//                                      + sum_z  c * z_q(b),
// with z_q(b) = +1 when bit q of b is 0 (spin up), -1 otherwise.
struct DiagonalTerms {
  struct ZZ {
    int i, j;
    double c;
  };
  struct Z {
    int q;
    double c;
  };
  std::vector<ZZ> zz;
  std::vector<Z> z;
};

// angle(b) as defined above, for one basis index.
double diagonal_angle(const DiagonalTerms& terms, std::uint64_t b);

// amp(b) *= exp(-i * scale * angle(b)).  Never materializes a 2^n phase
// table: when the terms split into a low/high bit partition the low part is
// tabulated at 2^(low bits) entries (at most half the state size in the
// split case) and the high part is evaluated per block; otherwise the angle
// is accumulated per amplitude directly from the coefficient lists.
void apply_diagonal_phase(StateVector& psi, const DiagonalTerms& terms,
                          double scale);

// Specialized rotation kernels used by the Trotter stepper; all are exact
// exponentials of single Pauli words (M^2 = 1 so exp(-i a M) = cos a - i sin a M).
void apply_x_rotation(StateVector& psi, int q, double angle);        // exp(-i a X_q)
void apply_xx_rotation(StateVector& psi, int a, int b, double angle);  // exp(-i a X_a X_b)
void apply_yy_rotation(StateVector& psi, int a, int b, double angle);  // exp(-i a Y_a Y_b)

// Single Pauli insertions for the stochastic noise layer. which: 0=X, 1=Y, 2=Z.
void apply_pauli(StateVector& psi, int q, int which);

// Born-rule probability of reading qubit q as |1>, summed in index order.
double prob_one(const StateVector& psi, int q);

// Projective measurement: draws one uniform from rng, collapses and
// renormalizes.  Returns the outcome (0 or 1).  Measuring a qubit twice
// gives the same outcome deterministically.
int measure_qubit(StateVector& psi, int q, RngStream& rng);

}  // namespace spincool
