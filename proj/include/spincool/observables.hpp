#pragma once

#include <cstdint>
#include <vector>

#include "spincool/model.hpp"
#include "spincool/state_vector.hpp"

namespace spincool {

// <psi| H_s |psi> on the full register (H_s touches system qubits only).
double energy_expectation(const StateVector& psi, const SpinModelSpec& model);

// Summed squared overlap with the (possibly degenerate) ground multiplet,
// tensored with the fully polarized bath.
double fidelity_to_ground_space(const StateVector& psi,
                                const SpinModelSpec& model,
                                const SpectralData& spectral);

// <s^z_i s^z_j> for every ZZ bond, in bond order.
std::vector<double> bond_correlators(const StateVector& psi,
                                     const SpinModelSpec& model);

// p_k = |<E_k x bath_up|psi>|^2 for every system eigenstate.  Sums to one
// when the state is a pure system state against a polarized bath.
std::vector<double> eigenstate_occupations(const StateVector& psi,
                                           const SpinModelSpec& model,
                                           const SpectralData& spectral);

// Bonds whose endpoints are anti-aligned in the given basis state.
int domain_wall_number(std::uint64_t basis_index, const SpinModelSpec& model);

// Domain-wall label of eigenstate k: expectation of the wall-count operator
// rounded to the nearest even integer on periodic chains (walls come in
// pairs there), nearest integer on open ones.  A crossover label at
// h_x > 0, not a quantum number.
int domain_wall_label(const SpectralData& spectral, int k,
                      const SpinModelSpec& model);

struct SusceptibilityGrid {
  std::vector<double> omega;
  std::vector<double> chi;  // chi''(omega)
  double eta = 0.0;         // Gaussian broadening width
  double beta = 0.0;        // inverse temperature (may be +infinity)
};

std::vector<double> make_omega_grid(double w_min, double w_max, int n_points);

// Lehmann representation of the imaginary part of the retarded s^y_i
// response:
//   chi''_i(omega) = pi sum_{n,m} (w_n - w_m) |<n|s^y_i|m>|^2
//                    N_eta(omega - (E_m - E_n)),
// with thermal weights w_n = exp(-beta(E_n - E_0))/Z and N_eta a unit-area
// Gaussian of width eta.  beta = +infinity puts all weight on the exactly
// degenerate ground states.
SusceptibilityGrid local_susceptibility(const SpectralData& spectral,
                                        const SpinModelSpec& model, int site,
                                        double beta,
                                        const std::vector<double>& grid,
                                        double eta = 0.05);

// (1/N) sum_i chi''_i.
SusceptibilityGrid site_averaged_susceptibility(
    const SpectralData& spectral, const SpinModelSpec& model, double beta,
    const std::vector<double>& grid, double eta = 0.05);

// Total Lehmann weight sum pi * sum (w_n - w_m) |W_nm|^2 restricted to
// positive transition frequencies; the broadened curve must integrate to
// the full signed sum (its antisymmetric partner carries the negative
// half), which the sum-rule test checks by quadrature.
double lehmann_weight_total(const SpectralData& spectral,
                            const SpinModelSpec& model, int site, double beta);

// Slope-based effective inverse temperature from occupations: fits
// log p_k against E_k over states with p_k above the floor and returns
// -slope.
double fit_effective_beta(const std::vector<double>& occupations,
                          const SpectralData& spectral,
                          double floor = 1e-12);

}  // namespace spincool
