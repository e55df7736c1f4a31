#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "spincool/model.hpp"
#include "test_support.hpp"

using namespace spincool;
using namespace testsup;

TEST_CASE("chain constructor lays out bonds, fields and the trap") {
  auto m = build_ising(4, 1.0, 0.5, 0.2, Boundary::periodic);
  CHECK(m.zz_bonds.size() == 4);
  CHECK(m.zz_bonds[3].i == 3);
  CHECK(m.zz_bonds[3].j == 0);
  CHECK(m.x_fields == std::vector<double>(4, 0.5));
  CHECK(m.z_fields == std::vector<double>(4, 0.2));
  CHECK(m.n_bath() == 4);
  CHECK(m.n_total() == 8);

  auto open = build_ising(5, 1.0, 0.5, 0.0, Boundary::open);
  CHECK(open.zz_bonds.size() == 4);

  auto trap = build_ising(8, 1.0, 0.5, 0.0, Boundary::open, 0.0, 3, 0.33);
  CHECK(trap.zz_bonds[3].J == doctest::Approx(0.33));
  CHECK(trap.zz_bonds[2].J == doctest::Approx(1.0));
}

TEST_CASE("bath mask controls the register layout") {
  auto m = build_ising(4, 1.0, 1.0, 0.0, Boundary::periodic);
  m.bath_mask = {true, false, true, true};
  CHECK(m.n_bath() == 3);
  CHECK(m.n_total() == 7);
  CHECK(m.bath_qubit(0) == 4);
  CHECK(m.bath_qubit(2) == 5);
  CHECK(m.bath_qubit(3) == 6);
  CHECK_THROWS_AS(m.bath_qubit(1), std::invalid_argument);
  CHECK(m.masked_sites() == std::vector<int>{0, 2, 3});
}

TEST_CASE("schedule is piecewise linear with the documented defaults") {
  auto s = make_schedule(8.0, 0.5, 5.0, 0.7);
  CHECK(s.t1 == doctest::Approx(2.0));
  CHECK(s.t2 == doctest::Approx(6.0));

  CHECK(schedule_eval(s, 0.0).g == doctest::Approx(0.0));
  CHECK(schedule_eval(s, 1.0).g == doctest::Approx(0.25));
  CHECK(schedule_eval(s, 2.0).g == doctest::Approx(0.5));
  CHECK(schedule_eval(s, 4.0).g == doctest::Approx(0.5));
  CHECK(schedule_eval(s, 6.0).g == doctest::Approx(0.5));
  CHECK(schedule_eval(s, 7.0).g == doctest::Approx(0.25));
  CHECK(schedule_eval(s, 8.0).g == doctest::Approx(0.0));

  CHECK(schedule_eval(s, 0.0).B == doctest::Approx(5.0));
  CHECK(schedule_eval(s, 3.0).B == doctest::Approx(5.0 - 4.3 / 2));
  CHECK(schedule_eval(s, 6.0).B == doctest::Approx(0.7));
  CHECK(schedule_eval(s, 7.5).B == doctest::Approx(0.7));

  CHECK_THROWS_AS(schedule_eval(s, -0.1), std::invalid_argument);
  CHECK_THROWS_AS(schedule_eval(s, 8.1), std::invalid_argument);
  CHECK_THROWS_AS(make_schedule(8.0, 0.5, 5.0, 0.7, 6.0, 2.0),
                  std::invalid_argument);
}

TEST_CASE("assembled term groups reproduce the dense Hamiltonian") {
  auto m = build_ising(3, 1.1, 0.6, 0.25, Boundary::periodic, 0.15);
  m.bath_mask = {true, false, true};
  const double g = 0.4, B = 1.7;

  auto groups = assemble_full_hamiltonian_terms(m, g, B);
  const int nt = m.n_total();
  const std::int64_t d = std::int64_t{1} << nt;

  cmat H = cmat::Zero(d, d);
  for (const auto& zz : groups.z_group.zz)
    H += zz.c * two_site(pauli_z(), zz.i, zz.j, nt);
  for (const auto& z : groups.z_group.z)
    H += z.c * op_on_qubit(pauli_z(), z.q, nt);
  for (const auto& x : groups.x_fields)
    H += x.c * op_on_qubit(pauli_x(), x.q, nt);
  for (const auto& xx : groups.xx_bonds)
    H += xx.c * two_site(pauli_x(), xx.i, xx.j, nt);
  for (const auto& yy : groups.yy_couplers)
    H += yy.c * op_on_qubit(pauli_y(), yy.sys, nt) *
         op_on_qubit(pauli_y(), yy.bath, nt);

  cmat ref = dense_full_hamiltonian(m, g, B);
  CHECK((H - ref).cwiseAbs().maxCoeff() < 1e-12);

  auto no_coupling = assemble_full_hamiltonian_terms(m, 0.0, B);
  CHECK(no_coupling.yy_couplers.empty());
}

TEST_CASE("exact spectrum agrees with the dense oracle") {
  auto m = build_ising(4, 1.0, 0.7, 0.3, Boundary::periodic, 0.1);
  auto sp = exact_spectrum(m);

  cmat H = dense_system_hamiltonian(m);
  Eigen::SelfAdjointEigenSolver<cmat> es(H);
  for (int k = 0; k < 16; ++k)
    CHECK(sp.energies(k) ==
          doctest::Approx(es.eigenvalues()(k)).epsilon(1e-10));

  // Eigenvector residuals, checked against the library's own matrix-free
  // convention (vectors are real).
  for (int k = 0; k < 16; ++k) {
    Eigen::VectorXd v = sp.vectors.col(k);
    Eigen::VectorXd r = H.real() * v - sp.energies(k) * v;
    CHECK(r.cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("ground multiplet: symmetry-broken pair vs unique ground state") {
  // Deep ferromagnet: two quasi-degenerate lowest states, gap above them.
  auto fm = exact_spectrum(build_ising(6, 1.0, 0.5, 0.0, Boundary::periodic));
  CHECK(fm.multiplet_size == 2);
  CHECK(fm.gap == doctest::Approx(fm.energies(2) - fm.energies(0)));
  CHECK(fm.gap > 0.5);

  // Paramagnet: unique ground state.
  auto pm = exact_spectrum(build_ising(6, 0.5, 1.0, 0.0, Boundary::periodic));
  CHECK(pm.multiplet_size == 1);
  CHECK(pm.gap == doctest::Approx(pm.energies(1) - pm.energies(0)));

  // A longitudinal field lifts the degeneracy; the forced pair must not
  // engage and the multiplet collapses to the true ground state.
  auto tilted =
      exact_spectrum(build_ising(4, 1.0, 0.5, 0.2, Boundary::periodic));
  CHECK(tilted.multiplet_size == 1);
}

TEST_CASE("free-fermion energies match dense diagonalization") {
  for (int n : {4, 6, 8}) {
    for (double h : {0.3, 0.5, 1.0, 1.7}) {
      for (auto bc : {Boundary::periodic, Boundary::open}) {
        auto m = build_ising(n, 1.0, h, 0.0, bc);
        auto ff = free_fermion_spectrum(m);
        auto sp = exact_spectrum(m);
        CAPTURE(n);
        CAPTURE(h);
        CHECK(std::abs(ff.ground_energy - sp.e0) < 1e-9);
      }
    }
  }
}

TEST_CASE("free-fermion single-particle spectrum is self-dual") {
  for (int n : {4, 8, 12}) {
    auto a = free_fermion_spectrum(
        build_ising(n, 1.0, 0.5, 0.0, Boundary::periodic));
    auto b = free_fermion_spectrum(
        build_ising(n, 0.5, 1.0, 0.0, Boundary::periodic));
    REQUIRE(a.single_particle.size() == b.single_particle.size());
    for (std::size_t k = 0; k < a.single_particle.size(); ++k)
      CHECK(std::abs(a.single_particle[k] - b.single_particle[k]) < 1e-12);
  }
}

TEST_CASE("free-fermion sector bookkeeping on tiny chains") {
  // Two aligned spins, periodic: ground energy -2J at h = 0 (doubled bond).
  auto cl = free_fermion_spectrum(
      build_ising(2, 1.0, 0.0, 0.0, Boundary::periodic));
  CHECK(cl.ground_energy == doctest::Approx(-2.0));

  // Pure transverse field: ground energy -n h.
  auto pm = free_fermion_spectrum(
      build_ising(4, 0.0, 1.3, 0.0, Boundary::periodic));
  CHECK(pm.ground_energy == doctest::Approx(-4 * 1.3));

  // Open single site reduces to a lone field; open pair is solvable by hand:
  // eigenvalues of -J z z - h(x1 + x2) are -+sqrt(4h^2 + J^2), -+J.
  auto one = free_fermion_spectrum(
      build_ising(1, 0.7, 0.9, 0.0, Boundary::open));
  CHECK(one.ground_energy == doctest::Approx(-0.9));
  auto two = free_fermion_spectrum(
      build_ising(2, 0.8, 0.6, 0.0, Boundary::open));
  CHECK(two.ground_energy ==
        doctest::Approx(-std::sqrt(4 * 0.6 * 0.6 + 0.8 * 0.8)));
}

TEST_CASE("free fermions refuse models they do not describe") {
  CHECK_THROWS_AS(free_fermion_spectrum(
                      build_ising(4, 1.0, 0.5, 0.1, Boundary::periodic)),
                  std::invalid_argument);
  CHECK_THROWS_AS(free_fermion_spectrum(build_ising(4, 1.0, 0.5, 0.0,
                                                    Boundary::periodic, 0.2)),
                  std::invalid_argument);
  CHECK_THROWS_AS(free_fermion_spectrum(
                      build_ising(3, 1.0, 0.5, 0.0, Boundary::periodic)),
                  std::invalid_argument);
}
