#include "spincool/state_vector.hpp"

#include <cmath>
#include <stdexcept>

namespace spincool {

namespace {

void check_qubit(int n, int q) {
  if (q < 0 || q >= n) throw std::invalid_argument("qubit index out of range");
}

}  // namespace

StateVector::StateVector(int n_qubits) {
  *this = basis_state(n_qubits, 0);
}

StateVector StateVector::basis_state(int n_qubits, std::uint64_t index) {
  if (n_qubits < 1 || n_qubits > 30)
    throw std::invalid_argument("qubit count must be in [1, 30]");
  StateVector s;
  s.n_qubits_ = n_qubits;
  s.amps_.assign(std::uint64_t{1} << n_qubits, cplx{0.0, 0.0});
  if (index >= s.amps_.size())
    throw std::invalid_argument("basis index out of range");
  s.amps_[index] = cplx{1.0, 0.0};
  return s;
}

StateVector StateVector::basis_state(int n_qubits, std::string_view bits) {
  if (static_cast<int>(bits.size()) != n_qubits)
    throw std::invalid_argument("bit string length must equal qubit count");
  std::uint64_t index = 0;
  for (int k = 0; k < n_qubits; ++k) {
    if (bits[k] == '1')
      index |= std::uint64_t{1} << k;
    else if (bits[k] != '0')
      throw std::invalid_argument("bit string must contain only 0 and 1");
  }
  return basis_state(n_qubits, index);
}

double StateVector::norm() const {
  double s = 0.0;
  for (const cplx& a : amps_) s += std::norm(a);
  return std::sqrt(s);
}

void StateVector::normalize() {
  double n = norm();
  if (n < 1e-14)
    throw std::runtime_error("state norm degenerate (< 1e-14), cannot renormalize");
  double inv = 1.0 / n;
  for (cplx& a : amps_) a *= inv;
}

cplx StateVector::inner_product(const StateVector& other) const {
  if (other.amps_.size() != amps_.size())
    throw std::invalid_argument("inner product of states of different size");
  cplx s{0.0, 0.0};
  for (std::uint64_t i = 0; i < amps_.size(); ++i)
    s += std::conj(amps_[i]) * other.amps_[i];
  return s;
}

LocalUnitary LocalUnitary::one_qubit(int q, const std::array<cplx, 4>& u) {
  LocalUnitary g;
  g.n_targets = 1;
  g.targets = {q, -1};
  for (int i = 0; i < 4; ++i) g.m[i] = u[i];
  return g;
}

LocalUnitary LocalUnitary::two_qubit(int a, int b,
                                     const std::array<cplx, 16>& u) {
  LocalUnitary g;
  g.n_targets = 2;
  g.targets = {a, b};
  g.m = u;
  return g;
}

double LocalUnitary::unitarity_defect() const {
  int d = n_targets == 1 ? 2 : 4;
  double worst = 0.0;
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      cplx s{0.0, 0.0};
      for (int k = 0; k < d; ++k) s += m[i * d + k] * std::conj(m[j * d + k]);
      if (i == j) s -= 1.0;
      worst = std::max(worst, std::abs(s));
    }
  }
  return worst;
}

void apply_local_unitary(StateVector& psi, const LocalUnitary& u) {
  const int n = psi.n_qubits();
  if (u.n_targets != 1 && u.n_targets != 2)
    throw std::invalid_argument("local unitary must act on 1 or 2 qubits");
  check_qubit(n, u.targets[0]);
  if (u.n_targets == 2) {
    check_qubit(n, u.targets[1]);
    if (u.targets[0] == u.targets[1])
      throw std::invalid_argument("duplicate target qubit");
  }
  if (u.unitarity_defect() > 1e-12)
    throw std::invalid_argument("matrix is not unitary (defect > 1e-12)");

  auto& a = psi.amps();
  const std::uint64_t dim = a.size();
  if (u.n_targets == 1) {
    const std::uint64_t bit = std::uint64_t{1} << u.targets[0];
    for (std::uint64_t b = 0; b < dim; ++b) {
      if (b & bit) continue;
      cplx a0 = a[b], a1 = a[b | bit];
      a[b] = u.m[0] * a0 + u.m[1] * a1;
      a[b | bit] = u.m[2] * a0 + u.m[3] * a1;
    }
  } else {
    const std::uint64_t b0 = std::uint64_t{1} << u.targets[0];
    const std::uint64_t b1 = std::uint64_t{1} << u.targets[1];
    for (std::uint64_t b = 0; b < dim; ++b) {
      if (b & (b0 | b1)) continue;
      // local index = bit(targets[0]) + 2*bit(targets[1])
      std::array<cplx, 4> in = {a[b], a[b | b0], a[b | b1], a[b | b0 | b1]};
      for (int r = 0; r < 4; ++r) {
        cplx s{0.0, 0.0};
        for (int c = 0; c < 4; ++c) s += u.m[r * 4 + c] * in[c];
        std::uint64_t idx = b | ((r & 1) ? b0 : 0) | ((r & 2) ? b1 : 0);
        a[idx] = s;
      }
    }
  }
}

namespace {

// z_q(b) as +-1.
inline double zsign(std::uint64_t b, int q) {
  return (b >> q) & 1 ? -1.0 : 1.0;
}

}  // namespace

double diagonal_angle(const DiagonalTerms& t, std::uint64_t b) {
  double s = 0.0;
  for (const auto& zz : t.zz) s += zz.c * zsign(b, zz.i) * zsign(b, zz.j);
  for (const auto& z : t.z) s += z.c * zsign(b, z.q);
  return s;
}

void apply_diagonal_phase(StateVector& psi, const DiagonalTerms& terms,
                          double scale) {
  const int n = psi.n_qubits();
  for (const auto& zz : terms.zz) {
    check_qubit(n, zz.i);
    check_qubit(n, zz.j);
    if (zz.i == zz.j) throw std::invalid_argument("zz term with i == j");
  }
  for (const auto& z : terms.z) check_qubit(n, z.q);

  auto& a = psi.amps();
  const std::uint64_t dim = a.size();

  // Look for a split bit s so that every term lies entirely below s or
  // entirely at/above s; then angle(b) = low(b mod 2^s) + high(b div 2^s).
  int split = -1;
  for (int s = 1; s < n; ++s) {
    bool ok = true;
    bool low_any = false, high_any = false;
    for (const auto& zz : terms.zz) {
      bool lo = zz.i < s && zz.j < s, hi = zz.i >= s && zz.j >= s;
      if (!lo && !hi) ok = false;
      low_any |= lo;
      high_any |= hi;
    }
    for (const auto& z : terms.z) {
      (z.q < s ? low_any : high_any) = true;
    }
    if (ok && low_any && high_any) {
      split = s;
      break;
    }
  }

  if (split > 0) {
    DiagonalTerms low, high;
    for (const auto& zz : terms.zz)
      (zz.i < split ? low.zz : high.zz).push_back(zz);
    for (const auto& z : terms.z) (z.q < split ? low.z : high.z).push_back(z);

    const std::uint64_t low_dim = std::uint64_t{1} << split;
    std::vector<cplx> tab(low_dim);
    for (std::uint64_t l = 0; l < low_dim; ++l)
      tab[l] = std::polar(1.0, -scale * diagonal_angle(low, l));
    for (std::uint64_t h = 0; h < dim >> split; ++h) {
      cplx ph = std::polar(1.0, -scale * diagonal_angle(high, h << split));
      cplx* blk = a.data() + (h << split);
      for (std::uint64_t l = 0; l < low_dim; ++l) blk[l] *= ph * tab[l];
    }
  } else {
    for (std::uint64_t b = 0; b < dim; ++b)
      a[b] *= std::polar(1.0, -scale * diagonal_angle(terms, b));
  }
}

void apply_x_rotation(StateVector& psi, int q, double angle) {
  check_qubit(psi.n_qubits(), q);
  const cplx is{0.0, -std::sin(angle)};
  const double c = std::cos(angle);
  auto& a = psi.amps();
  const std::uint64_t bit = std::uint64_t{1} << q;
  for (std::uint64_t b = 0; b < a.size(); ++b) {
    if (b & bit) continue;
    cplx u = a[b], v = a[b | bit];
    a[b] = c * u + is * v;
    a[b | bit] = is * u + c * v;
  }
}

void apply_xx_rotation(StateVector& psi, int p, int q, double angle) {
  check_qubit(psi.n_qubits(), p);
  check_qubit(psi.n_qubits(), q);
  if (p == q) throw std::invalid_argument("xx rotation with p == q");
  const cplx is{0.0, -std::sin(angle)};
  const double c = std::cos(angle);
  auto& a = psi.amps();
  const std::uint64_t bp = std::uint64_t{1} << p;
  const std::uint64_t mask = bp | (std::uint64_t{1} << q);
  for (std::uint64_t b = 0; b < a.size(); ++b) {
    if (b & bp) continue;
    cplx u = a[b], v = a[b ^ mask];
    a[b] = c * u + is * v;
    a[b ^ mask] = is * u + c * v;
  }
}

void apply_yy_rotation(StateVector& psi, int p, int q, double angle) {
  check_qubit(psi.n_qubits(), p);
  check_qubit(psi.n_qubits(), q);
  if (p == q) throw std::invalid_argument("yy rotation with p == q");
  // Y Y maps |00> -> -|11>, |01> -> |10>; so in the (00,11) sector the
  // off-diagonal of exp(-i a YY) is +i sin a, in the (01,10) sector -i sin a.
  const double c = std::cos(angle), s = std::sin(angle);
  const cplx ip{0.0, s}, im{0.0, -s};
  auto& a = psi.amps();
  const std::uint64_t bp = std::uint64_t{1} << p;
  const std::uint64_t bq = std::uint64_t{1} << q;
  for (std::uint64_t b = 0; b < a.size(); ++b) {
    if (b & (bp | bq)) continue;
    cplx a00 = a[b], a01 = a[b | bp], a10 = a[b | bq], a11 = a[b | bp | bq];
    a[b] = c * a00 + ip * a11;
    a[b | bp | bq] = c * a11 + ip * a00;
    a[b | bp] = c * a01 + im * a10;
    a[b | bq] = c * a10 + im * a01;
  }
}

void apply_pauli(StateVector& psi, int q, int which) {
  check_qubit(psi.n_qubits(), q);
  auto& a = psi.amps();
  const std::uint64_t bit = std::uint64_t{1} << q;
  switch (which) {
    case 0:  // X: swap
      for (std::uint64_t b = 0; b < a.size(); ++b) {
        if (b & bit) continue;
        std::swap(a[b], a[b | bit]);
      }
      break;
    case 1:  // Y: |0> -> i|1>, |1> -> -i|0>
      for (std::uint64_t b = 0; b < a.size(); ++b) {
        if (b & bit) continue;
        cplx a0 = a[b], a1 = a[b | bit];
        a[b] = cplx{0.0, -1.0} * a1;
        a[b | bit] = cplx{0.0, 1.0} * a0;
      }
      break;
    case 2:  // Z: sign on |1>
      for (std::uint64_t b = 0; b < a.size(); ++b)
        if (b & bit) a[b] = -a[b];
      break;
    default:
      throw std::invalid_argument("pauli index must be 0 (X), 1 (Y) or 2 (Z)");
  }
}

double prob_one(const StateVector& psi, int q) {
  check_qubit(psi.n_qubits(), q);
  const auto& a = psi.amps();
  const std::uint64_t bit = std::uint64_t{1} << q;
  double p = 0.0;
  for (std::uint64_t b = 0; b < a.size(); ++b)
    if (b & bit) p += std::norm(a[b]);
  return p;
}

int measure_qubit(StateVector& psi, int q, RngStream& rng) {
  const double p1 = prob_one(psi, q);
  const double u = rng.uniform();
  const int outcome = u < p1 ? 1 : 0;
  const double p = outcome ? p1 : 1.0 - p1;
  if (p < 1e-300)
    throw std::runtime_error("measurement collapsed onto zero-probability branch");
  auto& a = psi.amps();
  const double inv = 1.0 / std::sqrt(p);
  for (std::uint64_t b = 0; b < a.size(); ++b) {
    if (((b >> q) & 1) == static_cast<std::uint64_t>(outcome))
      a[b] *= inv;
    else
      a[b] = cplx{0.0, 0.0};
  }
  return outcome;
}

}  // namespace spincool
