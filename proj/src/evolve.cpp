#include "spincool/evolve.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <stdexcept>

#include "spincool/errors.hpp"

namespace spincool {

namespace {

// Working-set cap for the Y-coupler pass: choose the number of bath bits
// handled per memory pass so a slab of rows stays cache resident.
int yy_window_bits(int n_sys) {
  constexpr std::size_t kSlabBytes = 1024 * 1024;
  const std::size_t block_bytes = (std::size_t{1} << n_sys) * sizeof(cplx);
  int k = 1;
  while ((std::size_t{2} << k) * block_bytes <= kSlabBytes && k < 5) ++k;
  return k;
}

double clamp_time(double t, double T) { return t > T ? T : t; }

// The rotation kernels below spell the complex arithmetic out over plain
// doubles (std::complex is layout-compatible with double[2]) and walk the
// untouched-bit patterns as contiguous runs instead of skip-branches.  The
// streams a kernel reads and writes are disjoint runs of one array, which
// the restrict qualifiers assert, so the compiler can vectorize the inner
// loops without runtime overlap checks.

// blk[l] *= tab[l] over a block of ds amplitudes.
void scale_block(cplx* blk, const cplx* tab, std::size_t ds) {
  double* __restrict d = reinterpret_cast<double*>(blk);
  const double* __restrict tp = reinterpret_cast<const double*>(tab);
  for (std::size_t k = 0; k < 2 * ds; k += 2) {
    const double tr = tp[k], ti = tp[k + 1];
    const double ar = d[k], ai = d[k + 1];
    d[k] = tr * ar - ti * ai;
    d[k + 1] = tr * ai + ti * ar;
  }
}

// blk[l] *= ph * tab[l] with a block-constant extra phase.
void scale_block(cplx* blk, const cplx* tab, std::size_t ds, cplx ph) {
  double* __restrict d = reinterpret_cast<double*>(blk);
  const double* __restrict tp = reinterpret_cast<const double*>(tab);
  const double phr = ph.real(), phi = ph.imag();
  for (std::size_t k = 0; k < 2 * ds; k += 2) {
    const double tr = tp[k], ti = tp[k + 1];
    const double fr = phr * tr - phi * ti;
    const double fi = phr * ti + phi * tr;
    const double ar = d[k], ai = d[k + 1];
    d[k] = fr * ar - fi * ai;
    d[k + 1] = fr * ai + fi * ar;
  }
}

// exp(-i theta X) on the qubit with mask bit, within a block of ds
// amplitudes: out0 = c a0 - i s a1, out1 = c a1 - i s a0.
void rotate_x_pairs(cplx* blk, std::size_t ds, std::size_t bit, double c,
                    double s) {
  double* d = reinterpret_cast<double*>(blk);
  for (std::size_t base = 0; base < ds; base += 2 * bit) {
    double* __restrict p0 = d + 2 * base;
    double* __restrict p1 = p0 + 2 * bit;
    for (std::size_t k = 0; k < 2 * bit; k += 2) {
      const double a0r = p0[k], a0i = p0[k + 1];
      const double a1r = p1[k], a1i = p1[k + 1];
      p0[k] = c * a0r + s * a1i;
      p0[k + 1] = c * a0i - s * a1r;
      p1[k] = c * a1r + s * a0i;
      p1[k + 1] = c * a1i - s * a0r;
    }
  }
}

// exp(-i theta XX) on two qubits inside one block; the exchange pairs
// (00,11) and (01,10) both rotate with the same -i s cross term.
void rotate_xx_pairs(cplx* blk, std::size_t ds, std::size_t bit_lo,
                     std::size_t bit_hi, double c, double s) {
  double* d = reinterpret_cast<double*>(blk);
  for (std::size_t bh = 0; bh < ds; bh += 2 * bit_hi) {
    for (std::size_t bl = bh; bl < bh + bit_hi; bl += 2 * bit_lo) {
      double* __restrict p00 = d + 2 * bl;
      double* __restrict p10 = p00 + 2 * bit_lo;
      double* __restrict p01 = d + 2 * (bl + bit_hi);
      double* __restrict p11 = p01 + 2 * bit_lo;
      for (std::size_t k = 0; k < 2 * bit_lo; k += 2) {
        const double w00r = p00[k], w00i = p00[k + 1];
        const double w10r = p10[k], w10i = p10[k + 1];
        const double w01r = p01[k], w01i = p01[k + 1];
        const double w11r = p11[k], w11i = p11[k + 1];
        p00[k] = c * w00r + s * w11i;
        p00[k + 1] = c * w00i - s * w11r;
        p11[k] = c * w11r + s * w00i;
        p11[k + 1] = c * w11i - s * w00r;
        p10[k] = c * w10r + s * w01i;
        p10[k + 1] = c * w10i - s * w01r;
        p01[k] = c * w01r + s * w10i;
        p01[k + 1] = c * w01i - s * w10r;
      }
    }
  }
}

// exp(-i theta YY) on one system bit sb across a pair of bath rows: the
// (00,11) pair rotates with +i s, the (01,10) pair with -i s.
void rotate_yy_pairs(cplx* rowA, cplx* rowB, std::size_t ds, std::size_t sb,
                     double c, double s) {
  double* da = reinterpret_cast<double*>(rowA);
  double* db = reinterpret_cast<double*>(rowB);
  for (std::size_t base = 0; base < ds; base += 2 * sb) {
    double* __restrict p00 = da + 2 * base;
    double* __restrict p10 = p00 + 2 * sb;
    double* __restrict p01 = db + 2 * base;
    double* __restrict p11 = p01 + 2 * sb;
    for (std::size_t k = 0; k < 2 * sb; k += 2) {
      const double w00r = p00[k], w00i = p00[k + 1];
      const double w10r = p10[k], w10i = p10[k + 1];
      const double w01r = p01[k], w01i = p01[k + 1];
      const double w11r = p11[k], w11i = p11[k + 1];
      p00[k] = c * w00r - s * w11i;
      p00[k + 1] = c * w00i + s * w11r;
      p11[k] = c * w11r - s * w00i;
      p11[k + 1] = c * w11i + s * w00r;
      p10[k] = c * w10r + s * w01i;
      p10[k + 1] = c * w10i - s * w01r;
      p01[k] = c * w01r + s * w10i;
      p01[k + 1] = c * w01i - s * w10r;
    }
  }
}

}  // namespace

SweepSpec make_sweep(const ScheduleSpec& schedule, int n_steps) {
  if (n_steps < 1) throw config_error("sweep needs at least one step");
  return SweepSpec{schedule, n_steps, schedule.T / n_steps};
}

SweepSpec make_sweep_fixed_dt(const ScheduleSpec& schedule, int n_steps,
                              double dtau) {
  if (n_steps < 1) throw config_error("sweep needs at least one step");
  if (!(dtau > 0.0)) throw config_error("step size must be positive");
  if ((n_steps - 1) * dtau > schedule.T * (1.0 + 1e-12)) {
    throw config_error(
        "fixed step size pushes the last step past the end of the ramp");
  }
  return SweepSpec{schedule, n_steps, dtau};
}

TrotterPlan::TrotterPlan(const SpinModelSpec& model,
                         const ScheduleSpec& schedule, double dtau,
                         const NoiseSpec& noise)
    : model_(model),
      schedule_(schedule),
      dtau_(dtau),
      p_err_(noise.p_err),
      n_sys_(model.n_system),
      n_bath_(model.n_bath()),
      n_total_(model.n_total()) {
  if (!(dtau > 0.0)) throw config_error("step size must be positive");
  if (p_err_ < 0.0 || p_err_ > 1.0)
    throw config_error("per-spin error probability must lie in [0, 1]");

  // System-only diagonal terms (couplings and longitudinal fields); the
  // bath Zeeman part changes every step and is folded in per block.
  for (const auto& b : model.zz_bonds)
    if (b.J != 0.0) sys_diag_.zz.push_back({b.i, b.j, -b.J});
  for (int i = 0; i < n_sys_; ++i)
    if (model.z_fields[i] != 0.0) sys_diag_.z.push_back({i, -model.z_fields[i]});

  // Phase tables over the system register, for a half step and for two
  // merged halves.  Size 2^n_sys, which is at most half the state when a
  // bath register is present; without one we fall back to the generic
  // diagonal-phase path instead of tabulating.
  if (n_bath_ > 0) {
    const std::size_t ds = std::size_t{1} << n_sys_;
    low_half_.resize(ds);
    low_full_.resize(ds);
    for (std::size_t l = 0; l < ds; ++l) {
      const double ang = diagonal_angle(sys_diag_, l);
      low_half_[l] = std::polar(1.0, -0.5 * dtau_ * ang);
      low_full_[l] = std::polar(1.0, -dtau_ * ang);
    }
  }

  x_angles_.resize(n_sys_);
  for (int i = 0; i < n_sys_; ++i) x_angles_[i] = dtau_ * (-model.x_fields[i]);
  xx_angle_ = dtau_ * (-model.J_x);

  for (int b = 0; b < static_cast<int>(model.zz_bonds.size()); ++b)
    (b % 2 == 0 ? even_bonds_ : odd_bonds_).push_back(b);

  for (int site : model.masked_sites())
    yy_pairs_.emplace_back(site, model.bath_qubit(site) - n_sys_);
}

// Diagonal factor spanning a half step or two merged half steps, optionally
// fused with the whole X group (transverse fields plus any x-x couplers,
// even bonds first).  Everything acts within contiguous blocks of 2^n_sys
// amplitudes, one block per bath configuration, so a single pass over the
// state covers it all.  B_sum carries the bath Zeeman angle: the B of this
// step for a half pass, the sum over both steps for a merged pass.
void TrotterPlan::z_x_pass(StateVector& psi, bool full_step, double B_sum,
                           bool with_x_group) const {
  // No bath register: no phase table was built, so apply the diagonal
  // factor through the generic kernel (before the X group; the two do not
  // commute).
  if (n_bath_ == 0)
    apply_diagonal_phase(psi, sys_diag_, (full_step ? 1.0 : 0.5) * dtau_);

  cplx* a = psi.amps().data();
  const std::size_t ds = std::size_t{1} << n_sys_;
  const std::size_t blocks = psi.dim() >> n_sys_;
  const cplx* tab = (full_step ? low_full_ : low_half_).data();
  // Bath Zeeman contribution -B sum_i z_i is constant within a block: every
  // bath spin in |0> contributes z = +1, in |1> z = -1.
  const double bath_unit = 0.5 * dtau_ * B_sum;

  for (std::size_t h = 0; h < blocks; ++h) {
    cplx* blk = a + (h << n_sys_);
    if (n_bath_ > 0) {
      if (bath_unit != 0.0) {
        const double zsum = n_bath_ - 2.0 * std::popcount(h);
        scale_block(blk, tab, ds, std::polar(1.0, bath_unit * zsum));
      } else {
        scale_block(blk, tab, ds);
      }
    }
    if (with_x_group) x_group_block(blk, ds);
  }
}

void TrotterPlan::x_group_block(cplx* blk, std::size_t ds) const {
  const double cxx = std::cos(xx_angle_), sxx = std::sin(xx_angle_);
  if (xx_angle_ != 0.0) {
    for (int b : even_bonds_) {
      const auto& bond = model_.zz_bonds[b];
      const std::size_t bi = std::size_t{1} << bond.i;
      const std::size_t bj = std::size_t{1} << bond.j;
      rotate_xx_pairs(blk, ds, std::min(bi, bj), std::max(bi, bj), cxx, sxx);
    }
  }
  for (int q = 0; q < n_sys_; ++q) {
    const double ang = x_angles_[q];
    if (ang == 0.0) continue;
    rotate_x_pairs(blk, ds, std::size_t{1} << q, std::cos(ang), std::sin(ang));
  }
  if (xx_angle_ != 0.0) {
    for (int b : odd_bonds_) {
      const auto& bond = model_.zz_bonds[b];
      const std::size_t bi = std::size_t{1} << bond.i;
      const std::size_t bj = std::size_t{1} << bond.j;
      rotate_xx_pairs(blk, ds, std::min(bi, bj), std::max(bi, bj), cxx, sxx);
    }
  }
}

// One-rotation-at-a-time X group over the whole register, for the rare
// steps where noise lands between the diagonal factor and the X group.
void TrotterPlan::x_group_generic(StateVector& psi) const {
  if (xx_angle_ != 0.0) {
    for (int b : even_bonds_)
      apply_xx_rotation(psi, model_.zz_bonds[b].i, model_.zz_bonds[b].j,
                        xx_angle_);
  }
  for (int q = 0; q < n_sys_; ++q)
    if (x_angles_[q] != 0.0) apply_x_rotation(psi, q, x_angles_[q]);
  if (xx_angle_ != 0.0) {
    for (int b : odd_bonds_)
      apply_xx_rotation(psi, model_.zz_bonds[b].i, model_.zz_bonds[b].j,
                        xx_angle_);
  }
}

// All system-bath y-y couplers, one rotation per masked site, applied in
// site order.  Rows (fixed bath configuration) are grouped into windows of
// at most kYyWindowBits bath bits so each outer iteration works on a
// cache-sized slab regardless of register size.
void TrotterPlan::yy_pass(StateVector& psi, double g) const {
  const double ang = dtau_ * g;
  const double c = std::cos(ang), s = std::sin(ang);
  cplx* a = psi.amps().data();
  const std::size_t ds = std::size_t{1} << n_sys_;

  const int window = yy_window_bits(n_sys_);
  int w = 0;
  std::size_t pair_lo = 0;  // index into yy_pairs_ of the first rank >= w
  while (w < n_bath_) {
    const int k = std::min(window, n_bath_ - w);
    std::size_t pair_hi = pair_lo;
    while (pair_hi < yy_pairs_.size() && yy_pairs_[pair_hi].second < w + k)
      ++pair_hi;

    const std::size_t n_below = std::size_t{1} << w;
    const std::size_t n_above = std::size_t{1} << (n_bath_ - w - k);
    const std::size_t n_rows = std::size_t{1} << k;

    for (std::size_t hi = 0; hi < n_above; ++hi) {
      for (std::size_t lo = 0; lo < n_below; ++lo) {
        const std::size_t base =
            ((hi << (w + k)) | lo) << n_sys_;  // row 0 of this slab
        for (std::size_t p = pair_lo; p < pair_hi; ++p) {
          const std::size_t sb = std::size_t{1} << yy_pairs_[p].first;
          const int t = yy_pairs_[p].second - w;  // bath bit within window
          const std::size_t rbit = std::size_t{1} << t;
          for (std::size_t rb = 0; rb < n_rows; rb += 2 * rbit) {
            for (std::size_t r = rb; r < rb + rbit; ++r) {
              cplx* A = a + base + ((r << w) << n_sys_);
              cplx* B = A + ((rbit << w) << n_sys_);
              rotate_yy_pairs(A, B, ds, sb, c, s);
            }
          }
        }
      }
    }
    pair_lo = pair_hi;
    w += k;
  }
}

// Draws both noise layers of one step up front, in the documented stream
// order (point 1 then point 2, qubits ascending); applying them later does
// not touch the stream again, so the consumed sequence matches a
// draw-at-the-point implementation exactly.
void TrotterPlan::draw_hits(int step_index, RngStream& rng,
                            std::vector<NoiseEvent>& hits1,
                            std::vector<NoiseEvent>& hits2) const {
  hits1.clear();
  hits2.clear();
  if (p_err_ <= 0.0) return;
  for (int point = 1; point <= 2; ++point) {
    auto& hits = point == 1 ? hits1 : hits2;
    for (int q = 0; q < n_total_; ++q) {
      if (rng.uniform() < p_err_)
        hits.push_back({step_index, point, q, rng.choice3()});
    }
  }
}

void TrotterPlan::step(StateVector& psi, int step_index, double t,
                       RngStream& rng, std::vector<NoiseEvent>* log) const {
  if (psi.n_qubits() != n_total_)
    throw std::invalid_argument("state size does not match the model");
  const auto [g, B] = schedule_eval(schedule_, clamp_time(t, schedule_.T));

  std::vector<NoiseEvent> hits1, hits2;
  draw_hits(step_index, rng, hits1, hits2);

  if (hits1.empty()) {
    z_x_pass(psi, /*full_step=*/false, B, /*with_x_group=*/true);
  } else {
    z_x_pass(psi, /*full_step=*/false, B, /*with_x_group=*/false);
    for (const auto& e : hits1) apply_pauli(psi, e.qubit, e.pauli);
    x_group_generic(psi);
  }

  if (g != 0.0 && !yy_pairs_.empty()) yy_pass(psi, g);

  for (const auto& e : hits2) apply_pauli(psi, e.qubit, e.pauli);

  z_x_pass(psi, /*full_step=*/false, B, /*with_x_group=*/false);

  if (log) {
    log->insert(log->end(), hits1.begin(), hits1.end());
    log->insert(log->end(), hits2.begin(), hits2.end());
  }
}

std::vector<NoiseEvent> TrotterPlan::run(StateVector& psi,
                                         const SweepSpec& sweep,
                                         RngStream& rng) const {
  std::vector<NoiseEvent> log;
  if (sweep.n_steps <= 0) return log;
  if (psi.n_qubits() != n_total_)
    throw std::invalid_argument("state size does not match the model");

  std::vector<NoiseEvent> hits1, hits2, next1, next2;
  draw_hits(0, rng, hits1, hits2);
  auto [g, B] = schedule_eval(schedule_, 0.0);

  // Leading half of step 0.
  if (hits1.empty()) {
    z_x_pass(psi, /*full_step=*/false, B, /*with_x_group=*/true);
  } else {
    z_x_pass(psi, /*full_step=*/false, B, /*with_x_group=*/false);
    for (const auto& e : hits1) apply_pauli(psi, e.qubit, e.pauli);
    x_group_generic(psi);
  }

  for (int n = 0; n < sweep.n_steps; ++n) {
    if (g != 0.0 && !yy_pairs_.empty()) yy_pass(psi, g);
    for (const auto& e : hits2) apply_pauli(psi, e.qubit, e.pauli);
    log.insert(log.end(), hits1.begin(), hits1.end());
    log.insert(log.end(), hits2.begin(), hits2.end());

    if (n + 1 == sweep.n_steps) {
      // Trailing half of the last step stands alone.
      z_x_pass(psi, /*full_step=*/false, B, /*with_x_group=*/false);
      break;
    }

    draw_hits(n + 1, rng, next1, next2);
    const auto gb = schedule_eval(
        schedule_, clamp_time((n + 1) * sweep.dtau, schedule_.T));

    // The trailing half of this step and the leading half of the next are
    // adjacent (both insertion points sit elsewhere), so they merge into
    // one full-step diagonal with the two Zeeman angles summed.
    if (next1.empty()) {
      z_x_pass(psi, /*full_step=*/true, B + gb.B, /*with_x_group=*/true);
    } else {
      z_x_pass(psi, /*full_step=*/true, B + gb.B, /*with_x_group=*/false);
      for (const auto& e : next1) apply_pauli(psi, e.qubit, e.pauli);
      x_group_generic(psi);
    }

    hits1.swap(next1);
    hits2.swap(next2);
    g = gb.g;
    B = gb.B;
  }
  return log;
}

std::vector<NoiseEvent> trotter_step(StateVector& psi,
                                     const SpinModelSpec& model,
                                     const ScheduleSpec& schedule, double t,
                                     double dtau, const NoiseSpec& noise,
                                     RngStream& rng, int step_index) {
  TrotterPlan plan(model, schedule, dtau, noise);
  std::vector<NoiseEvent> log;
  plan.step(psi, step_index, t, rng, &log);
  return log;
}

std::vector<NoiseEvent> noise_layer(StateVector& psi, double p_err,
                                    RngStream& rng, int step, int point) {
  if (p_err < 0.0 || p_err > 1.0)
    throw config_error("per-spin error probability must lie in [0, 1]");
  std::vector<NoiseEvent> events;
  if (p_err == 0.0) return events;
  for (int q = 0; q < psi.n_qubits(); ++q) {
    if (rng.uniform() < p_err) {
      const int pauli = rng.choice3();
      apply_pauli(psi, q, pauli);
      events.push_back({step, point, q, pauli});
    }
  }
  return events;
}

std::vector<NoiseEvent> run_sweep(StateVector& psi, const TrotterPlan& plan,
                                  const SweepSpec& sweep, RngStream& rng) {
  return plan.run(psi, sweep, rng);
}

}  // namespace spincool
