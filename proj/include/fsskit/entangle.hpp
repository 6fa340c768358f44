// Non-collinear exciton eigenstates and the entangled two-photon state of the
// XX-X cascade: eigenstate coefficients, density matrix, Bell-state fidelity
// and degree of correlation.
//
// Basis order throughout: (|H_XX H_X>, |H_XX V_X>, |V_XX H_X>, |V_XX V_X>).
// Eigenstate coefficients: XX photon P = a|H> - i b|V>, Q = a|V> - i b|H>;
// X photon P = a|H> + i b|V>, Q = a|V> + i b|H>. The conjugate phase on the
// X photon is what reproduces both the linear (beta=0) and circular
// (alpha=beta) limits of the cascade state.
#pragma once

#include <array>
#include <cmath>
#include <complex>

#include "fsskit/core.hpp"

namespace fsskit {

using cplx = std::complex<double>;

using Ket2 = std::array<cplx, 2>;
using Ket4 = std::array<cplx, 4>;

inline Ket4 tensor(const Ket2& a, const Ket2& b) {
  return {a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1]};
}

inline cplx inner(const Ket4& a, const Ket4& b) {
  cplx acc = 0.0;
  for (int k = 0; k < 4; ++k) acc += std::conj(a[k]) * b[k];
  return acc;
}

struct TwoPhotonState {
  std::array<std::array<cplx, 4>, 4> rho{};

  static TwoPhotonState pure(const Ket4& psi) {
    TwoPhotonState s;
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c < 4; ++c) s.rho[r][c] = psi[r] * std::conj(psi[c]);
    return s;
  }

  double trace() const {
    double t = 0.0;
    for (int k = 0; k < 4; ++k) t += rho[k][k].real();
    return t;
  }

  double purity() const {
    double t = 0.0;
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c < 4; ++c) t += (rho[r][c] * rho[c][r]).real();
    return t;
  }

  double hermiticity_defect() const {
    double d = 0.0;
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c < 4; ++c)
        d = std::max(d, std::abs(rho[r][c] - std::conj(rho[c][r])));
    return d;
  }

  /// <psi| rho |psi>
  double expectation(const Ket4& psi) const {
    cplx acc = 0.0;
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c < 4; ++c) acc += std::conj(psi[r]) * rho[r][c] * psi[c];
    return acc.real();
  }

  /// Smallest eigenvalue via cyclic Jacobi rotations (4x4 Hermitian).
  double min_eigenvalue() const {
    std::array<std::array<cplx, 4>, 4> a = rho;
    for (int sweep = 0; sweep < 64; ++sweep) {
      double off = 0.0;
      for (int p = 0; p < 4; ++p)
        for (int q = p + 1; q < 4; ++q) off += std::norm(a[p][q]);
      if (off < 1e-30) break;
      for (int p = 0; p < 4; ++p)
        for (int q = p + 1; q < 4; ++q) {
          const cplx apq = a[p][q];
          if (std::abs(apq) < 1e-18) continue;
          const double app = a[p][p].real(), aqq = a[q][q].real();
          const cplx phase = apq / std::abs(apq);
          const double theta = 0.5 * std::atan2(2.0 * std::abs(apq), app - aqq);
          const double c = std::cos(theta), s = std::sin(theta);
          for (int k = 0; k < 4; ++k) {
            const cplx akp = a[k][p], akq = a[k][q];
            a[k][p] = c * akp + s * phase * akq;
            a[k][q] = -s * std::conj(phase) * akp + c * akq;
          }
          for (int k = 0; k < 4; ++k) {
            const cplx apk = a[p][k], aqk = a[q][k];
            a[p][k] = c * apk + s * std::conj(phase) * aqk;
            a[q][k] = -s * phase * apk + c * aqk;
          }
        }
    }
    double mn = a[0][0].real();
    for (int k = 1; k < 4; ++k) mn = std::min(mn, a[k][k].real());
    return mn;
  }
};

/// S_r convention: hybridized splitting sqrt(S^2 + S_c^2).
inline double hybridized_splitting(double s_uev, double s_c_uev) {
  return std::hypot(s_uev, s_c_uev);
}

/// (alpha, beta) with alpha >= beta >= 0, alpha^2 + beta^2 = 1 and
/// beta/alpha = S_c/(S_r + S).
inline std::pair<double, double> eigenstate_coefficients(double s_uev, double s_c_uev) {
  if (s_uev < 0.0 || s_c_uev < 0.0)
    throw domain_error("eigenstate_coefficients: negative splitting");
  if (s_uev == 0.0 && s_c_uev == 0.0)
    throw domain_error("eigenstate_coefficients: degenerate basis (S = S_c = 0)");
  const double ratio = s_c_uev / (hybridized_splitting(s_uev, s_c_uev) + s_uev);
  const double alpha = 1.0 / std::sqrt(1.0 + ratio * ratio);
  return {alpha, ratio * alpha};
}

struct NonCollinearParams {
  double s_uev = 0.0;
  double s_c_uev = 0.0;
  double s_r_uev = 0.0;
  double alpha = 1.0;
  double beta = 0.0;
  double tau_ns = 0.0;

  static NonCollinearParams from_splittings(double s_uev, double s_c_uev, double tau_ns) {
    if (tau_ns < 0.0) throw domain_error("NonCollinearParams: tau < 0");
    NonCollinearParams p;
    p.s_uev = s_uev;
    p.s_c_uev = s_c_uev;
    p.s_r_uev = hybridized_splitting(s_uev, s_c_uev);
    std::tie(p.alpha, p.beta) = eigenstate_coefficients(s_uev, s_c_uev);
    p.tau_ns = tau_ns;
    return p;
  }
};

namespace entdetail {
inline Ket2 p_xx(double a, double b) { return {cplx(a, 0.0), cplx(0.0, -b)}; }
inline Ket2 q_xx(double a, double b) { return {cplx(0.0, -b), cplx(a, 0.0)}; }
inline Ket2 p_x(double a, double b) { return {cplx(a, 0.0), cplx(0.0, b)}; }
inline Ket2 q_x(double a, double b) { return {cplx(0.0, b), cplx(a, 0.0)}; }
}  // namespace entdetail

/// Cascade two-photon ket (P_XX P_X + e^{i S tau / hbar} Q_XX Q_X)/sqrt(2).
inline Ket4 two_photon_ket(double alpha, double beta, double phase_rad) {
  using namespace entdetail;
  const cplx ph = std::polar(1.0, phase_rad);
  const Ket4 pp = tensor(p_xx(alpha, beta), p_x(alpha, beta));
  const Ket4 qq = tensor(q_xx(alpha, beta), q_x(alpha, beta));
  Ket4 psi;
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  for (int k = 0; k < 4; ++k) psi[k] = inv_sqrt2 * (pp[k] + ph * qq[k]);
  return psi;
}

inline TwoPhotonState two_photon_state(const NonCollinearParams& p) {
  const double phase = p.s_uev * p.tau_ns / hbar_uev_ns;
  return TwoPhotonState::pure(two_photon_ket(p.alpha, p.beta, phase));
}

enum class BellState { PhiPlus, PhiMinus, PsiPlus, PsiMinus };

/// Bell ket in a product basis given by per-photon basis states
/// (h_xx, v_xx) and (h_x, v_x).
inline Ket4 bell_ket(BellState b, const Ket2& h_xx, const Ket2& v_xx,
                     const Ket2& h_x, const Ket2& v_x) {
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  Ket4 first, second;
  double sign = 1.0;
  switch (b) {
    case BellState::PhiPlus: first = tensor(h_xx, h_x); second = tensor(v_xx, v_x); break;
    case BellState::PhiMinus: first = tensor(h_xx, h_x); second = tensor(v_xx, v_x); sign = -1.0; break;
    case BellState::PsiPlus: first = tensor(h_xx, v_x); second = tensor(v_xx, h_x); break;
    case BellState::PsiMinus: first = tensor(h_xx, v_x); second = tensor(v_xx, h_x); sign = -1.0; break;
  }
  Ket4 out;
  for (int k = 0; k < 4; ++k) out[k] = inv_sqrt2 * (first[k] + sign * second[k]);
  return out;
}

/// Fidelity to a Bell state in the laboratory H/V basis.
inline double fidelity_to_bell(const TwoPhotonState& state, BellState b) {
  const Ket2 h{1.0, 0.0}, v{0.0, 1.0};
  return state.expectation(bell_ket(b, h, v, h, v));
}

/// Fidelity to a Bell state in the QD eigenbasis: H/V replaced by the P/Q
/// eigenstates built from (alpha, beta).
inline double fidelity_to_bell_eigen(const TwoPhotonState& state, BellState b,
                                     double alpha, double beta) {
  using namespace entdetail;
  return state.expectation(
      bell_ket(b, p_xx(alpha, beta), q_xx(alpha, beta), p_x(alpha, beta), q_x(alpha, beta)));
}

enum class CorrelationBasis { Rectilinear, Diagonal, Circular };

/// C = (P_co - P_cross)/(P_co + P_cross) with co/cross coincidences of the
/// same basis applied to both photons.
inline double degree_of_correlation(const TwoPhotonState& state, CorrelationBasis basis) {
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  Ket2 b1, b2;
  switch (basis) {
    case CorrelationBasis::Rectilinear:
      b1 = {1.0, 0.0};
      b2 = {0.0, 1.0};
      break;
    case CorrelationBasis::Diagonal:
      b1 = {inv_sqrt2, inv_sqrt2};
      b2 = {inv_sqrt2, -inv_sqrt2};
      break;
    case CorrelationBasis::Circular:
      b1 = {inv_sqrt2, cplx(0.0, -inv_sqrt2)};   // R = (H - iV)/sqrt(2)
      b2 = {inv_sqrt2, cplx(0.0, inv_sqrt2)};    // L = (H + iV)/sqrt(2)
      break;
  }
  const double co = state.expectation(tensor(b1, b1)) + state.expectation(tensor(b2, b2));
  const double cross = state.expectation(tensor(b1, b2)) + state.expectation(tensor(b2, b1));
  const double total = co + cross;
  if (!(total > 1e-15))
    throw domain_error("degree_of_correlation: zero total coincidence probability");
  return (co - cross) / total;
}

}  // namespace fsskit
