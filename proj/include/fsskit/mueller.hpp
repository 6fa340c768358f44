// Mueller calculus for the polarimeter optics: ideal linear polarizer,
// retarders (QWP/HWP) and frame rotations.
//
// Conventions, fixed by the Jones-lift oracle in the test suite:
//   Stokes from a Jones vector (Ex, Ey):
//     I = |Ex|^2 + |Ey|^2,  Q = |Ex|^2 - |Ey|^2,
//     U = 2 Re(Ex Ey*),     V = 2 Im(Ex Ey*).
//   A retarder with fast axis theta and retardance delta is
//     J = R(theta) diag(e^{+i delta/2}, e^{-i delta/2}) R(-theta).
// With these choices LP(0) after QWP(chi) gives the intensity
//   I0(chi) = (2I + Q + Q cos4chi + U sin4chi + 2V sin2chi)/4.
#pragma once

#include <array>
#include <cmath>

#include "fsskit/core.hpp"

namespace fsskit {

struct MuellerMatrix {
  std::array<std::array<double, 4>, 4> m{};

  static MuellerMatrix identity() {
    MuellerMatrix out;
    for (int i = 0; i < 4; ++i) out.m[i][i] = 1.0;
    return out;
  }

  StokesVector operator*(const StokesVector& s) const {
    const std::array<double, 4> in{s.i, s.q, s.u, s.v};
    std::array<double, 4> out{};
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c < 4; ++c) out[r] += m[r][c] * in[c];
    return {out[0], out[1], out[2], out[3]};
  }

  MuellerMatrix operator*(const MuellerMatrix& b) const {
    MuellerMatrix out;
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c < 4; ++c) {
        double acc = 0.0;
        for (int k = 0; k < 4; ++k) acc += m[r][k] * b.m[k][c];
        out.m[r][c] = acc;
      }
    return out;
  }
};

/// Ideal linear polarizer with transmission axis at `axis_deg`.
inline MuellerMatrix mueller_lp(double axis_deg) {
  const double c = std::cos(deg_to_rad(2.0 * axis_deg));
  const double s = std::sin(deg_to_rad(2.0 * axis_deg));
  MuellerMatrix out;
  out.m = {{{0.5, 0.5 * c, 0.5 * s, 0.0},
            {0.5 * c, 0.5 * c * c, 0.5 * c * s, 0.0},
            {0.5 * s, 0.5 * c * s, 0.5 * s * s, 0.0},
            {0.0, 0.0, 0.0, 0.0}}};
  return out;
}

/// Lossless linear retarder, fast axis `theta_deg`, retardance `delta_deg`.
inline MuellerMatrix mueller_retarder(double theta_deg, double delta_deg) {
  const double c = std::cos(deg_to_rad(2.0 * theta_deg));
  const double s = std::sin(deg_to_rad(2.0 * theta_deg));
  const double cd = std::cos(deg_to_rad(delta_deg));
  const double sd = std::sin(deg_to_rad(delta_deg));
  MuellerMatrix out;
  out.m = {{{1.0, 0.0, 0.0, 0.0},
            {0.0, c * c + s * s * cd, c * s * (1.0 - cd), s * sd},
            {0.0, c * s * (1.0 - cd), s * s + c * c * cd, -c * sd},
            {0.0, -s * sd, c * sd, cd}}};
  return out;
}

inline MuellerMatrix mueller_qwp(double chi_deg) {
  return mueller_retarder(chi_deg, 90.0);
}

inline MuellerMatrix mueller_hwp(double theta_deg) {
  return mueller_retarder(theta_deg, 180.0);
}

/// Coordinate rotation of the Stokes frame by `angle_deg` (acts on Q, U).
inline MuellerMatrix mueller_rotation(double angle_deg) {
  const double c = std::cos(deg_to_rad(2.0 * angle_deg));
  const double s = std::sin(deg_to_rad(2.0 * angle_deg));
  MuellerMatrix out;
  out.m = {{{1.0, 0.0, 0.0, 0.0},
            {0.0, c, -s, 0.0},
            {0.0, s, c, 0.0},
            {0.0, 0.0, 0.0, 1.0}}};
  return out;
}

/// Transmitted intensity of the QWP(chi) + LP(0) polarimeter,
/// I0(chi) = (2I + Q + Q cos4chi + U sin4chi + 2V sin2chi)/4.
inline double polarimeter_intensity(const StokesVector& s, double chi_deg) {
  if (!s.physical()) throw domain_error("polarimeter_intensity: unphysical Stokes vector");
  const double two_chi = deg_to_rad(2.0 * chi_deg);
  const double four_chi = deg_to_rad(4.0 * chi_deg);
  return 0.25 * (2.0 * s.i + s.q + s.q * std::cos(four_chi) +
                 s.u * std::sin(four_chi) + 2.0 * s.v * std::sin(two_chi));
}

}  // namespace fsskit
