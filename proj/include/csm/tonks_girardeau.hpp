#pragma once

#include <complex>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "csm/hermite_basis.hpp"
#include "csm/potential.hpp"
#include "csm/schmidt.hpp"
#include "csm/spectral.hpp"

namespace csm {

// One-particle resonance eigenvector in the HO basis, c-normalized.
struct ResonanceOrbital {
  Eigen::VectorXcd coeffs;
  std::complex<double> value;
};

/// W0 + W1: the infinitely repulsive pair occupies both orbitals.
inline std::complex<double> tg_position(std::complex<double> w0, std::complex<double> w1) { return w0 + w1; }

struct TgProjectionOptions {
  // Outer Gauss-Legendre grid on [-L, L]. Zero picks
  // max(12, sqrt(2N + 1) + 3), past the classical turning point of psi_{N-1}.
  double half_width = 0.0;
  int outer_nodes = 600;
  int panel_nodes = 8;  // Gauss-Legendre points per cumulative panel
  // false drops sgn(x2 - x1) and projects the bare determinant.
  bool sign_factor = true;
  double max_trace_defect = 1e-3;
};

double tg_half_width(const BasisSpec& spec, const TgProjectionOptions& options);

struct TgProjection {
  // Symmetrized and renormalized to bilinear trace 1 (sign_factor = true);
  // normalization_defect holds the trace defect before renormalization.
  CoefficientMatrix coefficients;
  double asymmetry = 0.0;  // max |E - E^T| before symmetrization
};

// E_ij = int int psi_i(x1) psi_j(x2) sgn(x2 - x1) det[phi](x1, x2) / sqrt(2).
// The x1 integral is split at x2 and evaluated through cumulative integrals
// Phi_ia(x) = int_{-L}^{x} psi_i phi_a, tabulated on the outer grid.
// Throws NumericalError when the trace defect exceeds max_trace_defect.
TgProjection tg_coefficient_matrix(const ResonanceOrbital& phi0, const ResonanceOrbital& phi1, const BasisSpec& spec,
                                   const TgProjectionOptions& options = {});

struct TgConfig {
  double theta_min = 0.1;
  double theta_max = 0.3;
  double theta_step = 0.01;
  // Both orbitals are taken from one diagonalization at this angle so that
  // they are c-orthogonal.
  double orbital_theta = 0.2;
  Potential potential = open_well();
  int jobs = 1;
  TgProjectionOptions projection;
};

struct TgReference {
  ResonanceState resonance0;
  ResonanceState resonance1;
  ResonanceOrbital phi0;
  ResonanceOrbital phi1;
  std::complex<double> value;  // W_TG
  double energy = 0.0;
  double width = 0.0;
  TgProjection projection;
  EntanglementSpectrum spectrum;
  ComplexEntropy entropy;
  std::vector<std::string> flags;
};

TgReference tg_reference(const BasisSpec& spec, const TgConfig& config = {});

}  // namespace csm
