#pragma once

#include <complex>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "csm/hermite_basis.hpp"

namespace csm {

// Symmetric one-particle coefficient matrix of a two-boson state:
// chi(x1, x2) = sum_ij e_ij psi_i(x1) psi_j(x2).
struct CoefficientMatrix {
  Eigen::MatrixXcd entries;
  // |sum_ij e_ij^2 - 1| of the input (before any renormalization).
  double normalization_defect = 0.0;

  Eigen::Index size() const { return entries.rows(); }
};

/// e_ii = r_ii, e_ij = e_ji = r_ij / sqrt(2) for a permanent-basis vector in
/// canonical pair order. Throws NumericalError when sum r^2 is off by > 1e-6.
CoefficientMatrix coefficient_matrix(const Eigen::VectorXcd& r, const BasisSpec& spec);

// Complex-orthogonal (Takagi-style) diagonalization e = V diag(d) V^T.
struct EntanglementSpectrum {
  std::vector<std::complex<double>> d;
  std::vector<std::complex<double>> lambda;  // d^2, sorted by |lambda| descending
  Eigen::MatrixXcd orbitals;                 // V, columns are natural orbitals
  double recon_defect = 0.0;                 // max |e - V D V^T|
  double orthogonality_defect = 0.0;         // max |V^T V - I|
  bool reliable = true;
  std::vector<std::string> flags;

  std::complex<double> trace() const;
  // Terms with |lambda| above the cutoff, in stored order.
  std::vector<std::complex<double>> head(double cutoff = 1e-10) const;
};

EntanglementSpectrum takagi_symmetric(const CoefficientMatrix& e);

enum class Subsystem { a, b };

/// Eigenvalues of rho_A = e e^T (or rho_B = e^T e) from a general complex
/// eigensolver, sorted by |lambda| descending. Independent of takagi_symmetric.
std::vector<std::complex<double>> rdm_eigenvalues_direct(const CoefficientMatrix& e, Subsystem side = Subsystem::a);
std::vector<std::complex<double>> rdm_eigenvalues_direct(const Eigen::VectorXcd& r, const BasisSpec& spec);

Eigen::MatrixXcd reduced_density(const CoefficientMatrix& e);

struct ComplexEntropy {
  std::complex<double> vn;   // -sum lambda ln lambda
  std::complex<double> lin;  // 1 - sum lambda^2
  bool branch_ambiguous = false;
};

// Principal-branch logarithm; |lambda| <= cutoff is dropped from S only.
ComplexEntropy complex_entropies(std::span<const std::complex<double>> lambda, double cutoff = 1e-12);
inline ComplexEntropy complex_entropies(const EntanglementSpectrum& s, double cutoff = 1e-12) {
  return complex_entropies(s.lambda, cutoff);
}

/// tr[rho Q]. Throws ConfigError on non-conformable input.
std::complex<double> mean_value(const Eigen::MatrixXcd& rho, const Eigen::MatrixXcd& q);

}  // namespace csm
