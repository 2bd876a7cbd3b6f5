#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

namespace csm {

// Truncated harmonic-oscillator basis psi_0 ... psi_{n_orbitals-1} together
// with the Gauss-Hermite node count used for every matrix-element integral.
struct BasisSpec {
  int n_orbitals = 90;
  int quad_nodes = 400;

  // Throws ConfigError unless n_orbitals >= 2 and quad_nodes >= n_orbitals,
  // which makes every overlap <psi_i|psi_j> exact.
  void validate() const;

  // Node count needed for the four-orbital contact integrals to be exact.
  int contact_nodes_required() const { return 2 * n_orbitals - 1; }
};

// Gauss-Hermite rule for the weight e^{-x^2}. `scaled_weights` holds
// w_k e^{x_k^2}; use it with integrands that already carry their Gaussian
// (products of Hermite functions) so that extreme nodes never underflow.
// Plain `weights` can underflow to zero at the outermost nodes for n >~ 350.
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
  std::vector<double> scaled_weights;

  std::size_t size() const { return nodes.size(); }
};

/// Normalized Hermite function psi_i(x) = 2^{-i/2} e^{-x^2/2} H_i(x) / (pi^{1/4} sqrt(i!)).
double evaluate_ho(int i, double x);

/// psi_0(x) ... psi_{n-1}(x) in one pass of the normalized recurrence.
void evaluate_ho_all(int n, double x, std::span<double> out);

/// Table T(i, k) = psi_i(xs[k]).
Eigen::MatrixXd ho_table(int n, std::span<const double> xs);

/// Nodes are the roots of H_n, found by Newton iteration on psi_n.
/// Throws NumericalError if a root fails to converge.
QuadratureRule gauss_hermite(int n);

/// max_{i,j} |<psi_i|psi_j> - delta_ij| evaluated with the rule of quad_nodes points.
double overlap_check(const BasisSpec& spec);

}  // namespace csm
