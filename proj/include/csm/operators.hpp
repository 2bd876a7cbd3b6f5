#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "csm/hermite_basis.hpp"
#include "csm/potential.hpp"

namespace csm {

// Guard for dense two-particle matrices; 90 orbitals give 4095.
inline constexpr std::size_t kDefaultMaxDim = 5000;

struct ModelParams {
  double theta = 0.2;
  double g = 0.0;
  Potential potential = open_well();

  // Throws DomainError unless 0 <= theta < pi/4.
  void validate() const;
  // Non-fatal remarks ("attractive-contact" for g < 0).
  std::vector<std::string> flags() const;
};

enum class OperatorKind { one_particle, two_particle_symmetric };

// Canonical permanent labels (i >= j) in row order: (0,0), (1,0), (1,1), (2,0), ...
class PairIndex {
 public:
  explicit PairIndex(int n_orbitals);

  int n_orbitals() const { return n_; }
  Eigen::Index size() const { return static_cast<Eigen::Index>(pairs_.size()); }
  const std::pair<int, int>& operator[](Eigen::Index row) const { return pairs_[static_cast<std::size_t>(row)]; }
  Eigen::Index row(int i, int j) const;

  const std::vector<std::pair<int, int>>& pairs() const { return pairs_; }

 private:
  int n_;
  std::vector<std::pair<int, int>> pairs_;
};

// Dense complex-symmetric matrix of H^theta in the HO (one-particle) or
// permanent (two-particle) basis. Immutable once built.
struct ScaledOperator {
  OperatorKind kind = OperatorKind::one_particle;
  ModelParams params;
  Eigen::MatrixXcd entries;
  // Empty for one-particle operators.
  std::vector<std::pair<int, int>> index_map;
  std::vector<std::string> flags;

  Eigen::Index dim() const { return entries.rows(); }
};

/// e^{-2i theta} <psi_i| -1/2 d^2/dx^2 |psi_j>; nonzero only for |i-j| in {0, 2}.
std::complex<double> kinetic_element(int i, int j, double theta);

// Quadrature tables shared by every one-body and contact integral of a basis.
class MatrixElements {
 public:
  explicit MatrixElements(BasisSpec spec);

  const BasisSpec& spec() const { return spec_; }

  // int psi_i psi_j v(x e^{i theta}) dx, no conjugation.
  std::complex<double> potential(int i, int j, double theta, const Potential& v) const;
  // int psi_i psi_j psi_k psi_l dx, exact on the substituted Gauss-Hermite grid.
  double contact(int i, int j, int k, int l) const;

  Eigen::MatrixXcd potential_matrix(double theta, const Potential& v) const;
  // d/dtheta of potential_matrix: int psi_i psi_j i z v'(z) dx with z = x e^{i theta}.
  Eigen::MatrixXcd potential_theta_derivative(double theta, const Potential& v) const;
  Eigen::MatrixXd kinetic_matrix() const;

  // C(p, q) = contact(n, m, i, j) for canonical pairs p = (n, m), q = (i, j).
  Eigen::MatrixXd pair_contact_matrix(const PairIndex& pairs) const;

 private:
  BasisSpec spec_;
  QuadratureRule rule_;
  Eigen::MatrixXd table_;          // psi_i at rule_ nodes
  Eigen::VectorXd contact_weights_;
  Eigen::MatrixXd contact_table_;  // psi_i at nodes / sqrt(2)
};

std::complex<double> potential_element(int i, int j, double theta, const BasisSpec& spec,
                                       const Potential& v = open_well());
double delta_element(int i, int j, int k, int l, const BasisSpec& spec);

/// max |V_n - V_2n| of the potential matrix between quad_nodes and twice that.
double potential_quadrature_defect(const BasisSpec& spec, const ModelParams& params);

ScaledOperator build_one_particle(const BasisSpec& spec, const ModelParams& params);
/// dH/dtheta of the one-particle operator (same layout as build_one_particle).
ScaledOperator one_particle_theta_derivative(const BasisSpec& spec, const ModelParams& params);

// Two-boson Hamiltonian in the permanent basis, split into the
// theta-dependent one-body block and the (theta, g)-independent contact
// block so that sweeps over g reuse both.
//
//   H = K(theta) + g e^{-i theta} 4 s_nm s_ij C(nm, ij)
//   K(nm, ij) = 2 s_nm s_ij (h_ni d_mj + h_nj d_mi + h_mi d_nj + h_mj d_ni)
class TwoBosonAssembler {
 public:
  TwoBosonAssembler(const BasisSpec& spec, double theta, const Potential& v, std::size_t max_dim = kDefaultMaxDim);

  const PairIndex& pairs() const { return pairs_; }
  const BasisSpec& spec() const { return spec_; }
  double theta() const { return theta_; }
  Eigen::Index dim() const { return pairs_.size(); }

  ScaledOperator build(double g) const;
  ScaledOperator theta_derivative(double g) const;

  // Contact block 4 s_nm s_ij C(nm, ij) is independent of theta and g;
  // assemblers at different angles can share one copy.
  static std::shared_ptr<const Eigen::MatrixXd> make_contact_block(const BasisSpec& spec,
                                                                   std::size_t max_dim = kDefaultMaxDim);
  TwoBosonAssembler(const BasisSpec& spec, double theta, const Potential& v,
                    std::shared_ptr<const Eigen::MatrixXd> contact_block, std::size_t max_dim = kDefaultMaxDim);
  std::shared_ptr<const Eigen::MatrixXd> contact_block() const { return contact_; }

 private:
  Eigen::MatrixXcd one_body_block(const Eigen::MatrixXcd& h) const;

  BasisSpec spec_;
  double theta_;
  Potential potential_;
  PairIndex pairs_;
  Eigen::VectorXd symmetry_;  // s_ij per row
  Eigen::MatrixXcd one_particle_;
  Eigen::MatrixXcd one_body_;
  std::shared_ptr<const Eigen::MatrixXd> contact_;
  std::vector<std::string> flags_;
};

ScaledOperator build_two_particle(const BasisSpec& spec, const ModelParams& params,
                                  std::size_t max_dim = kDefaultMaxDim);

/// <psi_i| x^2 |psi_j> (exact, pentadiagonal in the HO basis).
Eigen::MatrixXd position_squared_matrix(int n_orbitals);

/// max |M - M^T|.
double symmetry_defect(const Eigen::MatrixXcd& m);

// Builds an operator at a given angle; the closure carries basis, g and potential.
using OperatorFactory = std::function<ScaledOperator(double theta)>;

OperatorFactory one_particle_factory(const BasisSpec& spec, const Potential& v);
OperatorFactory two_particle_factory(const BasisSpec& spec, double g, const Potential& v,
                                     std::size_t max_dim = kDefaultMaxDim);

}  // namespace csm
