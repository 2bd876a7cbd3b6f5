#include "csm/schmidt.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include <Eigen/Eigenvalues>

#include "csm/errors.hpp"
#include "csm/operators.hpp"
#include "csm/spectral.hpp"

namespace csm {

namespace {

using cplx = std::complex<double>;

constexpr double kNormalizationTolerance = 1e-6;

void sort_by_modulus(std::vector<cplx>& values) {
  std::stable_sort(values.begin(), values.end(), [](cplx a, cplx b) { return std::abs(a) > std::abs(b); });
}

}  // namespace

CoefficientMatrix coefficient_matrix(const Eigen::VectorXcd& r, const BasisSpec& spec) {
  spec.validate();
  const PairIndex pairs(spec.n_orbitals);
  if (r.size() != pairs.size()) {
    throw ConfigError("eigenvector length " + std::to_string(r.size()) + " does not match " +
                      std::to_string(pairs.size()) + " permanents");
  }
  const cplx norm = (r.transpose() * r)(0, 0);
  const double defect = std::abs(norm - 1.0);
  if (!(defect <= kNormalizationTolerance)) {
    throw NumericalError("eigenvector is not c-normalized (defect " + std::to_string(defect) + ")");
  }
  CoefficientMatrix out;
  out.normalization_defect = defect;
  out.entries = Eigen::MatrixXcd::Zero(spec.n_orbitals, spec.n_orbitals);
  for (Eigen::Index row = 0; row < pairs.size(); ++row) {
    const auto [i, j] = pairs[row];
    if (i == j) {
      out.entries(i, i) = r[row];
    } else {
      out.entries(i, j) = out.entries(j, i) = r[row] / std::numbers::sqrt2;
    }
  }
  return out;
}

cplx EntanglementSpectrum::trace() const { return std::accumulate(lambda.begin(), lambda.end(), cplx{}); }

std::vector<cplx> EntanglementSpectrum::head(double cutoff) const {
  std::vector<cplx> out;
  for (const cplx& l : lambda) {
    if (std::abs(l) > cutoff) out.push_back(l);
  }
  return out;
}

EntanglementSpectrum takagi_symmetric(const CoefficientMatrix& e) {
  const Eigen::Index n = e.size();
  if (n == 0) throw ConfigError("empty coefficient matrix");
  if (symmetry_defect(e.entries) > 1e-12 * std::max(1.0, e.entries.cwiseAbs().maxCoeff())) {
    throw ConfigError("coefficient matrix is not symmetric");
  }
  const EigenDecomposition eig = eigendecompose(e.entries);

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return std::abs(eig.values[static_cast<std::size_t>(a)]) > std::abs(eig.values[static_cast<std::size_t>(b)]);
  });

  EntanglementSpectrum out;
  out.orbitals.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto src = static_cast<std::size_t>(order[static_cast<std::size_t>(k)]);
    out.d.push_back(eig.values[src]);
    out.lambda.push_back(eig.values[src] * eig.values[src]);
    out.orbitals.col(k) = eig.right.col(static_cast<Eigen::Index>(src));
    if (!eig.reliable[src]) out.reliable = false;
  }
  if (!out.reliable) out.flags.emplace_back("self-orthogonal-natural-orbital");

  const Eigen::VectorXcd d = Eigen::Map<const Eigen::VectorXcd>(out.d.data(), n);
  out.recon_defect = (out.orbitals * d.asDiagonal() * out.orbitals.transpose() - e.entries).cwiseAbs().maxCoeff();
  out.orthogonality_defect =
      (out.orbitals.transpose() * out.orbitals - Eigen::MatrixXcd::Identity(n, n)).cwiseAbs().maxCoeff();
  if (out.recon_defect > 1e-8) out.flags.emplace_back("takagi-reconstruction-defect");
  return out;
}

std::vector<cplx> rdm_eigenvalues_direct(const CoefficientMatrix& e, Subsystem side) {
  const Eigen::MatrixXcd rho =
      side == Subsystem::a ? Eigen::MatrixXcd(e.entries * e.entries.transpose())
                           : Eigen::MatrixXcd(e.entries.transpose() * e.entries);
  const Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(rho, false);
  if (solver.info() != Eigen::Success) throw NumericalError("reduced density eigensolver did not converge");
  std::vector<cplx> out(solver.eigenvalues().begin(), solver.eigenvalues().end());
  sort_by_modulus(out);
  return out;
}

std::vector<cplx> rdm_eigenvalues_direct(const Eigen::VectorXcd& r, const BasisSpec& spec) {
  return rdm_eigenvalues_direct(coefficient_matrix(r, spec));
}

Eigen::MatrixXcd reduced_density(const CoefficientMatrix& e) { return e.entries * e.entries.transpose(); }

ComplexEntropy complex_entropies(std::span<const cplx> lambda, double cutoff) {
  ComplexEntropy out;
  cplx squares{};
  for (const cplx& l : lambda) {
    squares += l * l;
    if (std::abs(l) <= cutoff) continue;
    if (l.real() < 0.0 && std::abs(l.imag()) <= 1e-12) out.branch_ambiguous = true;
    out.vn -= l * std::log(l);
  }
  out.lin = 1.0 - squares;
  return out;
}

cplx mean_value(const Eigen::MatrixXcd& rho, const Eigen::MatrixXcd& q) {
  if (rho.rows() != rho.cols() || q.rows() != q.cols() || rho.rows() != q.rows()) {
    throw ConfigError("mean_value needs square matrices of equal size");
  }
  return (rho.array() * q.transpose().array()).sum();
}

}  // namespace csm
