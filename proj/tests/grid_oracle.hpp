#pragma once

#include <complex>
#include <numbers>

#include <Eigen/Core>

#include "csm/hermite_basis.hpp"
#include "csm/operators.hpp"
#include "csm/potential.hpp"

namespace csm::testing {

// Independent evaluation of <phi_nm|H|phi_ij> on a tensor-product grid.
// Kinetic terms use psi_k'' = (x^2 - (2k+1)) psi_k, the contact term is a
// line integral of phi(x, x) on its own Gauss-Hermite grid; neither path
// goes through the ladder closed form, the substituted contact rule or the
// permanent-basis assembly formula.
inline Eigen::MatrixXcd two_particle_by_grid(int n_orb, double theta, double g, const Potential& v) {
  const QuadratureRule rule = gauss_hermite(60);
  const auto q = static_cast<Eigen::Index>(rule.size());
  const Eigen::MatrixXd psi = ho_table(n_orb, rule.nodes);
  Eigen::MatrixXcd hpsi(n_orb, q);
  const std::complex<double> kin = -0.5 * std::polar(1.0, -2.0 * theta);
  for (int k = 0; k < n_orb; ++k) {
    for (Eigen::Index a = 0; a < q; ++a) {
      const double x = rule.nodes[static_cast<std::size_t>(a)];
      hpsi(k, a) = (kin * (x * x - (2.0 * k + 1.0)) + v.value(x * std::polar(1.0, theta))) * psi(k, a);
    }
  }

  const QuadratureRule line = gauss_hermite(120);
  const Eigen::MatrixXd psi_line = ho_table(n_orb, line.nodes);

  const PairIndex pairs(n_orb);
  auto s = [](int i, int j) { return i == j ? 0.5 : 1.0 / std::numbers::sqrt2; };
  Eigen::MatrixXcd out(pairs.size(), pairs.size());
  for (Eigen::Index p = 0; p < pairs.size(); ++p) {
    const auto [n, m] = pairs[p];
    for (Eigen::Index r = 0; r < pairs.size(); ++r) {
      const auto [i, j] = pairs[r];
      std::complex<double> sum = 0.0;
      for (Eigen::Index a = 0; a < q; ++a) {
        for (Eigen::Index b = 0; b < q; ++b) {
          const double bra = s(n, m) * (psi(n, a) * psi(m, b) + psi(m, a) * psi(n, b));
          const std::complex<double> h_ket = s(i, j) * (hpsi(i, a) * psi(j, b) + psi(i, a) * hpsi(j, b) + hpsi(j, a) * psi(i, b) +
                                        psi(j, a) * hpsi(i, b));
          sum += rule.scaled_weights[static_cast<std::size_t>(a)] * rule.scaled_weights[static_cast<std::size_t>(b)] *
                 bra * h_ket;
        }
      }
      double contact = 0.0;
      for (Eigen::Index a = 0; a < psi_line.cols(); ++a) {
        const double bra = 2.0 * s(n, m) * psi_line(n, a) * psi_line(m, a);
        const double ket = 2.0 * s(i, j) * psi_line(i, a) * psi_line(j, a);
        contact += line.scaled_weights[static_cast<std::size_t>(a)] * bra * ket;
      }
      out(p, r) = sum + g * std::polar(1.0, -theta) * contact;
    }
  }
  return out;
}

}  // namespace csm::testing
