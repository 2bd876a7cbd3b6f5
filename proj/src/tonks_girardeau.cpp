#include "csm/tonks_girardeau.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <numeric>

#include <gsl/gsl_integration.h>

#include "csm/errors.hpp"
#include "csm/operators.hpp"

namespace csm {

namespace {

using cplx = std::complex<double>;

struct GaussLegendre {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// n-point rule on [a, b], nodes ascending.
GaussLegendre gauss_legendre(int n, double a, double b) {
  std::unique_ptr<gsl_integration_glfixed_table, decltype(&gsl_integration_glfixed_table_free)> table(
      gsl_integration_glfixed_table_alloc(static_cast<std::size_t>(n)), &gsl_integration_glfixed_table_free);
  if (!table) throw NumericalError("Gauss-Legendre table allocation failed");
  std::vector<std::pair<double, double>> points(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    gsl_integration_glfixed_point(a, b, static_cast<std::size_t>(i), &points[static_cast<std::size_t>(i)].first,
                                  &points[static_cast<std::size_t>(i)].second, table.get());
  }
  std::sort(points.begin(), points.end());
  GaussLegendre out;
  for (const auto& [x, w] : points) {
    out.nodes.push_back(x);
    out.weights.push_back(w);
  }
  return out;
}

}  // namespace

double tg_half_width(const BasisSpec& spec, const TgProjectionOptions& options) {
  if (options.half_width > 0.0) return options.half_width;
  return std::max(12.0, std::sqrt(2.0 * spec.n_orbitals + 1.0) + 3.0);
}

TgProjection tg_coefficient_matrix(const ResonanceOrbital& phi0, const ResonanceOrbital& phi1, const BasisSpec& spec,
                                   const TgProjectionOptions& options) {
  spec.validate();
  const int n = spec.n_orbitals;
  if (phi0.coeffs.size() != n || phi1.coeffs.size() != n) throw ConfigError("orbital length does not match basis");
  if (options.outer_nodes < 2 || options.panel_nodes < 1 || options.half_width < 0.0) {
    throw ConfigError("invalid projection grid");
  }
  const double L = tg_half_width(spec, options);
  const GaussLegendre outer = gauss_legendre(options.outer_nodes, -L, L);
  const auto m = static_cast<Eigen::Index>(outer.nodes.size());

  const Eigen::MatrixXd psi = ho_table(n, outer.nodes);  // n x m
  const Eigen::RowVectorXcd f0 = phi0.coeffs.transpose() * psi;
  const Eigen::RowVectorXcd f1 = phi1.coeffs.transpose() * psi;

  // Panels [-L, x_0], [x_0, x_1], ..., [x_{m-1}, L]; the last is the tail.
  const GaussLegendre unit = gauss_legendre(options.panel_nodes, -1.0, 1.0);
  const auto p = static_cast<Eigen::Index>(unit.nodes.size());
  std::vector<double> panel_x;
  std::vector<double> panel_w;
  panel_x.reserve(static_cast<std::size_t>((m + 1) * p));
  for (Eigen::Index k = 0; k <= m; ++k) {
    const double a = k == 0 ? -L : outer.nodes[static_cast<std::size_t>(k - 1)];
    const double b = k == m ? L : outer.nodes[static_cast<std::size_t>(k)];
    for (Eigen::Index t = 0; t < p; ++t) {
      panel_x.push_back(0.5 * (a + b) + 0.5 * (b - a) * unit.nodes[static_cast<std::size_t>(t)]);
      panel_w.push_back(0.5 * (b - a) * unit.weights[static_cast<std::size_t>(t)]);
    }
  }
  const Eigen::MatrixXd panel_psi = ho_table(n, panel_x);
  const Eigen::Map<const Eigen::RowVectorXd> w(panel_w.data(), static_cast<Eigen::Index>(panel_w.size()));
  const Eigen::RowVectorXcd g0 = (phi0.coeffs.transpose() * panel_psi).cwiseProduct(w.cast<cplx>());
  const Eigen::RowVectorXcd g1 = (phi1.coeffs.transpose() * panel_psi).cwiseProduct(w.cast<cplx>());

  // Running integrals: column k holds Phi(x_k); column m holds Phi(L).
  Eigen::MatrixXcd cum0(n, m + 1);
  Eigen::MatrixXcd cum1(n, m + 1);
  Eigen::VectorXcd acc0 = Eigen::VectorXcd::Zero(n);
  Eigen::VectorXcd acc1 = Eigen::VectorXcd::Zero(n);
  for (Eigen::Index k = 0; k <= m; ++k) {
    const auto block = panel_psi.middleCols(k * p, p);
    acc0 += block * g0.segment(k * p, p).transpose();
    acc1 += block * g1.segment(k * p, p).transpose();
    cum0.col(k) = acc0;
    cum1.col(k) = acc1;
  }
  const Eigen::VectorXcd total0 = cum0.col(m);
  const Eigen::VectorXcd total1 = cum1.col(m);

  // Integrand over x2 for each i: phi1(x2) A_i0(x2) - phi0(x2) A_i1(x2), where
  // A_ia = int psi_i phi_a sgn(x2 - x1) dx1 = 2 Phi_ia(x2) - Phi_ia(L).
  Eigen::MatrixXcd a0 = cum0.leftCols(m);
  Eigen::MatrixXcd a1 = cum1.leftCols(m);
  if (options.sign_factor) {
    a0 = (2.0 * a0).colwise() - total0;
    a1 = (2.0 * a1).colwise() - total1;
  } else {
    a0 = total0.replicate(1, m);
    a1 = total1.replicate(1, m);
  }
  const Eigen::Map<const Eigen::VectorXd> ow(outer.weights.data(), m);
  Eigen::MatrixXcd integrand = a0 * f1.asDiagonal() - a1 * f0.asDiagonal();
  integrand = integrand * ow.cast<cplx>().asDiagonal();
  Eigen::MatrixXcd e = integrand * psi.transpose().cast<cplx>() / std::numbers::sqrt2;

  TgProjection out;
  out.asymmetry = symmetry_defect(e);
  if (options.sign_factor) e = 0.5 * (e + e.transpose()).eval();
  const cplx trace = (e.array() * e.array()).sum();
  out.coefficients.normalization_defect = std::abs(trace - 1.0);
  if (!(out.coefficients.normalization_defect <= options.max_trace_defect)) {
    throw NumericalError("TG projection lost too much weight (trace defect " +
                         std::to_string(out.coefficients.normalization_defect) + "); enlarge the basis or grid");
  }
  e /= std::sqrt(trace);
  out.coefficients.entries = std::move(e);
  return out;
}

TgReference tg_reference(const BasisSpec& spec, const TgConfig& config) {
  spec.validate();
  const std::vector<double> thetas = theta_grid(config.theta_min, config.theta_max, config.theta_step);
  const ThetaScan scan = theta_scan(one_particle_factory(spec, config.potential), thetas, config.jobs);
  const std::vector<ResonanceState> lowest = find_resonances(scan, 2);
  if (lowest.size() < 2) throw NoResonanceFound("TG construction needs two stabilized one-particle resonances");

  TgReference out;
  out.resonance0 = lowest[0];
  out.resonance1 = lowest[1];
  out.value = tg_position(lowest[0].eigenpair.value, lowest[1].eigenpair.value);
  out.energy = out.value.real();
  out.width = -2.0 * out.value.imag();
  for (const ResonanceState& r : lowest) out.flags.insert(out.flags.end(), r.flags.begin(), r.flags.end());

  const ModelParams params{config.orbital_theta, 0.0, config.potential};
  const EigenDecomposition eig = eigendecompose(build_one_particle(spec, params));
  auto orbital = [&](std::complex<double> target) {
    Eigen::Index best = 0;
    for (Eigen::Index k = 1; k < eig.size(); ++k) {
      if (std::abs(eig.values[static_cast<std::size_t>(k)] - target) <
          std::abs(eig.values[static_cast<std::size_t>(best)] - target)) {
        best = k;
      }
    }
    return ResonanceOrbital{eig.right.col(best), eig.values[static_cast<std::size_t>(best)]};
  };
  out.phi0 = orbital(lowest[0].eigenpair.value);
  out.phi1 = orbital(lowest[1].eigenpair.value);
  const double overlap = std::abs(cplx((out.phi0.coeffs.transpose() * out.phi1.coeffs)(0, 0)));
  if (overlap > 1e-8) out.flags.emplace_back("orbitals-not-c-orthogonal");

  out.projection = tg_coefficient_matrix(out.phi0, out.phi1, spec, config.projection);
  out.spectrum = takagi_symmetric(out.projection.coefficients);
  out.entropy = complex_entropies(out.spectrum);
  out.flags.insert(out.flags.end(), out.spectrum.flags.begin(), out.spectrum.flags.end());
  if (out.entropy.branch_ambiguous) out.flags.emplace_back("log-branch-ambiguous");
  return out;
}

}  // namespace csm
