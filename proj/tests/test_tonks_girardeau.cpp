#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include <gsl/gsl_integration.h>

#include "csm/errors.hpp"
#include "csm/operators.hpp"
#include "csm/schmidt.hpp"
#include "csm/tonks_girardeau.hpp"
#include "doctest.h"
#include "test_support.hpp"

using namespace csm;
using cplx = std::complex<double>;

namespace {

// Direct triangle quadrature: for each outer x2 a fresh Gauss-Legendre rule
// on [-L, x2] (and on [x2, L]) for x1. No cumulative tables.
Eigen::MatrixXcd tg_by_triangles(const ResonanceOrbital& phi0, const ResonanceOrbital& phi1, int n, double L,
                                 int nodes) {
  gsl_integration_glfixed_table* table = gsl_integration_glfixed_table_alloc(static_cast<std::size_t>(nodes));
  auto orbital = [&](const Eigen::VectorXcd& c, double x) {
    cplx sum{};
    for (int i = 0; i < n; ++i) sum += c[i] * evaluate_ho(i, x);
    return sum;
  };
  Eigen::MatrixXcd e = Eigen::MatrixXcd::Zero(n, n);
  for (int a = 0; a < nodes; ++a) {
    double x2 = 0.0, w2 = 0.0;
    gsl_integration_glfixed_point(-L, L, static_cast<std::size_t>(a), &x2, &w2, table);
    const cplx p0_2 = orbital(phi0.coeffs, x2), p1_2 = orbital(phi1.coeffs, x2);
    for (int side = 0; side < 2; ++side) {
      const double lo = side == 0 ? -L : x2;
      const double hi = side == 0 ? x2 : L;
      const double sign = side == 0 ? 1.0 : -1.0;  // sgn(x2 - x1)
      for (int b = 0; b < nodes; ++b) {
        double x1 = 0.0, w1 = 0.0;
        gsl_integration_glfixed_point(lo, hi, static_cast<std::size_t>(b), &x1, &w1, table);
        const cplx det = orbital(phi0.coeffs, x1) * p1_2 - orbital(phi1.coeffs, x1) * p0_2;
        const cplx weight = sign * w1 * w2 * det / std::numbers::sqrt2;
        for (int i = 0; i < n; ++i) {
          const double psi_i = evaluate_ho(i, x1);
          for (int j = 0; j < n; ++j) e(i, j) += weight * psi_i * evaluate_ho(j, x2);
        }
      }
    }
  }
  gsl_integration_glfixed_table_free(table);
  return e;
}

ResonanceOrbital unit_orbital(int n, int k) {
  ResonanceOrbital o;
  o.coeffs = Eigen::VectorXcd::Zero(n);
  o.coeffs[k] = 1.0;
  return o;
}

const TgReference& production_reference() {
  static const TgReference ref = tg_reference({90, 400});
  return ref;
}

}  // namespace

TEST_CASE("TG position is additive") {
  const cplx w0{0.411, -0.0026}, w1{1.014, -0.125};
  const cplx sum = tg_position(w0, w1);
  CHECK(sum == w0 + w1);
  CHECK(std::abs(sum - cplx(1.425, -0.1276)) < 1e-12);
  CHECK(-2.0 * sum.imag() == doctest::Approx(0.2552));
  CHECK(tg_position(w0, 0.0) == w0);
  CHECK(tg_position(w0, w0).real() == doctest::Approx(0.822));
}

TEST_CASE("cumulative projection matches direct triangle quadrature") {
  const int n = 6;
  const BasisSpec spec{n, 32};
  // Six orbitals cannot resolve the sgn cusp; only compare the projection.
  TgProjectionOptions options;
  options.half_width = 12.0;
  options.max_trace_defect = 0.1;
  // Real orbitals psi_0, psi_1 and complex orbitals from a small scaled problem.
  {
    const TgProjection proj = tg_coefficient_matrix(unit_orbital(n, 0), unit_orbital(n, 1), spec, options);
    const Eigen::MatrixXcd oracle = tg_by_triangles(unit_orbital(n, 0), unit_orbital(n, 1), n, 12.0, 160);
    CHECK(proj.asymmetry < 1e-9);
    const cplx oracle_trace = (oracle.array() * oracle.array()).sum();
    CHECK((proj.coefficients.entries - oracle / std::sqrt(oracle_trace)).cwiseAbs().maxCoeff() < 1e-8);
  }
  {
    const EigenDecomposition eig = eigendecompose(build_one_particle(spec, {0.2, 0.0, open_well()}));
    const ResonanceOrbital a{eig.right.col(1), eig.values[1]};
    const ResonanceOrbital b{eig.right.col(2), eig.values[2]};
    const TgProjection proj = tg_coefficient_matrix(a, b, spec, options);
    const Eigen::MatrixXcd oracle = tg_by_triangles(a, b, n, 12.0, 160);
    const cplx oracle_trace = (oracle.array() * oracle.array()).sum();
    CHECK(proj.asymmetry < 1e-9);
    CHECK((proj.coefficients.entries - oracle / std::sqrt(oracle_trace)).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("bare determinant has a two-fold degenerate spectrum") {
  const int n = 8;
  const BasisSpec spec{n, 32};
  const EigenDecomposition eig = eigendecompose(build_one_particle(spec, {0.2, 0.0, open_well()}));
  const ResonanceOrbital a{eig.right.col(0), eig.values[0]};
  const ResonanceOrbital b{eig.right.col(3), eig.values[3]};
  TgProjectionOptions options;
  options.sign_factor = false;
  const TgProjection proj = tg_coefficient_matrix(a, b, spec, options);
  const Eigen::MatrixXcd& e = proj.coefficients.entries;
  // Without sgn the amplitude is a pure determinant: E is antisymmetric.
  CHECK((e + e.transpose()).cwiseAbs().maxCoeff() < 1e-9);
  const std::vector<cplx> lambda = rdm_eigenvalues_direct(proj.coefficients);
  CHECK(std::abs(lambda[0] - 0.5) < 1e-9);
  CHECK(std::abs(lambda[1] - 0.5) < 1e-9);
  for (std::size_t k = 2; k < lambda.size(); ++k) CHECK(std::abs(lambda[k]) < 1e-9);
}

TEST_CASE("projection errors") {
  const BasisSpec spec{6, 32};
  CHECK_THROWS_AS(tg_coefficient_matrix(unit_orbital(5, 0), unit_orbital(6, 1), spec), ConfigError);
  TgProjectionOptions narrow;
  narrow.half_width = 0.5;  // cuts away most of the weight
  CHECK_THROWS_AS(tg_coefficient_matrix(unit_orbital(6, 0), unit_orbital(6, 1), spec, narrow), NumericalError);
  TgProjectionOptions negative;
  negative.half_width = -1.0;
  CHECK_THROWS_AS(tg_coefficient_matrix(unit_orbital(6, 0), unit_orbital(6, 1), spec, negative), ConfigError);
  CHECK(tg_half_width({10, 32}, {}) == 12.0);
  CHECK(tg_half_width({90, 400}, {}) == doctest::Approx(std::sqrt(181.0) + 3.0));
}

TEST_CASE("TG reference at production resolution") {
  const TgReference& ref = production_reference();
  CHECK(std::abs(ref.resonance0.eigenpair.value - cplx(0.411, -0.0026)) < 5e-3);
  CHECK(std::abs(ref.resonance1.eigenpair.value - cplx(1.014, -0.125)) < 5e-3);
  CHECK(ref.value == ref.resonance0.eigenpair.value + ref.resonance1.eigenpair.value);
  CHECK(std::abs(ref.energy - 1.425) < 5e-3);
  CHECK(std::abs(ref.width - 0.254) < 5e-3);

  CHECK(std::abs(cplx((ref.phi0.coeffs.transpose() * ref.phi1.coeffs)(0, 0))) < 1e-8);
  CHECK(std::abs(cplx((ref.phi0.coeffs.transpose() * ref.phi0.coeffs)(0, 0)) - 1.0) < 1e-8);
  CHECK(ref.projection.asymmetry < 1e-9);
  CHECK(ref.projection.coefficients.normalization_defect < 1e-4);
  CHECK(std::abs(ref.spectrum.trace() - 1.0) < 1e-6);
  CHECK(std::abs(ref.entropy.lin.real() - 0.34) < 0.02);
  CHECK(std::abs(ref.entropy.lin.imag() + 0.04) < 0.02);
  for (std::size_t k = 1; k < ref.spectrum.lambda.size(); ++k) {
    CHECK(std::abs(ref.spectrum.lambda[k]) <= std::abs(ref.spectrum.lambda[k - 1]));
  }
  CHECK(ref.flags.empty());
}

TEST_CASE("outer grid convergence") {
  const TgReference& ref = production_reference();
  const BasisSpec spec{90, 400};
  TgProjectionOptions fine;
  fine.outer_nodes = 1200;
  const TgProjection doubled = tg_coefficient_matrix(ref.phi0, ref.phi1, spec, fine);
  CHECK((doubled.coefficients.entries - ref.projection.coefficients.entries).cwiseAbs().maxCoeff() < 1e-7);
}
