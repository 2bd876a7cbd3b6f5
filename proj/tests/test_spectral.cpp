#include <cmath>
#include <complex>
#include <vector>

#include "csm/errors.hpp"
#include "csm/operators.hpp"
#include "csm/spectral.hpp"
#include "doctest.h"
#include "test_support.hpp"

using namespace csm;
using cplx = std::complex<double>;

namespace {

const cplx kW0{0.411, -0.0026};
const cplx kW1{1.014, -0.125};

double c_orthonormality_defect(const EigenDecomposition& eig) {
  const Eigen::MatrixXcd& left = eig.symmetric ? eig.right : eig.left;
  return (left.transpose() * eig.right - Eigen::MatrixXcd::Identity(eig.size(), eig.size())).cwiseAbs().maxCoeff();
}

const ThetaScan& one_particle_scan() {
  static const ThetaScan scan = [] {
    const std::vector<double> thetas = theta_grid(0.10, 0.30, 0.01);
    return theta_scan(one_particle_factory({90, 400}, open_well()), thetas);
  }();
  return scan;
}

}  // namespace

TEST_CASE("1x1 matrix") {
  Eigen::MatrixXcd m(1, 1);
  m(0, 0) = {0.3, -0.7};
  const EigenDecomposition eig = eigendecompose(m);
  REQUIRE(eig.size() == 1);
  CHECK(std::abs(eig.values[0] - m(0, 0)) < 1e-15);
  CHECK(std::abs(eig.right(0, 0) - 1.0) < 1e-15);
}

TEST_CASE("unscaled one-particle operator has a real spectrum") {
  const ScaledOperator op = build_one_particle({90, 400}, {0.0, 0.0, open_well()});
  const EigenDecomposition eig = eigendecompose(op);
  for (const cplx& w : eig.values) CHECK(std::abs(w.imag()) < 1e-10);
  CHECK(c_orthonormality_defect(eig) < 1e-10);
  for (Eigen::Index k = 1; k < eig.size(); ++k) CHECK(eig.values[k].real() >= eig.values[k - 1].real());
}

TEST_CASE("random complex-symmetric reconstruction and c-orthonormality") {
  for (unsigned seed : {1u, 2u, 3u}) {
    const Eigen::MatrixXcd m = testing::random_complex_symmetric(6, seed);
    const EigenDecomposition eig = eigendecompose(m);
    CHECK(eig.symmetric);
    CHECK(reconstruction_defect(eig, m) < 1e-9);
    CHECK(c_orthonormality_defect(eig) < 1e-7);
    for (Eigen::Index k = 0; k < eig.size(); ++k) {
      const EigenPair pair = eig[k];
      CHECK(pair.c_norm_defect < 1e-8);
      CHECK(pair.reliable);
      CHECK((m * pair.right - pair.value * pair.right).norm() / std::abs(pair.value) < 1e-8);
      // Sign convention: largest component has non-negative real part.
      Eigen::Index idx = 0;
      pair.right.cwiseAbs().maxCoeff(&idx);
      CHECK(pair.right[idx].real() >= 0.0);
    }
    // Bilinear completeness: sum_n |R_n>><<L_n| = I.
    const Eigen::MatrixXcd completeness = eig.right * eig.right.transpose();
    CHECK((completeness - Eigen::MatrixXcd::Identity(6, 6)).cwiseAbs().maxCoeff() < 1e-7);
  }
}

TEST_CASE("large real and complex symmetric input") {
  // Sizes past the blocking thresholds of dense LAPACK drivers.
  const Eigen::MatrixXcd c = testing::random_complex_symmetric(300, 11);
  const Eigen::MatrixXcd r = c.real().cast<cplx>();
  for (const Eigen::MatrixXcd* m : {&r, &c}) {
    const EigenDecomposition eig = eigendecompose(*m);
    CHECK(reconstruction_defect(eig, *m) < 1e-8);
    CHECK(c_orthonormality_defect(eig) < 1e-7);
  }
}

TEST_CASE("general matrix uses L = (R^-1)^T") {
  Eigen::MatrixXcd m = testing::random_complex_symmetric(5, 9);
  m(0, 3) += cplx(0.4, 0.1);
  const EigenDecomposition eig = eigendecompose(m);
  CHECK_FALSE(eig.symmetric);
  CHECK(c_orthonormality_defect(eig) < 1e-10);
  CHECK(reconstruction_defect(eig, m) < 1e-9);
  // Left vectors are eigenvectors of M^T.
  for (Eigen::Index k = 0; k < eig.size(); ++k) {
    const Eigen::VectorXcd l = eig.left_vector(k);
    CHECK((m.transpose() * l - eig.values[static_cast<std::size_t>(k)] * l).norm() < 1e-9 * l.norm());
  }
}

TEST_CASE("degenerate subspace is c-orthogonalized") {
  // Complex orthogonal Q (Q^T Q = I) from a rotation by a complex angle.
  const cplx z{0.7, 0.4};
  Eigen::MatrixXcd q = Eigen::MatrixXcd::Identity(3, 3);
  q(0, 0) = std::cos(z);
  q(0, 1) = -std::sin(z);
  q(1, 0) = std::sin(z);
  q(1, 1) = std::cos(z);
  Eigen::MatrixXcd q2 = Eigen::MatrixXcd::Identity(3, 3);
  q2(1, 1) = std::cos(z * 0.5);
  q2(1, 2) = -std::sin(z * 0.5);
  q2(2, 1) = std::sin(z * 0.5);
  q2(2, 2) = std::cos(z * 0.5);
  q = q * q2;
  Eigen::VectorXcd d(3);
  d << cplx(1.0, -0.1), cplx(1.0, -0.1), cplx(2.0, -0.3);
  const Eigen::MatrixXcd m = q * d.asDiagonal() * q.transpose();
  const EigenDecomposition eig = eigendecompose(m);
  CHECK(c_orthonormality_defect(eig) < 1e-7);
  CHECK(reconstruction_defect(eig, m) < 1e-9);
}

TEST_CASE("self-orthogonal eigenvector is flagged") {
  // Jordan-like complex-symmetric block: [[1, i], [i, -1]] is nilpotent with
  // a single self-orthogonal eigenvector (1, i).
  Eigen::MatrixXcd m(2, 2);
  m << cplx(1, 0), cplx(0, 1), cplx(0, 1), cplx(-1, 0);
  const EigenDecomposition eig = eigendecompose(m);
  const bool both_reliable = eig.reliable[0] && eig.reliable[1];
  CHECK_FALSE(both_reliable);
}

TEST_CASE("theta grid") {
  const std::vector<double> grid = theta_grid(0.10, 0.30, 0.01);
  CHECK(grid.size() == 21);
  CHECK(grid.back() == doctest::Approx(0.30).epsilon(1e-12));
  CHECK_THROWS_AS(theta_grid(0.1, 0.3, 0.0), ConfigError);
  CHECK_THROWS_AS(theta_grid(0.3, 0.1, 0.01), ConfigError);
  const std::vector<double> bad{0.2, 0.1};
  CHECK_THROWS_AS(theta_scan(one_particle_factory({10, 64}, open_well()), bad), ConfigError);
  const std::vector<double> outside{0.1, 0.9};
  CHECK_THROWS_AS(theta_scan(one_particle_factory({10, 64}, open_well()), outside), DomainError);
}

TEST_CASE("one-particle scan finds both resonances") {
  const ThetaScan& scan = one_particle_scan();
  CHECK(scan.trajectories.size() == 90);

  const ResonanceState w0 = find_resonance(scan);
  CHECK(std::abs(w0.eigenpair.value - kW0) < 5e-3);
  CHECK(w0.energy == doctest::Approx(0.411).epsilon(5e-3 / 0.411));
  CHECK(std::abs(w0.width - 0.0052) < 5e-4);
  CHECK(w0.theta > 0.10);
  CHECK(w0.theta < 0.30);

  const ResonanceState w1 = find_resonance(scan, Selection::nearest_to(kW1));
  CHECK(std::abs(w1.eigenpair.value - kW1) < 5e-3);

  const std::vector<ResonanceState> both = find_resonances(scan, 2);
  CHECK(std::abs(both[0].eigenpair.value - w0.eigenpair.value) < 1e-12);
  CHECK(std::abs(both[1].eigenpair.value - kW1) < 5e-3);
}

TEST_CASE("rotated continuum moves much faster than the resonance") {
  const ThetaScan& scan = one_particle_scan();
  const std::size_t mid = 10;  // theta = 0.2
  const Trajectory* resonance = nullptr;
  const Trajectory* continuum = nullptr;
  for (const Trajectory& t : scan.trajectories) {
    const cplx w = t.points[mid].value;
    if (std::abs(w - kW0) < 5e-3) resonance = &t;
    // A low-lying rotated-continuum state, rotated down by roughly 2 theta.
    if (w.real() > 0.1 && w.real() < 0.8 && std::abs(std::arg(w) + 0.4) < 0.2 && continuum == nullptr) continuum = &t;
  }
  REQUIRE(resonance != nullptr);
  REQUIRE(continuum != nullptr);
  CHECK(continuum->points[mid].rate >= 10.0 * resonance->points[mid].rate);

  // theta-independence over [0.15, 0.25].
  const std::size_t lo = 5, hi = 15;
  double res_spread = 0.0, cont_spread = 0.0;
  for (std::size_t k = lo; k <= hi; ++k) {
    res_spread = std::max(res_spread, std::abs(resonance->points[k].value - resonance->points[mid].value));
    cont_spread = std::max(cont_spread, std::abs(continuum->points[k].value - continuum->points[mid].value));
  }
  CHECK(res_spread < 1e-3);
  CHECK(cont_spread > 1e-2);
}

TEST_CASE("fixed-angle resonance from the analytic derivative") {
  const BasisSpec spec{90, 400};
  const ModelParams params{0.2, 0.0, open_well()};
  const EigenDecomposition eig = eigendecompose(build_one_particle(spec, params));
  const Eigen::MatrixXcd derivative = one_particle_theta_derivative(spec, params).entries;
  const ResonanceState w0 = locate_resonance(eig, derivative, 0.2);
  CHECK(std::abs(w0.eigenpair.value - kW0) < 5e-3);
  CHECK(w0.stability < 0.01);
  const ResonanceState w1 = locate_resonance(eig, derivative, 0.2, Selection::nearest_to(kW1));
  CHECK(std::abs(w1.eigenpair.value - kW1) < 5e-3);

  // Analytic rate agrees with the scan's central difference.
  const ThetaScan& scan = one_particle_scan();
  for (const Trajectory& t : scan.trajectories) {
    if (std::abs(t.points[10].value - w1.eigenpair.value) < 1e-10) {
      CHECK(t.points[10].rate == doctest::Approx(w1.stability).epsilon(0.05));
    }
  }
}

TEST_CASE("no resonance") {
  CHECK_THROWS_AS(find_resonance(ThetaScan{}), NoResonanceFound);
  // Pure harmonic confinement has only real bound-state eigenvalues.
  const BasisSpec spec{20, 64};
  const ModelParams params{0.0, 0.0, harmonic()};
  const EigenDecomposition eig = eigendecompose(build_one_particle(spec, params));
  CHECK_THROWS_AS(locate_resonance(eig, one_particle_theta_derivative(spec, params).entries, 0.0), NoResonanceFound);
}
