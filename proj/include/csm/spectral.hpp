#pragma once

#include <complex>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "csm/operators.hpp"

namespace csm {

// One eigenvalue with its right/left eigenvectors, normalized under the
// bilinear c-product: left^T right = 1.
struct EigenPair {
  std::complex<double> value;
  Eigen::VectorXcd right;
  Eigen::VectorXcd left;
  double c_norm_defect = 0.0;
  // False when the eigenvector was nearly self-orthogonal before
  // normalization (exceptional-point proximity).
  bool reliable = true;
};

// Full eigensystem sorted by Re(W) ascending. For complex-symmetric input
// the left eigenvectors coincide with the right ones and `left` is left
// empty; `left_vector` hides the difference.
struct EigenDecomposition {
  std::vector<std::complex<double>> values;
  Eigen::MatrixXcd right;
  Eigen::MatrixXcd left;
  std::vector<double> c_norm_defect;
  std::vector<bool> reliable;
  bool symmetric = false;

  Eigen::Index size() const { return static_cast<Eigen::Index>(values.size()); }
  auto right_vector(Eigen::Index k) const { return right.col(k); }
  auto left_vector(Eigen::Index k) const { return symmetric ? right.col(k) : left.col(k); }
  EigenPair operator[](Eigen::Index k) const;
};

EigenDecomposition eigendecompose(const Eigen::MatrixXcd& m);
inline EigenDecomposition eigendecompose(const ScaledOperator& op) { return eigendecompose(op.entries); }

/// Eigenvalues only, sorted by Re ascending.
std::vector<std::complex<double>> eigenvalues(const Eigen::MatrixXcd& m);

/// Maximum |R diag(W) L^T - M| (reconstruction through the bilinear completeness relation).
double reconstruction_defect(const EigenDecomposition& eig, const Eigen::MatrixXcd& m);

struct Selection {
  enum class Mode { lowest_energy, nearest_to };
  Mode mode = Mode::lowest_energy;
  std::complex<double> target{};

  static Selection lowest_energy() { return {}; }
  static Selection nearest_to(std::complex<double> w) { return {Mode::nearest_to, w}; }
};

// A point counts as stabilized when |dW/dtheta| / |W| is below the threshold.
// Rotated-continuum eigenvalues move like W e^{-2i theta} (relative rate ~2);
// resonances stay put.
struct StationarityOptions {
  double relative_threshold = 0.15;
  // Optional extra admissibility test on the eigenvector of a stabilized
  // candidate (e.g. spatial localization). Rejected candidates are skipped.
  std::function<bool(const EigenPair&)> accept;
};

struct ResonanceState {
  EigenPair eigenpair;
  double theta = 0.0;
  double energy = 0.0;  // Re W
  double width = 0.0;   // -2 Im W
  double stability = 0.0;  // |dW/dtheta|
  std::vector<std::string> flags;
};

/// |left^T dH right| for a c-normalized pair: the analytic dW/dtheta.
double theta_rate(const EigenPair& pair, const Eigen::MatrixXcd& theta_derivative);

// Resonance at a single angle. Stationarity comes from the analytic
// derivative of each eigenvalue, so no neighbouring angles are diagonalized.
// Throws NoResonanceFound when no Im(W) < 0 eigenvalue is stabilized.
ResonanceState locate_resonance(const EigenDecomposition& eig, const Eigen::MatrixXcd& theta_derivative, double theta,
                                Selection selection = {}, StationarityOptions options = {});

struct ScanPoint {
  double theta = 0.0;
  std::complex<double> value;
  double rate = 0.0;  // |dW/dtheta|, central difference (one-sided at the ends)
  bool ambiguous = false;
};

struct Trajectory {
  std::vector<ScanPoint> points;
  bool flagged = false;
};

struct ThetaScan {
  std::vector<double> thetas;
  std::vector<Trajectory> trajectories;
  OperatorFactory factory;
};

/// Inclusive grid min, min+step, ..., max (max included when it lands within step/1000).
std::vector<double> theta_grid(double min, double max, double step);

// Diagonalizes at every angle (in parallel when jobs > 1) and threads the
// eigenvalues into trajectories by nearest complex distance. A match whose
// runner-up is closer than 3x the nearest distance marks the point ambiguous.
ThetaScan theta_scan(const OperatorFactory& factory, std::span<const double> thetas, int jobs = 1);

// Stationary point of the selected stabilized trajectory, restricted to
// interior grid points with Im(W) < 0; the eigenvector is recomputed at the
// chosen angle. Throws NoResonanceFound.
ResonanceState find_resonance(const ThetaScan& scan, Selection selection = {}, StationarityOptions options = {});

/// The `count` lowest-energy stabilized trajectories, ascending in Re(W).
std::vector<ResonanceState> find_resonances(const ThetaScan& scan, int count, StationarityOptions options = {});

}  // namespace csm
