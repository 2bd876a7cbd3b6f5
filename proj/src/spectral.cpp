#include "csm/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

#include "csm/errors.hpp"
#include "csm/parallel.hpp"

namespace csm {

namespace {

using cplx = std::complex<double>;

// Raw c-norm |v^T v| of a unit eigenvector below this marks self-orthogonality.
constexpr double kSelfOrthogonal = 1e-6;
constexpr double kDegenerate = 1e-10;
constexpr double kAmbiguityRatio = 3.0;

bool less_re(cplx a, cplx b) {
  if (a.real() != b.real()) return a.real() < b.real();
  return a.imag() < b.imag();
}

std::vector<Eigen::Index> sorted_order(const std::vector<cplx>& values) {
  std::vector<Eigen::Index> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return less_re(values[static_cast<std::size_t>(a)], values[static_cast<std::size_t>(b)]);
  });
  return order;
}

bool is_symmetric(const Eigen::MatrixXcd& m) {
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  return symmetry_defect(m) <= 1e-12 * scale;
}

// Largest-modulus component gets a non-negative real part.
void fix_sign(Eigen::Ref<Eigen::VectorXcd> v) {
  Eigen::Index k = 0;
  v.cwiseAbs().maxCoeff(&k);
  if (v[k].real() < 0.0) v = -v;
}

cplx bilinear(const Eigen::Ref<const Eigen::VectorXcd>& a, const Eigen::Ref<const Eigen::VectorXcd>& b) {
  return (a.transpose() * b)(0, 0);
}

// Pivoted Gram-Schmidt under x^T y inside each cluster of (nearly) equal
// eigenvalues. Columns whose c-norm collapsed are marked unreliable.
void c_orthogonalize_clusters(const std::vector<cplx>& values, Eigen::MatrixXcd& vectors,
                              std::vector<bool>& reliable) {
  const std::size_t n = values.size();
  std::vector<bool> done(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    if (done[i]) continue;
    const double tol = kDegenerate * std::max(1.0, std::abs(values[i]));
    std::vector<Eigen::Index> cluster{static_cast<Eigen::Index>(i)};
    for (std::size_t j = i + 1; j < n && values[j].real() - values[i].real() <= tol; ++j) {
      if (!done[j] && std::abs(values[j] - values[i]) <= tol) cluster.push_back(static_cast<Eigen::Index>(j));
    }
    for (Eigen::Index c : cluster) done[static_cast<std::size_t>(c)] = true;
    if (cluster.size() < 2) continue;

    std::vector<Eigen::Index> remaining = cluster;
    while (!remaining.empty()) {
      auto best = remaining.begin();
      double best_norm = -1.0;
      for (auto it = remaining.begin(); it != remaining.end(); ++it) {
        const double c = std::abs(bilinear(vectors.col(*it), vectors.col(*it))) / vectors.col(*it).squaredNorm();
        if (c > best_norm) {
          best_norm = c;
          best = it;
        }
      }
      const Eigen::Index k = *best;
      remaining.erase(best);
      if (best_norm < kSelfOrthogonal) {
        reliable[static_cast<std::size_t>(k)] = false;
        vectors.col(k).normalize();
      } else {
        vectors.col(k) /= std::sqrt(bilinear(vectors.col(k), vectors.col(k)));
      }
      for (Eigen::Index other : remaining) {
        vectors.col(other) -= bilinear(vectors.col(k), vectors.col(other)) * vectors.col(k);
      }
    }
  }
}

struct RawEigen {
  std::vector<cplx> values;
  Eigen::MatrixXcd vectors;
};

RawEigen lapack_zgeev(const Eigen::MatrixXcd& m, bool want_vectors) {
  const auto n = static_cast<lapack_int>(m.rows());
  Eigen::MatrixXcd a = m;  // column-major copy, destroyed by LAPACK
  RawEigen out;
  out.values.resize(static_cast<std::size_t>(n));
  if (want_vectors) out.vectors.resize(n, n);
  cplx dummy;
  const lapack_int info =
      LAPACKE_zgeev(LAPACK_COL_MAJOR, 'N', want_vectors ? 'V' : 'N', n, a.data(), n, out.values.data(), &dummy, 1,
                    want_vectors ? out.vectors.data() : &dummy, want_vectors ? n : 1);
  if (info != 0) throw NumericalError("zgeev failed with info " + std::to_string(info));
  return out;
}

// Real symmetric input (theta = 0). The LAPACK dsyev family on the target
// install returns wrong eigenvectors above n ~ 100 (blocked tridiagonal
// reduction), so this path stays inside Eigen.
RawEigen real_symmetric_eigen(const Eigen::MatrixXd& m) {
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m);
  if (solver.info() != Eigen::Success) throw NumericalError("symmetric eigensolver did not converge");
  RawEigen out;
  out.values.assign(solver.eigenvalues().begin(), solver.eigenvalues().end());
  out.vectors = solver.eigenvectors().cast<cplx>();
  return out;
}

}  // namespace

EigenPair EigenDecomposition::operator[](Eigen::Index k) const {
  const auto i = static_cast<std::size_t>(k);
  return {values[i], right.col(k), left_vector(k), c_norm_defect[i], reliable[i]};
}

EigenDecomposition eigendecompose(const Eigen::MatrixXcd& m) {
  if (m.rows() != m.cols() || m.rows() == 0) throw ConfigError("eigendecompose needs a non-empty square matrix");
  if (!m.allFinite()) throw NumericalError("matrix has non-finite entries");

  EigenDecomposition out;
  out.symmetric = is_symmetric(m);
  const bool real_symmetric = out.symmetric && m.imag().isZero(0.0);

  RawEigen raw = real_symmetric ? real_symmetric_eigen(m.real()) : lapack_zgeev(m, true);
  const std::vector<Eigen::Index> order = sorted_order(raw.values);
  const Eigen::Index n = m.rows();
  out.values.resize(static_cast<std::size_t>(n));
  out.right.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    out.values[static_cast<std::size_t>(k)] = raw.values[static_cast<std::size_t>(order[static_cast<std::size_t>(k)])];
    out.right.col(k) = raw.vectors.col(order[static_cast<std::size_t>(k)]);
  }
  raw.vectors.resize(0, 0);
  out.reliable.assign(static_cast<std::size_t>(n), true);
  out.c_norm_defect.assign(static_cast<std::size_t>(n), 0.0);

  if (out.symmetric) {
    if (!real_symmetric) {
      for (Eigen::Index k = 0; k < n; ++k) {
        auto v = out.right.col(k);
        v.normalize();
        const cplx c = bilinear(v, v);
        if (std::abs(c) < kSelfOrthogonal) {
          out.reliable[static_cast<std::size_t>(k)] = false;
        } else {
          v /= std::sqrt(c);
        }
      }
      c_orthogonalize_clusters(out.values, out.right, out.reliable);
    }
    for (Eigen::Index k = 0; k < n; ++k) {
      fix_sign(out.right.col(k));
      out.c_norm_defect[static_cast<std::size_t>(k)] = std::abs(bilinear(out.right.col(k), out.right.col(k)) - 1.0);
    }
  } else {
    // L = (R^{-1})^T gives l_k^T r_j = delta_kj directly.
    for (Eigen::Index k = 0; k < n; ++k) fix_sign(out.right.col(k));
    const Eigen::PartialPivLU<Eigen::MatrixXcd> lu(out.right);
    out.left = lu.inverse().transpose();
    const double rcond = lu.rcond();
    for (Eigen::Index k = 0; k < n; ++k) {
      const auto i = static_cast<std::size_t>(k);
      out.c_norm_defect[i] = std::abs(bilinear(out.left.col(k), out.right.col(k)) - 1.0);
      out.reliable[i] = rcond > 1e-12;
    }
  }
  return out;
}

std::vector<std::complex<double>> eigenvalues(const Eigen::MatrixXcd& m) {
  if (m.rows() != m.cols() || m.rows() == 0) throw ConfigError("eigenvalues needs a non-empty square matrix");
  RawEigen raw = lapack_zgeev(m, false);
  std::sort(raw.values.begin(), raw.values.end(), less_re);
  return raw.values;
}

double reconstruction_defect(const EigenDecomposition& eig, const Eigen::MatrixXcd& m) {
  const Eigen::Map<const Eigen::VectorXcd> w(eig.values.data(), eig.size());
  const Eigen::MatrixXcd& left = eig.symmetric ? eig.right : eig.left;
  const Eigen::MatrixXcd rebuilt = eig.right * w.asDiagonal() * left.transpose();
  return (rebuilt - m).cwiseAbs().maxCoeff();
}

double theta_rate(const EigenPair& pair, const Eigen::MatrixXcd& theta_derivative) {
  return std::abs((pair.left.transpose() * (theta_derivative * pair.right))(0, 0));
}

ResonanceState locate_resonance(const EigenDecomposition& eig, const Eigen::MatrixXcd& theta_derivative, double theta,
                                Selection selection, StationarityOptions options) {
  std::vector<Eigen::Index> candidates;
  for (Eigen::Index k = 0; k < eig.size(); ++k) {
    if (eig.values[static_cast<std::size_t>(k)].imag() < 0.0) candidates.push_back(k);
  }
  if (selection.mode == Selection::Mode::nearest_to) {
    std::stable_sort(candidates.begin(), candidates.end(), [&](Eigen::Index a, Eigen::Index b) {
      return std::abs(eig.values[static_cast<std::size_t>(a)] - selection.target) <
             std::abs(eig.values[static_cast<std::size_t>(b)] - selection.target);
    });
  }
  // lowest_energy: `values` is already ascending in Re.
  for (Eigen::Index k : candidates) {
    const cplx w = eig.values[static_cast<std::size_t>(k)];
    const EigenPair pair = eig[k];
    const double rate = theta_rate(pair, theta_derivative);
    if (rate < options.relative_threshold * std::abs(w)) {
      if (options.accept && !options.accept(pair)) continue;
      ResonanceState state;
      state.eigenpair = pair;
      state.theta = theta;
      state.energy = w.real();
      state.width = -2.0 * w.imag();
      state.stability = rate;
      if (!pair.reliable) state.flags.emplace_back("near-exceptional-point");
      return state;
    }
  }
  throw NoResonanceFound("no stabilized eigenvalue with Im(W) < 0 at theta = " + std::to_string(theta));
}

std::vector<double> theta_grid(double min, double max, double step) {
  if (!(step > 0.0)) throw ConfigError("theta step must be positive");
  if (!(max >= min)) throw ConfigError("theta window is empty");
  std::vector<double> grid;
  const auto count = static_cast<long>(std::floor((max - min) / step + 1e-3));
  for (long k = 0; k <= count; ++k) grid.push_back(min + static_cast<double>(k) * step);
  return grid;
}

ThetaScan theta_scan(const OperatorFactory& factory, std::span<const double> thetas, int jobs) {
  if (thetas.empty()) throw ConfigError("theta scan needs at least one angle");
  for (std::size_t k = 0; k < thetas.size(); ++k) {
    if (!(thetas[k] >= 0.0 && thetas[k] < std::numbers::pi / 4)) {
      throw DomainError("scan angle " + std::to_string(thetas[k]) + " outside [0, pi/4)");
    }
    if (k > 0 && !(thetas[k] > thetas[k - 1])) throw ConfigError("scan angles must be strictly increasing");
  }

  std::vector<std::vector<cplx>> spectra(thetas.size());
  parallel_for(thetas.size(), jobs, [&](std::size_t k) { spectra[k] = eigenvalues(factory(thetas[k]).entries); });

  ThetaScan scan;
  scan.thetas.assign(thetas.begin(), thetas.end());
  scan.factory = factory;
  const std::size_t n = spectra.front().size();
  scan.trajectories.resize(n);
  for (std::size_t t = 0; t < n; ++t) scan.trajectories[t].points.push_back({thetas[0], spectra[0][t], 0.0, false});

  for (std::size_t k = 1; k < thetas.size(); ++k) {
    const std::vector<cplx>& next = spectra[k];
    std::vector<int> claims(next.size(), 0);
    std::vector<std::size_t> target(n);
    for (std::size_t t = 0; t < n; ++t) {
      const cplx w = scan.trajectories[t].points.back().value;
      double best = std::numeric_limits<double>::infinity();
      double second = std::numeric_limits<double>::infinity();
      std::size_t best_index = 0;
      for (std::size_t j = 0; j < next.size(); ++j) {
        const double d = std::abs(next[j] - w);
        if (d < best) {
          second = best;
          best = d;
          best_index = j;
        } else if (d < second) {
          second = d;
        }
      }
      target[t] = best_index;
      ++claims[best_index];
      const bool ambiguous = second < kAmbiguityRatio * best;
      scan.trajectories[t].points.push_back({thetas[k], next[best_index], 0.0, ambiguous});
      if (ambiguous) scan.trajectories[t].flagged = true;
    }
    for (std::size_t t = 0; t < n; ++t) {
      if (claims[target[t]] > 1) {
        scan.trajectories[t].points.back().ambiguous = true;
        scan.trajectories[t].flagged = true;
      }
    }
  }

  for (Trajectory& traj : scan.trajectories) {
    auto& pts = traj.points;
    const std::size_t m = pts.size();
    if (m < 2) continue;
    for (std::size_t k = 0; k < m; ++k) {
      const std::size_t lo = k == 0 ? 0 : k - 1;
      const std::size_t hi = k + 1 == m ? m - 1 : k + 1;
      pts[k].rate = std::abs(pts[hi].value - pts[lo].value) / (pts[hi].theta - pts[lo].theta);
    }
  }
  return scan;
}

namespace {

struct StationaryPoint {
  std::size_t trajectory;
  std::size_t point;
};

std::vector<StationaryPoint> stabilized_points(const ThetaScan& scan, StationarityOptions options) {
  std::vector<StationaryPoint> out;
  for (std::size_t t = 0; t < scan.trajectories.size(); ++t) {
    const auto& pts = scan.trajectories[t].points;
    if (pts.size() < 3) continue;
    std::size_t best = 0;
    double best_rate = std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k + 1 < pts.size(); ++k) {
      if (pts[k].value.imag() < 0.0 && pts[k].rate < best_rate) {
        best_rate = pts[k].rate;
        best = k;
      }
    }
    if (best != 0 && best_rate < options.relative_threshold * std::abs(pts[best].value)) out.push_back({t, best});
  }
  return out;
}

ResonanceState resolve(const ThetaScan& scan, StationaryPoint sp) {
  const Trajectory& traj = scan.trajectories[sp.trajectory];
  const ScanPoint& pt = traj.points[sp.point];
  const EigenDecomposition eig = eigendecompose(scan.factory(pt.theta).entries);
  Eigen::Index nearest = 0;
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < eig.size(); ++k) {
    const double d = std::abs(eig.values[static_cast<std::size_t>(k)] - pt.value);
    if (d < best) {
      best = d;
      nearest = k;
    }
  }
  ResonanceState state;
  state.eigenpair = eig[nearest];
  state.theta = pt.theta;
  state.energy = state.eigenpair.value.real();
  state.width = -2.0 * state.eigenpair.value.imag();
  state.stability = pt.rate;
  if (traj.flagged) state.flags.emplace_back("trajectory-ambiguous");
  if (!state.eigenpair.reliable) state.flags.emplace_back("near-exceptional-point");
  return state;
}

}  // namespace

ResonanceState find_resonance(const ThetaScan& scan, Selection selection, StationarityOptions options) {
  std::vector<StationaryPoint> points = stabilized_points(scan, options);
  auto value = [&](const StationaryPoint& sp) { return scan.trajectories[sp.trajectory].points[sp.point].value; };
  std::stable_sort(points.begin(), points.end(), [&](const auto& a, const auto& b) {
    if (selection.mode == Selection::Mode::nearest_to) {
      return std::abs(value(a) - selection.target) < std::abs(value(b) - selection.target);
    }
    return less_re(value(a), value(b));
  });
  for (const auto& sp : points) {
    ResonanceState state = resolve(scan, sp);
    if (!options.accept || options.accept(state.eigenpair)) return state;
  }
  throw NoResonanceFound("no stabilized trajectory with Im(W) < 0");
}

std::vector<ResonanceState> find_resonances(const ThetaScan& scan, int count, StationarityOptions options) {
  std::vector<StationaryPoint> points = stabilized_points(scan, options);
  auto value = [&](const StationaryPoint& sp) { return scan.trajectories[sp.trajectory].points[sp.point].value; };
  std::sort(points.begin(), points.end(), [&](const auto& a, const auto& b) { return less_re(value(a), value(b)); });
  // Two trajectories can lock onto the same resonance after an ambiguous match.
  std::vector<StationaryPoint> distinct;
  for (const auto& sp : points) {
    const bool duplicate = std::any_of(distinct.begin(), distinct.end(), [&](const auto& kept) {
      return std::abs(value(kept) - value(sp)) < 1e-3 * std::abs(value(sp));
    });
    if (!duplicate) distinct.push_back(sp);
  }
  std::vector<ResonanceState> out;
  for (const auto& sp : distinct) {
    if (static_cast<int>(out.size()) == count) break;
    ResonanceState state = resolve(scan, sp);
    if (!options.accept || options.accept(state.eigenpair)) out.push_back(std::move(state));
  }
  if (static_cast<int>(out.size()) < count) {
    throw NoResonanceFound("found " + std::to_string(out.size()) + " stabilized trajectories, need " +
                           std::to_string(count));
  }
  return out;
}

}  // namespace csm
