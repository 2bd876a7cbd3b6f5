#include "csm/hermite_basis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "csm/errors.hpp"

namespace csm {

namespace {

constexpr double kRescaleThreshold = 1e150;
constexpr double kRescaleFactor = 1e-150;
const double kLogRescale = 150.0 * std::log(10.0);

// pi^{-1/4}
const double kPsi0Norm = std::pow(std::numbers::pi, -0.25);

// p * e^{log_scale} without losing values whose factors straddle the
// double range.
double unscale(double p, double log_scale) {
  if (p == 0.0) return 0.0;
  if (log_scale > -600.0) return p * std::exp(log_scale);
  return std::copysign(std::exp(std::log(std::abs(p)) + log_scale), p);
}

struct ScaledPair {
  double current;   // psi_n e^{-log_scale}
  double previous;  // psi_{n-1} e^{-log_scale}
  double log_scale;
};

// Runs the normalized recurrence up to psi_n, keeping the pair bounded.
ScaledPair hermite_pair(int n, double x) {
  double prev = 0.0;
  double cur = kPsi0Norm;
  double log_scale = -0.5 * x * x;
  for (int i = 0; i < n; ++i) {
    const double next = x * std::sqrt(2.0 / (i + 1)) * cur - std::sqrt(static_cast<double>(i) / (i + 1)) * prev;
    prev = cur;
    cur = next;
    if (std::abs(cur) > kRescaleThreshold) {
      cur *= kRescaleFactor;
      prev *= kRescaleFactor;
      log_scale += kLogRescale;
    }
  }
  return {cur, prev, log_scale};
}

}  // namespace

void BasisSpec::validate() const {
  if (n_orbitals < 2) {
    throw ConfigError("basis needs at least 2 orbitals, got " + std::to_string(n_orbitals));
  }
  if (quad_nodes < n_orbitals) {
    throw ConfigError("quadrature with " + std::to_string(quad_nodes) + " nodes cannot integrate a basis of " +
                      std::to_string(n_orbitals) + " orbitals exactly");
  }
}

double evaluate_ho(int i, double x) {
  const ScaledPair pair = hermite_pair(i, x);
  return unscale(pair.current, pair.log_scale);
}

void evaluate_ho_all(int n, double x, std::span<double> out) {
  if (n <= 0) return;
  double prev = 0.0;
  double cur = kPsi0Norm;
  double log_scale = -0.5 * x * x;
  out[0] = unscale(cur, log_scale);
  for (int i = 0; i + 1 < n; ++i) {
    const double next = x * std::sqrt(2.0 / (i + 1)) * cur - std::sqrt(static_cast<double>(i) / (i + 1)) * prev;
    prev = cur;
    cur = next;
    if (std::abs(cur) > kRescaleThreshold) {
      cur *= kRescaleFactor;
      prev *= kRescaleFactor;
      log_scale += kLogRescale;
    }
    out[i + 1] = unscale(cur, log_scale);
  }
}

Eigen::MatrixXd ho_table(int n, std::span<const double> xs) {
  Eigen::MatrixXd table(n, static_cast<Eigen::Index>(xs.size()));
  for (std::size_t k = 0; k < xs.size(); ++k) {
    evaluate_ho_all(n, xs[k], std::span<double>(table.col(static_cast<Eigen::Index>(k)).data(), n));
  }
  return table;
}

QuadratureRule gauss_hermite(int n) {
  if (n < 1) throw ConfigError("Gauss-Hermite rule needs at least one node");

  QuadratureRule rule;
  rule.nodes.assign(n, 0.0);
  rule.weights.assign(n, 0.0);
  rule.scaled_weights.assign(n, 0.0);

  constexpr int kMaxIterations = 100;
  const int half = (n + 1) / 2;
  const double sqrt_2n = std::sqrt(2.0 * n);
  double z = 0.0;
  // Largest roots first; asymptotic starting guesses extrapolated from the
  // previously converged roots.
  for (int i = 0; i < half; ++i) {
    if (i == 0) {
      z = std::sqrt(2.0 * n + 1) - 1.85575 * std::pow(2.0 * n + 1, -1.0 / 6.0);
    } else if (i == 1) {
      z -= 1.14 * std::pow(static_cast<double>(n), 0.426) / z;
    } else if (i == 2) {
      z = 1.86 * z - 0.86 * rule.nodes[0];
    } else if (i == 3) {
      z = 1.91 * z - 0.91 * rule.nodes[1];
    } else {
      z = 2.0 * z - rule.nodes[i - 2];
    }

    if (n % 2 == 1 && i == half - 1) {
      z = 0.0;
    } else {
      bool converged = false;
      for (int it = 0; it < kMaxIterations; ++it) {
        const ScaledPair p = hermite_pair(n, z);
        const double derivative = -z * p.current + sqrt_2n * p.previous;
        const double step = p.current / derivative;
        z -= step;
        if (std::abs(step) <= 1e-15 * std::max(1.0, std::abs(z))) {
          converged = true;
          break;
        }
      }
      if (!converged || !std::isfinite(z)) {
        throw NumericalError("Gauss-Hermite root " + std::to_string(i) + " of " + std::to_string(n) +
                             " did not converge");
      }
    }

    const ScaledPair p = hermite_pair(n, z);
    const double psi_prev = unscale(p.previous, p.log_scale);
    const double scaled = 1.0 / (n * psi_prev * psi_prev);
    const double weight = scaled * std::exp(-z * z);

    rule.nodes[i] = z;
    rule.scaled_weights[i] = scaled;
    rule.weights[i] = weight;
    rule.nodes[n - 1 - i] = -z;
    rule.scaled_weights[n - 1 - i] = scaled;
    rule.weights[n - 1 - i] = weight;
  }

  // Ascending node order.
  std::reverse(rule.nodes.begin(), rule.nodes.end());
  std::reverse(rule.weights.begin(), rule.weights.end());
  std::reverse(rule.scaled_weights.begin(), rule.scaled_weights.end());
  return rule;
}

double overlap_check(const BasisSpec& spec) {
  const QuadratureRule rule = gauss_hermite(spec.quad_nodes);
  const Eigen::MatrixXd table = ho_table(spec.n_orbitals, rule.nodes);
  const Eigen::Map<const Eigen::VectorXd> w(rule.scaled_weights.data(), static_cast<Eigen::Index>(rule.size()));
  const Eigen::MatrixXd overlap = table * w.asDiagonal() * table.transpose();
  return (overlap - Eigen::MatrixXd::Identity(spec.n_orbitals, spec.n_orbitals)).cwiseAbs().maxCoeff();
}

}  // namespace csm
