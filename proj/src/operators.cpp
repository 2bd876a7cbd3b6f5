#include "csm/operators.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "csm/errors.hpp"

namespace csm {

namespace {

using cplx = std::complex<double>;

constexpr double kQuadratureAgreement = 1e-11;
constexpr double kInvSqrt2 = 1.0 / std::numbers::sqrt2;

void check_theta(double theta) {
  if (!(theta >= 0.0 && theta < std::numbers::pi / 4)) {
    throw DomainError("scaling angle " + std::to_string(theta) + " outside [0, pi/4)");
  }
}

std::size_t pair_count(int n_orbitals) {
  const auto n = static_cast<std::size_t>(n_orbitals);
  return n * (n + 1) / 2;
}

void check_dimension(const BasisSpec& spec, std::size_t max_dim) {
  const std::size_t dim = pair_count(spec.n_orbitals);
  if (dim > max_dim) {
    throw ConfigError("two-particle dimension " + std::to_string(dim) + " exceeds the configured maximum " +
                      std::to_string(max_dim));
  }
}

// T diag(f) T^T for a real table and complex per-node factors.
Eigen::MatrixXcd weighted_gram(const Eigen::MatrixXd& table, const Eigen::VectorXcd& f) {
  const Eigen::MatrixXd re = table * f.real().asDiagonal() * table.transpose();
  const Eigen::MatrixXd im = table * f.imag().asDiagonal() * table.transpose();
  Eigen::MatrixXcd out(re.rows(), re.cols());
  out.real() = re;
  out.imag() = im;
  return out;
}

Eigen::VectorXcd potential_factors(const QuadratureRule& rule, double theta, const Potential& v, bool derivative) {
  const cplx phase = std::polar(1.0, theta);
  Eigen::VectorXcd f(static_cast<Eigen::Index>(rule.size()));
  for (std::size_t k = 0; k < rule.size(); ++k) {
    const cplx z = rule.nodes[k] * phase;
    const cplx value = derivative ? cplx(0.0, 1.0) * z * v.derivative(z) : v.value(z);
    f[static_cast<Eigen::Index>(k)] = rule.scaled_weights[k] * value;
  }
  return f;
}

std::vector<std::string> quadrature_flags(const BasisSpec& spec, const ModelParams& params) {
  const double defect = potential_quadrature_defect(spec, params);
  if (defect > kQuadratureAgreement) {
    return {"potential-quadrature-unconverged (n vs 2n defect " + std::to_string(defect) + ")"};
  }
  return {};
}

}  // namespace

void ModelParams::validate() const {
  check_theta(theta);
  if (!std::isfinite(g)) throw ConfigError("interaction strength must be finite");
  if (!potential.value || !potential.derivative) throw ConfigError("potential is not set");
}

std::vector<std::string> ModelParams::flags() const {
  if (g < 0.0) return {"attractive-contact"};
  return {};
}

PairIndex::PairIndex(int n_orbitals) : n_(n_orbitals) {
  pairs_.reserve(pair_count(n_orbitals));
  for (int i = 0; i < n_orbitals; ++i) {
    for (int j = 0; j <= i; ++j) pairs_.emplace_back(i, j);
  }
}

Eigen::Index PairIndex::row(int i, int j) const {
  if (i < j) std::swap(i, j);
  return static_cast<Eigen::Index>(i) * (i + 1) / 2 + j;
}

std::complex<double> kinetic_element(int i, int j, double theta) {
  const cplx phase = std::polar(1.0, -2.0 * theta);
  if (i == j) return phase * ((2.0 * i + 1.0) / 4.0);
  const int lo = std::min(i, j);
  if (std::abs(i - j) == 2) return phase * (-std::sqrt((lo + 1.0) * (lo + 2.0)) / 4.0);
  return {0.0, 0.0};
}

MatrixElements::MatrixElements(BasisSpec spec) : spec_(spec) {
  spec_.validate();
  rule_ = gauss_hermite(spec_.quad_nodes);
  table_ = ho_table(spec_.n_orbitals, rule_.nodes);

  // psi_i psi_j psi_k psi_l = poly(x) e^{-2x^2}; with x = u / sqrt(2) the
  // Gaussian becomes e^{-u^2} and the rule is exact for enough nodes.
  const QuadratureRule contact_rule =
      spec_.quad_nodes >= spec_.contact_nodes_required() ? rule_ : gauss_hermite(spec_.contact_nodes_required());
  std::vector<double> x(contact_rule.nodes);
  for (double& u : x) u /= std::numbers::sqrt2;
  contact_table_ = ho_table(spec_.n_orbitals, x);
  contact_weights_ =
      Eigen::Map<const Eigen::VectorXd>(contact_rule.scaled_weights.data(), static_cast<Eigen::Index>(x.size())) /
      std::numbers::sqrt2;
}

std::complex<double> MatrixElements::potential(int i, int j, double theta, const Potential& v) const {
  check_theta(theta);
  const cplx phase = std::polar(1.0, theta);
  cplx sum = 0.0;
  for (std::size_t k = 0; k < rule_.size(); ++k) {
    const auto col = static_cast<Eigen::Index>(k);
    sum += rule_.scaled_weights[k] * table_(i, col) * table_(j, col) * v.value(rule_.nodes[k] * phase);
  }
  return sum;
}

double MatrixElements::contact(int i, int j, int k, int l) const {
  return (contact_table_.row(i).array() * contact_table_.row(j).array() * contact_table_.row(k).array() *
          contact_table_.row(l).array() * contact_weights_.transpose().array())
      .sum();
}

Eigen::MatrixXcd MatrixElements::potential_matrix(double theta, const Potential& v) const {
  check_theta(theta);
  return weighted_gram(table_, potential_factors(rule_, theta, v, false));
}

Eigen::MatrixXcd MatrixElements::potential_theta_derivative(double theta, const Potential& v) const {
  check_theta(theta);
  return weighted_gram(table_, potential_factors(rule_, theta, v, true));
}

Eigen::MatrixXd MatrixElements::kinetic_matrix() const {
  const int n = spec_.n_orbitals;
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    t(i, i) = kinetic_element(i, i, 0.0).real();
    if (i + 2 < n) t(i, i + 2) = t(i + 2, i) = kinetic_element(i, i + 2, 0.0).real();
  }
  return t;
}

Eigen::MatrixXd MatrixElements::pair_contact_matrix(const PairIndex& pairs) const {
  Eigen::MatrixXd products(pairs.size(), contact_table_.cols());
  for (Eigen::Index p = 0; p < pairs.size(); ++p) {
    const auto [i, j] = pairs[p];
    products.row(p) = contact_table_.row(i).cwiseProduct(contact_table_.row(j));
  }
  Eigen::MatrixXd weighted = products * contact_weights_.asDiagonal();
  Eigen::MatrixXd out(pairs.size(), pairs.size());
  out.noalias() = weighted * products.transpose();
  return out;
}

std::complex<double> potential_element(int i, int j, double theta, const BasisSpec& spec, const Potential& v) {
  check_theta(theta);
  return MatrixElements(spec).potential(i, j, theta, v);
}

double delta_element(int i, int j, int k, int l, const BasisSpec& spec) {
  return MatrixElements(spec).contact(i, j, k, l);
}

double potential_quadrature_defect(const BasisSpec& spec, const ModelParams& params) {
  BasisSpec doubled = spec;
  doubled.quad_nodes = 2 * spec.quad_nodes;
  const Eigen::MatrixXcd base = MatrixElements(spec).potential_matrix(params.theta, params.potential);
  const Eigen::MatrixXcd fine = MatrixElements(doubled).potential_matrix(params.theta, params.potential);
  return (base - fine).cwiseAbs().maxCoeff();
}

ScaledOperator build_one_particle(const BasisSpec& spec, const ModelParams& params) {
  params.validate();
  const MatrixElements elements(spec);
  ScaledOperator op;
  op.kind = OperatorKind::one_particle;
  op.params = params;
  op.entries = elements.potential_matrix(params.theta, params.potential);
  op.entries += std::polar(1.0, -2.0 * params.theta) * elements.kinetic_matrix().cast<cplx>();
  op.flags = params.flags();
  for (auto& f : quadrature_flags(spec, params)) op.flags.push_back(std::move(f));
  return op;
}

ScaledOperator one_particle_theta_derivative(const BasisSpec& spec, const ModelParams& params) {
  params.validate();
  const MatrixElements elements(spec);
  ScaledOperator op;
  op.kind = OperatorKind::one_particle;
  op.params = params;
  op.entries = elements.potential_theta_derivative(params.theta, params.potential);
  op.entries += cplx(0.0, -2.0) * std::polar(1.0, -2.0 * params.theta) * elements.kinetic_matrix().cast<cplx>();
  return op;
}

std::shared_ptr<const Eigen::MatrixXd> TwoBosonAssembler::make_contact_block(const BasisSpec& spec,
                                                                             std::size_t max_dim) {
  check_dimension(spec, max_dim);
  const PairIndex pairs(spec.n_orbitals);
  auto block = std::make_shared<Eigen::MatrixXd>(MatrixElements(spec).pair_contact_matrix(pairs));
  Eigen::VectorXd s(pairs.size());
  for (Eigen::Index p = 0; p < pairs.size(); ++p) s[p] = pairs[p].first == pairs[p].second ? 0.5 : kInvSqrt2;
  *block = 4.0 * s.asDiagonal() * (*block) * s.asDiagonal();
  return block;
}

TwoBosonAssembler::TwoBosonAssembler(const BasisSpec& spec, double theta, const Potential& v, std::size_t max_dim)
    : TwoBosonAssembler(spec, theta, v, make_contact_block(spec, max_dim), max_dim) {}

TwoBosonAssembler::TwoBosonAssembler(const BasisSpec& spec, double theta, const Potential& v,
                                     std::shared_ptr<const Eigen::MatrixXd> contact_block, std::size_t max_dim)
    : spec_(spec), theta_(theta), potential_(v), pairs_((check_dimension(spec, max_dim), spec.n_orbitals)),
      contact_(std::move(contact_block)) {
  check_theta(theta);
  if (!contact_ || contact_->rows() != pairs_.size() || contact_->cols() != pairs_.size()) {
    throw ConfigError("contact block does not match the permanent basis dimension");
  }
  symmetry_.resize(pairs_.size());
  for (Eigen::Index p = 0; p < pairs_.size(); ++p) symmetry_[p] = pairs_[p].first == pairs_[p].second ? 0.5 : kInvSqrt2;

  ScaledOperator h = build_one_particle(spec_, ModelParams{theta, 0.0, potential_});
  one_particle_ = std::move(h.entries);
  flags_ = std::move(h.flags);
  one_body_ = one_body_block(one_particle_);
}

Eigen::MatrixXcd TwoBosonAssembler::one_body_block(const Eigen::MatrixXcd& h) const {
  const Eigen::Index dim = pairs_.size();
  Eigen::MatrixXcd k(dim, dim);
  for (Eigen::Index q = 0; q < dim; ++q) {
    const auto [i, j] = pairs_[q];
    for (Eigen::Index p = 0; p < dim; ++p) {
      const auto [n, m] = pairs_[p];
      cplx sum = 0.0;
      if (m == j) sum += h(n, i);
      if (m == i) sum += h(n, j);
      if (n == j) sum += h(m, i);
      if (n == i) sum += h(m, j);
      k(p, q) = 2.0 * symmetry_[p] * symmetry_[q] * sum;
    }
  }
  return k;
}

ScaledOperator TwoBosonAssembler::build(double g) const {
  ModelParams params{theta_, g, potential_};
  params.validate();
  ScaledOperator op;
  op.kind = OperatorKind::two_particle_symmetric;
  op.params = params;
  op.entries = one_body_;
  if (g != 0.0) op.entries += (g * std::polar(1.0, -theta_)) * contact_->cast<cplx>();
  op.index_map = pairs_.pairs();
  op.flags = params.flags();
  op.flags.insert(op.flags.end(), flags_.begin(), flags_.end());
  return op;
}

ScaledOperator TwoBosonAssembler::theta_derivative(double g) const {
  ModelParams params{theta_, g, potential_};
  params.validate();
  ScaledOperator op;
  op.kind = OperatorKind::two_particle_symmetric;
  op.params = params;
  op.entries = one_body_block(one_particle_theta_derivative(spec_, params).entries);
  if (g != 0.0) op.entries += (g * cplx(0.0, -1.0) * std::polar(1.0, -theta_)) * contact_->cast<cplx>();
  op.index_map = pairs_.pairs();
  return op;
}

ScaledOperator build_two_particle(const BasisSpec& spec, const ModelParams& params, std::size_t max_dim) {
  params.validate();
  return TwoBosonAssembler(spec, params.theta, params.potential, max_dim).build(params.g);
}

double symmetry_defect(const Eigen::MatrixXcd& m) {
  return (m - m.transpose()).cwiseAbs().maxCoeff();
}

OperatorFactory one_particle_factory(const BasisSpec& spec, const Potential& v) {
  return [spec, v](double theta) { return build_one_particle(spec, ModelParams{theta, 0.0, v}); };
}

OperatorFactory two_particle_factory(const BasisSpec& spec, double g, const Potential& v, std::size_t max_dim) {
  auto contact = TwoBosonAssembler::make_contact_block(spec, max_dim);
  return [spec, g, v, contact, max_dim](double theta) {
    return TwoBosonAssembler(spec, theta, v, contact, max_dim).build(g);
  };
}

Eigen::MatrixXd position_squared_matrix(int n_orbitals) {
  Eigen::MatrixXd x2 = Eigen::MatrixXd::Zero(n_orbitals, n_orbitals);
  for (int i = 0; i < n_orbitals; ++i) {
    x2(i, i) = i + 0.5;
    if (i + 2 < n_orbitals) x2(i, i + 2) = x2(i + 2, i) = 0.5 * std::sqrt((i + 1.0) * (i + 2.0));
  }
  return x2;
}

}  // namespace csm
