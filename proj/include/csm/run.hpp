#pragma once

#include <complex>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "csm/hermite_basis.hpp"
#include "csm/operators.hpp"
#include "csm/schmidt.hpp"
#include "csm/spectral.hpp"

namespace csm {

enum class Command { one_particle, theta_scan, two_particle, sweep, tg };
enum class OutputFormat { csv, json };

std::string to_string(Command c);
Command command_from_string(const std::string& name);  // throws ConfigError

struct RunConfig {
  Command command = Command::one_particle;
  BasisSpec basis{90, 400};
  std::string potential = "open-well";

  double theta = 0.2;
  double theta_min = 0.1;
  double theta_max = 0.3;
  double theta_step = 0.01;
  // Re-locate theta_opt for each g with a scan over the theta window.
  bool restabilize = false;
  // theta-scan of the two-particle operator instead of the one-particle one.
  int particles = 1;

  double g = 0.0;
  double g_min = 0.0;
  double g_max = 45.0;
  int g_steps = 10;
  std::vector<double> g_values;  // overrides the linspace when non-empty

  std::optional<std::complex<double>> target;  // select the resonance nearest this value
  int lambda_head = 4;

  OutputFormat format = OutputFormat::csv;
  std::string output_path;  // empty: stdout
  std::size_t max_dim = kDefaultMaxDim;
  int jobs = 1;
  bool strict = false;

  // Throws ConfigError (DomainError for angles) on invalid settings.
  void validate() const;
  /// Sweep grid: g_values, or g_steps points from g_min to g_max inclusive.
  std::vector<double> g_grid() const;
};

// One row of a sweep: the selected two-boson resonance and its correlations.
struct SweepRecord {
  std::optional<double> g;  // empty for the Tonks-Girardeau limit
  double theta_opt = 0.0;
  std::complex<double> value;
  double energy = 0.0;
  double width = 0.0;
  double stability = 0.0;
  ComplexEntropy entropy;
  std::vector<std::complex<double>> lambda_head;
  std::vector<std::string> flags;
};

struct SelectionOptions {
  Selection selection;
  StationarityOptions stationarity;
  int lambda_head = 4;
  // Stabilized candidates must also be localized: |<x^2>| of the reduced
  // density below this fraction of n_orbitals (the basis reaches x^2 ~ 2N).
  // States with one particle in the rotated continuum spread over the
  // whole basis. Zero or negative disables the test.
  double max_spread_fraction = 0.1;
};

/// Accept-predicate for two-boson eigenvectors implementing the localization test.
std::function<bool(const EigenPair&)> localization_filter(const BasisSpec& spec, double max_spread_fraction);

/// Resonance of an already assembled two-boson problem at its angle.
SweepRecord two_particle_record(const TwoBosonAssembler& assembler, double g, const SelectionOptions& options = {});
/// Same, with theta_opt re-located by a scan over `thetas`.
SweepRecord restabilized_record(const BasisSpec& spec, double g, const Potential& v, std::span<const double> thetas,
                                std::shared_ptr<const Eigen::MatrixXd> contact_block, const SelectionOptions& options,
                                std::size_t max_dim, int jobs);

/// Contact block from CSM_CACHE_DIR when present, built and stored otherwise.
std::shared_ptr<const Eigen::MatrixXd> cached_contact_block(const BasisSpec& spec, std::size_t max_dim);

// Executes the command and writes its artifact to config.output_path (or
// `out`). Diagnostics go to `err`. Returns the process exit code:
// 0 success, 2 configuration error, 3 no resonance, 4 numerical failure or
// flags under --strict.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

}  // namespace csm
