#include "csm/run.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "csm/errors.hpp"
#include "csm/operator_io.hpp"
#include "csm/parallel.hpp"
#include "csm/tonks_girardeau.hpp"

namespace csm {

namespace {

using cplx = std::complex<double>;
using nlohmann::ordered_json;

std::string fmt(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  std::ostringstream s;
  s << std::setprecision(6) << v;
  return s.str();
}

ordered_json complex_json(cplx z) { return ordered_json::array({z.real(), z.imag()}); }

ordered_json complex_list(const std::vector<cplx>& values) {
  ordered_json out = ordered_json::array();
  for (const cplx& z : values) out.push_back(complex_json(z));
  return out;
}

std::vector<cplx> head(const EntanglementSpectrum& s, int count) {
  std::vector<cplx> out(s.lambda.begin(), s.lambda.begin() + std::min<std::ptrdiff_t>(count, s.lambda.size()));
  out.resize(static_cast<std::size_t>(count), cplx{});
  return out;
}

void append_unique(std::vector<std::string>& flags, const std::vector<std::string>& more) {
  for (const auto& f : more) {
    if (std::find(flags.begin(), flags.end(), f) == flags.end()) flags.push_back(f);
  }
}

void fill_correlations(SweepRecord& record, const Eigen::VectorXcd& r, const BasisSpec& spec, int lambda_head) {
  const EntanglementSpectrum spectrum = takagi_symmetric(coefficient_matrix(r, spec));
  record.entropy = complex_entropies(spectrum);
  record.lambda_head = head(spectrum, lambda_head);
  append_unique(record.flags, spectrum.flags);
  if (record.entropy.branch_ambiguous) append_unique(record.flags, {"log-branch-ambiguous"});
}

SweepRecord record_from_state(const ResonanceState& state, double g, const BasisSpec& spec, int lambda_head) {
  SweepRecord record;
  record.g = g;
  record.theta_opt = state.theta;
  record.value = state.eigenpair.value;
  record.energy = state.energy;
  record.width = state.width;
  record.stability = state.stability;
  record.flags = state.flags;
  fill_correlations(record, state.eigenpair.right, spec, lambda_head);
  return record;
}

SweepRecord record_from_tg(const TgReference& ref, double theta, int lambda_head) {
  SweepRecord record;
  record.theta_opt = theta;
  record.value = ref.value;
  record.energy = ref.energy;
  record.width = ref.width;
  record.entropy = ref.entropy;
  record.lambda_head = head(ref.spectrum, lambda_head);
  record.flags = ref.flags;
  return record;
}

ordered_json record_json(const SweepRecord& r) {
  ordered_json j;
  j["g"] = r.g ? ordered_json(*r.g) : ordered_json(nullptr);
  j["theta_opt"] = r.theta_opt;
  j["W"] = complex_json(r.value);
  j["E_rez"] = r.energy;
  j["Gamma"] = r.width;
  j["stability"] = r.stability;
  j["S"] = complex_json(r.entropy.vn);
  j["S_lin"] = complex_json(r.entropy.lin);
  j["lambda_head"] = complex_list(r.lambda_head);
  j["flags"] = r.flags;
  return j;
}

ordered_json resonance_json(const ResonanceState& r) {
  ordered_json j;
  j["theta_opt"] = r.theta;
  j["W"] = complex_json(r.eigenpair.value);
  j["E_rez"] = r.energy;
  j["Gamma"] = r.width;
  j["stability"] = r.stability;
  j["flags"] = r.flags;
  return j;
}

std::string sweep_csv_header(int lambda_head) {
  std::string h = "g,theta_opt,E_rez,Gamma,S_re,S_im,Slin_re,Slin_im";
  for (int k = 0; k < lambda_head; ++k) {
    h += ",lambda" + std::to_string(k) + "_re,lambda" + std::to_string(k) + "_im";
  }
  return h;
}

std::string sweep_csv_row(const SweepRecord& r) {
  std::string row = r.g ? fmt(*r.g) : fmt(std::numeric_limits<double>::infinity());
  for (double v : {r.theta_opt, r.energy, r.width, r.entropy.vn.real(), r.entropy.vn.imag(), r.entropy.lin.real(),
                   r.entropy.lin.imag()}) {
    row += "," + fmt(v);
  }
  for (const cplx& l : r.lambda_head) row += "," + fmt(l.real()) + "," + fmt(l.imag());
  return row;
}

ordered_json config_json(const RunConfig& c) {
  ordered_json j;
  j["basis"] = c.basis.n_orbitals;
  j["quad"] = c.basis.quad_nodes;
  j["potential"] = c.potential;
  switch (c.command) {
    case Command::one_particle:
      j["theta"] = c.theta;
      break;
    case Command::theta_scan:
      j["particles"] = c.particles;
      j["theta_window"] = {c.theta_min, c.theta_max, c.theta_step};
      if (c.particles == 2) j["g"] = c.g;
      break;
    case Command::two_particle:
    case Command::sweep:
      if (c.restabilize) {
        j["theta_window"] = {c.theta_min, c.theta_max, c.theta_step};
      } else {
        j["theta"] = c.theta;
      }
      j["g_values"] = c.command == Command::sweep ? c.g_grid() : std::vector<double>{c.g};
      j["lambda_head"] = c.lambda_head;
      break;
    case Command::tg:
      j["theta_window"] = {c.theta_min, c.theta_max, c.theta_step};
      j["theta"] = c.theta;
      j["lambda_head"] = c.lambda_head;
      break;
  }
  if (c.target) j["target"] = complex_json(*c.target);
  return j;
}

std::string comment_header(const RunConfig& c) {
  std::ostringstream s;
  s << "# csm " << to_string(c.command) << " basis=" << c.basis.n_orbitals << " quad=" << c.basis.quad_nodes
    << " potential=" << c.potential;
  return s.str();
}

SelectionOptions selection_options(const RunConfig& c) {
  SelectionOptions o;
  if (c.target) o.selection = Selection::nearest_to(*c.target);
  o.lambda_head = c.lambda_head;
  return o;
}

struct Artifact {
  std::string text;
  std::vector<std::string> flags;
};

Artifact one_particle_command(const RunConfig& c, const Potential& v) {
  const ModelParams params{c.theta, 0.0, v};
  const ScaledOperator op = build_one_particle(c.basis, params);
  const EigenDecomposition eig = eigendecompose(op);
  const Eigen::MatrixXcd derivative = one_particle_theta_derivative(c.basis, params).entries;

  Artifact a;
  a.flags = op.flags;
  append_unique(a.flags, params.flags());
  std::vector<double> rates(eig.values.size());
  std::vector<bool> stabilized(eig.values.size());
  std::vector<ResonanceState> resonances;
  for (Eigen::Index k = 0; k < eig.size(); ++k) {
    const auto i = static_cast<std::size_t>(k);
    const EigenPair pair = eig[k];
    rates[i] = theta_rate(pair, derivative);
    stabilized[i] = eig.values[i].imag() < 0.0 && rates[i] < StationarityOptions{}.relative_threshold * std::abs(pair.value);
    if (stabilized[i]) {
      ResonanceState s;
      s.eigenpair = pair;
      s.theta = c.theta;
      s.energy = pair.value.real();
      s.width = -2.0 * pair.value.imag();
      s.stability = rates[i];
      if (!pair.reliable) s.flags.emplace_back("near-exceptional-point");
      resonances.push_back(s);
    }
  }
  if (resonances.empty()) throw NoResonanceFound("no stabilized eigenvalue at theta = " + fmt(c.theta));
  if (c.target) {
    std::stable_sort(resonances.begin(), resonances.end(), [&](const auto& x, const auto& y) {
      return std::abs(x.eigenpair.value - *c.target) < std::abs(y.eigenpair.value - *c.target);
    });
  }
  for (const auto& r : resonances) append_unique(a.flags, r.flags);

  std::ostringstream s;
  if (c.format == OutputFormat::json) {
    ordered_json j;
    j["command"] = to_string(c.command);
    j["config"] = config_json(c);
    ordered_json values = ordered_json::array();
    for (std::size_t i = 0; i < eig.values.size(); ++i) {
      values.push_back({{"W", complex_json(eig.values[i])}, {"rate", rates[i]}, {"stabilized", bool(stabilized[i])}});
    }
    j["eigenvalues"] = values;
    j["resonances"] = ordered_json::array();
    for (const auto& r : resonances) j["resonances"].push_back(resonance_json(r));
    j["flags"] = a.flags;
    s << j.dump(2) << "\n";
  } else {
    s << comment_header(c) << " theta=" << fmt(c.theta) << "\n";
    for (std::size_t k = 0; k < resonances.size(); ++k) {
      s << "# resonance " << k << ": E_rez=" << fmt(resonances[k].energy) << " Gamma=" << fmt(resonances[k].width)
        << "\n";
    }
    s << "index,W_re,W_im,rate,stabilized\n";
    for (std::size_t i = 0; i < eig.values.size(); ++i) {
      s << i << "," << fmt(eig.values[i].real()) << "," << fmt(eig.values[i].imag()) << "," << fmt(rates[i]) << ","
        << (stabilized[i] ? 1 : 0) << "\n";
    }
    for (const auto& f : a.flags) s << "# flag: " << f << "\n";
  }
  a.text = s.str();
  return a;
}

Artifact theta_scan_command(const RunConfig& c, const Potential& v) {
  const std::vector<double> thetas = theta_grid(c.theta_min, c.theta_max, c.theta_step);
  const OperatorFactory factory = c.particles == 1 ? one_particle_factory(c.basis, v)
                                                   : two_particle_factory(c.basis, c.g, v, c.max_dim);
  const ThetaScan scan = theta_scan(factory, thetas, c.jobs);

  Artifact a;
  std::vector<ResonanceState> resonances;
  if (c.target) {
    resonances.push_back(find_resonance(scan, Selection::nearest_to(*c.target)));
  } else {
    resonances = find_resonances(scan, 2);
  }
  for (const auto& r : resonances) append_unique(a.flags, r.flags);
  for (const auto& t : scan.trajectories) {
    if (t.flagged) {
      append_unique(a.flags, {"trajectory-ambiguous"});
      break;
    }
  }

  std::ostringstream s;
  if (c.format == OutputFormat::json) {
    ordered_json j;
    j["command"] = to_string(c.command);
    j["config"] = config_json(c);
    j["resonances"] = ordered_json::array();
    for (const auto& r : resonances) j["resonances"].push_back(resonance_json(r));
    ordered_json trajectories = ordered_json::array();
    for (const auto& t : scan.trajectories) {
      ordered_json points = ordered_json::array();
      for (const auto& p : t.points) {
        points.push_back(
            {{"theta", p.theta}, {"W", complex_json(p.value)}, {"rate", p.rate}, {"ambiguous", p.ambiguous}});
      }
      trajectories.push_back({{"flagged", t.flagged}, {"points", points}});
    }
    j["trajectories"] = trajectories;
    j["flags"] = a.flags;
    s << j.dump(2) << "\n";
  } else {
    s << comment_header(c) << " particles=" << c.particles << "\n";
    for (std::size_t k = 0; k < resonances.size(); ++k) {
      s << "# resonance " << k << ": theta_opt=" << fmt(resonances[k].theta) << " E_rez=" << fmt(resonances[k].energy)
        << " Gamma=" << fmt(resonances[k].width) << "\n";
    }
    s << "trajectory,theta,W_re,W_im,rate,ambiguous\n";
    for (std::size_t t = 0; t < scan.trajectories.size(); ++t) {
      for (const auto& p : scan.trajectories[t].points) {
        s << t << "," << fmt(p.theta) << "," << fmt(p.value.real()) << "," << fmt(p.value.imag()) << ","
          << fmt(p.rate) << "," << (p.ambiguous ? 1 : 0) << "\n";
      }
    }
    for (const auto& f : a.flags) s << "# flag: " << f << "\n";
  }
  a.text = s.str();
  return a;
}

Artifact records_artifact(const RunConfig& c, const std::vector<SweepRecord>& records) {
  Artifact a;
  for (const auto& r : records) append_unique(a.flags, r.flags);
  std::ostringstream s;
  if (c.format == OutputFormat::json) {
    ordered_json j;
    j["command"] = to_string(c.command);
    j["config"] = config_json(c);
    j["records"] = ordered_json::array();
    for (const auto& r : records) j["records"].push_back(record_json(r));
    j["flags"] = a.flags;
    s << j.dump(2) << "\n";
  } else {
    s << comment_header(c) << "\n";
    s << sweep_csv_header(c.lambda_head) << "\n";
    for (const auto& r : records) s << sweep_csv_row(r) << "\n";
    for (const auto& r : records) {
      for (const auto& f : r.flags) s << "# flag g=" << (r.g ? fmt(*r.g) : "inf") << ": " << f << "\n";
    }
  }
  a.text = s.str();
  return a;
}

Artifact two_particle_command(const RunConfig& c, const Potential& v, const std::vector<double>& gs) {
  const auto contact = cached_contact_block(c.basis, c.max_dim);
  const SelectionOptions options = selection_options(c);
  std::vector<SweepRecord> records(gs.size());
  if (c.restabilize) {
    const std::vector<double> thetas = theta_grid(c.theta_min, c.theta_max, c.theta_step);
    // The scan already runs its angles in parallel.
    for (std::size_t k = 0; k < gs.size(); ++k) {
      records[k] = restabilized_record(c.basis, gs[k], v, thetas, contact, options, c.max_dim, c.jobs);
    }
  } else {
    const TwoBosonAssembler assembler(c.basis, c.theta, v, contact, c.max_dim);
    parallel_for(gs.size(), c.jobs, [&](std::size_t k) { records[k] = two_particle_record(assembler, gs[k], options); });
  }
  for (auto& r : records) append_unique(r.flags, ModelParams{c.theta, *r.g, v}.flags());
  return records_artifact(c, records);
}

Artifact tg_command(const RunConfig& c, const Potential& v) {
  TgConfig tg;
  tg.theta_min = c.theta_min;
  tg.theta_max = c.theta_max;
  tg.theta_step = c.theta_step;
  tg.orbital_theta = c.theta;
  tg.potential = v;
  tg.jobs = c.jobs;
  const TgReference ref = tg_reference(c.basis, tg);
  return records_artifact(c, {record_from_tg(ref, c.theta, c.lambda_head)});
}

void write_artifact(const RunConfig& c, const std::string& text, std::ostream& out) {
  if (c.output_path.empty()) {
    out << text;
    out.flush();
    return;
  }
  const std::filesystem::path path(c.output_path);
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw ConfigError("cannot open output file " + c.output_path);
    f << text;
    if (!f) throw ConfigError("failed writing " + c.output_path);
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace

std::string to_string(Command c) {
  switch (c) {
    case Command::one_particle: return "one-particle";
    case Command::theta_scan: return "theta-scan";
    case Command::two_particle: return "two-particle";
    case Command::sweep: return "sweep";
    case Command::tg: return "tg";
  }
  return "unknown";
}

Command command_from_string(const std::string& name) {
  for (Command c : {Command::one_particle, Command::theta_scan, Command::two_particle, Command::sweep, Command::tg}) {
    if (to_string(c) == name) return c;
  }
  throw ConfigError("unknown command '" + name + "'");
}

void RunConfig::validate() const {
  basis.validate();
  potential_by_name(potential);
  auto check_angle = [](double t) {
    if (!(t >= 0.0 && t < std::numbers::pi / 4)) throw DomainError("theta " + std::to_string(t) + " outside [0, pi/4)");
  };
  check_angle(theta);
  const bool uses_window = command == Command::theta_scan || command == Command::tg || restabilize;
  if (uses_window) {
    check_angle(theta_min);
    check_angle(theta_max);
    theta_grid(theta_min, theta_max, theta_step);
  }
  if (particles != 1 && particles != 2) throw ConfigError("particles must be 1 or 2");
  if (lambda_head < 0) throw ConfigError("lambda head size must be non-negative");
  if (jobs < 1) throw ConfigError("jobs must be at least 1");
  if (!std::isfinite(g)) throw ConfigError("g must be finite");
  if (command == Command::sweep) g_grid();
  if (command == Command::two_particle || command == Command::sweep || (command == Command::theta_scan && particles == 2)) {
    const auto n = static_cast<std::size_t>(basis.n_orbitals);
    if (n * (n + 1) / 2 > max_dim) {
      throw ConfigError("two-particle dimension " + std::to_string(n * (n + 1) / 2) + " exceeds the guard " +
                        std::to_string(max_dim));
    }
  }
}

std::vector<double> RunConfig::g_grid() const {
  if (!g_values.empty()) {
    for (double v : g_values) {
      if (!std::isfinite(v)) throw ConfigError("g values must be finite");
    }
    return g_values;
  }
  if (g_steps < 1) throw ConfigError("g-steps must be at least 1");
  if (!(std::isfinite(g_min) && std::isfinite(g_max)) || g_max < g_min) throw ConfigError("g range is empty");
  if (g_steps == 1) {
    if (g_max != g_min) throw ConfigError("a single g step needs g-min == g-max");
    return {g_min};
  }
  std::vector<double> out;
  for (int k = 0; k < g_steps; ++k) {
    out.push_back(k == g_steps - 1 ? g_max : g_min + (g_max - g_min) * k / (g_steps - 1));
  }
  return out;
}

std::function<bool(const EigenPair&)> localization_filter(const BasisSpec& spec, double max_spread_fraction) {
  if (!(max_spread_fraction > 0.0)) return {};
  const Eigen::MatrixXcd x2 = position_squared_matrix(spec.n_orbitals).cast<cplx>();
  const double limit = max_spread_fraction * spec.n_orbitals;
  return [=](const EigenPair& pair) {
    const CoefficientMatrix e = coefficient_matrix(pair.right, spec);
    return std::abs(mean_value(reduced_density(e), x2)) < limit;
  };
}

namespace {

StationarityOptions with_localization(const BasisSpec& spec, const SelectionOptions& options) {
  StationarityOptions out = options.stationarity;
  if (!out.accept) out.accept = localization_filter(spec, options.max_spread_fraction);
  return out;
}

}  // namespace

SweepRecord two_particle_record(const TwoBosonAssembler& assembler, double g, const SelectionOptions& options) {
  const ScaledOperator op = assembler.build(g);
  const EigenDecomposition eig = eigendecompose(op);
  const ScaledOperator derivative = assembler.theta_derivative(g);
  const ResonanceState state = locate_resonance(eig, derivative.entries, assembler.theta(), options.selection,
                                                with_localization(assembler.spec(), options));
  SweepRecord record = record_from_state(state, g, assembler.spec(), options.lambda_head);
  append_unique(record.flags, op.flags);
  return record;
}

SweepRecord restabilized_record(const BasisSpec& spec, double g, const Potential& v, std::span<const double> thetas,
                                std::shared_ptr<const Eigen::MatrixXd> contact_block, const SelectionOptions& options,
                                std::size_t max_dim, int jobs) {
  OperatorFactory factory = [=](double theta) {
    return TwoBosonAssembler(spec, theta, v, contact_block, max_dim).build(g);
  };
  const ThetaScan scan = theta_scan(factory, thetas, jobs);
  const ResonanceState state = find_resonance(scan, options.selection, with_localization(spec, options));
  return record_from_state(state, g, spec, options.lambda_head);
}

std::shared_ptr<const Eigen::MatrixXd> cached_contact_block(const BasisSpec& spec, std::size_t max_dim) {
  const char* dir = std::getenv("CSM_CACHE_DIR");
  if (dir == nullptr || *dir == '\0') return TwoBosonAssembler::make_contact_block(spec, max_dim);
  const std::filesystem::path path =
      std::filesystem::path(dir) / ("contact_n" + std::to_string(spec.n_orbitals) + ".csmo");
  const auto n = static_cast<Eigen::Index>(spec.n_orbitals) * (spec.n_orbitals + 1) / 2;
  if (std::filesystem::exists(path)) {
    const Eigen::MatrixXcd stored = read_matrix_dump(path);
    if (stored.rows() == n) return std::make_shared<const Eigen::MatrixXd>(stored.real());
  }
  auto block = TwoBosonAssembler::make_contact_block(spec, max_dim);
  std::filesystem::create_directories(path.parent_path());
  write_matrix_dump(path, block->cast<cplx>());
  return block;
}

int run(const RunConfig& config, std::ostream& out, std::ostream& err) {
  try {
    config.validate();
    const Potential v = potential_by_name(config.potential);
    Artifact artifact;
    switch (config.command) {
      case Command::one_particle:
        artifact = one_particle_command(config, v);
        break;
      case Command::theta_scan:
        artifact = theta_scan_command(config, v);
        break;
      case Command::two_particle:
        artifact = two_particle_command(config, v, {config.g});
        break;
      case Command::sweep:
        artifact = two_particle_command(config, v, config.g_grid());
        break;
      case Command::tg:
        artifact = tg_command(config, v);
        break;
    }
    write_artifact(config, artifact.text, out);
    if (config.strict && !artifact.flags.empty()) {
      err << "strict mode: diagnostics raised:";
      for (const auto& f : artifact.flags) err << " " << f;
      err << "\n";
      return 4;
    }
    return 0;
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const NoResonanceFound& e) {
    err << e.what() << "\n";
    return 3;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << "\n";
    return 4;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "i/o error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace csm
