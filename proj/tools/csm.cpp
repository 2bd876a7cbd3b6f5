#include <complex>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "csm/parallel.hpp"
#include "csm/run.hpp"

namespace {

void add_basis(CLI::App* app, csm::RunConfig& c) {
  app->add_option("--basis", c.basis.n_orbitals, "Number of HO orbitals")->capture_default_str();
  app->add_option("--quad", c.basis.quad_nodes, "Gauss-Hermite nodes for one-body integrals")->capture_default_str();
  app->add_option("--potential", c.potential, "open-well or harmonic")->capture_default_str();
}

void add_window(CLI::App* app, csm::RunConfig& c) {
  app->add_option("--theta-min", c.theta_min, "Scan window start")->capture_default_str();
  app->add_option("--theta-max", c.theta_max, "Scan window end")->capture_default_str();
  app->add_option("--theta-step", c.theta_step, "Scan window step")->capture_default_str();
}

void add_output(CLI::App* app, csm::RunConfig& c) {
  app->add_option("--format", c.format, "csv or json")
      ->transform(CLI::CheckedTransformer(
          std::map<std::string, csm::OutputFormat>{{"csv", csm::OutputFormat::csv}, {"json", csm::OutputFormat::json}}))
      ->option_text("csv|json [csv]");
  app->add_option("-o,--output", c.output_path, "Output file (default: stdout)");
  app->add_option("--jobs", c.jobs, "Worker threads")->capture_default_str();
  app->add_option("--max-dim", c.max_dim, "Largest allowed two-particle dimension")->capture_default_str();
  app->add_flag("--strict", c.strict, "Exit 4 when any diagnostic flag is raised");
}

}  // namespace

int main(int argc, char** argv) {
  csm::RunConfig config;
  config.jobs = csm::default_jobs();
  std::vector<double> target;

  CLI::App app{"Complex-scaled resonances and correlations of two bosons in an open well"};
  app.require_subcommand(1);

  auto* one = app.add_subcommand("one-particle", "Diagonalize the one-particle operator at a fixed angle");
  auto* scan = app.add_subcommand("theta-scan", "Track eigenvalue trajectories over an angle window");
  auto* two = app.add_subcommand("two-particle", "Two-boson resonance and entropies at one coupling");
  auto* sweep = app.add_subcommand("sweep", "Two-boson resonance and entropies over a range of couplings");
  auto* tg = app.add_subcommand("tg", "Tonks-Girardeau limit built from the two lowest one-particle resonances");

  for (CLI::App* sub : {one, scan, two, sweep, tg}) {
    add_basis(sub, config);
    add_output(sub, config);
    sub->add_option("--target", target, "Select the resonance nearest RE IM")->expected(2);
  }
  for (CLI::App* sub : {one, two, sweep, tg}) {
    sub->add_option("--theta", config.theta, "Scaling angle")->capture_default_str();
  }
  for (CLI::App* sub : {scan, two, sweep, tg}) add_window(sub, config);
  for (CLI::App* sub : {two, sweep}) {
    sub->add_flag("--restabilize", config.restabilize, "Re-locate theta_opt for every g by a scan over the window");
  }
  for (CLI::App* sub : {two, sweep, tg}) {
    sub->add_option("--lambda-head", config.lambda_head, "Number of lambda values reported")->capture_default_str();
  }
  for (CLI::App* sub : {two, scan}) sub->add_option("--g", config.g, "Contact coupling")->capture_default_str();
  scan->add_option("--particles", config.particles, "1 or 2")->capture_default_str();
  sweep->add_option("--g-min", config.g_min, "Smallest coupling")->capture_default_str();
  sweep->add_option("--g-max", config.g_max, "Largest coupling")->capture_default_str();
  sweep->add_option("--g-steps", config.g_steps, "Points from g-min to g-max inclusive")->capture_default_str();
  sweep->add_option("--g-values", config.g_values, "Explicit comma-separated g list")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  const CLI::App* chosen = app.get_subcommands().front();
  config.command = csm::command_from_string(chosen->get_name());
  if (target.size() == 2) config.target = std::complex<double>(target[0], target[1]);
  return csm::run(config, std::cout, std::cerr);
}
