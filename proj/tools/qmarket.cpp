#include <exception>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "qmarket/errors.hpp"
#include "qmarket/runner.hpp"

namespace {

void report(const char* kind, const std::exception& e) {
  std::cerr << "{\"error\":{\"type\":\"" << kind << "\",\"message\":\"" << e.what()
            << "\"}}\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"quantum-like two-trader market simulator"};
  app.require_subcommand(1);

  std::string config_path, sweep_path;
  std::string out_dir = "figures";
  qmarket::CriticalArgs crit;

  CLI::App* sim = app.add_subcommand("simulate", "run a configured model, write time series");
  sim->add_option("config", config_path, "JSON config file")->required();

  CLI::App* sw = app.add_subcommand("sweep", "evaluate an objective over a parameter grid");
  sw->add_option("config", config_path, "JSON config file")->required();
  sw->add_option("--sweep", sweep_path, "JSON sweep file")->required();

  CLI::App* oc =
      app.add_subcommand("oracle-check", "compare closed forms against brute-force evolution");
  oc->add_option("config", config_path, "JSON config file")->required();

  CLI::App* fig = app.add_subcommand("figures", "emit the built-in figure parameter sets");
  fig->add_option("--out", out_dir, "output directory (default figures)");

  CLI::App* cr = app.add_subcommand(
      "critical", "damping at which trader 1's long-time gain matches trader 2's");
  cr->add_option("--omega1", crit.omega1, "trader 1 information frequency")->required();
  cr->add_option("--omega2", crit.omega2, "trader 2 information frequency")->required();
  cr->add_option("--gamma2", crit.gamma2, "trader 2 damping coupling")->required();
  cr->add_option("--omega-s", crit.omega_s, "shared share-mode frequency");
  cr->add_option("--omega-c", crit.omega_c, "shared cash-mode frequency");
  cr->add_option("--omega-r", crit.Omega_r, "reservoir dispersion slope");
  cr->add_option("--lambda", crit.lambda_inf, "shared trader-information coupling");
  cr->add_option("--loi", crit.loi, "initial information occupation");
  cr->add_option("--lo", crit.lo, "search floor for gamma1");
  cr->add_option("--hi", crit.hi, "search ceiling for gamma1 (default gamma2)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (sim->parsed())
      qmarket::run_simulate(config_path);
    else if (sw->parsed())
      qmarket::run_sweep(config_path, sweep_path);
    else if (oc->parsed())
      qmarket::run_oracle_check(config_path);
    else if (fig->parsed())
      qmarket::run_figures(out_dir);
    else if (cr->parsed())
      qmarket::run_critical(crit);
    return 0;
  } catch (const qmarket::ConfigError& e) {
    report("config", e);
    return 2;
  } catch (const std::invalid_argument& e) {
    report("config", e);
    return 2;
  } catch (const qmarket::ToleranceError& e) {
    report("tolerance", e);
    return 4;
  } catch (const qmarket::NumericalError& e) {
    report("numerical", e);
    return 3;
  } catch (const std::exception& e) {
    report("internal", e);
    return 1;
  }
}
