#include "acoubem/cli.hpp"
#include "acoubem/error.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>

namespace {

enum Exit { Ok = 0, ConfigFailure = 2, NotConverged = 3, Internal = 4 };

int exit_code(acoubem::ErrorCode code) {
  switch (code) {
    case acoubem::ErrorCode::ConfigError:
    case acoubem::ErrorCode::InvalidScene:
      return ConfigFailure;
    case acoubem::ErrorCode::Breakdown:
      return NotConverged;
    default:
      return Internal;
  }
}

void report_error(const acoubem::RunConfig* config, const std::string& kind, const std::string& message) {
  nlohmann::json j{{"error", kind}, {"message", message}};
  std::cerr << j.dump() << '\n';
  if (config && !config->report_path.empty()) {
    std::ofstream out(config->report_path);
    if (out) out << j.dump(2) << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Galerkin BEM solver for acoustic transmission through penetrable objects"};
  app.require_subcommand(1);
  std::string config_path;
  std::vector<std::string> overrides;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("config", config_path, "configuration file")->required();
    sub->add_option("--set", overrides, "override a configuration key (key=value)");
  };
  auto* verify = app.add_subcommand("verify-sphere", "solve a centred sphere and compare with the series solution");
  auto* sweep = app.add_subcommand("sweep", "iteration counts and timings over frequencies and runs");
  auto* solve = app.add_subcommand("solve", "solve any geometry and write the surface solution");
  for (auto* sub : {verify, sweep, solve}) add_common(sub);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? Ok : ConfigFailure;
  }

  acoubem::RunConfig config;
  bool loaded = false;
  try {
    config = acoubem::load_config(config_path, overrides);
    loaded = true;
    if (verify->parsed()) {
      const auto v = acoubem::run_verify_sphere(config);
      std::cout << "error " << v.error << " iterations " << v.solve.report.iterations
                << (v.solve.report.converged ? "" : " (not converged)") << '\n';
      return v.solve.report.converged ? Ok : NotConverged;
    }
    if (sweep->parsed()) {
      const auto rows = acoubem::run_sweep(config);
      if (config.sweep_path.empty()) acoubem::write_sweep_csv(std::cout, rows);
      return Ok;
    }
    const auto o = acoubem::run_solve(config);
    std::cout << "dofs " << o.dofs << " iterations " << o.report.iterations
              << (o.report.converged ? "" : " (not converged)") << '\n';
    return o.report.converged ? Ok : NotConverged;
  } catch (const acoubem::Error& e) {
    report_error(loaded ? &config : nullptr, std::string(acoubem::to_string(e.code())), e.what());
    return exit_code(e.code());
  } catch (const std::exception& e) {
    report_error(loaded ? &config : nullptr, "internal", e.what());
    return Internal;
  }
}
