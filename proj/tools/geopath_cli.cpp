// Command-line entry point: one subcommand per experiment plus `check`.

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <utility>

#include "geopath/harness.hpp"

int main(int argc, char** argv) {
  CLI::App app{"geopath: stochastic-geometry path-integral experiments"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;

  const std::pair<const char*, const char*> commands[] = {
      {"decompose", "Split a metric into flat and fluctuating parts"},
      {"ensemble", "Sample background fields"},
      {"deviation", "Integrate geodesic deviation per field"},
      {"kernel", "Build the ensemble propagator"},
      {"stats", "Interval and velocity statistics"},
      {"evolve", "Evolve a wave packet and check the fluid equations"},
      {"check", "Run the built-in criteria"},
  };
  for (const auto& [name, description] : commands) {
    auto* sub = app.add_subcommand(name, description);
    sub->add_option("--config", config_path, "JSON experiment config (defaults when omitted)");
    sub->add_option("--seed", seed, "Seed override (u64)");
    sub->add_option("--out", out_dir, "Output directory override");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : geopath::exit_code::config;
  }

  const auto experiment = geopath::experiment_from_name(app.get_subcommands().front()->get_name());

  std::optional<nlohmann::json> document;
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) {
      std::cerr << "error: cannot open config " << config_path << "\n";
      return geopath::exit_code::config;
    }
    try {
      document = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
      std::cerr << "error: config is not valid JSON: " << e.what() << "\n";
      return geopath::exit_code::config;
    }
  }

  const auto outcome = geopath::run(*experiment, document ? &*document : nullptr, {seed, out_dir});
  if (outcome.exit_code == geopath::exit_code::ok) {
    std::cout << outcome.record["outputs"].dump(2) << "\n";
  } else if (outcome.record.contains("error")) {
    std::cerr << outcome.record["error"].dump(2) << "\n";
  } else {
    std::cout << outcome.record["outputs"].dump(2) << "\n";
    std::cerr << "check failed: one or more criteria did not pass\n";
  }
  return outcome.exit_code;
}
