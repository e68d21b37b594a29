// Command line driver.  Subcommands share one key=value config file; a few
// flags override config fields after loading.  Exit codes: 0 success,
// 1 malformed config, 2 domain error, 3 verification failure.

#include <CLI11.hpp>

#include <iostream>
#include <string>
#include <vector>

#include "ringbif/commands.hpp"
#include "ringbif/config.hpp"

int main(int argc, char** argv) {
  CLI::App app{"relative equilibria, symmetry-adapted linearization blocks, "
               "and symmetric periodic orbit branches for the planar ring "
               "of bodies and the satellite over it"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_override;
  long event_override = -1;
  long steps_override = -1;

  struct SubDef {
    const char* name;
    const char* help;
  };
  const std::vector<SubDef> defs = {
      {"ring", "print the ring configuration and its equilibrium residual"},
      {"equilibria", "find and classify satellite equilibria over the ring"},
      {"scan", "scan frequency for Morse index jumps in every block"},
      {"continue", "continue a periodic orbit branch from one scanned event"},
      {"verify", "run the independent residual/eigenvalue/integration checks"},
  };
  for (const auto& def : defs) {
    CLI::App* sub = app.add_subcommand(def.name, def.help);
    sub->add_option("--config", config_path, "configuration file (key = value lines)")
        ->required();
    sub->add_option("--out", out_override, "output directory (overrides config)");
    sub->add_option("--event", event_override,
                    "event row to continue (overrides config)");
    sub->add_option("--steps", steps_override,
                    "continuation step budget (overrides config)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    ringbif::RunConfig cfg = ringbif::load_config(config_path);
    if (!out_override.empty()) cfg.out = out_override;
    if (event_override >= 0) cfg.event = static_cast<int>(event_override);
    if (steps_override >= 0) cfg.steps = static_cast<int>(steps_override);
    ringbif::validate(cfg, config_path);
    return ringbif::run_command(app.get_subcommands().front()->get_name(), cfg,
                                std::cout);
  } catch (const ringbif::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
