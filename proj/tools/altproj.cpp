#include "altproj/cli/commands.hpp"
#include "altproj/error.hpp"

#include "CLI11.hpp"

#include <iostream>

int main(int argc, char** argv) {
  namespace cli = altproj::cli;
  CLI::App app{"Alternating-projection frame design and convergence diagnostics"};
  app.require_subcommand(1);

  cli::CommandOptions opt;
  std::string config;
  std::string trace;
  std::string out = ".";

  const auto add = [&](const std::string& name, const std::string& help) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config, "key = value config file");
    sub->add_option("--out", out, "output directory")->capture_default_str();
    sub->add_flag("--debug-iterates", opt.debug_iterates, "keep every iterate for full checks");
    return sub;
  };
  add("run-etf", "equiangular tight frames over a list of seeds");
  add("run-norms", "tight frame with prescribed column norms");
  add("convex-demo", "two built-in convex sets");
  add("analyze", "diagnostics for an existing trace CSV")
      ->add_option("--trace", trace, "trace CSV (overrides the config's 'trace')");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : cli::kExitConfig;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  if (!config.empty()) opt.config = config;
  if (!trace.empty()) opt.trace = trace;
  opt.out_dir = out;
  try {
    opt.threads = cli::threads_from_env();
  } catch (const altproj::Error& e) {
    std::cerr << "altproj: " << e.what() << "\n";
    return cli::kExitConfig;
  }
  return cli::run_command(command, opt, std::cout, std::cerr);
}
