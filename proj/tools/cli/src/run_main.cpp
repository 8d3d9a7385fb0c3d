#include <exception>
#include <string>

#include <CLI11.hpp>

#include "pctnpi/cli/commands.hpp"
#include "pctnpi/errors.hpp"

namespace pctnpi::cli {

int run_main(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Path integral tensor network simulations of open two-level and multistate systems"};
  app.require_subcommand(1);
  app.fallthrough();

  Options opt;
  std::string output_dir = ".";
  double tol = 0.0;
  app.add_option("--output-dir", output_dir, "Directory for output files")->capture_default_str();
  app.add_option("--threads", opt.threads, "Worker threads per contraction")->check(CLI::Range(1u, 1024u));
  auto* tol_opt = app.add_option("--quadrature-tol", tol, "Override the eta quadrature tolerance")
                      ->check(CLI::PositiveNumber);

  std::string config;
  auto* run = app.add_subcommand("run", "Propagate every configured run and write trajectory CSVs");
  auto* verify = app.add_subcommand("verify", "Compare the engine with the brute-force oracle");
  auto* bench = app.add_subcommand("bench", "Record storage and cost per memory length");
  for (auto* sub : {run, verify, bench}) sub->add_option("config", config, "YAML configuration")->required();
  verify->add_flag("--corrupt-eta", opt.corrupt_eta, "Perturb eta on the engine side")->group("");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }
  opt.output_dir = output_dir;
  if (*tol_opt) opt.quadrature_tol = tol;

  try {
    const RunConfig cfg = load_config(config);
    if (*run) return cmd_run(cfg, opt, out, err);
    if (*verify) return cmd_verify(cfg, opt, out, err);
    return cmd_bench(cfg, opt, out, err);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
}

}  // namespace pctnpi::cli
