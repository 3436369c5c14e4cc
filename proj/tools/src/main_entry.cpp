#include "amoo_cli/cli.hpp"

#include <CLI11.hpp>

#include <map>
#include <ostream>

namespace amoo::cli {

int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Aligned multi-objective optimization experiments", "amoo"};
  app.require_subcommand(1);

  RunOptions run_opt;
  auto* run = app.add_subcommand("run", "Run an experiment from a JSON config");
  run->add_option("config", run_opt.config_path, "Config file")->required();
  run->add_option("-o,--out-dir", run_opt.out_dir, "Output directory (default: $AMOO_OUT_DIR)");

  AnalyzeOptions an_opt;
  std::string theorem;
  auto* analyze = app.add_subcommand("analyze", "Fit rates and check theorem bounds on a trace");
  analyze->add_option("trace", an_opt.trace_path, "trace.csv")->required();
  analyze->add_flag("--fit-rate", an_opt.fit_rate, "Fit the contraction factor of the residual");
  analyze->add_option("--tail", an_opt.tail, "Fraction of records used by the fit")
      ->check(CLI::Range(0.0, 1.0));
  analyze->add_option("--theorem", theorem, "Check the rate bound of camoo or pamoo")
      ->check(CLI::IsMember({"camoo", "pamoo"}));
  analyze->add_option("--beta", an_opt.beta, "Smoothness constant");
  analyze->add_option("--mu", an_opt.mu, "Curvature constant (mu_G or mu_L)");
  analyze->add_option("--mf", an_opt.M_f, "Self-concordance constant");
  analyze->add_option("--r0", an_opt.r0, "Initial distance (default: first residual)");

  std::string plot_trace, plot_out;
  auto* plot = app.add_subcommand("plot", "Render a trace as SVG");
  plot->add_option("trace", plot_trace, "trace.csv")->required();
  plot->add_option("out", plot_out, "Output SVG")->required();

  auto* list = app.add_subcommand("list-problems", "List problem kinds and presets");

  VerifyOptions ver_opt;
  auto* verify = app.add_subcommand("verify", "Run the lemma and proposition suites");
  verify->add_option("--seed", ver_opt.seed, "Seed of the randomized suites");
  verify->add_option("--trials", ver_opt.trials, "Random trials of the degradation suite")
      ->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfigError;
  }

  if (*run) return cmd_run(run_opt, out, err);
  if (*analyze) {
    if (!theorem.empty()) {
      an_opt.theorem = theorem == "camoo" ? TheoremKind::kCamoo : TheoremKind::kPamoo;
    }
    return cmd_analyze(an_opt, out, err);
  }
  if (*plot) return cmd_plot(plot_trace, plot_out, out, err);
  if (*list) return cmd_list_problems(out);
  if (*verify) return cmd_verify(ver_opt, out, err);
  return kConfigError;
}

}  // namespace amoo::cli
