#pragma once

#include "amoo/analysis.hpp"
#include "amoo/driver.hpp"

#include <json.hpp>

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

namespace amoo::cli {

enum ExitCode : int {
  kOk = 0,
  kCheckFailed = 1,
  kConfigError = 2,
  kNumericFailure = 3,
};

struct OutputOptions {
  std::optional<std::string> out_dir;
  bool plot = true;
  /// Fraction of the trace used by the rate fit in summary.json.
  double fit_tail = 0.5;
};

struct ExperimentConfig {
  RunConfig run;
  std::optional<std::string> preset;
  OutputOptions output;
};

/// Validates and converts a config document. Every section is optional;
/// unknown keys and wrong types throw ConfigError naming the key.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Fully resolved document; parse_config(config_to_json(c)) reproduces c.
nlohmann::json config_to_json(const ExperimentConfig& cfg);
nlohmann::json problem_to_json(const ProblemSpec& spec);

/// Preset applied on top of the parsed sections, against the built problem.
RunConfig resolve(const ExperimentConfig& cfg, const Problem& problem);

// Traces ---------------------------------------------------------------------

/// Malformed or unreadable trace file.
class TraceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string trace_header(std::size_t m);
void write_trace_csv(std::ostream& out, const RunTrace& trace, std::size_t m);
void write_trace_csv(const std::filesystem::path& path, const RunTrace& trace, std::size_t m);
RunTrace read_trace_csv(std::istream& in);
RunTrace read_trace_csv(const std::filesystem::path& path);

/// Log-scale residual/msq panel above a weight-evolution panel.
std::string render_svg(const RunTrace& trace, const std::string& title);

nlohmann::json record_to_json(const IterateRecord& rec);

// Commands -------------------------------------------------------------------

struct RunOptions {
  std::string config_path;
  std::optional<std::string> out_dir;
};

struct AnalyzeOptions {
  std::string trace_path;
  bool fit_rate = false;
  double tail = 0.5;
  std::optional<TheoremKind> theorem;
  double beta = 1.0;
  double mu = 1.0;
  double M_f = 0.0;
  std::optional<double> r0;
};

struct VerifyOptions {
  std::uint64_t seed = 0;
  int trials = 100;
};

/// out_dir precedence: explicit option, config output.out_dir, AMOO_OUT_DIR, "amoo_out".
std::filesystem::path resolve_out_dir(const std::optional<std::string>& flag,
                                      const OutputOptions& output);

int cmd_run(const RunOptions& opt, std::ostream& out, std::ostream& err);
int cmd_analyze(const AnalyzeOptions& opt, std::ostream& out, std::ostream& err);
int cmd_plot(const std::string& trace_path, const std::string& svg_path, std::ostream& out,
             std::ostream& err);
int cmd_list_problems(std::ostream& out);
int cmd_verify(const VerifyOptions& opt, std::ostream& out, std::ostream& err);

/// Parses argv and dispatches to the commands above.
int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace amoo::cli
