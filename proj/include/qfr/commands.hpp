#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qfr/qlm.hpp"
#include "qfr/simulate.hpp"
#include "qfr/table_io.hpp"

namespace qfr {

inline constexpr const char* kSchemaVersion = "qfr-report/1";

struct CommandOutput {
  std::string summary;  // human-readable text for stdout
  std::vector<std::string> warnings;
  int exit_code = 0;
};

struct ProjectOptions {
  std::filesystem::path pre_counts;
  std::filesystem::path post_counts;
  std::filesystem::path out;
  bool validate_hu = false;  // require values in [-1023, -200]
};

std::vector<ParamRow> project_tables(const CountTable& pre, const CountTable& post, bool validate_hu,
                                     std::vector<std::string>& warnings);
CommandOutput cmd_project(const ProjectOptions& opts);

struct FitOptions {
  std::filesystem::path params;
  std::filesystem::path out;
  double alpha = 0.05;
};

std::string fit_report_json(const QlmFit& fit, const ConfidenceIntervals& ci, const TestReport& tests,
                            const std::string& source);
std::string fit_summary_text(const QlmFit& fit, const ConfidenceIntervals& ci, const TestReport& tests);
CommandOutput cmd_fit(const FitOptions& opts);

struct ResidualsOptions {
  std::filesystem::path params;
  std::filesystem::path out;
  double flag_threshold = 0.01;
  // When set, every p-value is re-derived by 2-D cubature at this tolerance.
  std::optional<double> cross_check_tol;
};

struct ResidualRow {
  std::string id;
  ResidualPair pair;
  double p_value = 1.0;
  bool outlier = false;
};

std::vector<ResidualRow> residual_table(const QlmFit& fit, const std::vector<std::string>& ids, double flag_threshold,
                                        std::vector<std::string>& warnings);
CommandOutput cmd_residuals(const ResidualsOptions& opts);

struct PredictOptions {
  std::filesystem::path params;
  std::filesystem::path out;
  double mu = 0.0;
  double sigma = 0.0;
  std::vector<double> alphas = {0.05};
  std::optional<std::filesystem::path> grid_out;
  std::vector<std::pair<double, double>> probes;
  double tol = 1e-4;
};

CommandOutput cmd_predict(const PredictOptions& opts);

struct SimulateConfig {
  TrueModel truth;
  std::size_t reps = 10000;
  std::uint64_t seed = 1;
  double alpha = 0.05;
};

SimulateConfig parse_simulate_config(const std::string& text, const std::filesystem::path& base_dir);

struct SimulateOptions {
  std::filesystem::path config;
  std::filesystem::path out;
  std::optional<std::uint64_t> seed;
};

std::string simulate_report_json(const ValidationReport& report);
CommandOutput cmd_simulate(const SimulateOptions& opts);

}  // namespace qfr
