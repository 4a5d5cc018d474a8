// Command-line front end: project | fit | residuals | predict | simulate.
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qfr/commands.hpp"
#include "qfr/errors.hpp"

namespace {

constexpr int kExitDomain = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitIo = 4;

std::pair<double, double> parse_probe(const std::string& text) {
  const auto comma = text.find(',');
  if (comma == std::string::npos) throw qfr::DomainError("probe must be written as s,t; got '" + text + "'");
  try {
    return {std::stod(text.substr(0, comma)), std::stod(text.substr(comma + 1))};
  } catch (const std::exception&) {
    throw qfr::DomainError("probe must be written as s,t; got '" + text + "'");
  }
}

void emit(const qfr::CommandOutput& out) {
  std::cout << out.summary;
  for (const auto& w : out.warnings) std::cerr << "warning: " << w << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantile-function regression for Gaussian-encoded histograms"};
  app.require_subcommand(1);

  qfr::ProjectOptions project;
  auto* project_cmd = app.add_subcommand("project", "Encode pre/post count tables as Gaussian quantile parameters");
  project_cmd->add_option("--pre", project.pre_counts, "Pre-treatment count table (CSV)")->required();
  project_cmd->add_option("--post", project.post_counts, "Post-treatment count table (CSV)")->required();
  project_cmd->add_option("--out", project.out, "Output parameter table (CSV)")->required();
  project_cmd->add_flag("--validate-hu", project.validate_hu, "Require values in [-1023, -200]");

  qfr::FitOptions fit_opts;
  auto* fit_cmd = app.add_subcommand("fit", "Fit the regression and report estimates, intervals and tests");
  fit_cmd->add_option("--params", fit_opts.params, "Parameter table (CSV)")->required();
  fit_cmd->add_option("--out", fit_opts.out, "JSON report")->required();
  fit_cmd->add_option("--alpha", fit_opts.alpha, "Interval level is 1 - alpha")->capture_default_str();

  qfr::ResidualsOptions resid;
  std::optional<double> resid_tol;
  auto* resid_cmd = app.add_subcommand("residuals", "Residual pairs and outlier p-values");
  resid_cmd->add_option("--params", resid.params, "Parameter table (CSV)")->required();
  resid_cmd->add_option("--out", resid.out, "Residual table (CSV)")->required();
  resid_cmd->add_option("--flag-threshold", resid.flag_threshold, "Flag subjects with p below this")
      ->capture_default_str();
  resid_cmd->add_option("--tol", resid_tol, "Also re-derive p-values by 2-D cubature at this tolerance");

  qfr::PredictOptions predict;
  std::vector<std::string> probe_text;
  std::optional<std::string> grid_out;
  auto* predict_cmd = app.add_subcommand("predict", "Mean-response prediction and highest-density regions");
  predict_cmd->add_option("--params", predict.params, "Parameter table (CSV)")->required();
  predict_cmd->add_option("--out", predict.out, "JSON report")->required();
  predict_cmd->add_option("--mu", predict.mu, "Explanatory mean")->required();
  predict_cmd->add_option("--sigma", predict.sigma, "Explanatory scale")->required();
  predict_cmd->add_option("--alpha", predict.alphas, "One or more levels (region mass 1 - alpha)")
      ->capture_default_str();
  predict_cmd->add_option("--grid-out", grid_out, "Density grid CSV; metadata goes to <path>.json");
  predict_cmd->add_option("--probe", probe_text, "Point s,t to classify against each region");
  predict_cmd->add_option("--tol", predict.tol, "Grid mass tolerance")->capture_default_str();

  qfr::SimulateOptions simulate;
  std::optional<std::uint64_t> seed;
  auto* simulate_cmd = app.add_subcommand("simulate", "Monte-Carlo validation of the sampling laws");
  simulate_cmd->add_option("--config", simulate.config, "JSON configuration")->required();
  simulate_cmd->add_option("--out", simulate.out, "JSON report")->required();
  simulate_cmd->add_option("--seed", seed, "Override the configured seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitDomain;
  }

  try {
    if (*project_cmd) {
      emit(qfr::cmd_project(project));
    } else if (*fit_cmd) {
      emit(qfr::cmd_fit(fit_opts));
    } else if (*resid_cmd) {
      resid.cross_check_tol = resid_tol;
      emit(qfr::cmd_residuals(resid));
    } else if (*predict_cmd) {
      for (const auto& p : probe_text) predict.probes.push_back(parse_probe(p));
      if (grid_out) predict.grid_out = *grid_out;
      emit(qfr::cmd_predict(predict));
    } else if (*simulate_cmd) {
      simulate.seed = seed;
      const auto out = qfr::cmd_simulate(simulate);
      emit(out);
      return out.exit_code;
    }
  } catch (const qfr::IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const qfr::DomainError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitDomain;
  } catch (const qfr::AccuracyError& e) {
    std::cerr << "error: " << e.what() << " (best estimate " << e.best_estimate() << ")\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
  return 0;
}
