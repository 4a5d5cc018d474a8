#include "qfr/commands.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"

#include "qfr/density.hpp"
#include "qfr/errors.hpp"

namespace qfr {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

std::string printf_format(const char* fmt, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

std::string pad_left(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

std::string pad_right(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

std::string format_pvalue(double p) {
  if (std::isnan(p)) return "NA";
  if (p < 2.2e-16) return "<2e-16";
  if (p < 1e-4) return printf_format("%.2g", p);
  return printf_format("%.3g", p);
}

std::string significance(double p) {
  if (std::isnan(p)) return "";
  if (p < 0.001) return "***";
  if (p < 0.01) return "**";
  if (p < 0.05) return "*";
  if (p < 0.1) return ".";
  return "";
}

std::vector<std::string> param_ids(const std::vector<ParamRow>& rows) {
  std::vector<std::string> ids;
  for (const auto& r : rows) ids.push_back(r.id);
  return ids;
}

void write_json(const std::filesystem::path& path, const ordered_json& doc) {
  write_text_file(path, doc.dump(2) + "\n");
}

ordered_json interval_json(const Interval& i) { return ordered_json::array({i.lo, i.hi}); }

bool degenerate_noise(const QlmFit& f) { return !(f.beta > 0.0) || !(f.sigma2 > 0.0); }

}  // namespace

std::vector<ParamRow> project_tables(const CountTable& pre, const CountTable& post, bool validate_hu,
                                     std::vector<std::string>& warnings) {
  std::map<std::string, std::size_t> post_index;
  for (std::size_t c = 0; c < post.subjects.size(); ++c) post_index[post.subjects[c]] = c;
  if (pre.subjects.size() != post.subjects.size()) {
    throw ConsistencyError("count tables list different numbers of subjects (" + std::to_string(pre.subjects.size()) +
                           " vs " + std::to_string(post.subjects.size()) + ")");
  }
  std::vector<ParamRow> rows;
  for (std::size_t c = 0; c < pre.subjects.size(); ++c) {
    const auto& id = pre.subjects[c];
    const auto it = post_index.find(id);
    if (it == post_index.end()) throw ConsistencyError("subject '" + id + "' is missing from the post-treatment table");
    auto encode = [&](const CountTable& t, std::size_t col, const char* which) {
      const HUHistogram h = t.histogram(col);
      if (h.empty()) throw DomainError("subject '" + id + "' has no counts in the " + which + " table");
      if (validate_hu) h.require_range(-1023.0, -200.0);
      const GaussianQuantile g = project_d1(empirical_quantile(h));
      if (g.sigma == 0.0) warnings.push_back("subject '" + id + "' (" + which + ") is constant; sigma = 0");
      return g;
    };
    rows.push_back({id, encode(pre, c, "pre"), encode(post, it->second, "post")});
  }
  return rows;
}

CommandOutput cmd_project(const ProjectOptions& opts) {
  const CountTable pre = read_count_table(opts.pre_counts);
  const CountTable post = read_count_table(opts.post_counts);
  CommandOutput out;
  const auto rows = project_tables(pre, post, opts.validate_hu, out.warnings);
  std::ostringstream csv;
  write_param_table(csv, rows);
  write_text_file(opts.out, csv.str());
  out.summary = "projected " + std::to_string(rows.size()) + " subjects to " + opts.out.string() + "\n";
  return out;
}

std::string fit_report_json(const QlmFit& f, const ConfidenceIntervals& ci, const TestReport& tests,
                            const std::string& source) {
  ordered_json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["command"] = "fit";
  doc["input"] = source;
  doc["n"] = f.n;
  doc["df"] = f.df();
  doc["alpha"] = ci.alpha;
  const std::map<std::string, std::pair<double, Interval>> extra = {
      {"beta0", {f.beta0, ci.beta0}}, {"beta1", {f.beta1, ci.beta1}}, {"beta2", {f.beta2_ml, ci.beta2}},
      {"sigma2", {f.sigma2_ml, ci.sigma2}}, {"beta", {f.beta_ml, ci.beta}}};
  ordered_json coefs = ordered_json::object();
  for (const auto& t : tests.tests) {
    const auto& [ml, interval] = extra.at(t.name);
    ordered_json c;
    c["estimate"] = t.estimate;
    c["ml_estimate"] = ml;
    c["std_error"] = t.std_error;
    c["confidence_interval"] = interval_json(interval);
    c["null_hypothesis"] = t.null_hypothesis;
    c["statistic"] = t.statistic;
    c["p_value"] = std::isnan(t.p_value) ? ordered_json(nullptr) : ordered_json(t.p_value);
    coefs[t.name] = c;
  }
  doc["coefficients"] = coefs;
  doc["ancillary"] = {{"mu_x_bar", f.mu_x_bar},         {"sigma_x_bar", f.sigma_x_bar}, {"mu_y_bar", f.mu_y_bar},
                      {"sigma_y_bar", f.sigma_y_bar},   {"w", f.w},
                      {"beta2_ml_index", f.beta2_ml_index + 1}};
  doc["warnings"] = f.warnings;
  return doc.dump(2) + "\n";
}

std::string fit_summary_text(const QlmFit& f, const ConfidenceIntervals& ci, const TestReport& tests) {
  std::ostringstream os;
  os << "Coefficients:\n";
  os << "          Estimate Std. Error t value Pr(>|t|)\n";
  for (const char* name : {"beta0", "beta1"}) {
    const auto& t = tests.at(name);
    os << pad_right(std::string(name) + "hat", 8) << pad_left(printf_format("%.5f", t.estimate), 10)
       << pad_left(printf_format("%.5g", t.std_error), 11) << pad_left(printf_format("%.3f", t.statistic), 8)
       << pad_left(format_pvalue(t.p_value), 9) << ' ' << significance(t.p_value) << '\n';
  }
  os << "           Estimate Std. Error stat value P-val (H0: par >= 1)\n";
  for (const char* name : {"beta2", "sigma2", "beta"}) {
    const auto& t = tests.at(name);
    os << pad_right(std::string(name) + "hat", 9) << pad_left(printf_format("%.3e", t.estimate), 11)
       << pad_left(printf_format("%.3e", t.std_error), 11) << pad_left(printf_format("%.3f", t.statistic), 11)
       << pad_left(format_pvalue(t.p_value), 21) << ' ' << significance(t.p_value) << '\n';
  }
  os << "---\nSignif. codes:  0 '***' 0.001 '**' 0.01 '*' 0.05 '.' 0.1 ' ' 1\n\n";
  const double lo = 100.0 * ci.alpha / 2.0;
  os << "Confidence intervals:\n"
     << pad_left(printf_format("%g %%", lo), 23) << pad_left(printf_format("%g %%", 100.0 - lo), 13) << '\n';
  const std::vector<std::pair<const char*, Interval>> rows = {{"beta0hat", ci.beta0},
                                                              {"beta1hat", ci.beta1},
                                                              {"beta2hat", ci.beta2},
                                                              {"sigma2hat", ci.sigma2},
                                                              {"betahat", ci.beta}};
  for (const auto& [name, i] : rows) {
    os << pad_right(name, 10) << pad_left(printf_format("%.7f", i.lo), 13) << pad_left(printf_format("%.7f", i.hi), 13)
       << '\n';
  }
  os << "\nmuqxbar " << printf_format("%.4f", f.mu_x_bar) << "  sigmaqxbar " << printf_format("%.4f", f.sigma_x_bar)
     << "  w " << printf_format("%.3f", f.w) << "  n " << f.n << '\n';
  for (const auto& w : f.warnings) os << "warning: " << w << '\n';
  return os.str();
}

CommandOutput cmd_fit(const FitOptions& opts) {
  const auto rows = read_param_table(opts.params);
  const QlmFit f = fit(to_dataset(rows));
  const auto ci = confidence_intervals(f, opts.alpha);
  const auto tests = summary_tests(f);
  write_text_file(opts.out, fit_report_json(f, ci, tests, opts.params.string()));
  CommandOutput out;
  out.summary = fit_summary_text(f, ci, tests);
  out.warnings = f.warnings;
  return out;
}

std::vector<ResidualRow> residual_table(const QlmFit& f, const std::vector<std::string>& ids, double flag_threshold,
                                        std::vector<std::string>& warnings) {
  if (ids.size() != f.n) throw ConsistencyError("residual_table: one id per observation is required");
  const auto pairs = residuals(f);
  std::vector<ResidualRow> rows(f.n);
  const bool degenerate = degenerate_noise(f);
  if (degenerate) {
    warnings.emplace_back("noise estimates are zero; residual laws are point masses and every p-value is 1");
  }
  parallel_for(f.n, [&](std::size_t i) {
    rows[i].id = ids[i];
    rows[i].pair = pairs[i];
    rows[i].p_value = degenerate ? 1.0 : residual_pvalue(f, i, pairs[i]);
    rows[i].outlier = rows[i].p_value < flag_threshold;
  });
  return rows;
}

CommandOutput cmd_residuals(const ResidualsOptions& opts) {
  if (!(opts.flag_threshold > 0.0 && opts.flag_threshold < 1.0)) {
    throw DomainError("flag threshold must lie in (0, 1)");
  }
  const auto params = read_param_table(opts.params);
  const QlmFit f = fit(to_dataset(params));
  CommandOutput out;
  out.warnings = f.warnings;
  const auto rows = residual_table(f, param_ids(params), opts.flag_threshold, out.warnings);

  std::vector<double> cross(rows.size(), std::nan(""));
  if (opts.cross_check_tol) {
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto d = Density2D::residual(f, i);
      const double level = d(rows[i].pair.mu_e, rows[i].pair.sigma_e);
      cross[i] = integrate_region(d, [&](double s, double t) { return d(s, t) <= level; }, *opts.cross_check_tol);
    }
  }
  std::ostringstream csv;
  csv << "id,mu_e,sigma_e,p_value,outlier" << (opts.cross_check_tol ? ",p_value_cubature" : "") << '\n';
  std::ostringstream text;
  text << "  id      mu_e   sigma_e   p-value\n";
  std::size_t flagged = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    csv << r.id << ',' << format_double(r.pair.mu_e) << ',' << format_double(r.pair.sigma_e) << ','
        << format_double(r.p_value) << ',' << (r.outlier ? "true" : "false");
    if (opts.cross_check_tol) csv << ',' << format_double(cross[i]);
    csv << '\n';
    text << pad_left(r.id, 4) << pad_left(printf_format("%.2f", r.pair.mu_e), 10)
         << pad_left(printf_format("%.2f", r.pair.sigma_e), 10) << pad_left(printf_format("%.4f", r.p_value), 10)
         << (r.outlier ? "  *" : "") << '\n';
    flagged += r.outlier ? 1 : 0;
  }
  text << flagged << " subject(s) below p = " << opts.flag_threshold << '\n';
  write_text_file(opts.out, csv.str());
  out.summary = text.str();
  return out;
}

CommandOutput cmd_predict(const PredictOptions& opts) {
  if (opts.alphas.empty()) throw DomainError("predict: at least one alpha is required");
  const auto params = read_param_table(opts.params);
  const QlmFit f = fit(to_dataset(params));
  const GaussianQuantile new_x{opts.mu, opts.sigma};
  const GaussianQuantile predicted = predict_mean_response(f, new_x);
  const Density2D d = Density2D::mean_response(f, new_x);

  ordered_json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["command"] = "predict";
  doc["input"] = opts.params.string();
  doc["new_x"] = {{"mu", new_x.mu}, {"sigma", new_x.sigma}};
  doc["sigma_bound"] = static_cast<double>(f.n) * f.sigma_x_bar;
  doc["predicted"] = {{"mu", predicted.mu}, {"sigma", predicted.sigma}};
  const auto box = d.box();
  doc["density"] = {{"s_center", d.s_center()},
                    {"s_sd", d.s_sd()},
                    {"t_lower", d.t_lower()},
                    {"mode", {d.mode().first, d.mode().second}},
                    {"max_density", d.max_density()},
                    {"box", {{"s", {box.s_lo, box.s_hi}}, {"t", {box.t_lo, box.t_hi}}}}};

  std::ostringstream text;
  text << "predicted mean response: mu " << printf_format("%.4f", predicted.mu) << ", sigma "
       << printf_format("%.4f", predicted.sigma) << '\n';
  ordered_json regions = ordered_json::array();
  std::vector<double> levels;
  for (double alpha : opts.alphas) {
    const double level = hdr_threshold(d, alpha);
    levels.push_back(level);
    ordered_json r;
    r["alpha"] = alpha;
    r["threshold"] = level;
    r["mass"] = superlevel_mass(d, level);
    regions.push_back(r);
    text << "alpha " << alpha << ": L = " << printf_format("%.6g", level) << '\n';
  }
  doc["regions"] = regions;

  ordered_json probes = ordered_json::array();
  for (const auto& [s, t] : opts.probes) {
    ordered_json p;
    p["s"] = s;
    p["t"] = t;
    p["density"] = d(s, t);
    ordered_json inside = ordered_json::array();
    for (std::size_t k = 0; k < levels.size(); ++k) inside.push_back(region_membership(d, levels[k], s, t));
    p["inside"] = inside;
    probes.push_back(p);
    text << "probe (" << s << ", " << t << "): " << (inside.empty() || !inside[0].get<bool>() ? "outside" : "inside")
         << " the first region\n";
  }
  doc["probes"] = probes;

  if (opts.grid_out) {
    const DensityGrid g = build_density_grid(d, 201, opts.tol);
    std::ostringstream csv;
    write_grid_csv(csv, g);
    write_text_file(*opts.grid_out, csv.str());
    ordered_json meta;
    meta["schema_version"] = kSchemaVersion;
    meta["kind"] = g.label;
    meta["box"] = {{"s", {g.box.s_lo, g.box.s_hi}}, {"t", {g.box.t_lo, g.box.t_hi}}};
    meta["s_points"] = g.s_axis.size();
    meta["t_points"] = g.t_axis.size();
    meta["quadrature"] = "Simpson weights on both axes; cell_mass = s_weight * t_weight";
    meta["s_weights"] = g.s_weights;
    meta["t_weights"] = g.t_weights;
    meta["total_mass"] = g.total_mass;
    meta["achieved_tolerance"] = g.achieved_tolerance;
    meta["thresholds"] = regions;
    auto sidecar = *opts.grid_out;
    sidecar += ".json";
    write_json(sidecar, meta);
    doc["grid"] = {{"csv", opts.grid_out->string()}, {"metadata", sidecar.string()}};
  }
  doc["warnings"] = f.warnings;
  write_json(opts.out, doc);
  CommandOutput out;
  out.summary = text.str();
  out.warnings = f.warnings;
  return out;
}

SimulateConfig parse_simulate_config(const std::string& text, const std::filesystem::path& base_dir) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("simulate config: ") + e.what());
  }
  SimulateConfig cfg;
  try {
    const auto& truth = doc.at("truth");
    cfg.truth.beta0 = truth.at("beta0").get<double>();
    cfg.truth.beta1 = truth.at("beta1").get<double>();
    cfg.truth.beta2 = truth.at("beta2").get<double>();
    cfg.truth.sigma2 = truth.at("sigma2").get<double>();
    cfg.truth.beta = truth.at("beta").get<double>();
    const auto& design = doc.at("design");
    if (design.is_string()) {
      std::filesystem::path p = design.get<std::string>();
      if (p.is_relative()) p = base_dir / p;
      for (const auto& r : read_param_table(p)) cfg.truth.design.push_back(r.x);
    } else {
      for (const auto& row : design) {
        cfg.truth.design.push_back({row.at(0).get<double>(), row.at(1).get<double>()});
      }
    }
    cfg.reps = doc.value("reps", cfg.reps);
    cfg.seed = doc.value("seed", cfg.seed);
    cfg.alpha = doc.value("alpha", cfg.alpha);
  } catch (const json::exception& e) {
    throw ParseError(std::string("simulate config: ") + e.what());
  }
  cfg.truth.validate();
  return cfg;
}

std::string simulate_report_json(const ValidationReport& report) {
  ordered_json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["command"] = "simulate";
  doc["rng"] = report.algorithm;
  doc["seed"] = report.seed;
  doc["reps"] = report.reps;
  doc["n"] = report.n;
  doc["alpha"] = report.alpha;
  ordered_json checks = ordered_json::array();
  for (const auto& c : report.checks) {
    checks.push_back({{"name", c.name},
                      {"description", c.description},
                      {"statistic", c.statistic},
                      {"critical", c.critical},
                      {"p_value", c.p_value},
                      {"passed", c.passed}});
  }
  doc["checks"] = checks;
  doc["passed"] = report.passed();
  return doc.dump(2) + "\n";
}

CommandOutput cmd_simulate(const SimulateOptions& opts) {
  SimulateConfig cfg = parse_simulate_config(read_text_file(opts.config), opts.config.parent_path());
  if (opts.seed) cfg.seed = *opts.seed;
  const auto report = mc_estimator_check(cfg.truth, cfg.reps, cfg.seed, cfg.alpha);
  write_text_file(opts.out, simulate_report_json(report));
  CommandOutput out;
  std::ostringstream text;
  for (const auto& c : report.checks) {
    text << (c.passed ? "pass " : "FAIL ") << pad_right(c.name, 22) << " statistic " << printf_format("%.6g", c.statistic)
         << "  critical " << printf_format("%.6g", c.critical) << '\n';
  }
  text << (report.passed() ? "all checks passed\n" : "some checks failed\n");
  out.summary = text.str();
  out.exit_code = report.passed() ? 0 : 3;
  return out;
}

}  // namespace qfr
