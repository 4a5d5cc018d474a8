#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include <unistd.h>

#include "doctest.h"
#include "fixtures.hpp"
#include "json.hpp"
#include "oracles.hpp"
#include "qfr/commands.hpp"
#include "qfr/errors.hpp"
#include "qfr/table_io.hpp"

using namespace qfr;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("qfr_cli_io_" + std::to_string(::getpid())) / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

template <class F>
ParseError parse_error_of(F&& f) {
  try {
    f();
  } catch (const ParseError& e) {
    return e;
  }
  FAIL("expected a parse error");
  return ParseError("unreachable");
}

CountTable count_table(const std::string& text) {
  std::istringstream in(text);
  return parse_count_table(in);
}

std::vector<ParamRow> param_table(const std::string& text, bool allow_degenerate = false) {
  std::istringstream in(text);
  return parse_param_table(in, allow_degenerate);
}

double phi_at_quantile(long double p) {
  const long double z = oracle::normal_quantile(p);
  return static_cast<double>(oracle::normal_pdf(z));
}

}  // namespace

TEST_CASE("count table parsing") {
  const auto t = count_table("hu,a,b\n-900,1,0\n-800,2,3\n\n-700,0,4\n");
  CHECK(t.subjects == std::vector<std::string>{"a", "b"});
  CHECK(t.values == std::vector<double>{-900, -800, -700});
  CHECK(t.counts[1] == std::vector<std::int64_t>{0, 3, 4});
  CHECK(t.histogram(1).values().size() == 2);

  auto e = parse_error_of([] { count_table("hu,a,b\n-900,1,0\n-800,x,3\n"); });
  CHECK(e.row() == 3);
  CHECK(e.column() == 2);
  e = parse_error_of([] { count_table("hu,a,b\n-900,1,0\n-800,2\n"); });
  CHECK(e.row() == 3);
  e = parse_error_of([] { count_table("hu,a,b\n-900,1,0\n-800,2,-1\n"); });
  CHECK(e.column() == 3);
  e = parse_error_of([] { count_table("hu,a,b\n-900,1,0\n-950,2,1\n"); });
  CHECK(e.row() == 3);
  CHECK(e.column() == 1);
  e = parse_error_of([] { count_table("hu,a,b\n-900,1,0\n-800,2.5,1\n"); });
  CHECK(e.column() == 2);
  CHECK_THROWS_AS(count_table(""), ParseError);
  CHECK_THROWS_AS(count_table("hu,a,a\n1,1,1\n"), ParseError);
}

TEST_CASE("parameter table parsing") {
  const auto rows = param_table("id,mu_x,sigma_x,mu_y,sigma_y\np1,-700,120,-710.5,130\n");
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].id == "p1");
  CHECK(rows[0].y.mu == -710.5);
  auto e = parse_error_of([] { param_table("id,mu_x,sigma_x,mu_y,sigma_y\np1,-700,abc,-710,130\n"); });
  CHECK(e.row() == 2);
  CHECK(e.column() == 3);
  e = parse_error_of([] { param_table("id,mu_x,sigma_x,mu_y,sigma_y\np1,-700,120,-710,0\n"); });
  CHECK(e.column() == 5);
  CHECK(param_table("id,mu_x,sigma_x,mu_y,sigma_y\np1,-700,120,-710,0\n", true)[0].y.sigma == 0.0);
  CHECK_THROWS_AS(param_table("id,mx,sx,my,sy\n1,2,3,4,5\n"), ParseError);
  CHECK_THROWS_AS(param_table("id,mu_x,sigma_x,mu_y,sigma_y\n1,2,3,4,5\n1,2,3,4,5\n"), ParseError);

  const fs::path dir = scratch("param_file");
  write(dir / "bad.csv", "id,mu_x,sigma_x,mu_y,sigma_y\n1,2,3,4,5\n2,2,3,x,5\n");
  e = parse_error_of([&] { read_param_table(dir / "bad.csv"); });
  CHECK(e.row() == 3);
  CHECK(e.column() == 4);
  CHECK(std::string(e.what()).find("bad.csv") != std::string::npos);
  CHECK_THROWS_AS(read_param_table(dir / "missing.csv"), IoError);
}

TEST_CASE("format_double round-trips") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1e4, 1e4);
  for (int k = 0; k < 1000; ++k) {
    const double v = u(rng) * std::pow(10.0, static_cast<int>(rng() % 20) - 10);
    CHECK(std::stod(format_double(v)) == v);
  }
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(-724.9863) == "-724.9863");
}

TEST_CASE("projection of a synthetic three-subject table") {
  // Subject a: {-900, -800} once each. Subject b: -1000 x1, -700 x2, -500 x1. Subject c: -650 only.
  const auto pre = count_table("hu,a,b,c\n-1000,0,1,0\n-900,1,0,0\n-800,1,0,0\n-700,0,2,0\n-650,0,0,7\n-500,0,1,0\n");
  const auto post = count_table("hu,a,b,c\n-1000,1,0,0\n-900,0,0,2\n-800,0,1,0\n-600,1,1,0\n");
  std::vector<std::string> warnings;
  const auto rows = project_tables(pre, post, true, warnings);
  REQUIRE(rows.size() == 3);
  const double phi0 = phi_at_quantile(0.5L);
  const double phi25 = phi_at_quantile(0.25L);
  CHECK(rows[0].x.mu == doctest::Approx(-850.0).epsilon(1e-15));
  CHECK(rows[0].x.sigma == doctest::Approx(100.0 * phi0).epsilon(1e-14));
  CHECK(rows[1].x.mu == doctest::Approx(-725.0).epsilon(1e-15));
  CHECK(rows[1].x.sigma == doctest::Approx(500.0 * phi25).epsilon(1e-13));
  CHECK(rows[2].x.mu == -650.0);
  CHECK(rows[2].x.sigma == 0.0);
  CHECK(rows[2].y.mu == -900.0);
  CHECK(rows[0].y.sigma == doctest::Approx(400.0 * phi0).epsilon(1e-14));
  CHECK(rows[1].y.mu == doctest::Approx(-700.0).epsilon(1e-15));
  CHECK(rows[1].y.sigma == doctest::Approx(200.0 * phi0).epsilon(1e-14));
  CHECK(warnings.size() == 2);

  const auto other = count_table("hu,a,b,d\n-900,1,1,1\n");
  CHECK_THROWS_AS(project_tables(pre, other, false, warnings), ConsistencyError);
  const auto out_of_range = count_table("hu,a,b,c\n-100,1,1,1\n");
  CHECK_THROWS_AS(project_tables(out_of_range, out_of_range, true, warnings), DomainError);
}

TEST_CASE("cmd_project writes a table that re-reads bit-identically") {
  const fs::path dir = scratch("project");
  std::mt19937_64 rng(8);
  std::ostringstream pre, post;
  pre << "hu,s1,s2,s3,s4\n";
  post << "hu,s1,s2,s3,s4\n";
  for (int v = -1023; v <= -200; ++v) {
    pre << v;
    post << v;
    for (int k = 0; k < 4; ++k) {
      pre << ',' << rng() % 40;
      post << ',' << rng() % 25;
    }
    pre << '\n';
    post << '\n';
  }
  write(dir / "pre.csv", pre.str());
  write(dir / "post.csv", post.str());
  const auto out = cmd_project({dir / "pre.csv", dir / "post.csv", dir / "params.csv", true});
  CHECK(out.exit_code == 0);
  std::vector<std::string> warnings;
  const auto mem = project_tables(read_count_table(dir / "pre.csv"), read_count_table(dir / "post.csv"), true, warnings);
  const auto disk = read_param_table(dir / "params.csv");
  REQUIRE(disk.size() == mem.size());
  for (std::size_t i = 0; i < mem.size(); ++i) {
    CHECK(disk[i].id == mem[i].id);
    CHECK(disk[i].x == mem[i].x);
    CHECK(disk[i].y == mem[i].y);
  }
  CHECK_THROWS_AS(cmd_project({dir / "nope.csv", dir / "post.csv", dir / "x.csv", false}), IoError);
}

TEST_CASE("single-value subject projects to sigma 0 with a warning") {
  const fs::path dir = scratch("single");
  write(dir / "pre.csv", "hu,only\n-600,5\n");
  write(dir / "post.csv", "hu,only\n-640,3\n-600,1\n");
  const auto out = cmd_project({dir / "pre.csv", dir / "post.csv", dir / "params.csv", false});
  CHECK(out.warnings.size() == 1);
  const auto rows = read_param_table(dir / "params.csv", true);
  CHECK(rows[0].x.sigma == 0.0);
  CHECK(rows[0].x.mu == -600.0);
}

TEST_CASE("cmd_fit report") {
  const fs::path dir = scratch("fit");
  const auto out = cmd_fit({fixtures::source_path("data/lung_params.csv"), dir / "fit.json", 0.05});
  CHECK(out.exit_code == 0);
  const auto doc = json::parse(read_text_file(dir / "fit.json"));
  CHECK(doc["schema_version"] == kSchemaVersion);
  CHECK(doc["n"] == 44);
  const auto& c = doc["coefficients"];
  CHECK(c["beta1"]["estimate"].get<double>() == doctest::Approx(0.8837675).epsilon(1e-3));
  CHECK(c["beta"]["confidence_interval"][0].get<double>() == doctest::Approx(37.3889592).epsilon(1e-3));
  CHECK(c["sigma2"]["statistic"].get<double>() == doctest::Approx(67907.292).epsilon(1e-4));
  CHECK(doc["ancillary"]["w"].get<double>() == doctest::Approx(3704.718).epsilon(1e-5));
  // Values in the summary are rounded views of the report.
  const auto f = fit(fixtures::lung_dataset());
  CHECK(out.summary.find("Coefficients") != std::string::npos);
  CHECK(c["beta0"]["estimate"].get<double>() == f.beta0);

  write(dir / "flat.csv", "id,mu_x,sigma_x,mu_y,sigma_y\n1,0,1,1,0.5\n2,1,2,4,1\n3,2,1.5,7,0.75\n");
  const auto flat = cmd_fit({dir / "flat.csv", dir / "flat.json", 0.05});
  CHECK_FALSE(flat.warnings.empty());
  CHECK(json::parse(read_text_file(dir / "flat.json"))["coefficients"]["sigma2"]["estimate"].get<double>() <= 1e-20);

  const auto hand = fit(fixtures::hand_dataset());
  std::ostringstream csv;
  write_param_table(csv, {{"a", {0, 1}, {0, 2}}, {"b", {1, 1}, {2, 3}}, {"c", {2, 1}, {3, 4}}});
  write(dir / "hand.csv", csv.str());
  cmd_fit({dir / "hand.csv", dir / "hand.json", 0.05});
  const auto h = json::parse(read_text_file(dir / "hand.json"));
  CHECK(h["coefficients"]["beta1"]["estimate"].get<double>() == doctest::Approx(1.5).epsilon(1e-15));
  CHECK(h["coefficients"]["beta2"]["estimate"].get<double>() == hand.beta2);
  CHECK_THROWS_AS(cmd_fit({dir / "hand.csv", dir / "h.json", 1.5}), DomainError);
}

TEST_CASE("cmd_residuals table") {
  const fs::path dir = scratch("residuals");
  const auto out = cmd_residuals({fixtures::source_path("data/lung_params.csv"), dir / "res.csv", 0.01, std::nullopt});
  CHECK(out.exit_code == 0);
  std::istringstream in(read_text_file(dir / "res.csv"));
  std::string line;
  std::getline(in, line);
  CHECK(line == "id,mu_e,sigma_e,p_value,outlier");
  int rows = 0;
  std::vector<std::string> flagged;
  while (std::getline(in, line)) {
    ++rows;
    std::vector<std::string> f;
    std::stringstream ls(line);
    for (std::string cell; std::getline(ls, cell, ',');) f.push_back(cell);
    REQUIRE(f.size() == 5);
    const auto i = static_cast<std::size_t>(rows - 1);
    CHECK(std::fabs(std::stod(f[1]) - fixtures::kResidualPairs[i].first) <= 0.02);
    CHECK(std::fabs(std::stod(f[2]) - fixtures::kResidualPairs[i].second) <= 0.02);
    CHECK((f[4] == "true") == (std::stod(f[3]) < 0.01));
    if (f[4] == "true") flagged.push_back(f[0]);
  }
  CHECK(rows == 44);
  CHECK(std::find(flagged.begin(), flagged.end(), "11") != flagged.end());

  write(dir / "flat.csv", "id,mu_x,sigma_x,mu_y,sigma_y\n1,0,1,1,0.5\n2,1,2,4,1\n3,2,1.5,7,0.75\n");
  const auto flat = cmd_residuals({dir / "flat.csv", dir / "flat_res.csv", 0.01, std::nullopt});
  CHECK_FALSE(flat.warnings.empty());
  std::istringstream fin(read_text_file(dir / "flat_res.csv"));
  std::getline(fin, line);
  while (std::getline(fin, line)) {
    std::vector<std::string> f;
    std::stringstream ls(line);
    for (std::string cell; std::getline(ls, cell, ',');) f.push_back(cell);
    CHECK(std::fabs(std::stod(f[1])) <= 1e-12);
    CHECK(std::fabs(std::stod(f[2])) <= 1e-12);
    CHECK(f[3] == "1");
    CHECK(f[4] == "false");
  }
}

TEST_CASE("cmd_predict artifacts") {
  const fs::path dir = scratch("predict");
  const auto f = fit(fixtures::lung_dataset());
  const auto pred = predict_mean_response(f, {-840.6441, 115.6835});
  PredictOptions o;
  o.params = fixtures::source_path("data/lung_params.csv");
  o.out = dir / "predict.json";
  o.mu = -840.6441;
  o.sigma = 115.6835;
  o.alphas = {0.01, 0.05, 0.10};
  o.grid_out = dir / "grid.csv";
  o.probes = {{pred.mu, pred.sigma}, {-1e4, 50.0}};
  const auto out = cmd_predict(o);
  CHECK(out.exit_code == 0);
  const auto doc = json::parse(read_text_file(o.out));
  CHECK(doc["predicted"]["mu"].get<double>() == pred.mu);
  CHECK(doc["regions"].size() == 3);
  for (const auto& r : doc["regions"]) CHECK(std::fabs(r["mass"].get<double>() - (1.0 - r["alpha"].get<double>())) <= 1e-3);
  for (const auto& in : doc["probes"][0]["inside"]) CHECK(in.get<bool>());
  for (const auto& in : doc["probes"][1]["inside"]) CHECK_FALSE(in.get<bool>());
  CHECK(fs::exists(dir / "grid.csv"));
  const auto meta = json::parse(read_text_file(dir / "grid.csv.json"));
  CHECK(std::fabs(meta["total_mass"].get<double>() - 1.0) <= 1e-4);
  std::ifstream grid(dir / "grid.csv");
  std::string header;
  std::getline(grid, header);
  CHECK(header == "s,t,density");

  o.sigma = 44 * f.sigma_x_bar + 1.0;
  try {
    cmd_predict(o);
    FAIL("expected a domain error");
  } catch (const DomainError& e) {
    CHECK(std::string(e.what()).find("5676") != std::string::npos);
  }
}

TEST_CASE("simulate config and reproducible reports") {
  const fs::path dir = scratch("simulate");
  const auto cfg = parse_simulate_config(read_text_file(fixtures::source_path("config/simulate_lung.json")),
                                         fixtures::source_path("config"));
  CHECK(cfg.truth.design.size() == 44);
  CHECK(cfg.reps == 10000);
  CHECK(cfg.seed == 1);
  CHECK(cfg.truth.beta == 49.3636853);

  const std::string inline_cfg =
      R"({"truth":{"beta0":-85.9,"beta1":0.88,"beta2":0.64,"sigma2":1600,"beta":49},)"
      R"("design":[[-700,120],[-650,140],[-800,100],[-720,130],[-760,90]],"reps":1000,"seed":9})";
  write(dir / "small.json", inline_cfg);
  const auto a = cmd_simulate({dir / "small.json", dir / "a.json", std::nullopt});
  const auto b = cmd_simulate({dir / "small.json", dir / "b.json", std::nullopt});
  CHECK(read_text_file(dir / "a.json") == read_text_file(dir / "b.json"));
  CHECK(a.exit_code == b.exit_code);
  const auto doc = json::parse(read_text_file(dir / "a.json"));
  CHECK(doc["rng"] == kRngAlgorithm);
  CHECK(doc["reps"] == 1000);
  CHECK(doc["seed"] == 9);
  CHECK(doc["passed"].get<bool>() == (a.exit_code == 0));

  cmd_simulate({dir / "small.json", dir / "c.json", 10});
  CHECK(json::parse(read_text_file(dir / "c.json"))["seed"] == 10);

  write(dir / "tiny.json", R"({"truth":{"beta0":0,"beta1":1,"beta2":1,"sigma2":1,"beta":1},"design":[[0,1],[1,1],[2,1]],"reps":10})");
  CHECK_THROWS_AS(cmd_simulate({dir / "tiny.json", dir / "t.json", std::nullopt}), DomainError);
  write(dir / "broken.json", R"({"truth":{"beta0":0}})");
  CHECK_THROWS_AS(cmd_simulate({dir / "broken.json", dir / "t.json", std::nullopt}), ParseError);
  write(dir / "syntax.json", "{not json");
  CHECK_THROWS_AS(cmd_simulate({dir / "syntax.json", dir / "t.json", std::nullopt}), ParseError);
}
