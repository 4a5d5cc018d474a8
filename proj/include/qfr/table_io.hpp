#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "qfr/density.hpp"
#include "qfr/qlm.hpp"
#include "qfr/quantile_encoding.hpp"

namespace qfr {

// Values in the first column, one count column per subject.
struct CountTable {
  std::vector<std::string> subjects;
  std::vector<double> values;
  std::vector<std::vector<std::int64_t>> counts;  // counts[subject][row]

  HUHistogram histogram(std::size_t subject) const;
};

CountTable parse_count_table(std::istream& in);
CountTable read_count_table(const std::filesystem::path& path);

struct ParamRow {
  std::string id;
  GaussianQuantile x;
  GaussianQuantile y;
};

// Rows with non-positive sigmas are rejected unless allow_degenerate is set.
std::vector<ParamRow> parse_param_table(std::istream& in, bool allow_degenerate = false);
std::vector<ParamRow> read_param_table(const std::filesystem::path& path, bool allow_degenerate = false);
void write_param_table(std::ostream& out, const std::vector<ParamRow>& rows);

QuantilePairDataset to_dataset(const std::vector<ParamRow>& rows);

// Shortest decimal form that round-trips (at most 17 significant digits).
std::string format_double(double v);

std::string read_text_file(const std::filesystem::path& path);
// Writes via a temporary file in the same directory, then renames.
void write_text_file(const std::filesystem::path& path, const std::string& content);

// Long-form CSV with header s,t,density.
void write_grid_csv(std::ostream& out, const DensityGrid& grid);

}  // namespace qfr
