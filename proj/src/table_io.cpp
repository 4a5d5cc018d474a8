#include "qfr/table_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <map>
#include <set>
#include <sstream>

#include "qfr/errors.hpp"

namespace qfr {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  std::string out(s.substr(b, e - b + 1));
  if (out.size() >= 2 && out.front() == '"' && out.back() == '"') out = out.substr(1, out.size() - 2);
  return out;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    out.push_back(trim(std::string_view(line).substr(start, pos == std::string::npos ? std::string::npos : pos - start)));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

// Non-blank lines with their 1-based line numbers.
std::vector<std::pair<std::size_t, std::string>> read_lines(std::istream& in) {
  std::vector<std::pair<std::size_t, std::string>> out;
  std::string line;
  std::size_t no = 0;
  while (std::getline(in, line)) {
    ++no;
    if (no == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    if (trim(line).empty()) continue;
    out.emplace_back(no, line);
  }
  return out;
}

double parse_number(const std::string& field, std::size_t row, std::size_t col) {
  double v = 0.0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  if (!field.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (field.empty() || ec != std::errc() || ptr != last || !std::isfinite(v)) {
    throw ParseError("expected a finite number, found '" + field + "'", row, col);
  }
  return v;
}

std::int64_t parse_count(const std::string& field, std::size_t row, std::size_t col) {
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (field.empty() || ec != std::errc() || ptr != field.data() + field.size()) {
    // Accept integral values written in floating form, e.g. "12.0".
    const double d = parse_number(field, row, col);
    if (d != std::floor(d) || std::fabs(d) > 9e15) throw ParseError("count must be an integer, found '" + field + "'", row, col);
    v = static_cast<std::int64_t>(d);
  }
  if (v < 0) throw ParseError("count must be nonnegative, found '" + field + "'", row, col);
  return v;
}

}  // namespace

HUHistogram CountTable::histogram(std::size_t subject) const {
  if (subject >= counts.size()) throw DomainError("count table: subject index out of range");
  return HUHistogram(values, counts[subject]);
}

CountTable parse_count_table(std::istream& in) {
  const auto lines = read_lines(in);
  if (lines.empty()) throw ParseError("count table: missing header row", 1, 1);
  const auto header = split_fields(lines.front().second);
  if (header.size() < 2) throw ParseError("count table: header needs a value column and at least one subject", lines.front().first, 1);
  CountTable t;
  t.subjects.assign(header.begin() + 1, header.end());
  std::set<std::string> seen;
  for (std::size_t c = 0; c < t.subjects.size(); ++c) {
    if (t.subjects[c].empty()) throw ParseError("count table: empty subject identifier", lines.front().first, c + 2);
    if (!seen.insert(t.subjects[c]).second) {
      throw ParseError("count table: duplicate subject '" + t.subjects[c] + "'", lines.front().first, c + 2);
    }
  }
  t.counts.assign(t.subjects.size(), {});
  for (std::size_t k = 1; k < lines.size(); ++k) {
    const auto& [row, text] = lines[k];
    const auto fields = split_fields(text);
    if (fields.size() != header.size()) {
      throw ParseError("count table: expected " + std::to_string(header.size()) + " fields, found " +
                           std::to_string(fields.size()),
                       row, std::min(fields.size(), header.size()) + 1);
    }
    const double value = parse_number(fields[0], row, 1);
    if (!t.values.empty() && !(value > t.values.back())) {
      throw ParseError("count table: values must be strictly increasing", row, 1);
    }
    t.values.push_back(value);
    for (std::size_t c = 1; c < fields.size(); ++c) t.counts[c - 1].push_back(parse_count(fields[c], row, c + 1));
  }
  if (t.values.empty()) throw ParseError("count table: no data rows", lines.front().first + 1, 1);
  return t;
}

CountTable read_count_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open count table " + path.string());
  try {
    return parse_count_table(in);
  } catch (const ParseError& e) {
    throw ParseError(path.string(), e);
  }
}

std::vector<ParamRow> parse_param_table(std::istream& in, bool allow_degenerate) {
  const auto lines = read_lines(in);
  if (lines.empty()) throw ParseError("parameter table: missing header row", 1, 1);
  const auto header = split_fields(lines.front().second);
  const std::vector<std::string> expected = {"id", "mu_x", "sigma_x", "mu_y", "sigma_y"};
  if (header != expected) {
    throw ParseError("parameter table: header must be id,mu_x,sigma_x,mu_y,sigma_y", lines.front().first, 1);
  }
  std::vector<ParamRow> rows;
  std::set<std::string> seen;
  for (std::size_t k = 1; k < lines.size(); ++k) {
    const auto& [row, text] = lines[k];
    const auto f = split_fields(text);
    if (f.size() != 5) throw ParseError("parameter table: expected 5 fields, found " + std::to_string(f.size()), row, 1);
    if (f[0].empty()) throw ParseError("parameter table: empty id", row, 1);
    if (!seen.insert(f[0]).second) throw ParseError("parameter table: duplicate id '" + f[0] + "'", row, 1);
    ParamRow r{f[0], {parse_number(f[1], row, 2), parse_number(f[2], row, 3)},
               {parse_number(f[3], row, 4), parse_number(f[4], row, 5)}};
    if (!allow_degenerate) {
      if (!(r.x.sigma > 0.0)) throw ParseError("parameter table: sigma_x must be positive", row, 3);
      if (!(r.y.sigma > 0.0)) throw ParseError("parameter table: sigma_y must be positive", row, 5);
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<ParamRow> read_param_table(const std::filesystem::path& path, bool allow_degenerate) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open parameter table " + path.string());
  try {
    return parse_param_table(in, allow_degenerate);
  } catch (const ParseError& e) {
    throw ParseError(path.string(), e);
  }
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw Error("format_double: conversion failed");
  return std::string(buf, ptr);
}

void write_param_table(std::ostream& out, const std::vector<ParamRow>& rows) {
  out << "id,mu_x,sigma_x,mu_y,sigma_y\n";
  for (const auto& r : rows) {
    out << r.id << ',' << format_double(r.x.mu) << ',' << format_double(r.x.sigma) << ',' << format_double(r.y.mu)
        << ',' << format_double(r.y.sigma) << '\n';
  }
}

QuantilePairDataset to_dataset(const std::vector<ParamRow>& rows) {
  QuantilePairDataset d;
  for (const auto& r : rows) {
    d.x.push_back(r.x);
    d.y.push_back(r.y);
  }
  return d;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << content;
    if (!out.flush()) throw IoError("failed writing " + path.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move output into place at " + path.string() + ": " + ec.message());
}

void write_grid_csv(std::ostream& out, const DensityGrid& grid) {
  out << "s,t,density\n";
  for (std::size_t i = 0; i < grid.s_axis.size(); ++i) {
    for (std::size_t j = 0; j < grid.t_axis.size(); ++j) {
      out << format_double(grid.s_axis[i]) << ',' << format_double(grid.t_axis[j]) << ','
          << format_double(grid.value(i, j)) << '\n';
    }
  }
}

}  // namespace qfr
