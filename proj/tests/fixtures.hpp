#pragma once
// Lung fixture loader and the reference residual pairs and p-values.

#include <array>
#include <string>
#include <utility>

#include "qfr/qlm.hpp"
#include "qfr/table_io.hpp"

namespace fixtures {

inline std::string source_path(const std::string& rel) { return std::string(QFR_SOURCE_DIR) + "/" + rel; }

inline qfr::QuantilePairDataset lung_dataset() {
  return qfr::to_dataset(qfr::read_param_table(source_path("data/lung_params.csv")));
}

// Residual pairs (mu_e, sigma_e) per patient, two decimals.
inline constexpr std::array<std::pair<double, double>, 44> kResidualPairs = {{
    {-42.03, 51.21}, {0.15, 85.27},   {13.53, 55.82},  {-27.06, 39.02}, {31.91, 51.30},  {64.60, 59.16},
    {-15.60, 84.15}, {27.37, 82.19},  {117.57, 47.57}, {21.60, 44.91},  {-134.48, 13.17}, {-2.84, 30.71},
    {-3.06, 49.05},  {43.50, 67.00},  {4.77, 112.40},  {0.57, 41.82},   {-16.17, 55.94}, {-28.57, 37.67},
    {-26.38, 35.35}, {-14.89, 37.17}, {44.98, 73.15},  {-85.42, 1.36},  {-10.73, 41.28}, {23.52, 49.90},
    {-30.83, 42.40}, {-44.02, 32.17}, {21.62, 44.47},  {-19.41, 43.10}, {9.20, 41.05},   {54.79, 21.85},
    {1.08, 62.28},   {28.30, 68.40},  {-9.42, 56.50},  {13.38, 51.79},  {-11.22, 56.12}, {25.62, 55.00},
    {-23.84, 39.05}, {6.88, 53.19},   {5.61, 38.53},   {15.77, 51.92},  {-26.69, 43.19}, {-3.66, 46.28},
    {35.08, 44.17},  {-35.07, 34.00},
}};

// Outlier p-values per patient, four decimals.
inline constexpr std::array<double, 44> kResidualPValues = {
    0.3605, 0.3256, 0.4957, 0.5610, 0.4272, 0.1684, 0.3119, 0.2819, 0.0075, 0.5459, 0.0068,
    0.7363, 0.5714, 0.2679, 0.2058, 0.6352, 0.4849, 0.5489, 0.5962, 0.6453, 0.2328, 0.5069,
    0.6235, 0.4962, 0.5067, 0.4649, 0.5492, 0.5729, 0.6298, 0.4077, 0.4698, 0.3494, 0.5016,
    0.5269, 0.4995, 0.4473, 0.5801, 0.5325, 0.6606, 0.5167, 0.5280, 0.5939, 0.4579, 0.5383,
};

// n = 3 hand fixture: x = (0,1), (1,1), (2,1); y = (0,2), (2,3), (3,4).
inline qfr::QuantilePairDataset hand_dataset() {
  return {{{0.0, 1.0}, {1.0, 1.0}, {2.0, 1.0}}, {{0.0, 2.0}, {2.0, 3.0}, {3.0, 4.0}}};
}

}  // namespace fixtures
