#pragma once

#include <cmath>
#include <cstdlib>
#include <istream>
#include <string>
#include <vector>

#include "pearsonbf/errors.hpp"
#include "pearsonbf/special_functions.hpp"
#include "pearsonbf/summary_stats.hpp"

namespace pearsonbf {

// Complete n x k measurement matrix: one row per subject, one column per
// condition. Missing cells are rejected, never imputed.
struct DataMatrix {
  int n_subjects = 0;
  int k_conditions = 0;
  std::vector<double> values;  // row-major

  double at(int i, int j) const { return values[i * k_conditions + j]; }
  double& at(int i, int j) { return values[i * k_conditions + j]; }

  void validate() const {
    if (n_subjects < 2 || k_conditions < 2) {
      throw DimensionError("DataMatrix: need at least 2 subjects and 2 "
                           "conditions, got " +
                           std::to_string(n_subjects) + " x " +
                           std::to_string(k_conditions));
    }
    if (values.size() !=
        static_cast<size_t>(n_subjects) * static_cast<size_t>(k_conditions)) {
      throw DimensionError("DataMatrix: cell count does not match dimensions");
    }
    for (double v : values) {
      if (!std::isfinite(v)) {
        throw DomainError("DataMatrix: all cells must be finite");
      }
    }
  }
};

struct AnovaTable {
  double ssa;  // treatment
  double ssb;  // subject
  double ssr;  // residual
  double sst;  // total
  int df_treatment;
  int df_residual;
  double f_stat;
  Probability p_value;
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  fields.push_back(cur);
  return fields;
}

inline double parse_cell(const std::string& text, int row, int col) {
  const size_t b = text.find_first_not_of(" \t");
  if (b == std::string::npos) {
    throw CsvError("row " + std::to_string(row) + ", column " +
                   std::to_string(col) + ": empty cell");
  }
  const size_t e = text.find_last_not_of(" \t");
  const std::string field = text.substr(b, e - b + 1);
  char* end = nullptr;
  const double v = std::strtod(field.c_str(), &end);
  if (end != field.c_str() + field.size()) {
    throw CsvError("row " + std::to_string(row) + ", column " +
                   std::to_string(col) + ": not a number: '" + field + "'");
  }
  return v;
}

}  // namespace detail

// Reads the raw-data CSV schema: header `subject,c1,...,ck`, one row per
// subject, numeric cells. Row/column positions are 1-based in diagnostics
// (the header is row 1).
inline DataMatrix read_data_matrix(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) {
    throw CsvError("empty input: expected a header row 'subject,c1,...,ck'");
  }
  const auto header = detail::split_csv_line(line);
  if (header.size() < 2) {
    throw CsvError("row 1: header must name a subject column and at least "
                   "one condition column");
  }
  const int k = static_cast<int>(header.size()) - 1;
  DataMatrix data;
  data.k_conditions = k;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line == "\r") continue;
    const auto fields = detail::split_csv_line(line);
    if (static_cast<int>(fields.size()) != k + 1) {
      throw CsvError("row " + std::to_string(row) + ": expected " +
                     std::to_string(k + 1) + " fields, got " +
                     std::to_string(fields.size()));
    }
    for (int j = 0; j < k; ++j) {
      data.values.push_back(detail::parse_cell(fields[j + 1], row, j + 2));
    }
    ++data.n_subjects;
  }
  data.validate();
  return data;
}

// One-way repeated-measures decomposition:
//   SSA = n sum_j (colmean_j - grand)^2      (treatment)
//   SSB = k sum_i (rowmean_i - grand)^2      (subject)
//   SST = sum_ij (y_ij - grand)^2
//   SSR = SST - SSA - SSB
//   F   = (SSA/SSR) * (n-1)
// Means are computed in a first pass and deviations summed in a second, so
// the invariance properties (translation, scale, ...) hold to ~1e-12.
inline AnovaTable rm_anova(const DataMatrix& data) {
  data.validate();
  const int n = data.n_subjects;
  const int k = data.k_conditions;

  double total = 0.0;
  std::vector<double> col_sum(k, 0.0), row_sum(n, 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < k; ++j) {
      const double v = data.at(i, j);
      total += v;
      col_sum[j] += v;
      row_sum[i] += v;
    }
  }
  const double grand = total / (static_cast<double>(n) * k);

  double ssa = 0.0, ssb = 0.0, sst = 0.0;
  for (int j = 0; j < k; ++j) {
    const double d = col_sum[j] / n - grand;
    ssa += d * d;
  }
  ssa *= n;
  for (int i = 0; i < n; ++i) {
    const double d = row_sum[i] / k - grand;
    ssb += d * d;
  }
  ssb *= k;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < k; ++j) {
      const double d = data.at(i, j) - grand;
      sst += d * d;
    }
  }
  double ssr = sst - ssa - ssb;
  if (ssr < 0.0) ssr = 0.0;  // rounding residue on exactly additive data
  if (sst <= 0.0 || ssr <= 1e-12 * sst) {
    throw DegenerateDataError(
        "rm_anova: residual sum of squares is zero, F is undefined");
  }

  const int x = k - 1;
  const int y = (n - 1) * (k - 1);
  const double f = (ssa / ssr) * (static_cast<double>(y) / x);
  return {ssa, ssb, ssr, sst, x, y, f, f_upper_tail(f, x, y)};
}

// Packages an ANOVA table as the summary tuple the Bayes factor formulas
// consume; the SummaryStats invariants re-check df consistency.
inline SummaryStats summary_from_anova(const AnovaTable& table, int n, int k) {
  SummaryStats stats{table.f_stat, table.df_treatment, table.df_residual, n, k};
  stats.validate();
  return stats;
}

}  // namespace pearsonbf
