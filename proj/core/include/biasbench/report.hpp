#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "biasbench/scoring.hpp"

namespace biasbench {

/// Rows of one dimension against the eight bias columns plus an average
/// column, as in the per-model and per-level resistance tables.
struct PivotTable {
  Dimension row_dimension = Dimension::Model;
  std::vector<std::string> row_labels;
  /// cells[row][bias index in kAllBiases]; absent when the group is empty.
  std::vector<std::vector<std::optional<double>>> cells;
  /// Unweighted mean of the row's present bias scores.
  std::vector<std::optional<double>> average;

  std::size_t rows() const { return row_labels.size(); }
  /// Label column, one column per bias, and the average.
  static constexpr std::size_t kColumns = 1 + 8 + 1;
};

/// `row_dimension` must be Model, Level or Temperature.
PivotTable pivot_by_bias(const std::vector<Classification>& classifications, Dimension row_dimension);

enum class ReportFormat { Csv, Markdown };

std::string render_pivot(const PivotTable& table, ReportFormat format);

/// Long-form table: one line per group with counts and the score.
std::string render_scores(const std::vector<ResistanceScore>& rows, GroupBy group_by, ReportFormat format);

/// Writes `content` to `path`, creating parent directories. Throws Error
/// when the path cannot be written.
void write_report(const std::filesystem::path& path, const std::string& content);

}  // namespace biasbench
