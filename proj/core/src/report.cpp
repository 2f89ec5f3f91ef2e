#include "biasbench/report.hpp"

#include <fmt/format.h>

#include <fstream>
#include <map>

#include "biasbench/error.hpp"

namespace biasbench {

namespace {

std::size_t bias_index(BiasCategory b) {
  for (std::size_t i = 0; i < kAllBiases.size(); ++i) {
    if (kAllBiases[i] == b) return i;
  }
  return 0;
}

std::string csv_number(const std::optional<double>& v) { return v ? fmt::format("{}", *v) : std::string(); }
std::string md_number(const std::optional<double>& v) { return v ? fmt::format("{:.3f}", *v) : std::string("–"); }

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string dimension_title(Dimension d) {
  switch (d) {
    case Dimension::Model: return "model";
    case Dimension::Bias: return "bias";
    case Dimension::Level: return "level";
    case Dimension::Temperature: return "temperature";
  }
  return "group";
}

std::string row_label(const GroupKey& key, Dimension d) {
  switch (d) {
    case Dimension::Model: return key.model.value_or("");
    case Dimension::Level: return key.level ? fmt::format("L{}", *key.level) : "";
    case Dimension::Temperature: return key.temperature ? temperature_key(*key.temperature) : "";
    case Dimension::Bias: return key.bias ? std::string(to_string(*key.bias)) : "";
  }
  return "";
}

}  // namespace

PivotTable pivot_by_bias(const std::vector<Classification>& classifications, Dimension row_dimension) {
  if (row_dimension == Dimension::Bias) throw ValidationError("pivot rows cannot be the bias dimension");
  const GroupBy row_only = GroupBy::of({row_dimension});
  std::map<GroupKey, std::array<Tally, 8>> grid;
  for (const Classification& c : classifications) {
    grid[key_for(c, row_only)][bias_index(c.bias)].add(c.outcome);
  }
  PivotTable table;
  table.row_dimension = row_dimension;
  for (const auto& [key, tallies] : grid) {
    table.row_labels.push_back(row_label(key, row_dimension));
    std::vector<std::optional<double>> row;
    double sum = 0.0;
    std::size_t present = 0;
    for (const Tally& t : tallies) {
      row.push_back(t.score());
      if (auto s = t.score()) {
        sum += *s;
        ++present;
      }
    }
    table.cells.push_back(std::move(row));
    table.average.push_back(present == 0 ? std::nullopt : std::optional<double>(sum / static_cast<double>(present)));
  }
  return table;
}

std::string render_pivot(const PivotTable& table, ReportFormat format) {
  std::vector<std::string> header{dimension_title(table.row_dimension)};
  for (BiasCategory b : kAllBiases) header.emplace_back(format == ReportFormat::Csv ? to_string(b) : display_name(b));
  header.emplace_back(format == ReportFormat::Csv ? "average" : "Average");

  std::string out;
  if (format == ReportFormat::Csv) {
    out += fmt::format("{}\n", fmt::join(header, ","));
    for (std::size_t r = 0; r < table.rows(); ++r) {
      out += csv_escape(table.row_labels[r]);
      for (const auto& cell : table.cells[r]) out += "," + csv_number(cell);
      out += "," + csv_number(table.average[r]) + "\n";
    }
    return out;
  }
  out += fmt::format("| {} |\n", fmt::join(header, " | "));
  out += "|---";
  for (std::size_t i = 1; i < header.size(); ++i) out += "|---:";
  out += "|\n";
  for (std::size_t r = 0; r < table.rows(); ++r) {
    out += "| " + table.row_labels[r];
    for (const auto& cell : table.cells[r]) out += " | " + md_number(cell);
    out += " | " + md_number(table.average[r]) + " |\n";
  }
  return out;
}

std::string render_scores(const std::vector<ResistanceScore>& rows, GroupBy group_by, ReportFormat format) {
  std::vector<Dimension> dims;
  for (Dimension d : {Dimension::Model, Dimension::Bias, Dimension::Level, Dimension::Temperature}) {
    if (group_by.has(d)) dims.push_back(d);
  }
  std::vector<std::string> header;
  for (Dimension d : dims) header.push_back(dimension_title(d));
  for (const char* h : {"n_total", "n_biased", "n_unbiased", "n_unrelated", "score"}) header.emplace_back(h);

  std::string out;
  const bool csv = format == ReportFormat::Csv;
  if (csv) {
    out += fmt::format("{}\n", fmt::join(header, ","));
  } else {
    out += fmt::format("| {} |\n|{}\n", fmt::join(header, " | "), [&] {
      std::string sep;
      for (std::size_t i = 0; i < header.size(); ++i) sep += i < dims.size() ? "---|" : "---:|";
      return sep;
    }());
  }
  for (const ResistanceScore& row : rows) {
    std::vector<std::string> cells;
    for (Dimension d : dims) cells.push_back(csv ? csv_escape(row_label(row.key, d)) : row_label(row.key, d));
    cells.push_back(std::to_string(row.tally.n_total()));
    cells.push_back(std::to_string(row.tally.n_biased));
    cells.push_back(std::to_string(row.tally.n_unbiased));
    cells.push_back(std::to_string(row.tally.n_unrelated));
    cells.push_back(csv ? csv_number(row.score()) : md_number(row.score()));
    out += csv ? fmt::format("{}\n", fmt::join(cells, ",")) : fmt::format("| {} |\n", fmt::join(cells, " | "));
  }
  return out;
}

void write_report(const std::filesystem::path& path, const std::string& content) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(fmt::format("cannot write report '{}'", path.string()));
  out << content;
  if (!out) throw Error(fmt::format("write to '{}' failed", path.string()));
}

}  // namespace biasbench
