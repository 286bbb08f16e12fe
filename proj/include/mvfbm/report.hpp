#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mvfbm/experiments.hpp"
#include "mvfbm/fgn.hpp"
#include "mvfbm/solver.hpp"

namespace mvfbm::report {

/// Header plus rows of already-formatted cells.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

/// 17 significant digits ("%.17g"); parsing the text recovers the exact double.
std::string format_double(double value);

std::string to_csv(const CsvTable& table);
void write_text(const std::filesystem::path& path, const std::string& text);
void write_csv(const CsvTable& table, const std::filesystem::path& path);
CsvTable parse_csv(const std::string& text);
CsvTable read_csv(const std::filesystem::path& path);

CsvTable fbm_table(const std::vector<NoiseBlock>& blocks);
CsvTable trajectory_table(const EnsembleTrajectory& traj);
CsvTable error_table(const std::vector<ErrorTable>& tables);
CsvTable chaos_table(const ChaosTable& table);
CsvTable maximal_table(const std::vector<MaximalProbe>& probes);
CsvTable moment_table(const MomentProbe& probe);

std::string convergence_summary(const std::vector<ErrorTable>& tables);
std::string chaos_summary(const ChaosTable& table, const ChaosStudy& study);
std::string maximal_summary(const std::vector<MaximalProbe>& probes);
std::string moment_summary(const MomentProbe& probe);

/// One series on a log2-log2 plot.
struct PlotSeries {
  std::string label;
  std::vector<double> x;  ///< already in log2 units
  std::vector<double> y;
  bool has_fit = false;
  double fit_slope = 0.0;
  double fit_intercept = 0.0;
  bool has_reference = false;  ///< dashed line with this slope through the first point
  double reference_slope = 0.0;
};

std::string render_svg(const std::string& title, const std::string& x_label, const std::string& y_label,
                       const std::vector<PlotSeries>& series);
void write_svg(const std::string& svg, const std::filesystem::path& path);

std::vector<PlotSeries> convergence_plot(const std::vector<ErrorTable>& tables);
std::vector<PlotSeries> chaos_plot(const ChaosTable& table);
std::vector<PlotSeries> maximal_plot(const std::vector<MaximalProbe>& probes);
std::vector<PlotSeries> moment_plot(const MomentProbe& probe);

/// 64-bit FNV-1a digest, hex encoded.
std::string fnv1a_hex(const std::string& bytes);
std::string file_digest(const std::filesystem::path& path);

}  // namespace mvfbm::report
