#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace dig {

struct ReproduceOptions {
  unsigned jobs = 0;
  std::size_t resolution = 128;  // grid points per axis for surfaces and curves
};

struct ReproducedFile {
  std::string path;  // relative to the output directory
  std::string description;
  std::size_t rows = 0;
};

struct FigureData {
  std::string figure;
  std::string model;
  std::vector<ReproducedFile> files;
  double max_curve_residual = 0.0;
};

/// fig2, fig5, fig7, fig9, fig11, fig16, fig17, s1 ... s6.
const std::vector<std::string>& figure_ids();

/// Writes the CSV data behind one figure (or "all") into `dir` and a
/// manifest.json describing every file. Throws ValidationError("UnknownFigure").
std::vector<FigureData> reproduce(const std::string& id, const std::filesystem::path& dir,
                                  const ReproduceOptions& opts = {});

}  // namespace dig
