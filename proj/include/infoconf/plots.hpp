#pragma once

// Tabulated curves for the figures: exponential density and distribution,
// sigmoid, net forces, the mirrored spirals and their 3-D "universe" form.
// Output is plain CSV data for any plotting tool.

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace infoconf {

struct PlotSeries {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  /// Throws InputError unless every row matches the column count and the
  /// first column strictly increases.
  void validate() const;

  /// Header row then one line per row, shortest round-trip numbers.
  void write_csv(std::ostream& out) const;

  /// Index of a column by name; InputError if absent.
  std::size_t column(std::string_view name) const;
};

struct PlotOptions {
  std::size_t grid = 513;  // odd so symmetric grids hit their center
  std::vector<double> lambdas{100.0, 20.0, 10.0};
  std::vector<double> expectations{1.0, 0.5, 1.0 / 3.0, 2.0};
  double k_limit = 10.0;  // sigmoid K range [-k_limit, k_limit]
  double x_max = 1.0;     // exponential curves over [0, x_max]
  double inset = 1e-3;    // performance grids use [inset, 1 - inset]

  void validate() const;
};

/// exp-density, exp-distribution, sigmoid, net-force, spirals, universe.
const std::vector<std::string>& plot_names();

/// Throws InputError listing the valid names for an unknown figure.
PlotSeries make_plot(std::string_view name, const PlotOptions& options = {});

/// n evenly spaced points on [center - half_width, center + half_width]. The
/// center itself is hit exactly when n is odd.
std::vector<double> symmetric_grid(double center, double half_width, std::size_t n);

}  // namespace infoconf
