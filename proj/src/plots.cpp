#include "infoconf/plots.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include "infoconf/entropy.hpp"
#include "infoconf/error.hpp"
#include "infoconf/kernels.hpp"
#include "infoconf/numfmt.hpp"

namespace infoconf {
namespace {

std::string param_column(const char* prefix, double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%s=%g", prefix, v);
  return buf;
}

PlotSeries exponential_curves(const char* name, const PlotOptions& o, bool density) {
  PlotSeries s{name, {"x"}, {}};
  const auto x = symmetric_grid(0.5 * o.x_max, 0.5 * o.x_max, o.grid);
  std::vector<std::vector<double>> cols;
  for (double lambda : o.lambdas) {
    s.columns.push_back(param_column("lambda", lambda));
    std::vector<double> y(x.size());
    if (density) {
      kernels::exp_density(x, lambda, y);
    } else {
      kernels::exp_distribution(x, lambda, y);
    }
    cols.push_back(std::move(y));
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    std::vector<double> row{x[i]};
    for (const auto& c : cols) row.push_back(c[i]);
    s.rows.push_back(std::move(row));
  }
  return s;
}

PlotSeries sigmoid_curves(const PlotOptions& o) {
  PlotSeries s{"sigmoid", {"K"}, {}};
  const auto k = symmetric_grid(0.0, o.k_limit, o.grid);
  std::vector<std::vector<double>> cols;
  for (double e : o.expectations) {
    s.columns.push_back(param_column("E", e));
    cols.push_back(sigmoid(std::span<const double>(k), e));
  }
  for (std::size_t i = 0; i < k.size(); ++i) {
    std::vector<double> row{k[i]};
    for (const auto& c : cols) row.push_back(c[i]);
    s.rows.push_back(std::move(row));
  }
  return s;
}

PlotSeries net_force_curves(const PlotOptions& o) {
  PlotSeries s{"net-force", {"p", "net_force", "net_force_self", "mirrored_net_force_self"}, {}};
  for (double p : symmetric_grid(0.5, 0.5 - o.inset, o.grid)) {
    s.rows.push_back({p, net_force(p, 1.0), net_force_self(p), mirrored_net_force_self(p)});
  }
  return s;
}

PlotSeries spiral_curves(const PlotOptions& o, bool universe) {
  const auto p = symmetric_grid(0.5, 0.5 - o.inset, o.grid);
  const auto polar = spiral_curve(p);
  const auto [branch, mirror] = mirrored_spirals(p);
  PlotSeries s;
  if (universe) {
    s = {"universe", {"p", "x", "y", "t", "x_mirror", "y_mirror"}, {}};
  } else {
    s = {"spirals", {"p", "theta", "r", "x", "y", "x_mirror", "y_mirror"}, {}};
  }
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (universe) {
      s.rows.push_back({p[i], branch[i].x, branch[i].y, p[i], mirror[i].x, mirror[i].y});
    } else {
      s.rows.push_back({p[i], polar[i].theta, polar[i].r, branch[i].x, branch[i].y, mirror[i].x, mirror[i].y});
    }
  }
  return s;
}

}  // namespace

void PlotSeries::validate() const {
  if (columns.empty()) throw InputError("plot '" + name + "': no columns");
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != columns.size()) {
      throw InputError("plot '" + name + "': row " + std::to_string(i) + " has " + std::to_string(rows[i].size()) +
                       " values, expected " + std::to_string(columns.size()));
    }
    if (i > 0 && !(rows[i][0] > rows[i - 1][0])) {
      throw InputError("plot '" + name + "': first column not strictly increasing at row " + std::to_string(i));
    }
  }
}

void PlotSeries::write_csv(std::ostream& out) const {
  for (std::size_t c = 0; c < columns.size(); ++c) out << (c ? "," : "") << columns[c];
  out << '\n';
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << format_double(row[c]);
    out << '\n';
  }
}

std::size_t PlotSeries::column(std::string_view wanted) const {
  for (std::size_t c = 0; c < columns.size(); ++c) {
    if (columns[c] == wanted) return c;
  }
  throw InputError("plot '" + name + "' has no column '" + std::string(wanted) + "'");
}

void PlotOptions::validate() const {
  if (grid < 2) throw InputError("grid must have at least 2 points");
  for (double l : lambdas) {
    if (!(l > 0.0) || !std::isfinite(l)) throw InputError("lambda must be positive");
  }
  for (double e : expectations) {
    if (!(e > 0.0) || !std::isfinite(e)) throw InputError("expectation must be positive");
  }
  if (!(k_limit > 0.0) || !std::isfinite(k_limit)) throw InputError("K range must be positive");
  if (!(x_max > 0.0) || !std::isfinite(x_max)) throw InputError("x range must be positive");
  if (!(inset > 0.0 && inset < 0.5)) throw InputError("inset must lie in (0, 0.5)");
}

const std::vector<std::string>& plot_names() {
  static const std::vector<std::string> names{"exp-density", "exp-distribution", "sigmoid",
                                              "net-force",   "spirals",          "universe"};
  return names;
}

PlotSeries make_plot(std::string_view name, const PlotOptions& options) {
  options.validate();
  PlotSeries s;
  if (name == "exp-density") {
    s = exponential_curves("exp-density", options, true);
  } else if (name == "exp-distribution") {
    s = exponential_curves("exp-distribution", options, false);
  } else if (name == "sigmoid") {
    s = sigmoid_curves(options);
  } else if (name == "net-force") {
    s = net_force_curves(options);
  } else if (name == "spirals") {
    s = spiral_curves(options, false);
  } else if (name == "universe") {
    s = spiral_curves(options, true);
  } else {
    std::string valid;
    for (const auto& n : plot_names()) valid += (valid.empty() ? "" : ", ") + n;
    throw InputError("unknown figure '" + std::string(name) + "' (valid: " + valid + ")");
  }
  s.validate();
  return s;
}

std::vector<double> symmetric_grid(double center, double half_width, std::size_t n) {
  if (n < 2 || !(half_width > 0.0)) throw InputError("symmetric_grid: need n >= 2 and a positive half width");
  std::vector<double> g(n);
  const double denom = static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = (2.0 * static_cast<double>(i) - denom) / denom;
    g[i] = center + half_width * t;
  }
  return g;
}

}  // namespace infoconf
