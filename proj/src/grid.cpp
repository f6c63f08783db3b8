#include "ccbe/grid.hpp"

#include "ccbe/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ccbe {

void validate(const TruncationConfig &trunc) {
  if (!(trunc.n > 0.0))
    throw ConfigurationError("truncation size n must be positive");
  if (trunc.tau != 0 && trunc.tau != 1)
    throw ConfigurationError("tau must be 0 or 1");
}

double default_v_min(double n) { return std::min(1e-4, 1.0 / (2.0 * n)); }

double power_integral(double a, double b, double p) {
  if (p == -1.0)
    throw DomainError("weight v^-1 is not supported");
  const double q = p + 1.0;
  return (std::pow(b, q) - std::pow(a, q)) / q;
}

Grid build_grid(double n, std::size_t cells, double v_min) {
  if (cells < 8)
    throw ConfigurationError("grid needs at least 8 cells (got " + std::to_string(cells) + ")");
  if (!(v_min > 0.0) || !(v_min < n))
    throw ConfigurationError("grid needs 0 < v_min < n");

  Grid g;
  const double log_span = std::log(n / v_min);
  g.ratio_ = std::exp(log_span / static_cast<double>(cells));
  g.edges_.resize(cells + 1);
  for (std::size_t i = 0; i <= cells; ++i)
    g.edges_[i] = v_min * std::exp(log_span * static_cast<double>(i) / static_cast<double>(cells));
  g.edges_.front() = v_min;
  g.edges_.back() = n;

  g.reps_.resize(cells);
  g.widths_.resize(cells);
  for (std::size_t i = 0; i < cells; ++i) {
    g.reps_[i] = 0.5 * (g.edges_[i] + g.edges_[i + 1]);
    g.widths_[i] = g.edges_[i + 1] - g.edges_[i];
  }
  return g;
}

CellLocation Grid::locate(double v) const {
  if (v < edges_.front())
    return {CellLocation::Kind::Below, 0};
  if (v >= edges_.back())
    return {CellLocation::Kind::Above, size()};
  // first edge strictly greater than v; the cell is the one before it
  auto it = std::upper_bound(edges_.begin(), edges_.end(), v);
  return {CellLocation::Kind::Inside, static_cast<std::size_t>(it - edges_.begin()) - 1};
}

std::size_t Grid::pivot_below(double v) const {
  auto it = std::upper_bound(reps_.begin(), reps_.end(), v);
  if (it == reps_.begin())
    return size();
  return static_cast<std::size_t>(it - reps_.begin()) - 1;
}

double Grid::cell_weight_integral(std::size_t i, double p) const {
  // same values as the closed form, written so that M0 and M1 match the
  // width / rep sums used by the operators bit for bit
  if (p == 0.0)
    return widths_[i];
  if (p == 1.0)
    return reps_[i] * widths_[i];
  return power_integral(edges_[i], edges_[i + 1], p);
}

} // namespace ccbe
