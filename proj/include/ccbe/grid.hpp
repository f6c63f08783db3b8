#ifndef CCBE_GRID_HPP_
#define CCBE_GRID_HPP_

#include <cstddef>
#include <vector>

namespace ccbe {

/// Truncation size n and flavour tau (1 = conservative, 0 = non-conservative).
struct TruncationConfig {
  double n = 10.0;
  int tau = 1;

  double cutoff_low() const { return 1.0 / n; }
  bool conservative() const { return tau == 1; }
};

void validate(const TruncationConfig &trunc);

struct CellLocation {
  enum class Kind { Below, Inside, Above };
  Kind kind = Kind::Inside;
  std::size_t index = 0;

  bool inside() const { return kind == Kind::Inside; }
};

/**
 * Geometric mesh on [v_min, n] with I cells.
 *
 * Cell i spans [edges[i], edges[i+1]) and carries a piecewise-constant
 * density. The representative reps[i] is the cell midpoint, i.e. the mean
 * particle volume of a uniform density on the cell, so that sum_i reps[i]
 * widths[i] g_i is exactly the first moment of the piecewise-constant field.
 */
class Grid {
public:
  std::size_t size() const { return reps_.size(); }
  double n() const { return edges_.back(); }
  double v_min() const { return edges_.front(); }
  double ratio() const { return ratio_; }

  const std::vector<double> &edges() const { return edges_; }
  const std::vector<double> &reps() const { return reps_; }
  const std::vector<double> &widths() const { return widths_; }

  double lower(std::size_t i) const { return edges_[i]; }
  double upper(std::size_t i) const { return edges_[i + 1]; }
  double rep(std::size_t i) const { return reps_[i]; }
  double width(std::size_t i) const { return widths_[i]; }

  CellLocation locate(double v) const;

  /// Largest m with reps[m] <= v, or size() if v < reps[0].
  std::size_t pivot_below(double v) const;

  /// Integral of v^p over cell i. p = -1 is rejected.
  double cell_weight_integral(std::size_t i, double p) const;

  friend Grid build_grid(double n, std::size_t cells, double v_min);

private:
  std::vector<double> edges_;
  std::vector<double> reps_;
  std::vector<double> widths_;
  double ratio_ = 1.0;
};

/// min(1e-4, 1/(2n)): keeps the 1/n indicator cutoff strictly inside the mesh.
double default_v_min(double n);

Grid build_grid(double n, std::size_t cells, double v_min);

/// Exact integral of v^p over [a, b], 0 < a <= b, p != -1.
double power_integral(double a, double b, double p);

} // namespace ccbe

#endif // CCBE_GRID_HPP_
