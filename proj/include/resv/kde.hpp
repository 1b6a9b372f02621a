#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace resv {

// Recursive kernel density estimator with per-observation bandwidths
// h_k = k^{-gamma}, gamma = 1 / (2 beta + 1), and a Gaussian kernel. After n
// observations the grid holds
//
//   f_n(x) = (1/n) sum_k (1/h_k) K((X_k - x) / h_k),
//
// maintained with the update f_{n+1} = n/(n+1) f_n + K(.)/((n+1) h_{n+1}).
// Values between grid nodes are linearly interpolated.
//
// Single writer; concurrent readers are fine between updates.
class RecursiveKde {
 public:
  static constexpr std::size_t kDefaultGridPoints = 512;

  RecursiveKde(double grid_min, double grid_max, std::size_t grid_points = kDefaultGridPoints,
               double beta = 1.0);

  void update(double observation);

  /// Density estimate at x; zero outside the grid. Throws before the first update.
  double eval(double x) const;

  std::size_t count() const noexcept { return count_; }
  double beta() const noexcept { return beta_; }
  double bandwidth(std::size_t k) const;

  std::span<const double> grid() const noexcept { return grid_; }
  std::span<const double> density() const noexcept { return density_; }

 private:
  double beta_;
  double gamma_;
  std::size_t count_ = 0;
  std::vector<double> grid_;
  std::vector<double> density_;
};

}  // namespace resv
