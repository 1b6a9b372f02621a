#include "resv/kde.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace resv {

RecursiveKde::RecursiveKde(double grid_min, double grid_max, std::size_t grid_points, double beta)
    : beta_(beta), gamma_(1.0 / (2.0 * beta + 1.0)) {
  if (!(beta > 0.0)) throw std::invalid_argument("kde: beta must be positive");
  if (!(grid_max > grid_min) || grid_points < 2) {
    throw std::invalid_argument("kde: grid needs max > min and at least two points");
  }
  grid_.resize(grid_points);
  density_.assign(grid_points, 0.0);
  const double step = (grid_max - grid_min) / static_cast<double>(grid_points - 1);
  for (std::size_t i = 0; i < grid_points; ++i) {
    grid_[i] = grid_min + step * static_cast<double>(i);
  }
  grid_.back() = grid_max;
}

double RecursiveKde::bandwidth(std::size_t k) const {
  return std::pow(static_cast<double>(k), -gamma_);
}

void RecursiveKde::update(double observation) {
  if (!std::isfinite(observation)) throw std::invalid_argument("kde: observation must be finite");
  const double n = static_cast<double>(count_);
  const double h = bandwidth(count_ + 1);
  const double keep = n / (n + 1.0);
  const double scale = 1.0 / ((n + 1.0) * h * std::sqrt(2.0 * std::numbers::pi));
  for (std::size_t i = 0; i < grid_.size(); ++i) {
    const double u = (observation - grid_[i]) / h;
    density_[i] = keep * density_[i] + scale * std::exp(-0.5 * u * u);
  }
  ++count_;
}

double RecursiveKde::eval(double x) const {
  if (count_ == 0) throw std::logic_error("kde: no observations yet");
  if (x < grid_.front() || x > grid_.back()) return 0.0;
  const double step = grid_[1] - grid_[0];
  auto i = static_cast<std::size_t>((x - grid_.front()) / step);
  if (i >= grid_.size() - 1) i = grid_.size() - 2;
  const double w = (x - grid_[i]) / (grid_[i + 1] - grid_[i]);
  return (1.0 - w) * density_[i] + w * density_[i + 1];
}

}  // namespace resv
