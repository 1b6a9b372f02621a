#include "resv/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <boost/math/special_functions/erf.hpp>

#include "resv/kde.hpp"
#include "resv/quadrature.hpp"

namespace resv {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLn2 = std::numbers::ln2;

// Tail mass beyond which demand integrals are truncated.
constexpr double kDemandTail = 1e-14;
// exp(-40) is below half an ulp of 1, so Z == 1 past this normalized level.
constexpr double kSaturationLevel = 40.0;

double standard_normal_quantile(double p) {
  return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
}

std::shared_ptr<const TabulatedDensity> tabulate_nonnegative(const RecursiveKde& kde) {
  auto grid = kde.grid();
  auto dens = kde.density();
  auto table = std::make_shared<TabulatedDensity>();
  if (grid.front() < 0.0 && grid.back() > 0.0) {
    table->grid.push_back(0.0);
    table->density.push_back(kde.eval(0.0));
  }
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid[i] < 0.0) continue;
    if (!table->grid.empty() && grid[i] == table->grid.back()) continue;
    table->grid.push_back(grid[i]);
    table->density.push_back(dens[i]);
  }
  if (table->grid.size() < 2) {
    throw std::invalid_argument("empirical demand: estimator grid has no nonnegative support");
  }
  table->cumulative.assign(table->grid.size(), 0.0);
  for (std::size_t i = 1; i < table->grid.size(); ++i) {
    const double width = table->grid[i] - table->grid[i - 1];
    table->cumulative[i] =
        table->cumulative[i - 1] + 0.5 * width * (table->density[i] + table->density[i - 1]);
  }
  const double mass = table->cumulative.back();
  if (!(mass > 0.0)) throw std::invalid_argument("empirical demand: no mass on [0, inf)");
  for (auto& f : table->density) f /= mass;
  for (auto& c : table->cumulative) c /= mass;
  table->cumulative.back() = 1.0;
  return table;
}

// Index i with grid[i] <= y < grid[i+1], clamped to valid segments.
std::size_t segment_of(const TabulatedDensity& t, double y) {
  auto it = std::upper_bound(t.grid.begin(), t.grid.end(), y);
  std::size_t i = static_cast<std::size_t>(std::distance(t.grid.begin(), it));
  if (i == 0) return 0;
  return std::min(i - 1, t.grid.size() - 2);
}

double table_pdf(const TabulatedDensity& t, double y) {
  if (y < t.grid.front() || y > t.grid.back()) return 0.0;
  const std::size_t i = segment_of(t, y);
  const double w = (y - t.grid[i]) / (t.grid[i + 1] - t.grid[i]);
  return (1.0 - w) * t.density[i] + w * t.density[i + 1];
}

double table_cdf(const TabulatedDensity& t, double y) {
  if (y <= t.grid.front()) return 0.0;
  if (y >= t.grid.back()) return 1.0;
  const std::size_t i = segment_of(t, y);
  return t.cumulative[i] + 0.5 * (y - t.grid[i]) * (t.density[i] + table_pdf(t, y));
}

}  // namespace

// ---------------------------------------------------------------------------
// DemandDistribution

DemandDistribution DemandDistribution::lognormal(double eta, double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(eta)) {
    throw std::invalid_argument("lognormal demand needs finite eta and sigma > 0");
  }
  DemandDistribution d;
  d.kind_ = DemandKind::lognormal;
  d.eta_ = eta;
  d.sigma_ = sigma;
  return d;
}

DemandDistribution DemandDistribution::point_mass(double value) {
  if (!(value >= 0.0) || !std::isfinite(value)) {
    throw std::invalid_argument("point-mass demand must be finite and nonnegative");
  }
  DemandDistribution d;
  d.kind_ = DemandKind::point_mass;
  d.atom_ = value;
  return d;
}

DemandDistribution DemandDistribution::empirical(const RecursiveKde& kde) {
  if (kde.count() == 0) throw std::invalid_argument("empirical demand: estimator is empty");
  DemandDistribution d;
  d.kind_ = DemandKind::empirical;
  d.table_ = tabulate_nonnegative(kde);
  return d;
}

double DemandDistribution::pdf(double y) const {
  switch (kind_) {
    case DemandKind::lognormal: {
      if (y <= 0.0) return 0.0;
      const double z = (std::log(y) - eta_) / sigma_;
      return std::exp(-0.5 * z * z) / (y * sigma_ * std::sqrt(2.0 * std::numbers::pi));
    }
    case DemandKind::point_mass:
      return 0.0;
    case DemandKind::empirical:
      return table_pdf(*table_, y);
  }
  return 0.0;
}

double DemandDistribution::cdf(double y) const {
  switch (kind_) {
    case DemandKind::lognormal:
      if (y <= 0.0) return 0.0;
      return 0.5 * std::erfc(-(std::log(y) - eta_) / (sigma_ * std::numbers::sqrt2));
    case DemandKind::point_mass:
      return y >= atom_ ? 1.0 : 0.0;
    case DemandKind::empirical:
      return table_cdf(*table_, y);
  }
  return 0.0;
}

double DemandDistribution::survival(double y) const {
  if (kind_ == DemandKind::lognormal) {
    if (y <= 0.0) return 1.0;
    return 0.5 * std::erfc((std::log(y) - eta_) / (sigma_ * std::numbers::sqrt2));
  }
  return 1.0 - cdf(y);
}

double DemandDistribution::mean() const {
  switch (kind_) {
    case DemandKind::lognormal:
      return std::exp(eta_ + 0.5 * sigma_ * sigma_);
    case DemandKind::point_mass:
      return atom_;
    case DemandKind::empirical: {
      const auto& t = *table_;
      return quad::integrate([&](double y) { return y * table_pdf(t, y); }, t.grid.front(),
                             t.grid.back(), t.grid, {1e-12, 1e-10});
    }
  }
  return 0.0;
}

double DemandDistribution::quantile(double p) const {
  if (!(p >= 0.0 && p <= 1.0)) throw std::domain_error("quantile: p must lie in [0, 1]");
  switch (kind_) {
    case DemandKind::lognormal:
      if (p == 0.0) return 0.0;
      if (p == 1.0) return kInf;
      return std::exp(eta_ + sigma_ * standard_normal_quantile(p));
    case DemandKind::point_mass:
      return atom_;
    case DemandKind::empirical: {
      const auto& t = *table_;
      if (p <= 0.0) return t.grid.front();
      if (p >= 1.0) return t.grid.back();
      auto it = std::lower_bound(t.cumulative.begin(), t.cumulative.end(), p);
      std::size_t i = static_cast<std::size_t>(std::distance(t.cumulative.begin(), it));
      i = std::clamp<std::size_t>(i, 1, t.grid.size() - 1);
      double lo = t.grid[i - 1];
      double hi = t.grid[i];
      for (int k = 0; k < 80 && hi - lo > 1e-14 * std::max(1.0, hi); ++k) {
        const double mid = 0.5 * (lo + hi);
        (table_cdf(t, mid) < p ? lo : hi) = mid;
      }
      return hi;
    }
  }
  return 0.0;
}

double DemandDistribution::upper_quantile(double q) const {
  if (!(q >= 0.0 && q <= 1.0)) throw std::domain_error("upper_quantile: q must lie in [0, 1]");
  if (kind_ == DemandKind::lognormal) {
    if (q == 0.0) return kInf;
    return std::exp(eta_ + sigma_ * std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * q));
  }
  return quantile(1.0 - q);
}

double DemandDistribution::sup_pdf() const {
  switch (kind_) {
    case DemandKind::lognormal:
      // Attained at the mode exp(eta - sigma^2).
      return std::exp(-eta_ + 0.5 * sigma_ * sigma_) /
             (sigma_ * std::sqrt(2.0 * std::numbers::pi));
    case DemandKind::point_mass:
      return kInf;
    case DemandKind::empirical:
      return *std::max_element(table_->density.begin(), table_->density.end());
  }
  return kInf;
}

double DemandDistribution::sample(double u) const { return quantile(u); }

// ---------------------------------------------------------------------------
// ChannelDistribution

ChannelDistribution ChannelDistribution::rayleigh(double mean_snr) {
  if (!(mean_snr > 0.0) || !std::isfinite(mean_snr)) {
    throw std::invalid_argument("rayleigh channel needs a positive mean SNR");
  }
  ChannelDistribution c;
  c.kind_ = ChannelKind::rayleigh;
  c.snr_ = mean_snr;
  c.efficiency_ = std::log2(1.0 + mean_snr);
  return c;
}

ChannelDistribution ChannelDistribution::deterministic(double spectral_efficiency) {
  if (!(spectral_efficiency > 0.0) || !std::isfinite(spectral_efficiency)) {
    throw std::invalid_argument("deterministic channel needs a positive spectral efficiency");
  }
  ChannelDistribution c;
  c.kind_ = ChannelKind::deterministic;
  c.efficiency_ = spectral_efficiency;
  return c;
}

double ChannelDistribution::cdf(double v, double t) const {
  if (v <= 0.0) return 0.0;
  if (t <= 0.0) return 1.0;
  if (kind_ == ChannelKind::deterministic) return v >= efficiency_ * t ? 1.0 : 0.0;
  const double x = v / t;
  // 1 - exp((1 - 2^x)/snr) with both exponentials in expm1 form.
  return -std::expm1(-std::expm1(x * kLn2) / snr_);
}

double ChannelDistribution::pdf(double v, double t) const {
  if (kind_ == ChannelKind::deterministic || v < 0.0 || t <= 0.0) return 0.0;
  const double x = v / t;
  const double excess = std::expm1(x * kLn2) / snr_;  // (2^x - 1)/snr
  if (excess > 700.0) return 0.0;
  return kLn2 * (1.0 + std::expm1(x * kLn2)) * std::exp(-excess) / (snr_ * t);
}

double ChannelDistribution::cdf_dt(double v, double t) const {
  if (kind_ == ChannelKind::deterministic || v <= 0.0 || t <= 0.0) return 0.0;
  return -(v / t) * pdf(v, t);
}

double ChannelDistribution::mean_rate_per_resource() const {
  if (kind_ == ChannelKind::deterministic) return efficiency_;
  // E[v]/t = ∫_0^inf (1 - Z(v, 1)) dv.
  const double upper = saturation_rate(1.0);
  return quad::integrate([this](double v) { return 1.0 - cdf(v, 1.0); }, 0.0, upper,
                         {1e-13, 1e-12});
}

double ChannelDistribution::sup_pdf(double t) const {
  if (kind_ == ChannelKind::deterministic || t <= 0.0) return kInf;
  // The density in y = 2^{v/t} is proportional to y exp(-y/snr), maximal at y = max(snr, 1).
  const double y = std::max(snr_, 1.0);
  return kLn2 * y * std::exp((1.0 - y) / snr_) / (snr_ * t);
}

double ChannelDistribution::saturation_rate(double t) const {
  if (t <= 0.0) return 0.0;
  if (kind_ == ChannelKind::deterministic) return efficiency_ * t;
  return t * std::log2(1.0 + kSaturationLevel * snr_);
}

double ChannelDistribution::sample(double t, double u) const {
  if (t <= 0.0) return 0.0;
  if (kind_ == ChannelKind::deterministic) return efficiency_ * t;
  // v = t log2(1 + snr X) with X ~ Exp(1).
  const double x = -std::log1p(-u);
  return t * std::log2(1.0 + snr_ * x);
}

// ---------------------------------------------------------------------------
// Expectations

double expected_min(double r, const DemandDistribution& demand) {
  if (!(r >= 0.0)) throw std::domain_error("expected_min: rate must be nonnegative");
  if (r == 0.0) return 0.0;
  if (demand.kind() == DemandKind::point_mass) return std::min(r, demand.atom());

  const double upper = std::min(r, demand.upper_quantile(kDemandTail));
  const double cuts[] = {demand.quantile(1e-3), demand.quantile(0.1), demand.quantile(0.5),
                         demand.quantile(0.9), demand.quantile(0.999)};
  const double body =
      quad::integrate([&](double y) { return y * demand.pdf(y); }, 0.0, upper, cuts);
  // Past the truncation point the value is held flat, which keeps it nondecreasing in r.
  return body + upper * demand.survival(upper);
}

double expected_outage(double r, double t, const ChannelDistribution& channel) {
  if (!(r >= 0.0) || !(t >= 0.0)) {
    throw std::domain_error("expected_outage: rate and resource must be nonnegative");
  }
  if (r == 0.0) return 0.0;
  if (t == 0.0) return r;
  if (channel.kind() == ChannelKind::deterministic) {
    return std::max(0.0, r - channel.spectral_efficiency() * t);
  }
  const double saturation = channel.saturation_rate(t);
  const double upper = std::min(r, saturation);
  const double median = t * std::log2(1.0 + channel.mean_snr() * kLn2);
  const double cuts[] = {median};
  const double body =
      quad::integrate([&](double v) { return channel.cdf(v, t); }, 0.0, upper, cuts);
  return body + (r - upper);
}

double shared_outage(std::span<const double> rates, double t, const ChannelDistribution& channel) {
  double total = 0.0;
  for (double r : rates) {
    if (!(r >= 0.0)) throw std::domain_error("shared_outage: rates must be nonnegative");
    total += r;
  }
  return expected_outage(total, t, channel);
}

double channel_cdf(double v, double t, const ChannelDistribution& channel) {
  if (!(t > 0.0)) throw std::domain_error("channel_cdf: resource must be positive");
  if (!(v >= 0.0)) throw std::domain_error("channel_cdf: rate must be nonnegative");
  return channel.cdf(v, t);
}

double channel_pdf(double v, double t, const ChannelDistribution& channel) {
  if (!(t > 0.0)) throw std::domain_error("channel_pdf: resource must be positive");
  if (!(v >= 0.0)) throw std::domain_error("channel_pdf: rate must be nonnegative");
  return channel.pdf(v, t);
}

}  // namespace resv
