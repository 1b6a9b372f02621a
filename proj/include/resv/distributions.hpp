#pragma once

#include <memory>
#include <span>
#include <vector>

namespace resv {

class RecursiveKde;

// Rates are in Mnats/s and transmission resources in MHz throughout.

enum class DemandKind { lognormal, point_mass, empirical };

/// Tabulated density on a uniform grid, restricted to [0, inf) and
/// renormalized; backs the empirical demand kind.
struct TabulatedDensity {
  std::vector<double> grid;
  std::vector<double> density;
  std::vector<double> cumulative;  // trapezoidal CDF at grid points
};

/// Distribution of one user's random demand d_k.
class DemandDistribution {
 public:
  static DemandDistribution lognormal(double eta, double sigma);
  static DemandDistribution point_mass(double value);
  static DemandDistribution empirical(const RecursiveKde& kde);

  DemandKind kind() const noexcept { return kind_; }
  double eta() const noexcept { return eta_; }
  double sigma() const noexcept { return sigma_; }
  /// Location of the atom for point_mass.
  double atom() const noexcept { return atom_; }

  double pdf(double y) const;
  double cdf(double y) const;
  /// 1 - cdf(y), computed without cancellation where possible.
  double survival(double y) const;
  double mean() const;
  /// Smallest y with cdf(y) >= p.
  double quantile(double p) const;
  /// Upper quantile with tail probability q, i.e. cdf(y) = 1 - q.
  double upper_quantile(double q) const;
  /// sup_y pdf(y); infinite for point_mass.
  double sup_pdf() const;
  /// Inverse-CDF sample from a uniform u in (0, 1).
  double sample(double u) const;

 private:
  DemandKind kind_ = DemandKind::lognormal;
  double eta_ = 0.0;
  double sigma_ = 1.0;
  double atom_ = 0.0;
  std::shared_ptr<const TabulatedDensity> table_;
};

enum class ChannelKind { rayleigh, deterministic };

/// Distribution of a downlink's achievable rate v given resource t.
///
/// rayleigh:      Z(v, t) = 1 - exp((1 - 2^{v/t}) / snr)
/// deterministic: v = efficiency * t exactly.
///
/// At t = 0 the limit convention Z(v, 0) = 1 for v > 0 applies.
class ChannelDistribution {
 public:
  static ChannelDistribution rayleigh(double mean_snr);
  static ChannelDistribution deterministic(double spectral_efficiency);

  ChannelKind kind() const noexcept { return kind_; }
  double mean_snr() const noexcept { return snr_; }
  double spectral_efficiency() const noexcept { return efficiency_; }

  double cdf(double v, double t) const;
  double pdf(double v, double t) const;
  /// Partial derivative of the CDF with respect to t.
  double cdf_dt(double v, double t) const;
  /// E[v] / t; the mean achievable rate is linear in t for both kinds.
  double mean_rate_per_resource() const;
  /// sup_v pdf(v, t) for t > 0.
  double sup_pdf(double t) const;
  /// Smallest rate beyond which cdf(·, t) equals 1 to double precision.
  double saturation_rate(double t) const;
  /// Inverse-CDF sample of the achievable rate from a uniform u in (0, 1).
  double sample(double t, double u) const;

 private:
  ChannelKind kind_ = ChannelKind::rayleigh;
  double snr_ = 1.0;
  double efficiency_ = 0.0;
};

/// E[min(r, d)] = ∫_0^r y f(y) dy + r (1 - F(r)), evaluated by quadrature.
double expected_min(double r, const DemandDistribution& demand);

/// Expected outage ∫_0^r z(v, t) (r - v) dv, evaluated as ∫_0^r Z(v, t) dv.
double expected_outage(double r, double t, const ChannelDistribution& channel);

/// Outage of a downlink carrying several paths: expected_outage of the sum.
double shared_outage(std::span<const double> rates, double t, const ChannelDistribution& channel);

/// Closed-form channel CDF/PDF; t must be positive.
double channel_cdf(double v, double t, const ChannelDistribution& channel);
double channel_pdf(double v, double t, const ChannelDistribution& channel);

}  // namespace resv
