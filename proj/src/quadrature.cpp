#include "resv/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace resv::quad {

namespace {

struct Panel {
  double a;
  double b;
  double value;
  double error;
  bool operator<(const Panel& other) const { return error < other.error; }
};

Panel evaluate_panel(const std::function<double(double)>& f, double a, double b) {
  double error = 0.0;
  // max_depth = 0 gives the plain 15-point Kronrod estimate together with its
  // embedded 7-point Gauss error estimate; subdivision is driven below so
  // that both absolute and relative tolerances are honored.
  const double value =
      boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, a, b, 0, 0.0, &error);
  return {a, b, value, error};
}

constexpr std::size_t kMaxPanels = 2000;

}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b, Tolerance tol) {
  return integrate(f, a, b, std::span<const double>{}, tol);
}

double integrate(const std::function<double(double)>& f, double a, double b,
                 std::span<const double> breakpoints, Tolerance tol) {
  if (a == b) return 0.0;
  if (a > b) return -integrate(f, b, a, breakpoints, tol);

  std::vector<double> cuts{a};
  for (double x : breakpoints) {
    if (x > a && x < b) cuts.push_back(x);
  }
  cuts.push_back(b);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  std::priority_queue<Panel> panels;
  double total = 0.0;
  double total_error = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    Panel p = evaluate_panel(f, cuts[i], cuts[i + 1]);
    total += p.value;
    total_error += p.error;
    panels.push(p);
  }

  while (total_error > std::max(tol.absolute, tol.relative * std::abs(total)) &&
         panels.size() < kMaxPanels) {
    Panel worst = panels.top();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) break;  // interval exhausted
    panels.pop();
    Panel left = evaluate_panel(f, worst.a, mid);
    Panel right = evaluate_panel(f, mid, worst.b);
    total += left.value + right.value - worst.value;
    total_error += left.error + right.error - worst.error;
    panels.push(left);
    panels.push(right);
  }

  // Re-sum to shed the drift of the incremental updates.
  double sum = 0.0;
  while (!panels.empty()) {
    sum += panels.top().value;
    panels.pop();
  }
  return sum;
}

}  // namespace resv::quad
