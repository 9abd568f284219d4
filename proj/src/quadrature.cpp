#include "maxstorm/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace maxstorm::quadrature {

namespace {

constexpr std::size_t kMaxIntervals = 4000;

struct Interval {
  double a, b, value, error;
  bool operator<(const Interval& o) const { return error < o.error; }
};

Interval rule(const std::function<double(double)>& f, double a, double b) {
  double err = 0.0;
  // Depth 0: a single Gauss-Kronrod 7/15 pair and its error estimate.
  const double v = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, a, b, 0, 0.0, &err);
  return {a, b, v, std::abs(err)};
}

}  // namespace

// Globally adaptive: the interval with the largest error estimate is bisected
// until the summed error meets max(abs_tol, rel_tol |I|).
Result integrate_1d(const std::function<double(double)>& f, double a, double b, double rel_tol,
                    const std::vector<double>& breakpoints, double abs_tol) {
  std::vector<double> knots{a};
  for (double p : breakpoints) {
    if (p > a && p < b) knots.push_back(p);
  }
  knots.push_back(b);
  std::sort(knots.begin(), knots.end());

  std::priority_queue<Interval> heap;
  double value = 0.0, error = 0.0;
  for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
    if (knots[i + 1] <= knots[i]) continue;
    const Interval iv = rule(f, knots[i], knots[i + 1]);
    value += iv.value;
    error += iv.error;
    heap.push(iv);
  }
  while (!heap.empty() && heap.size() < kMaxIntervals && error > std::max(abs_tol, rel_tol * std::abs(value))) {
    const Interval worst = heap.top();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) break;
    heap.pop();
    const Interval left = rule(f, worst.a, mid), right = rule(f, mid, worst.b);
    value += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
  }
  // Re-sum to shed accumulated cancellation in the running totals.
  Result out;
  while (!heap.empty()) {
    out.value += heap.top().value;
    out.error += heap.top().error;
    heap.pop();
  }
  return out;
}

Result integrate_2d(const std::function<double(double, double)>& f, double ax, double bx, double ay,
                    double by, double rel_tol) {
  double inner_error = 0.0;
  auto inner = [&](double x) {
    const Result r = integrate_1d([&](double y) { return f(x, y); }, ay, by, rel_tol * 0.1);
    inner_error = std::max(inner_error, r.error);
    return r.value;
  };
  Result out = integrate_1d(inner, ax, bx, rel_tol);
  out.error += inner_error * (bx - ax);
  return out;
}

}  // namespace maxstorm::quadrature
