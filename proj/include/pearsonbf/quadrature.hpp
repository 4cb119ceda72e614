#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "pearsonbf/errors.hpp"

namespace pearsonbf {

struct IntegrationOptions {
  double rel_tol = 1e-10;
  double abs_tol = 0.0;
  int max_segments = 2000;   // subdivision budget before ConvergenceError
  int initial_segments = 16; // guards against features a single panel misses
};

struct IntegrationResult {
  double value;
  double error_estimate;
  int segments;
};

namespace detail {

// Gauss-Kronrod 7/15 pair on [lo, hi]; QUADPACK dqk15 abscissae and weights.
// Even indices of kXgk are Kronrod-only nodes, odd indices Gauss nodes.
struct Gk15Segment {
  double lo, hi;
  double integral;
  double error;
};

template <typename F>
Gk15Segment gk15(F&& f, double lo, double hi) {
  static constexpr double kXgk[7] = {
      0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
      0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
      0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
      0.207784955007898467600689403773245};
  static constexpr double kWgk[8] = {
      0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
      0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
      0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
      0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
  static constexpr double kWg[4] = {
      0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
      0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

  const double center = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  const double fc = f(center);
  double resg = kWg[3] * fc;
  double resk = kWgk[7] * fc;
  double resabs = std::fabs(resk);
  double fv1[7], fv2[7];
  for (int j = 0; j < 7; ++j) {
    fv1[j] = f(center - half * kXgk[j]);
    fv2[j] = f(center + half * kXgk[j]);
    const double sum = fv1[j] + fv2[j];
    resk += kWgk[j] * sum;
    resabs += kWgk[j] * (std::fabs(fv1[j]) + std::fabs(fv2[j]));
    if (j % 2 == 1) resg += kWg[j / 2] * sum;
  }
  const double reskh = 0.5 * resk;
  double resasc = kWgk[7] * std::fabs(fc - reskh);
  for (int j = 0; j < 7; ++j) {
    resasc += kWgk[j] * (std::fabs(fv1[j] - reskh) + std::fabs(fv2[j] - reskh));
  }
  resabs *= std::fabs(half);
  resasc *= std::fabs(half);
  double err = std::fabs((resk - resg) * half);
  if (resasc != 0.0 && err != 0.0) {
    err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  }
  constexpr double kEps = std::numeric_limits<double>::epsilon();
  constexpr double kUflow = std::numeric_limits<double>::min();
  if (resabs > kUflow / (50.0 * kEps)) {
    err = std::max(kEps * 50.0 * resabs, err);
  }
  return {lo, hi, resk * half, err};
}

}  // namespace detail

// Globally adaptive quadrature of f over [lo, hi]: repeatedly bisect the
// segment carrying the largest error estimate until the summed estimate
// meets max(abs_tol, rel_tol * |integral|). Throws ConvergenceError when the
// segment budget runs out or the integrand produces non-finite values.
template <typename F>
IntegrationResult integrate_adaptive(F&& f, double lo, double hi,
                                     IntegrationOptions opt = {}) {
  if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi)) {
    throw DomainError("integrate_adaptive: requires finite lo < hi");
  }
  auto by_error = [](const detail::Gk15Segment& a,
                     const detail::Gk15Segment& b) { return a.error < b.error; };
  std::vector<detail::Gk15Segment> heap;
  const int n0 = std::max(1, opt.initial_segments);
  heap.reserve(static_cast<size_t>(opt.max_segments) + 2);
  for (int i = 0; i < n0; ++i) {
    const double a = lo + (hi - lo) * i / n0;
    const double b = lo + (hi - lo) * (i + 1) / n0;
    heap.push_back(detail::gk15(f, a, b));
  }
  std::make_heap(heap.begin(), heap.end(), by_error);

  auto totals = [&heap]() {
    double v = 0.0, e = 0.0;
    for (const auto& s : heap) {
      v += s.integral;
      e += s.error;
    }
    return std::pair<double, double>(v, e);
  };

  while (true) {
    auto [value, err] = totals();
    if (!std::isfinite(value)) {
      throw ConvergenceError(
          "integrate_adaptive: integrand produced non-finite values");
    }
    if (err <= std::max(opt.abs_tol, opt.rel_tol * std::fabs(value))) {
      return {value, err, static_cast<int>(heap.size())};
    }
    if (static_cast<int>(heap.size()) >= opt.max_segments) {
      throw ConvergenceError(
          "integrate_adaptive: tolerance not met within " +
          std::to_string(opt.max_segments) + " segments (error estimate " +
          std::to_string(err) + ")");
    }
    std::pop_heap(heap.begin(), heap.end(), by_error);
    const detail::Gk15Segment worst = heap.back();
    heap.pop_back();
    const double mid = 0.5 * (worst.lo + worst.hi);
    heap.push_back(detail::gk15(f, worst.lo, mid));
    std::push_heap(heap.begin(), heap.end(), by_error);
    heap.push_back(detail::gk15(f, mid, worst.hi));
    std::push_heap(heap.begin(), heap.end(), by_error);
  }
}

}  // namespace pearsonbf
