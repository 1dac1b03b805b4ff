#pragma once

// Least-squares slopes and observed convergence orders.

#include <cmath>
#include <limits>
#include <vector>

#include "uclab/error.hpp"

namespace uclab {

/// Least-squares slope of y against x.
inline double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
  require(x.size() == y.size() && x.size() >= 2, ErrorCode::insufficient_sequence, "slope fit needs two points");
  const double m = static_cast<double>(x.size());
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) sx += x[i], sy += y[i];
  sx /= m, sy /= m;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - sx) * (y[i] - sy);
    sxx += (x[i] - sx) * (x[i] - sx);
  }
  return sxy / sxx;
}

/// Slope of log|y| against log x over the last `tail` points.
inline double loglog_tail_slope(const std::vector<double>& x, const std::vector<double>& y, std::size_t tail) {
  require(x.size() == y.size(), ErrorCode::invalid_input, "sequence lengths differ");
  require(x.size() >= tail && tail >= 2, ErrorCode::insufficient_sequence, "too few sequence points for the fit");
  std::vector<double> lx, ly;
  for (std::size_t i = x.size() - tail; i < x.size(); ++i) {
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(std::abs(y[i])));
  }
  return ls_slope(lx, ly);
}

/// Observed order from errors e_k at spacings h_k: slope of log e against log h,
/// using only the levels with e above `floor`. NaN when fewer than two remain.
inline double observed_order(const std::vector<double>& h, const std::vector<double>& e, double floor) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < h.size(); ++i)
    if (e[i] > floor) {
      lx.push_back(std::log(h[i]));
      ly.push_back(std::log(e[i]));
    }
  if (lx.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  return ls_slope(lx, ly);
}

}  // namespace uclab
