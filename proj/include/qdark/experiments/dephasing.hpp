#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include "../error.hpp"
#include "transport.hpp"

namespace qdark {

struct DephasingSearch {
  double gamma_lo = 1e-2;
  double gamma_hi = 1e1;
  int grid_points = 25;
  double log_tolerance = 1e-2;  // golden-section stop, in ln(gamma)
};

struct DephasingOptimum {
  double gamma = 0.0;
  double value = 0.0;
  bool at_lower = false;
  bool at_upper = false;
  bool non_unimodal = false;  // grid guard fired; result is the grid argmax
  std::vector<double> grid_gammas;
  std::vector<double> grid_values;
  int evaluations = 0;
};

// Maximizes objective(gamma) by golden-section search on ln(gamma), assuming
// unimodality. A log-spaced grid scan guards the assumption: if the scan is
// not unimodal, or the golden-section point is not at least as good as the
// best grid point, the grid argmax is returned with `non_unimodal` set.
inline DephasingOptimum optimize_dephasing(const std::function<double(double)>& objective,
                                           const DephasingSearch& search = {}) {
  if (!(search.gamma_lo > 0.0 && search.gamma_lo < search.gamma_hi))
    throw InvalidArgument("dephasing bounds need 0 < lo < hi");
  if (search.grid_points < 3) throw InvalidArgument("dephasing grid needs at least three points");

  DephasingOptimum out;
  const double a0 = std::log(search.gamma_lo), b0 = std::log(search.gamma_hi);
  const int g = search.grid_points;
  for (int i = 0; i < g; ++i) {
    const double x = a0 + (b0 - a0) * i / (g - 1);
    out.grid_gammas.push_back(i == 0 ? search.gamma_lo : i == g - 1 ? search.gamma_hi : std::exp(x));
    out.grid_values.push_back(objective(out.grid_gammas.back()));
  }
  out.evaluations = g;
  const auto best = static_cast<int>(std::max_element(out.grid_values.begin(), out.grid_values.end()) -
                                     out.grid_values.begin());
  const double scale = std::max(1e-12, std::abs(out.grid_values[best]));
  const double slack = 1e-9 * scale;
  for (int i = 0; i < best; ++i)
    if (out.grid_values[i + 1] < out.grid_values[i] - slack) out.non_unimodal = true;
  for (int i = best; i + 1 < g; ++i)
    if (out.grid_values[i + 1] > out.grid_values[i] + slack) out.non_unimodal = true;

  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = a0, b = b0;
  double c = b - phi * (b - a), d = a + phi * (b - a);
  double fc = objective(std::exp(c)), fd = objective(std::exp(d));
  out.evaluations += 2;
  while (b - a > search.log_tolerance) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - phi * (b - a);
      fc = objective(std::exp(c));
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + phi * (b - a);
      fd = objective(std::exp(d));
    }
    ++out.evaluations;
  }
  double x = fc >= fd ? c : d;
  double fx = std::max(fc, fd);
  // Evaluate the bracket end when the search ran into a bound.
  if (b0 - x < 2.0 * search.log_tolerance && out.grid_values.back() >= fx) {
    x = b0;
    fx = out.grid_values.back();
  } else if (x - a0 < 2.0 * search.log_tolerance && out.grid_values.front() >= fx) {
    x = a0;
    fx = out.grid_values.front();
  }

  const double cell = (b0 - a0) / (g - 1);
  const bool agrees = fx >= out.grid_values[best] - slack &&
                      std::abs(x - std::log(out.grid_gammas[best])) <= cell + search.log_tolerance;
  if (out.non_unimodal || !agrees) {
    out.non_unimodal = true;
    out.gamma = out.grid_gammas[best];
    out.value = out.grid_values[best];
  } else {
    out.gamma = std::exp(x);
    out.value = fx;
  }
  const double lx = std::log(out.gamma);
  out.at_lower = lx - a0 <= 2.0 * search.log_tolerance;
  out.at_upper = b0 - lx <= 2.0 * search.log_tolerance;
  return out;
}

// Optimal uniform dephasing for the input/output averaged p_sink(t_obj).
inline DephasingOptimum optimize_dephasing_io_averaged(const TransportSetup& base, double t_obj,
                                                       const DephasingSearch& search = {}, int threads = 1) {
  const std::vector<double> times{0.0, t_obj};
  return optimize_dephasing(
      [&](double gamma) {
        TransportSetup s = base;
        s.regime = Regime::kDephasing;
        s.dephasing = gamma;
        return io_averaged_efficiency(s, times, threads).back();
      },
      search);
}

// Optimal uniform dephasing for a fixed input and target.
inline DephasingOptimum optimize_dephasing_pair(const TransportSetup& base, NodeId input, NodeId target,
                                                double t_obj, const DephasingSearch& search = {}) {
  const std::vector<double> times{0.0, t_obj};
  return optimize_dephasing(
      [&](double gamma) {
        TransportSetup s = base;
        s.regime = Regime::kDephasing;
        s.dephasing = gamma;
        return pair_efficiency(s, input, target, times).back();
      },
      search);
}

}  // namespace qdark
