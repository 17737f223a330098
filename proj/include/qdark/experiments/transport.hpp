#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "../classical.hpp"
#include "../graph.hpp"
#include "../model.hpp"
#include "../propagate.hpp"
#include "parallel.hpp"

namespace qdark {

enum class Regime { kCoherent, kDephasing, kClassical };

inline const char* regime_name(Regime r) {
  switch (r) {
    case Regime::kCoherent: return "coherent";
    case Regime::kDephasing: return "dephasing";
    case Regime::kClassical: return "classical";
  }
  return "?";
}

// A network plus one dynamical regime; the target node varies per run.
struct TransportSetup {
  WeightedGraph graph;
  Regime regime = Regime::kCoherent;
  double dephasing = 0.0;             // uniform gamma, kDephasing only
  std::vector<double> site_energies;  // empty = homogeneous
  double sink_rate = 1.0;
};

namespace detail {

// p_sink on `times` for an incoherent initial distribution over the sites.
inline std::vector<double> efficiency_from(const TransportSetup& s, std::span<const double> initial, NodeId target,
                                           std::span<const double> times) {
  if (s.regime == Regime::kClassical) return classical_evolve(s.graph, target, s.sink_rate, initial, times).p_sink;
  const double gamma = s.regime == Regime::kDephasing ? s.dephasing : 0.0;
  const auto m = build_model(s.graph, s.site_energies, target, s.sink_rate, {},
                             uniform_rates(s.graph.size(), gamma));
  EvolveOptions opt;
  opt.quadrature = false;
  return evolve(m, QuantumState::site_mixture(initial), times, opt).sink_population();
}

}  // namespace detail

// p_sink(t) for a localized input |input><input| and a fixed target.
inline std::vector<double> pair_efficiency(const TransportSetup& s, NodeId input, NodeId target,
                                           std::span<const double> times) {
  std::vector<double> p0(s.graph.size(), 0.0);
  if (input < 1 || input > s.graph.size()) throw InvalidArgument("input outside the network");
  p0[input - 1] = 1.0;
  return detail::efficiency_from(s, p0, target, times);
}

// Mean p_sink(t) over all ordered (input, target) pairs with input != target
// and localized inputs. By linearity the average over inputs for a fixed
// target equals one run from the uniform mixture of the other sites.
inline std::vector<double> io_averaged_efficiency(const TransportSetup& s, std::span<const double> times,
                                                  int threads = 1) {
  const int n = s.graph.size();
  if (n < 2) throw InvalidArgument("input/output averaging needs at least two nodes");
  std::vector<std::vector<double>> per_target(n);
  parallel_for(static_cast<std::size_t>(n), threads, [&](std::size_t j) {
    std::vector<double> p0(n, 1.0 / (n - 1));
    p0[j] = 0.0;
    per_target[j] = detail::efficiency_from(s, p0, static_cast<NodeId>(j) + 1, times);
  });
  std::vector<double> avg(times.size(), 0.0);
  for (const auto& curve : per_target)
    for (std::size_t k = 0; k < avg.size(); ++k) avg[k] += curve[k] / n;
  return avg;
}

// First time the series reaches `level`, linearly interpolated.
inline std::optional<double> time_to_reach(std::span<const double> times, std::span<const double> series,
                                           double level) {
  for (std::size_t k = 0; k < series.size(); ++k) {
    if (series[k] < level) continue;
    if (k == 0) return times[0];
    const double f = (level - series[k - 1]) / (series[k] - series[k - 1]);
    return times[k - 1] + f * (times[k] - times[k - 1]);
  }
  return std::nullopt;
}

}  // namespace qdark
