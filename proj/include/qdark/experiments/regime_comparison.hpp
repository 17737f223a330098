#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "../graph.hpp"
#include "dephasing.hpp"
#include "removal_sweep.hpp"
#include "robustness.hpp"
#include "transport.hpp"

namespace qdark {

// Input/output averaged p_sink(t) for the coherent, optimally dephased and
// classical regimes on one network. gamma* maximizes the averaged p_sink(t_obj).
struct RegimeCurves {
  std::vector<double> times;
  std::vector<double> coherent, dephased, classical;
  double t_obj = 0.0;
  DephasingOptimum optimum;
};

inline RegimeCurves regime_curves(const WeightedGraph& g, double t_max, double dt, double t_obj = 0.0,
                                  const DephasingSearch& search = {}, double sink_rate = 1.0, int threads = 1) {
  RegimeCurves out;
  out.t_obj = t_obj > 0.0 ? t_obj : default_observation_time(g, sink_rate);
  out.times = uniform_grid(t_max, dt);
  TransportSetup s{g, Regime::kCoherent, 0.0, {}, sink_rate};
  out.optimum = optimize_dephasing_io_averaged(s, out.t_obj, search, threads);
  out.coherent = io_averaged_efficiency(s, out.times, threads);
  s.regime = Regime::kDephasing;
  s.dephasing = out.optimum.gamma;
  out.dephased = io_averaged_efficiency(s, out.times, threads);
  s.regime = Regime::kClassical;
  out.classical = io_averaged_efficiency(s, out.times, threads);
  return out;
}

struct NoiseVsRemovalConfig {
  WeightedGraph base;
  int removal_count = 5;
  int realizations = 50;  // candidate geometries searched for the best removal
  std::uint64_t master_seed = 1;
  double t_max = 300.0;
  double dt = 1.0;
  double t_obj = 0.0;  // <= 0 selects default_observation_time(base)
  DephasingSearch search{};
  double sink_rate = 1.0;
  int threads = 1;
};

// Optimal dephasing on the intact network against coherent transport on the
// intact network and on the best of `realizations` geometries with
// `removal_count` links removed. "Best" means the largest averaged coherent
// p_sink(t_max); ties go to the lowest realization index.
struct NoiseVsRemovalResult {
  std::vector<double> times;
  std::vector<double> dephased, coherent, removed;
  DephasingOptimum optimum;
  double t_obj = 0.0;
  int best_index = -1;
  RemovalRecord best_record;
  std::optional<double> t90_dephased, t90_coherent, t90_removed;
};

inline NoiseVsRemovalResult noise_vs_removal(const NoiseVsRemovalConfig& cfg) {
  if (cfg.realizations < 1) throw InvalidArgument("need at least one removal realization");
  if (cfg.removal_count < 0 || static_cast<std::size_t>(cfg.removal_count) > cfg.base.edge_count())
    throw InvalidArgument("removal count exceeds the edge count");
  NoiseVsRemovalResult out;
  out.times = uniform_grid(cfg.t_max, cfg.dt);
  out.t_obj = cfg.t_obj > 0.0 ? cfg.t_obj : default_observation_time(cfg.base, cfg.sink_rate);

  TransportSetup s{cfg.base, Regime::kCoherent, 0.0, {}, cfg.sink_rate};
  out.coherent = io_averaged_efficiency(s, out.times, cfg.threads);
  out.optimum = optimize_dephasing_io_averaged(s, out.t_obj, cfg.search, cfg.threads);
  s.regime = Regime::kDephasing;
  s.dephasing = out.optimum.gamma;
  out.dephased = io_averaged_efficiency(s, out.times, cfg.threads);

  const std::vector<double> ends{0.0, cfg.t_max};
  std::vector<RemovalResult> candidates;
  std::vector<double> final_p(static_cast<std::size_t>(cfg.realizations));
  for (int r = 0; r < cfg.realizations; ++r)
    candidates.push_back(remove_links(cfg.base, static_cast<std::size_t>(cfg.removal_count),
                                      realization_seed(cfg.master_seed, cfg.removal_count, r)));
  parallel_for(candidates.size(), cfg.threads, [&](std::size_t r) {
    TransportSetup c{candidates[r].graph, Regime::kCoherent, 0.0, {}, cfg.sink_rate};
    final_p[r] = io_averaged_efficiency(c, ends).back();
  });
  out.best_index = 0;
  for (int r = 1; r < cfg.realizations; ++r)
    if (final_p[r] > final_p[out.best_index]) out.best_index = r;
  out.best_record = candidates[out.best_index].record;
  TransportSetup best{candidates[out.best_index].graph, Regime::kCoherent, 0.0, {}, cfg.sink_rate};
  out.removed = io_averaged_efficiency(best, out.times, cfg.threads);

  out.t90_dephased = time_to_reach(out.times, out.dephased, 0.9);
  out.t90_coherent = time_to_reach(out.times, out.coherent, 0.9);
  out.t90_removed = time_to_reach(out.times, out.removed, 0.9);
  return out;
}

}  // namespace qdark
