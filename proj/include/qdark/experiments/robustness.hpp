#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "../graph.hpp"
#include "dephasing.hpp"
#include "parallel.hpp"
#include "removal_sweep.hpp"
#include "stats.hpp"
#include "transport.hpp"

namespace qdark {

// Node 1 (first ring) and the node on the last ring farthest from it; for a
// generic graph, the farthest node overall. Ties go to the smallest id.
inline std::pair<NodeId, NodeId> opposite_ends(const WeightedGraph& g, std::optional<kind::Cylinder> cyl = {}) {
  const auto d = hop_distances(g, 1);
  const NodeId first = cyl ? (cyl->l - 1) * cyl->c + 1 : 1;
  NodeId best = 0;
  for (NodeId v = first; v <= g.size(); ++v)
    if (v != 1 && d[v] >= 0 && (best == 0 || d[v] > d[best])) best = v;
  if (best == 0) throw InvalidArgument("no node reachable from node 1");
  return {1, best};
}

// Default observation time: 4 * diameter / Gamma_sink.
inline double default_observation_time(const WeightedGraph& g, double sink_rate) {
  return 4.0 * diameter(g) / sink_rate;
}

struct RobustnessConfig {
  WeightedGraph base;
  std::vector<int> removal_counts;
  int realizations = 200;
  NodeId input = 1;
  NodeId target = 1;
  double t_obs = 0.0;  // <= 0 selects default_observation_time(base)
  double sink_rate = 1.0;
  DephasingSearch search{};
  // gamma* is re-optimized per k on the mean over the first few geometries.
  int noise_subsample = 8;
  std::uint64_t master_seed = 1;
  int threads = 1;
};

struct RegimeStatistics {
  double mean = 0.0;
  double std = 0.0;
  std::optional<double> rsd;
};

struct RobustnessRow {
  int k = 0;
  int realizations = 0;
  double connected_fraction = 0.0;
  double gamma_star = 0.0;
  bool gamma_flagged = false;  // optimizer guard fired
  RegimeStatistics coherent, noise, classical;
};

struct RobustnessResult {
  double t_obs = 0.0;
  std::vector<RobustnessRow> rows;
  // Raw p_sink(t_obs) per (k, realization) and regime.
  std::vector<std::vector<double>> coherent, noise, classical;
};

inline RegimeStatistics summarize(const std::vector<double>& x) {
  return {mean(x), stddev(x), relative_stddev(x)};
}

inline RobustnessResult robustness_rsd(const RobustnessConfig& cfg) {
  if (cfg.realizations < 1) throw InvalidArgument("need at least one realization per removal count");
  RobustnessResult res;
  res.t_obs = cfg.t_obs > 0.0 ? cfg.t_obs : default_observation_time(cfg.base, cfg.sink_rate);
  const std::vector<double> times{0.0, res.t_obs};
  const auto per_k = static_cast<std::size_t>(cfg.realizations);

  for (int k : cfg.removal_counts) {
    if (k < 0 || static_cast<std::size_t>(k) > cfg.base.edge_count())
      throw InvalidArgument("removal count " + std::to_string(k) + " exceeds the edge count");
    std::vector<WeightedGraph> geoms(per_k);
    std::vector<char> connected(per_k);
    for (std::size_t r = 0; r < per_k; ++r) {
      auto removed = remove_links(cfg.base, static_cast<std::size_t>(k),
                                  realization_seed(cfg.master_seed, k, static_cast<int>(r)));
      geoms[r] = std::move(removed.graph);
      connected[r] = removed.record.still_connected;
    }

    RobustnessRow row;
    row.k = k;
    row.realizations = cfg.realizations;
    const auto subsample = std::min<std::size_t>(per_k, static_cast<std::size_t>(std::max(1, cfg.noise_subsample)));
    const auto opt = optimize_dephasing(
        [&](double gamma) {
          std::vector<double> vals(subsample);
          parallel_for(subsample, cfg.threads, [&](std::size_t r) {
            TransportSetup s{geoms[r], Regime::kDephasing, gamma, {}, cfg.sink_rate};
            vals[r] = pair_efficiency(s, cfg.input, cfg.target, times).back();
          });
          return mean(vals);
        },
        cfg.search);
    row.gamma_star = opt.gamma;
    row.gamma_flagged = opt.non_unimodal;

    std::vector<double> coh(per_k), noi(per_k), cla(per_k);
    parallel_for(per_k, cfg.threads, [&](std::size_t r) {
      TransportSetup s{geoms[r], Regime::kCoherent, 0.0, {}, cfg.sink_rate};
      coh[r] = pair_efficiency(s, cfg.input, cfg.target, times).back();
      s.regime = Regime::kDephasing;
      s.dephasing = opt.gamma;
      noi[r] = pair_efficiency(s, cfg.input, cfg.target, times).back();
      s.regime = Regime::kClassical;
      cla[r] = pair_efficiency(s, cfg.input, cfg.target, times).back();
    });
    int conn = 0;
    for (char c : connected) conn += c;
    row.connected_fraction = static_cast<double>(conn) / cfg.realizations;
    row.coherent = summarize(coh);
    row.noise = summarize(noi);
    row.classical = summarize(cla);
    res.rows.push_back(row);
    res.coherent.push_back(std::move(coh));
    res.noise.push_back(std::move(noi));
    res.classical.push_back(std::move(cla));
  }
  return res;
}

}  // namespace qdark
