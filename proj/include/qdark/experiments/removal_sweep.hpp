#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "../graph.hpp"
#include "../seed.hpp"
#include "../spectral.hpp"
#include "parallel.hpp"
#include "stats.hpp"
#include "transport.hpp"

namespace qdark {

// Sub-seed of removal realization `index` at removal count k.
inline std::uint64_t realization_seed(std::uint64_t master, int k, int index) {
  return derive_seed(master, {static_cast<std::uint64_t>(k), static_cast<std::uint64_t>(index)});
}

// Spectral summary of one geometry over all targets.
struct GeometryDarkness {
  double mean_dark_dimension = 0.0;      // averaged over target nodes
  double trapped_energy = 0.0;           // dark weight averaged over ordered (input, target) pairs
  std::vector<double> mean_quasi_dark;   // per eps, averaged over targets
};

inline GeometryDarkness analyze_darkness(const WeightedGraph& g, std::span<const double> eps_grid,
                                         double zero_tolerance = SpectralTolerances{}.zero) {
  const int n = g.size();
  const auto dec = decompose(g);
  GeometryDarkness out;
  out.mean_quasi_dark.assign(eps_grid.size(), 0.0);
  double trapped = 0.0;
  for (NodeId t = 1; t <= n; ++t) {
    const auto rep = dark_report(dec, t, zero_tolerance, eps_grid);
    out.mean_dark_dimension += static_cast<double>(rep.dark_dimension) / n;
    for (NodeId i = 1; i <= n; ++i)
      if (i != t) trapped += predict_trapped(rep, i);
    for (std::size_t e = 0; e < eps_grid.size(); ++e)
      out.mean_quasi_dark[e] += static_cast<double>(rep.quasi_dark_counts.at(eps_grid[e])) / n;
  }
  out.trapped_energy = n > 1 ? trapped / (static_cast<double>(n) * (n - 1)) : 0.0;
  return out;
}

struct RemovalSweepConfig {
  WeightedGraph base;
  std::vector<int> removal_counts;
  int realizations = 50;
  std::vector<double> eps_grid{1e-6, 1e-4, 1e-2, 1e-1};
  std::uint64_t master_seed = 1;
  double zero_tolerance = SpectralTolerances{}.zero;
  // Every `cross_check_stride`-th realization is also simulated (coherent,
  // input/output averaged) up to cross_check_t_max; 0 disables.
  int cross_check_stride = 10;
  double cross_check_t_max = 300.0;
  double sink_rate = 1.0;
  int threads = 1;
};

struct RemovalRealization {
  int k = 0;
  int index = 0;
  std::uint64_t seed = 0;
  bool connected = true;
  GeometryDarkness darkness;
  std::optional<double> simulated_trapped;  // 1 - p_sink(t_max), when cross-checked
};

struct RemovalSweepRow {
  int k = 0;
  int realizations = 0;
  double connected_fraction = 0.0;
  double dark_mean = 0.0, dark_std = 0.0;
  double trapped_mean = 0.0, trapped_std = 0.0;
  std::vector<double> quasi_dark_mean;     // per eps
  double identity_residual = 0.0;          // max |trapped - dark/(N-1)|
  int cross_checked = 0;
  double cross_check_max_diff = 0.0;       // max |simulated - predicted|
};

struct RemovalSweepResult {
  std::vector<RemovalSweepRow> rows;
  std::vector<RemovalRealization> realizations;  // ordered by (k, index)
};

inline RemovalSweepResult removal_sweep(const RemovalSweepConfig& cfg) {
  if (cfg.realizations < 1) throw InvalidArgument("need at least one realization per removal count");
  if (cfg.removal_counts.empty()) throw InvalidArgument("removal count list is empty");
  const int n = cfg.base.size();
  for (int k : cfg.removal_counts)
    if (k < 0 || static_cast<std::size_t>(k) > cfg.base.edge_count())
      throw InvalidArgument("removal count " + std::to_string(k) + " exceeds the edge count");

  RemovalSweepResult res;
  const std::size_t per_k = static_cast<std::size_t>(cfg.realizations);
  res.realizations.resize(cfg.removal_counts.size() * per_k);
  parallel_for(res.realizations.size(), cfg.threads, [&](std::size_t slot) {
    const int k = cfg.removal_counts[slot / per_k];
    const int r = static_cast<int>(slot % per_k);
    RemovalRealization rec;
    rec.k = k;
    rec.index = r;
    rec.seed = realization_seed(cfg.master_seed, k, r);
    auto removed = remove_links(cfg.base, static_cast<std::size_t>(k), rec.seed);
    rec.connected = removed.record.still_connected;
    rec.darkness = analyze_darkness(removed.graph, cfg.eps_grid, cfg.zero_tolerance);
    if (cfg.cross_check_stride > 0 && r % cfg.cross_check_stride == 0) {
      TransportSetup s{removed.graph, Regime::kCoherent, 0.0, {}, cfg.sink_rate};
      const std::vector<double> times{0.0, cfg.cross_check_t_max};
      rec.simulated_trapped = 1.0 - io_averaged_efficiency(s, times).back();
    }
    res.realizations[slot] = std::move(rec);
  });

  for (std::size_t ki = 0; ki < cfg.removal_counts.size(); ++ki) {
    RemovalSweepRow row;
    row.k = cfg.removal_counts[ki];
    row.realizations = cfg.realizations;
    std::vector<double> dark, trapped;
    std::vector<std::vector<double>> quasi(cfg.eps_grid.size());
    int connected = 0;
    for (std::size_t r = 0; r < per_k; ++r) {
      const auto& rec = res.realizations[ki * per_k + r];
      dark.push_back(rec.darkness.mean_dark_dimension);
      trapped.push_back(rec.darkness.trapped_energy);
      for (std::size_t e = 0; e < quasi.size(); ++e) quasi[e].push_back(rec.darkness.mean_quasi_dark[e]);
      connected += rec.connected ? 1 : 0;
      row.identity_residual = std::max(
          row.identity_residual,
          std::abs(rec.darkness.trapped_energy - rec.darkness.mean_dark_dimension / std::max(1, n - 1)));
      if (rec.simulated_trapped) {
        ++row.cross_checked;
        row.cross_check_max_diff =
            std::max(row.cross_check_max_diff, std::abs(*rec.simulated_trapped - rec.darkness.trapped_energy));
      }
    }
    row.connected_fraction = static_cast<double>(connected) / cfg.realizations;
    row.dark_mean = mean(dark);
    row.dark_std = stddev(dark);
    row.trapped_mean = mean(trapped);
    row.trapped_std = stddev(trapped);
    for (const auto& q : quasi) row.quasi_dark_mean.push_back(mean(q));
    res.rows.push_back(std::move(row));
  }
  return res;
}

}  // namespace qdark
