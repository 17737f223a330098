#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "../controllability.hpp"
#include "../graph.hpp"
#include "../seed.hpp"
#include "../spectral.hpp"
#include "parallel.hpp"

namespace qdark {

struct ErStatsRow {
  int n = 0;
  int samples = 0;
  int connected = 0;
  int controllable = 0;               // among connected samples
  int dark_free = 0;                  // among connected samples, all targets
  int controllable_and_dark_free = 0;
  double connected_rate = 0.0;
  std::optional<double> controllable_fraction;  // undefined with no connected sample
  std::optional<double> dark_free_fraction;
  double controllable_stderr = 0.0;   // binomial standard error of the fraction
};

// True when dark_report gives dark dimension 0 for every target.
inline bool dark_free_for_all_targets(const WeightedGraph& g, double zero_tolerance = SpectralTolerances{}.zero) {
  const auto dec = decompose(g);
  for (NodeId t = 1; t <= g.size(); ++t)
    if (dark_report(dec, t, zero_tolerance).dark_dimension != 0) return false;
  return true;
}

// Samples G(N, p) and reports, over the connected samples, how many have a
// full-rank walk matrix and how many have no dark subspace for any target.
inline std::vector<ErStatsRow> er_controllability_stats(const std::vector<int>& sizes, double p, int samples,
                                                        std::uint64_t master_seed, int threads = 1) {
  if (!(p > 0.0 && p < 1.0)) throw InvalidArgument("edge probability must lie in (0, 1)");
  if (samples < 1) throw InvalidArgument("need at least one sample");
  std::vector<ErStatsRow> rows;
  for (int n : sizes) {
    struct Outcome {
      bool connected = false, controllable = false, dark_free = false;
    };
    std::vector<Outcome> out(static_cast<std::size_t>(samples));
    parallel_for(out.size(), threads, [&](std::size_t s) {
      const auto seed = derive_seed(master_seed, {static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(s)});
      const auto g = generate_graph(kind::ErdosRenyi{n, p, seed});
      Outcome o;
      o.connected = is_connected(g);
      if (o.connected) {
        o.controllable = walk_matrix_controllable(g).controllable;
        o.dark_free = dark_free_for_all_targets(g);
      }
      out[s] = o;
    });
    ErStatsRow row;
    row.n = n;
    row.samples = samples;
    for (const auto& o : out) {
      row.connected += o.connected;
      row.controllable += o.controllable;
      row.dark_free += o.dark_free;
      row.controllable_and_dark_free += o.controllable && o.dark_free;
    }
    row.connected_rate = static_cast<double>(row.connected) / samples;
    if (row.connected > 0) {
      const double f = static_cast<double>(row.controllable) / row.connected;
      row.controllable_fraction = f;
      row.dark_free_fraction = static_cast<double>(row.dark_free) / row.connected;
      row.controllable_stderr = std::sqrt(f * (1.0 - f) / row.connected);
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace qdark
