#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "../error.hpp"
#include "../format.hpp"
#include "../propagate.hpp"
#include "er_stats.hpp"
#include "removal_sweep.hpp"
#include "robustness.hpp"

#ifndef QDARK_VERSION
#define QDARK_VERSION "0.1.0"
#endif

namespace qdark {

inline std::string csv_cell(double x) { return format_double(x); }
inline std::string csv_cell(int x) { return std::to_string(x); }
inline std::string csv_cell(long x) { return std::to_string(x); }
inline std::string csv_cell(std::uint64_t x) { return std::to_string(x); }
inline std::string csv_cell(bool x) { return x ? "1" : "0"; }
inline std::string csv_cell(const std::string& x) { return x; }
// Undefined statistics are written as empty cells.
inline std::string csv_cell(const std::optional<double>& x) { return x ? format_double(*x) : std::string{}; }

// A table written as "# <description>; columns: a,b,..." then a header row
// and the data rows.
struct CsvTable {
  std::string description;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  void add(std::vector<std::string> row) {
    if (row.size() != columns.size()) throw InvalidArgument("csv row width differs from the header");
    rows.push_back(std::move(row));
  }

  std::string str() const {
    std::ostringstream out;
    out << "# " << description << "; columns: ";
    for (std::size_t i = 0; i < columns.size(); ++i) out << (i ? "," : "") << columns[i];
    out << '\n';
    for (std::size_t i = 0; i < columns.size(); ++i) out << (i ? "," : "") << columns[i];
    out << '\n';
    for (const auto& r : rows) {
      for (std::size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << r[i];
      out << '\n';
    }
    return out.str();
  }
};

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  f << text;
  f.close();
  if (!f) throw IoError("failed writing " + path.string());
}

inline void write_csv(const std::filesystem::path& path, const CsvTable& t) { write_text_file(path, t.str()); }

// fig<id>_<graph>_<params>.csv, params joined as name+value with '_'.
inline std::string figure_filename(const std::string& id, const std::string& graph,
                                   const std::vector<std::pair<std::string, std::string>>& params) {
  std::string name = "fig" + id + "_" + graph;
  for (const auto& [k, v] : params) name += "_" + k + v;
  return name + ".csv";
}

// Time series sharing one grid, e.g. one curve per regime.
inline CsvTable curves_table(const std::string& description, std::span<const double> times,
                             const std::vector<std::pair<std::string, std::vector<double>>>& curves) {
  CsvTable t{description, {"t"}, {}};
  for (const auto& c : curves) {
    if (c.second.size() != times.size()) throw InvalidArgument("curve length differs from the time grid");
    t.columns.push_back(c.first);
  }
  for (std::size_t k = 0; k < times.size(); ++k) {
    std::vector<std::string> row{csv_cell(times[k])};
    for (const auto& c : curves) row.push_back(csv_cell(c.second[k]));
    t.add(std::move(row));
  }
  return t;
}

// p_sink is the quadrature of the target population; pop_sink is the sink
// diagonal element. The two agree to the propagator's accuracy.
inline CsvTable propagation_table(const PropagationResult& r) {
  CsvTable t{"populations per grid point, basis order vacuum, sites, sink", {"t", "p_sink", "pop_vacuum"}, {}};
  const int n = r.sites();
  for (int i = 1; i <= n; ++i) t.columns.push_back("pop_" + std::to_string(i));
  t.columns.push_back("pop_sink");
  const auto p = transfer_efficiency(r);
  for (std::size_t k = 0; k < r.times.size(); ++k) {
    const auto row_index = static_cast<Eigen::Index>(k);
    std::vector<std::string> row{csv_cell(r.times[k]), csv_cell(p[k])};
    for (int c = 0; c <= n + 1; ++c) row.push_back(csv_cell(r.populations(row_index, c)));
    t.add(std::move(row));
  }
  return t;
}

inline CsvTable removal_sweep_table(const RemovalSweepResult& res) {
  CsvTable t{"link-removal sweep, statistics over realizations per k",
             {"k", "realizations", "connected_fraction", "dark_mean", "dark_std", "trapped_mean", "trapped_std",
              "identity_residual", "cross_checked", "cross_check_max_diff"},
             {}};
  for (const auto& r : res.rows)
    t.add({csv_cell(r.k), csv_cell(r.realizations), csv_cell(r.connected_fraction), csv_cell(r.dark_mean),
           csv_cell(r.dark_std), csv_cell(r.trapped_mean), csv_cell(r.trapped_std), csv_cell(r.identity_residual),
           csv_cell(r.cross_checked), csv_cell(r.cross_check_max_diff)});
  return t;
}

inline CsvTable quasi_dark_table(const RemovalSweepResult& res, std::span<const double> eps_grid) {
  CsvTable t{"mean quasi-dark count per target, by darkness threshold", {"k"}, {}};
  for (double e : eps_grid) t.columns.push_back("quasi_dark_" + format_threshold(e));
  for (const auto& r : res.rows) {
    std::vector<std::string> row{csv_cell(r.k)};
    for (double q : r.quasi_dark_mean) row.push_back(csv_cell(q));
    t.add(std::move(row));
  }
  return t;
}

inline CsvTable removal_realizations_table(const RemovalSweepResult& res) {
  CsvTable t{"one row per removal realization",
             {"k", "index", "seed", "connected", "mean_dark_dimension", "trapped_energy", "simulated_trapped"},
             {}};
  for (const auto& r : res.realizations)
    t.add({csv_cell(r.k), csv_cell(r.index), csv_cell(r.seed), csv_cell(r.connected),
           csv_cell(r.darkness.mean_dark_dimension), csv_cell(r.darkness.trapped_energy),
           csv_cell(r.simulated_trapped)});
  return t;
}

inline CsvTable robustness_table(const RobustnessResult& res) {
  CsvTable t{"p_sink(t_obs) statistics over removal geometries, fixed endpoints",
             {"k", "mean_coherent", "rsd_coherent", "mean_noise", "rsd_noise", "mean_classical", "rsd_classical"},
             {}};
  for (const auto& r : res.rows)
    t.add({csv_cell(r.k), csv_cell(r.coherent.mean), csv_cell(r.coherent.rsd), csv_cell(r.noise.mean),
           csv_cell(r.noise.rsd), csv_cell(r.classical.mean), csv_cell(r.classical.rsd)});
  return t;
}

inline CsvTable robustness_detail_table(const RobustnessResult& res) {
  CsvTable t{"per-k dephasing optimum and dispersion",
             {"k", "realizations", "connected_fraction", "gamma_star", "gamma_flagged", "std_coherent", "std_noise",
              "std_classical"},
             {}};
  for (const auto& r : res.rows)
    t.add({csv_cell(r.k), csv_cell(r.realizations), csv_cell(r.connected_fraction), csv_cell(r.gamma_star),
           csv_cell(r.gamma_flagged), csv_cell(r.coherent.std), csv_cell(r.noise.std), csv_cell(r.classical.std)});
  return t;
}

inline CsvTable er_stats_table(const std::vector<ErStatsRow>& rows) {
  CsvTable t{"G(N,p) walk-matrix controllability and dark-free fractions over connected samples",
             {"n", "samples", "connected", "connected_rate", "controllable", "controllable_fraction",
              "controllable_stderr", "dark_free", "dark_free_fraction", "controllable_and_dark_free"},
             {}};
  for (const auto& r : rows)
    t.add({csv_cell(r.n), csv_cell(r.samples), csv_cell(r.connected), csv_cell(r.connected_rate),
           csv_cell(r.controllable), csv_cell(r.controllable_fraction), csv_cell(r.controllable_stderr),
           csv_cell(r.dark_free), csv_cell(r.dark_free_fraction), csv_cell(r.controllable_and_dark_free)});
  return t;
}

inline CsvTable dephasing_scan_table(const DephasingOptimum& opt) {
  CsvTable t{"objective on the log-spaced guard grid", {"gamma", "p_sink"}, {}};
  for (std::size_t i = 0; i < opt.grid_gammas.size(); ++i)
    t.add({csv_cell(opt.grid_gammas[i]), csv_cell(opt.grid_values[i])});
  return t;
}

// Run manifest: resolved config, master seed, library version and wall-clock
// timings in seconds.
inline nlohmann::json run_manifest(const nlohmann::json& config, std::uint64_t master_seed,
                                   const std::vector<std::pair<std::string, double>>& timings) {
  nlohmann::json m;
  m["config"] = config;
  m["master_seed"] = master_seed;
  m["code_version"] = QDARK_VERSION;
  nlohmann::json t = nlohmann::json::object();
  for (const auto& [k, v] : timings) t[k] = v;
  m["timings"] = t;
  return m;
}

inline void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

}  // namespace qdark
