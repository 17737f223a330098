#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "error.hpp"
#include "graph.hpp"

namespace qdark {

// Network Hamiltonian plus sink, dissipation and dephasing rates. Units have
// hbar = 1 and couplings of order one.
struct OpenSystemModel {
  WeightedGraph graph;
  std::vector<double> site_energies;  // omega_i, one per site
  NodeId target = 1;
  double sink_rate = 1.0;             // decay rate from the target into the sink
  std::vector<double> dissipation;    // Gamma_j, site -> vacuum
  std::vector<double> dephasing;      // gamma_j

  int sites() const { return graph.size(); }
  int dimension() const { return graph.size() + 2; }

  // diag(omega) + A(G) on the site block.
  Eigen::MatrixXd site_hamiltonian() const {
    Eigen::MatrixXd h = graph.adjacency();
    for (int i = 0; i < sites(); ++i) h(i, i) += site_energies[i];
    return h;
  }

  // Full (N+2)-dimensional Hamiltonian; vacuum and sink are uncoupled.
  Eigen::MatrixXd hamiltonian() const {
    const int n = sites();
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n + 2, n + 2);
    h.block(1, 1, n, n) = site_hamiltonian();
    return h;
  }

  bool has_dephasing() const {
    return std::any_of(dephasing.begin(), dephasing.end(), [](double g) { return g != 0.0; });
  }
  bool has_dissipation() const {
    return std::any_of(dissipation.begin(), dissipation.end(), [](double g) { return g != 0.0; });
  }
};

inline std::vector<double> uniform_rates(int n, double value) { return std::vector<double>(n, value); }

// Empty rate/energy vectors mean "all zero".
inline OpenSystemModel build_model(const WeightedGraph& g, std::vector<double> site_energies, NodeId target,
                                   double sink_rate, std::vector<double> dissipation = {},
                                   std::vector<double> dephasing = {}) {
  const int n = g.size();
  auto fill = [n](std::vector<double>& v, const char* what) {
    if (v.empty()) v.assign(n, 0.0);
    if (static_cast<int>(v.size()) != n)
      throw InvalidArgument(std::string(what) + " needs one entry per site");
    for (double x : v)
      if (!std::isfinite(x)) throw InvalidArgument(std::string(what) + " must be finite");
  };
  fill(site_energies, "site energies");
  fill(dissipation, "dissipation rates");
  fill(dephasing, "dephasing rates");
  if (target < 1 || target > n) throw InvalidArgument("target " + std::to_string(target) + " outside the network");
  if (!(sink_rate >= 0.0) || !std::isfinite(sink_rate)) throw InvalidArgument("sink rate must be nonnegative");
  for (const auto* v : {&dissipation, &dephasing})
    for (double x : *v)
      if (x < 0.0) throw InvalidArgument("rates must be nonnegative");
  return {g, std::move(site_energies), target, sink_rate, std::move(dissipation), std::move(dephasing)};
}

}  // namespace qdark
