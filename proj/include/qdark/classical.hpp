#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "error.hpp"
#include "graph.hpp"

namespace qdark {

struct ClassicalResult {
  std::vector<double> times;
  Eigen::MatrixXd populations;  // one row per time: site 1..N
  std::vector<double> p_sink;
};

// Incoherent hopping on the graph with rates kappa_ij = |alpha_ij|^2:
//   dP_i/dt = sum_j kappa_ij (P_j - P_i) - 2 Gamma_sink delta_{i,target} P_i,
// with the sink accumulating 2 Gamma_sink P_target.
inline Eigen::MatrixXd classical_generator(const WeightedGraph& g, NodeId target, double sink_rate) {
  const int n = g.size();
  if (target < 1 || target > n) throw InvalidArgument("target outside the network");
  if (!(sink_rate >= 0.0)) throw InvalidArgument("sink rate must be nonnegative");
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(n + 1, n + 1);
  for (const auto& e : g.edges()) {
    const double k = e.weight * e.weight;
    const int a = e.u - 1, b = e.v - 1;
    q(a, b) += k;
    q(b, a) += k;
    q(a, a) -= k;
    q(b, b) -= k;
  }
  q(target - 1, target - 1) -= 2.0 * sink_rate;
  q(n, target - 1) += 2.0 * sink_rate;
  return q;
}

inline ClassicalResult classical_evolve(const WeightedGraph& g, NodeId target, double sink_rate,
                                        std::span<const double> initial, std::span<const double> times) {
  const int n = g.size();
  if (static_cast<int>(initial.size()) != n) throw InvalidArgument("initial distribution needs one entry per site");
  if (times.empty() || times.front() < 0.0 || !std::is_sorted(times.begin(), times.end()))
    throw InvalidArgument("time grid must be ascending and nonnegative");
  const Eigen::MatrixXd q = classical_generator(g, target, sink_rate);

  ClassicalResult res;
  res.times.assign(times.begin(), times.end());
  res.populations.resize(static_cast<Eigen::Index>(times.size()), n);
  Eigen::VectorXd p = Eigen::VectorXd::Zero(n + 1);
  for (int i = 0; i < n; ++i) p[i] = initial[i];

  std::map<double, Eigen::MatrixXd> cache;
  double t = 0.0;
  for (std::size_t k = 0; k < times.size(); ++k) {
    const double h = times[k] - t;
    if (h > 0.0) {
      auto it = cache.find(h);
      if (it == cache.end()) it = cache.emplace(h, (h * q).exp()).first;
      p = it->second * p;
    }
    t = times[k];
    res.populations.row(static_cast<Eigen::Index>(k)) = p.head(n).transpose();
    res.p_sink.push_back(p[n]);
  }
  return res;
}

inline ClassicalResult classical_evolve(const WeightedGraph& g, NodeId target, double sink_rate, NodeId start,
                                        std::span<const double> times) {
  std::vector<double> p0(g.size(), 0.0);
  if (start < 1 || start > g.size()) throw InvalidArgument("start site outside the network");
  p0[start - 1] = 1.0;
  return classical_evolve(g, target, sink_rate, p0, times);
}

}  // namespace qdark
