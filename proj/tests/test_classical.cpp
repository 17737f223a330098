#include <cmath>
#include <random>
#include <vector>

#include <boost/numeric/odeint.hpp>
#include <gtest/gtest.h>

#include <qdark/classical.hpp>
#include <qdark/propagate.hpp>

using namespace qdark;

namespace {

WeightedGraph random_weighted(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.3, 1.5);
  WeightedGraph g(n);
  for (int i = 1; i < n; ++i) g.add_edge(i, i + 1, u(rng));
  for (int i = 1; i <= n; ++i)
    for (int j = i + 2; j <= n; ++j)
      if (u(rng) < 0.6) g.add_edge(i, j, u(rng));
  return g;
}

// Rate equations integrated edge by edge with a generic solver.
std::vector<double> reference_sink(const WeightedGraph& g, NodeId target, double sink_rate, NodeId start,
                                   const std::vector<double>& times) {
  namespace ode = boost::numeric::odeint;
  using State = std::vector<double>;
  const int n = g.size();
  State x(n + 1, 0.0);
  x[start - 1] = 1.0;
  auto sys = [&](const State& p, State& dp, double) {
    std::fill(dp.begin(), dp.end(), 0.0);
    for (const auto& e : g.edges()) {
      const double flow = e.weight * e.weight * (p[e.v - 1] - p[e.u - 1]);
      dp[e.u - 1] += flow;
      dp[e.v - 1] -= flow;
    }
    dp[target - 1] -= 2.0 * sink_rate * p[target - 1];
    dp[n] = 2.0 * sink_rate * p[target - 1];
  };
  std::vector<double> out;
  auto stepper = ode::make_dense_output(1e-12, 1e-12, ode::runge_kutta_dopri5<State>());
  ode::integrate_times(stepper, sys, x, times.begin(), times.end(), 1e-3,
                       [&](const State& s, double) { out.push_back(s[n]); });
  return out;
}

}  // namespace

TEST(Classical, GeneratorConservesProbability) {
  const auto q = classical_generator(random_weighted(7, 1), 3, 0.8);
  EXPECT_LE(q.colwise().sum().cwiseAbs().maxCoeff(), 1e-14);
  for (int i = 0; i < q.rows(); ++i)
    for (int j = 0; j < q.cols(); ++j)
      if (i != j) EXPECT_GE(q(i, j), 0.0);
}

TEST(Classical, RatesAreSquaredCouplings) {
  WeightedGraph g(2);
  g.add_edge(1, 2, 0.5);
  const auto q = classical_generator(g, 2, 0.0);
  EXPECT_DOUBLE_EQ(q(0, 1), 0.25);
  EXPECT_DOUBLE_EQ(q(1, 0), 0.25);
}

TEST(Classical, SingleSiteDecay) {
  WeightedGraph g(1);
  const std::vector<double> times{0.0, 0.5, 2.0};
  const auto r = classical_evolve(g, 1, 0.7, 1, times);
  for (std::size_t k = 0; k < times.size(); ++k) EXPECT_NEAR(r.p_sink[k], 1.0 - std::exp(-1.4 * times[k]), 1e-13);
}

TEST(Classical, MatchesReferenceSolver) {
  const std::vector<double> times{0.0, 0.7, 3.0, 10.0, 25.0};
  for (std::uint64_t s = 0; s < 5; ++s) {
    const auto g = random_weighted(6 + static_cast<int>(s), s);
    const auto r = classical_evolve(g, g.size(), 0.6, 1, times);
    const auto ref = reference_sink(g, g.size(), 0.6, 1, times);
    for (std::size_t k = 0; k < times.size(); ++k) EXPECT_NEAR(r.p_sink[k], ref[k], 1e-9);
    for (std::size_t k = 0; k < times.size(); ++k)
      EXPECT_NEAR(r.populations.row(static_cast<Eigen::Index>(k)).sum() + r.p_sink[k], 1.0, 1e-12);
  }
}

TEST(Classical, ConnectedGraphsDeliverEverything) {
  const auto g = generate_graph(kind::Complete{32});
  const auto r = classical_evolve(g, 32, 1.0, 1, std::vector<double>{0.0, 400.0});
  EXPECT_NEAR(r.p_sink.back(), 1.0, 1e-10);
}

TEST(Classical, MixedInitialDistribution) {
  const auto g = generate_graph(kind::Path{4});
  const std::vector<double> p0{0.25, 0.25, 0.25, 0.25}, times{0.0, 3.0};
  const auto mixed = classical_evolve(g, 4, 1.0, p0, times);
  double avg = 0.0;
  for (NodeId s = 1; s <= 4; ++s) avg += 0.25 * classical_evolve(g, 4, 1.0, s, times).p_sink.back();
  EXPECT_NEAR(mixed.p_sink.back(), avg, 1e-13);
}

TEST(Classical, StrongDephasingLimitOfQuantumDynamics) {
  // Coherences decay at 2 gamma, so adiabatic elimination gives hopping at
  // |alpha|^2 / gamma. Rescaling time by gamma recovers kappa = |alpha|^2.
  const double gamma = 200.0, tau = 4.0;
  const auto g = random_weighted(4, 7);
  const double sink = 0.5;
  const auto m = build_model(g, {}, 4, sink / gamma, {}, uniform_rates(4, gamma));
  const auto q = evolve(m, QuantumState::localized(4, 1), std::vector<double>{0.0, gamma * tau});
  const auto c = classical_evolve(g, 4, sink, 1, std::vector<double>{0.0, tau});
  EXPECT_NEAR(transfer_efficiency(q).back(), c.p_sink.back(), 5e-3);
}

TEST(Classical, Validation) {
  const auto g = generate_graph(kind::Path{3});
  EXPECT_THROW(classical_generator(g, 4, 1.0), InvalidArgument);
  EXPECT_THROW(classical_generator(g, 1, -1.0), InvalidArgument);
  EXPECT_THROW(classical_evolve(g, 1, 1.0, 5, std::vector<double>{0.0}), InvalidArgument);
  EXPECT_THROW(classical_evolve(g, 1, 1.0, std::vector<double>{1.0}, std::vector<double>{0.0}), InvalidArgument);
}
