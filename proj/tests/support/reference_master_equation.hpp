#pragma once

#include <complex>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <boost/numeric/odeint.hpp>

#include <qdark/model.hpp>

namespace testing_support {

using qdark::Complex;

// Master equation written from explicit jump operators, integrated with a
// generic adaptive solver. Shares nothing with the library propagators.
struct ReferenceMasterEquation {
  Eigen::MatrixXcd h;
  std::vector<std::pair<double, Eigen::MatrixXcd>> jumps;

  explicit ReferenceMasterEquation(const qdark::OpenSystemModel& m) {
    const int n = m.sites(), d = n + 2;
    h = Eigen::MatrixXcd::Zero(d, d);
    const Eigen::MatrixXd a = m.graph.adjacency();
    for (int i = 0; i < n; ++i) {
      h(i + 1, i + 1) = m.site_energies[i];
      for (int j = 0; j < n; ++j) h(i + 1, j + 1) += a(i, j);
    }
    auto op = [d](int to, int from) {
      Eigen::MatrixXcd l = Eigen::MatrixXcd::Zero(d, d);
      l(to, from) = 1.0;
      return l;
    };
    jumps.emplace_back(m.sink_rate, op(n + 1, m.target));
    for (int j = 1; j <= n; ++j) {
      jumps.emplace_back(m.dissipation[j - 1], op(0, j));
      jumps.emplace_back(m.dephasing[j - 1], op(j, j));
    }
  }

  Eigen::MatrixXcd rhs(const Eigen::MatrixXcd& rho) const {
    const Complex i(0.0, 1.0);
    Eigen::MatrixXcd out = -i * (h * rho - rho * h);
    for (const auto& [rate, l] : jumps) {
      if (rate == 0.0) continue;
      const Eigen::MatrixXcd ldl = l.adjoint() * l;
      out += rate * (2.0 * l * rho * l.adjoint() - ldl * rho - rho * ldl);
    }
    return out;
  }

  std::vector<Eigen::MatrixXcd> solve(const Eigen::MatrixXcd& rho0, const std::vector<double>& times) const {
    namespace ode = boost::numeric::odeint;
    using State = std::vector<Complex>;
    const auto d = rho0.rows();
    State x(rho0.data(), rho0.data() + rho0.size());
    auto sys = [&](const State& s, State& ds, double) {
      Eigen::Map<const Eigen::MatrixXcd> r(s.data(), d, d);
      Eigen::Map<Eigen::MatrixXcd>(ds.data(), d, d) = rhs(r);
    };
    std::vector<Eigen::MatrixXcd> out;
    auto stepper = ode::make_dense_output(1e-11, 1e-11, ode::runge_kutta_dopri5<State>());
    auto observer = [&](const State& s, double) { out.push_back(Eigen::Map<const Eigen::MatrixXcd>(s.data(), d, d)); };
    ode::integrate_times(stepper, sys, x, times.begin(), times.end(), 1e-3, observer);
    return out;
  }
};

}  // namespace testing_support
