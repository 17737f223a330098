#pragma once

#include <complex>
#include <vector>

#include <Eigen/Sparse>

#include "model.hpp"
#include "state.hpp"

namespace qdark {

using SparseSuperoperator = Eigen::SparseMatrix<Complex>;

// Column-stacking index of rho(a, b) in vec(rho).
inline Eigen::Index vec_index(int a, int b, int dim) { return a + static_cast<Eigen::Index>(dim) * b; }

// Generator of d rho/dt = -i[H, rho] + L_sink + L_diss + L_deph acting on
// vec(rho). Each Lindblad term uses the convention
// rate * (2 L rho L^dag - {L^dag L, rho}) with jump operators
//   sink:        |sink><target|
//   dissipation: |vacuum><j|
//   dephasing:   |j><j|
inline SparseSuperoperator liouvillian(const OpenSystemModel& m) {
  const int n = m.sites();
  const int d = n + 2;
  const int sink = n + 1;
  const Complex i1(0.0, 1.0);
  std::vector<Eigen::Triplet<Complex>> t;
  const Eigen::MatrixXd h = m.hamiltonian();

  for (int a = 0; a < d; ++a)
    for (int c = 0; c < d; ++c) {
      if (h(a, c) == 0.0) continue;
      for (int b = 0; b < d; ++b) {
        t.emplace_back(vec_index(a, b, d), vec_index(c, b, d), -i1 * h(a, c));  // -i H rho
        t.emplace_back(vec_index(b, c, d), vec_index(b, a, d), i1 * h(a, c));   // +i rho H
      }
    }

  // Jump |to><from| with the given rate.
  auto jump = [&](int to, int from, double rate) {
    if (rate == 0.0) return;
    t.emplace_back(vec_index(to, to, d), vec_index(from, from, d), 2.0 * rate);
    for (int b = 0; b < d; ++b) {
      t.emplace_back(vec_index(from, b, d), vec_index(from, b, d), -rate);
      t.emplace_back(vec_index(b, from, d), vec_index(b, from, d), -rate);
    }
  };

  jump(sink, m.target, m.sink_rate);
  for (int j = 1; j <= n; ++j) {
    jump(0, j, m.dissipation[j - 1]);
    jump(j, j, m.dephasing[j - 1]);
  }

  SparseSuperoperator l(static_cast<Eigen::Index>(d) * d, static_cast<Eigen::Index>(d) * d);
  l.setFromTriplets(t.begin(), t.end());
  return l;
}

inline Eigen::VectorXcd vectorize(const Eigen::MatrixXcd& rho) {
  return Eigen::Map<const Eigen::VectorXcd>(rho.data(), rho.size());
}

inline Eigen::MatrixXcd unvectorize(const Eigen::VectorXcd& v, int dim) {
  return Eigen::Map<const Eigen::MatrixXcd>(v.data(), dim, dim);
}

// L[rho] as a matrix.
inline Eigen::MatrixXcd apply_liouvillian(const SparseSuperoperator& l, const Eigen::MatrixXcd& rho) {
  return unvectorize(l * vectorize(rho), static_cast<int>(rho.rows()));
}

}  // namespace qdark
