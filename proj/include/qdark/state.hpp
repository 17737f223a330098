#pragma once

#include <algorithm>
#include <complex>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "error.hpp"
#include "graph.hpp"

namespace qdark {

using Complex = std::complex<double>;

// Density matrix over {vacuum (index 0), sites 1..N, sink (index N+1)}.
class QuantumState {
 public:
  static constexpr double kTraceTol = 1e-9;
  static constexpr double kHermitianTol = 1e-12;
  static constexpr double kPositivityTol = 1e-8;

  struct Diagnostics {
    double trace_error = 0.0;
    double hermiticity_error = 0.0;
    double min_eigenvalue = 0.0;
  };

  explicit QuantumState(Eigen::MatrixXcd rho) : rho_(std::move(rho)) {
    if (rho_.rows() != rho_.cols() || rho_.rows() < 3)
      throw InvalidArgument("density matrix must be square with at least one site");
    const auto d = diagnose(rho_);
    if (d.trace_error > kTraceTol) throw InvalidArgument("density matrix trace is not 1");
    if (d.hermiticity_error > kHermitianTol) throw InvalidArgument("density matrix is not Hermitian");
    if (d.min_eigenvalue < -kPositivityTol) throw InvalidArgument("density matrix is not positive semidefinite");
  }

  static QuantumState localized(int n_sites, NodeId site) {
    if (site < 1 || site > n_sites) throw InvalidArgument("site outside the network");
    Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(n_sites + 2, n_sites + 2);
    rho(site, site) = 1.0;
    return QuantumState(std::move(rho));
  }

  // Pure state from site amplitudes (length N, unit norm to 1e-10).
  static QuantumState pure(const Eigen::VectorXcd& amplitudes) {
    if (std::abs(amplitudes.squaredNorm() - 1.0) > 1e-10) throw InvalidArgument("state is not normalized");
    const auto n = amplitudes.size();
    Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(n + 2);
    psi.segment(1, n) = amplitudes;
    return QuantumState(psi * psi.adjoint());
  }

  // Incoherent mixture of localized sites with the given weights (sum 1).
  static QuantumState site_mixture(std::span<const double> weights) {
    const auto n = static_cast<int>(weights.size());
    Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(n + 2, n + 2);
    for (int i = 0; i < n; ++i) {
      if (weights[i] < 0.0) throw InvalidArgument("mixture weights must be nonnegative");
      rho(i + 1, i + 1) = weights[i];
    }
    return QuantumState(std::move(rho));
  }

  // Embeds an N x N site density matrix.
  static QuantumState from_sites(const Eigen::MatrixXcd& sites) {
    const auto n = sites.rows();
    Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(n + 2, n + 2);
    rho.block(1, 1, n, n) = sites;
    return QuantumState(std::move(rho));
  }

  const Eigen::MatrixXcd& matrix() const noexcept { return rho_; }
  int sites() const noexcept { return static_cast<int>(rho_.rows()) - 2; }
  int dimension() const noexcept { return static_cast<int>(rho_.rows()); }
  Eigen::MatrixXcd site_block() const { return rho_.block(1, 1, sites(), sites()); }

  // True when vacuum, sink and all their coherences are empty.
  bool supported_on_sites(double tol = 1e-12) const {
    const int n = sites();
    return rho_.row(0).cwiseAbs().maxCoeff() <= tol && rho_.row(n + 1).cwiseAbs().maxCoeff() <= tol;
  }

  static Diagnostics diagnose(const Eigen::MatrixXcd& rho) {
    Diagnostics d;
    d.trace_error = std::abs(rho.trace() - Complex(1.0));
    d.hermiticity_error = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
    Eigen::MatrixXcd herm = 0.5 * (rho + rho.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(herm, Eigen::EigenvaluesOnly);
    d.min_eigenvalue = es.eigenvalues().minCoeff();
    return d;
  }

 private:
  Eigen::MatrixXcd rho_;
};

}  // namespace qdark
