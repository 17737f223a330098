#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "error.hpp"
#include "format.hpp"
#include "graph.hpp"
#include "seed.hpp"

namespace qdark {

// Default thresholds. They sit well above double-precision eigensolver noise
// for N <= 1e3 and far below the gaps of unit-weight graphs.
struct SpectralTolerances {
  double degeneracy_scale = 1e-9;  // tau_deg = scale * max(1, |lambda|_max)
  double zero = 1e-10;             // overlap counted as zero at or below this
  double entry = 1e-8;             // eigenvector entry counted as zero
  double gap = 1e-6;               // minimum eigenvalue gap for "simple"
};

struct SpectralDecomposition {
  Eigen::VectorXd eigenvalues;   // ascending
  Eigen::MatrixXd eigenvectors;  // orthonormal columns
  // Index groups (contiguous, ascending) of numerically equal eigenvalues.
  std::vector<std::vector<int>> eigenspaces;
  double degeneracy_tolerance = 0.0;

  int size() const { return static_cast<int>(eigenvalues.size()); }
};

// Eigendecomposition of a real symmetric matrix. Consecutive eigenvalues
// closer than tau_deg are chained into one eigenspace.
inline SpectralDecomposition decompose(const Eigen::MatrixXd& h,
                                       std::optional<double> degeneracy_tolerance = std::nullopt) {
  if (h.rows() != h.cols() || h.rows() == 0) throw InvalidArgument("matrix must be square and nonempty");
  const double scale = std::max(1.0, h.cwiseAbs().maxCoeff());
  if ((h - h.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw InvalidArgument("matrix is not symmetric");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h);
  if (solver.info() != Eigen::Success) throw NumericalError("symmetric eigensolver did not converge");

  SpectralDecomposition dec;
  dec.eigenvalues = solver.eigenvalues();
  dec.eigenvectors = solver.eigenvectors();
  const double lmax = dec.eigenvalues.cwiseAbs().maxCoeff();
  dec.degeneracy_tolerance =
      degeneracy_tolerance.value_or(SpectralTolerances{}.degeneracy_scale * std::max(1.0, lmax));

  const int n = dec.size();
  std::vector<int> group{0};
  for (int k = 1; k < n; ++k) {
    if (dec.eigenvalues[k] - dec.eigenvalues[k - 1] > dec.degeneracy_tolerance) {
      dec.eigenspaces.push_back(std::move(group));
      group.clear();
    }
    group.push_back(k);
  }
  dec.eigenspaces.push_back(std::move(group));
  return dec;
}

inline SpectralDecomposition decompose(const WeightedGraph& g) { return decompose(g.adjacency()); }

// ---------------------------------------------------------------------------
// Dark subspace relative to a target node

struct EigenspaceOverlap {
  double eigenvalue = 0.0;
  int multiplicity = 0;
  double overlap = 0.0;  // || P_s |target> ||
};

struct DarkReport {
  NodeId target = 0;
  Eigen::VectorXd eigenvalues;
  std::vector<EigenspaceOverlap> eigenspaces;
  // Per eigen-direction after rotating each eigenspace so that a single
  // direction carries its whole target overlap; aligned with `eigenvalues`.
  std::vector<double> overlaps;
  int dark_dimension = 0;
  Eigen::MatrixXd dark_basis;      // N x dark_dimension, orthonormal columns
  Eigen::MatrixXd dark_projector;  // dark_basis * dark_basis^T
  std::map<double, int> quasi_dark_counts;  // eps -> #directions with 0 < overlap <= eps
  double zero_tolerance = 0.0;
};

inline DarkReport dark_report(const SpectralDecomposition& dec, NodeId target,
                              double zero_tolerance = SpectralTolerances{}.zero,
                              std::span<const double> eps_grid = {}) {
  const int n = dec.size();
  if (target < 1 || target > n)
    throw InvalidArgument("target " + std::to_string(target) + " outside 1.." + std::to_string(n));

  DarkReport rep;
  rep.target = target;
  rep.eigenvalues = dec.eigenvalues;
  rep.zero_tolerance = zero_tolerance;
  rep.overlaps.assign(n, 0.0);

  std::vector<Eigen::VectorXd> dark_cols;
  for (const auto& space : dec.eigenspaces) {
    const int d = static_cast<int>(space.size());
    Eigen::MatrixXd basis(n, d);
    for (int c = 0; c < d; ++c) basis.col(c) = dec.eigenvectors.col(space[c]);
    Eigen::VectorXd c = basis.row(target - 1).transpose();
    const double w = c.norm();

    double mean = 0.0;
    for (int idx : space) mean += dec.eigenvalues[idx];
    rep.eigenspaces.push_back({mean / d, d, w});

    if (w > zero_tolerance) {
      rep.overlaps[space.front()] = w;
      if (d > 1) {
        // Householder reflector mapping e_1 onto c/|c|: its remaining columns
        // span the part of the eigenspace orthogonal to the target.
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(c);
        Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(d, d);
        Eigen::MatrixXd rotated = basis * q;
        for (int k = 1; k < d; ++k) dark_cols.push_back(rotated.col(k));
      }
    } else {
      rep.overlaps[space.front()] = w;
      for (int k = 0; k < d; ++k) dark_cols.push_back(basis.col(k));
    }
  }

  rep.dark_dimension = static_cast<int>(dark_cols.size());
  rep.dark_basis.resize(n, rep.dark_dimension);
  for (int k = 0; k < rep.dark_dimension; ++k) rep.dark_basis.col(k) = dark_cols[k];
  rep.dark_projector = rep.dark_basis * rep.dark_basis.transpose();

  for (double eps : eps_grid) {
    int count = 0;
    for (const auto& s : rep.eigenspaces)
      if (s.overlap > zero_tolerance && s.overlap <= eps) ++count;
    rep.quasi_dark_counts[eps] = count;
  }
  return rep;
}

inline nlohmann::json to_json(const DarkReport& r) {
  nlohmann::json j;
  j["target"] = r.target;
  j["eigenvalues"] = std::vector<double>(r.eigenvalues.data(), r.eigenvalues.data() + r.eigenvalues.size());
  j["overlaps"] = r.overlaps;
  j["dark_dimension"] = r.dark_dimension;
  nlohmann::json quasi = nlohmann::json::object();
  for (const auto& [eps, count] : r.quasi_dark_counts) quasi[format_threshold(eps)] = count;
  j["quasi_dark"] = quasi;
  nlohmann::json spaces = nlohmann::json::array();
  for (const auto& s : r.eigenspaces)
    spaces.push_back({{"eigenvalue", s.eigenvalue}, {"multiplicity", s.multiplicity}, {"overlap", s.overlap}});
  j["eigenspaces"] = spaces;
  j["zero_tolerance"] = r.zero_tolerance;
  return j;
}

// ---------------------------------------------------------------------------
// Trapping prediction for coherent dynamics with a sink: the weight of the
// initial state inside the dark subspace never leaves the network.

inline double predict_trapped(const DarkReport& rep, const Eigen::VectorXcd& psi) {
  const auto n = rep.dark_projector.rows();
  if (psi.size() != n) throw InvalidArgument("state dimension does not match the network");
  if (std::abs(psi.squaredNorm() - 1.0) > 1e-10) throw InvalidArgument("state is not normalized");
  Eigen::VectorXcd projected = rep.dark_projector.cast<std::complex<double>>() * psi;
  return projected.squaredNorm();
}

// `rho` is the density matrix restricted to sites 1..N.
inline double predict_trapped(const DarkReport& rep, const Eigen::MatrixXcd& rho) {
  const auto n = rep.dark_projector.rows();
  if (rho.rows() != n || rho.cols() != n) throw InvalidArgument("state dimension does not match the network");
  if (std::abs(rho.trace() - std::complex<double>(1.0)) > 1e-10)
    throw InvalidArgument("state is not normalized");
  const Eigen::MatrixXcd p = rep.dark_projector.cast<std::complex<double>>();
  return (p * rho * p).trace().real();
}

inline double predict_trapped(const DarkReport& rep, NodeId site) {
  const auto n = static_cast<int>(rep.dark_projector.rows());
  if (site < 1 || site > n) throw InvalidArgument("site outside the network");
  return rep.dark_projector(site - 1, site - 1);
}

// ---------------------------------------------------------------------------
// Nowhere-zero eigenbasis test

struct NowhereZeroResult {
  enum class Witness { kNone, kDegenerate, kZeroEntry };
  bool nowhere_zero = false;
  Witness witness = Witness::kNone;
  int eigen_index = -1;  // 0-based, ascending order
  NodeId node = 0;       // location of the smallest entry (kZeroEntry)
  double eigenvalue = 0.0;
  double min_abs_entry = 0.0;
};

// True iff every eigenvalue is simple and no eigenvector has an entry of
// magnitude <= tau_entry. Such a Hamiltonian has no dark subspace for any
// target node.
inline NowhereZeroResult nowhere_zero_check(const SpectralDecomposition& dec,
                                            double entry_tolerance = SpectralTolerances{}.entry) {
  NowhereZeroResult res;
  for (const auto& space : dec.eigenspaces)
    if (space.size() > 1) {
      res.witness = NowhereZeroResult::Witness::kDegenerate;
      res.eigen_index = space.front();
      res.eigenvalue = dec.eigenvalues[space.front()];
      return res;
    }
  Eigen::Index row = 0, col = 0;
  res.min_abs_entry = dec.eigenvectors.cwiseAbs().minCoeff(&row, &col);
  res.eigen_index = static_cast<int>(col);
  res.node = static_cast<NodeId>(row) + 1;
  res.eigenvalue = dec.eigenvalues[col];
  res.nowhere_zero = res.min_abs_entry > entry_tolerance;
  res.witness = res.nowhere_zero ? NowhereZeroResult::Witness::kNone : NowhereZeroResult::Witness::kZeroEntry;
  return res;
}

inline double min_eigen_gap(const SpectralDecomposition& dec) {
  double gap = std::numeric_limits<double>::infinity();
  for (int k = 1; k < dec.size(); ++k) gap = std::min(gap, dec.eigenvalues[k] - dec.eigenvalues[k - 1]);
  return gap;
}

// ---------------------------------------------------------------------------
// Randomized search for an edge weighting without dark subspaces

struct PerturbResult {
  WeightedGraph graph;
  std::vector<double> site_energies;  // all zero unless site energies were perturbed
  int trial = 0;                      // 0 = unperturbed input accepted
  double min_gap = 0.0;
  double min_abs_entry = 0.0;
  SpectralDecomposition spectrum;     // of adjacency + diag(site_energies)
};

// Edge weights only is the default. Odd paths and other graphs whose
// zero-mode eigenvector vanishes on a vertex class for every weighting can
// only be cleared by also detuning sites.
enum class PerturbMode { kEdgeWeights, kEdgeWeightsAndSiteEnergies };

class SearchExhausted : public NumericalError {
 public:
  SearchExhausted(int trials, double best_gap, double best_entry)
      : NumericalError("no dark-free weighting within " + std::to_string(trials) +
                       " trials (best margins: gap " + format_double(best_gap) + ", entry " +
                       format_double(best_entry) + ")"),
        best_gap(best_gap),
        best_entry(best_entry) {}
  double best_gap;
  double best_entry;
};

// Trial t >= 1 rescales every edge weight by (1 + delta * u) with u uniform on
// [-1, 1], drawn from a sub-seed of (seed, t); in kEdgeWeightsAndSiteEnergies
// mode each site energy also gets delta * u. The first trial that has all gaps
// above tau_gap and all eigenvector entries above tau_entry wins.
inline PerturbResult perturb_to_dark_free(const WeightedGraph& g, double delta, int max_trials,
                                          std::uint64_t seed, const SpectralTolerances& tol = {},
                                          PerturbMode mode = PerturbMode::kEdgeWeights) {
  if (!(delta > 0.0)) throw InvalidArgument("perturbation amplitude must be positive");
  if (!is_connected(g)) throw InvalidArgument("graph must be connected");

  const int n = g.size();
  double best_gap = -1.0, best_entry = -1.0, best_score = -1.0;
  for (int trial = 0; trial <= max_trials; ++trial) {
    WeightedGraph candidate(n);
    std::vector<double> energies(n, 0.0);
    if (trial == 0) {
      candidate = g;
    } else {
      std::mt19937_64 rng(derive_seed(seed, {static_cast<std::uint64_t>(trial)}));
      std::uniform_real_distribution<double> u(-1.0, 1.0);
      for (const auto& e : g.edges()) candidate.add_edge(e.u, e.v, e.weight * (1.0 + delta * u(rng)));
      if (mode == PerturbMode::kEdgeWeightsAndSiteEnergies)
        for (auto& w : energies) w = delta * u(rng);
    }
    Eigen::MatrixXd h = candidate.adjacency();
    h.diagonal() += Eigen::Map<const Eigen::VectorXd>(energies.data(), n);
    auto dec = decompose(h);
    const double gap = n > 1 ? min_eigen_gap(dec) : std::numeric_limits<double>::infinity();
    const double entry = dec.eigenvectors.cwiseAbs().minCoeff();
    if (gap > tol.gap && entry > tol.entry)
      return {std::move(candidate), std::move(energies), trial, gap, entry, std::move(dec)};
    const double score = std::min(gap / tol.gap, entry / tol.entry);
    if (score > best_score) {
      best_score = score;
      best_gap = gap;
      best_entry = entry;
    }
  }
  throw SearchExhausted(max_trials, best_gap, best_entry);
}

}  // namespace qdark
