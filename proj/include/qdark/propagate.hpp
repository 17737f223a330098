#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <unsupported/Eigen/MatrixFunctions>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/numeric/odeint.hpp>

#include "error.hpp"
#include "liouvillian.hpp"
#include "model.hpp"
#include "state.hpp"

namespace qdark {

// kAuto picks kUnitary for purely coherent dynamics (no dephasing, and not
// both a sink and site dissipation), kTaylor otherwise. kDenseExpm
// exponentiates the full (N+2)^2 generator and kRungeKutta integrates it
// adaptively; both are mainly cross-checks for small networks.
enum class Propagator { kAuto, kUnitary, kTaylor, kDenseExpm, kRungeKutta };

inline const char* propagator_name(Propagator p) {
  switch (p) {
    case Propagator::kAuto: return "auto";
    case Propagator::kUnitary: return "unitary";
    case Propagator::kTaylor: return "taylor";
    case Propagator::kDenseExpm: return "dense-expm";
    case Propagator::kRungeKutta: return "runge-kutta";
  }
  return "?";
}

struct EvolveOptions {
  Propagator method = Propagator::kAuto;
  bool snapshots = false;   // keep the full density matrix at every grid point
  bool quadrature = true;   // accumulate the integral of rho_tt alongside
  double rtol = 1e-8;       // Runge-Kutta only
  double atol = 1e-10;
  long max_rk_steps = 50'000'000;
};

struct PropagationResult {
  std::vector<double> times;
  // One row per time: [vacuum, site 1..N, sink].
  Eigen::MatrixXd populations;
  // Integral of rho_{target,target} from 0 to each time (empty when disabled).
  std::vector<double> target_integral;
  std::vector<Eigen::MatrixXcd> snapshots;
  NodeId target = 0;
  double sink_rate = 0.0;
  Propagator method = Propagator::kAuto;

  int sites() const { return static_cast<int>(populations.cols()) - 2; }

  std::vector<double> sink_population() const {
    std::vector<double> out(times.size());
    for (std::size_t k = 0; k < times.size(); ++k) out[k] = populations(static_cast<Eigen::Index>(k), sites() + 1);
    return out;
  }
  std::vector<double> vacuum_population() const {
    std::vector<double> out(times.size());
    for (std::size_t k = 0; k < times.size(); ++k) out[k] = populations(static_cast<Eigen::Index>(k), 0);
    return out;
  }
  std::vector<double> site_population(NodeId site) const {
    std::vector<double> out(times.size());
    for (std::size_t k = 0; k < times.size(); ++k) out[k] = populations(static_cast<Eigen::Index>(k), site);
    return out;
  }
};

// Uniform grid 0, dt, ..., t_max (last point exactly t_max).
inline std::vector<double> uniform_grid(double t_max, double dt) {
  if (!(t_max >= 0.0) || !(dt > 0.0)) throw InvalidArgument("time grid needs t_max >= 0 and dt > 0");
  const auto steps = static_cast<long>(std::ceil(t_max / dt - 1e-9));
  std::vector<double> g(steps + 1);
  for (long k = 0; k <= steps; ++k) g[k] = std::min(t_max, static_cast<double>(k) * dt);
  g.back() = t_max;
  return g;
}

namespace detail {

// Gauss-Legendre rule on [0, 1].
struct UnitRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

inline const UnitRule& gauss8() {
  static const UnitRule rule = [] {
    using G = boost::math::quadrature::gauss<double, 8>;
    UnitRule r;
    const auto& x = G::abscissa();
    const auto& w = G::weights();
    for (std::size_t k = 0; k < x.size(); ++k) {
      r.nodes.push_back(0.5 * (1.0 - x[k]));
      r.weights.push_back(0.5 * w[k]);
      r.nodes.push_back(0.5 * (1.0 + x[k]));
      r.weights.push_back(0.5 * w[k]);
    }
    return r;
  }();
  return rule;
}

// Non-Hermitian effective Hamiltonian on the sites:
// H - i (Gamma_sink |t><t| + sum_j (Gamma_j + gamma_j) |j><j|).
inline Eigen::MatrixXcd effective_hamiltonian(const OpenSystemModel& m) {
  Eigen::MatrixXcd h = m.site_hamiltonian().cast<Complex>();
  for (int j = 0; j < m.sites(); ++j) h(j, j) -= Complex(0.0, m.dissipation[j] + m.dephasing[j]);
  h(m.target - 1, m.target - 1) -= Complex(0.0, m.sink_rate);
  return h;
}

inline double one_norm(const Eigen::MatrixXcd& a) { return a.cwiseAbs().colwise().sum().maxCoeff(); }

// The generator never mixes the site block with vacuum/sink coherences, so a
// state splits into: the site block S, populations of vacuum and sink, the
// site-vacuum and site-sink coherence columns (which evolve under
// exp(-i H_eff t)), and a constant vacuum-sink coherence.
struct SplitState {
  Eigen::MatrixXcd sites;
  Eigen::VectorXcd vacuum_column;  // rho(site, vacuum)
  Eigen::VectorXcd sink_column;    // rho(site, sink)
  double vacuum = 0.0;
  double sink = 0.0;
  Complex vacuum_sink{0.0, 0.0};

  static SplitState from(const Eigen::MatrixXcd& rho) {
    const auto n = rho.rows() - 2;
    SplitState s;
    s.sites = rho.block(1, 1, n, n);
    s.vacuum_column = rho.block(1, 0, n, 1);
    s.sink_column = rho.block(1, n + 1, n, 1);
    s.vacuum = rho(0, 0).real();
    s.sink = rho(n + 1, n + 1).real();
    s.vacuum_sink = rho(0, n + 1);
    return s;
  }

  bool has_coherences() const {
    return vacuum_column.cwiseAbs().maxCoeff() > 0.0 || sink_column.cwiseAbs().maxCoeff() > 0.0;
  }

  Eigen::MatrixXcd density() const {
    const auto n = sites.rows();
    Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(n + 2, n + 2);
    rho.block(1, 1, n, n) = sites;
    rho.block(1, 0, n, 1) = vacuum_column;
    rho.block(0, 1, 1, n) = vacuum_column.adjoint();
    rho.block(1, n + 1, n, 1) = sink_column;
    rho.block(n + 1, 1, 1, n) = sink_column.adjoint();
    rho(0, 0) = vacuum;
    rho(n + 1, n + 1) = sink;
    rho(0, n + 1) = vacuum_sink;
    rho(n + 1, 0) = std::conj(vacuum_sink);
    return rho;
  }

  Eigen::VectorXd populations() const {
    const auto n = sites.rows();
    Eigen::VectorXd p(n + 2);
    p[0] = vacuum;
    p.segment(1, n) = sites.diagonal().real();
    p[n + 1] = sink;
    return p;
  }
};

class Stepper {
 public:
  virtual ~Stepper() = default;
  virtual void advance(double h) = 0;
  virtual Eigen::VectorXd populations() const = 0;
  virtual Eigen::MatrixXcd density() const = 0;
  virtual double target_integral() const = 0;
  virtual double time() const = 0;
};

// Coherent propagation S -> U S U^dag with U = exp(-i H_eff h). The loss of
// site trace goes to the sink (or to the vacuum when only dissipation is
// present). Quadrature evaluates rho_tt at Gauss nodes inside substeps short
// enough that ||H_eff|| h_sub <= 1.
class UnitaryStepper final : public Stepper {
 public:
  UnitaryStepper(const OpenSystemModel& m, const Eigen::MatrixXcd& rho0, bool quadrature)
      : heff_(effective_hamiltonian(m)),
        state_(SplitState::from(rho0)),
        target_(m.target - 1),
        loss_to_sink_(m.sink_rate > 0.0 || !m.has_dissipation()),
        quadrature_(quadrature) {
    if (m.has_dephasing() || (m.sink_rate > 0.0 && m.has_dissipation()))
      throw InvalidArgument("unitary propagator needs coherent dynamics with a single loss channel");
    norm_ = one_norm(heff_);
  }

  void advance(double h) override {
    if (h <= 0.0) return;
    const double before = state_.sites.trace().real();
    if (quadrature_) {
      const long sub = std::max(1L, static_cast<long>(std::ceil(norm_ * h)));
      const auto& c = cache(h / static_cast<double>(sub));
      const auto& rule = gauss8();
      for (long s = 0; s < sub; ++s) {
        double acc = 0.0;
        for (std::size_t g = 0; g < rule.nodes.size(); ++g) {
          const Eigen::RowVectorXcd r = c.rows.row(static_cast<Eigen::Index>(g));
          acc += rule.weights[g] * (r * state_.sites * r.adjoint())(0, 0).real();
        }
        integral_ += acc * (h / static_cast<double>(sub));
        state_.sites = c.u * state_.sites * c.u.adjoint();
      }
      if (state_.has_coherences()) {
        Eigen::MatrixXcd u = cache(h / static_cast<double>(sub)).u;
        for (long s = 0; s < sub; ++s) {
          state_.vacuum_column = u * state_.vacuum_column;
          state_.sink_column = u * state_.sink_column;
        }
      }
    } else {
      const auto& c = cache(h);
      state_.sites = c.u * state_.sites * c.u.adjoint();
      state_.vacuum_column = c.u * state_.vacuum_column;
      state_.sink_column = c.u * state_.sink_column;
    }
    state_.sites = 0.5 * (state_.sites + state_.sites.adjoint()).eval();
    const double lost = before - state_.sites.trace().real();
    (loss_to_sink_ ? state_.sink : state_.vacuum) += lost;
    t_ += h;
  }

  Eigen::VectorXd populations() const override { return state_.populations(); }
  Eigen::MatrixXcd density() const override { return state_.density(); }
  double target_integral() const override { return integral_; }
  double time() const override { return t_; }

 private:
  struct Cached {
    Eigen::MatrixXcd u;
    Eigen::MatrixXcd rows;  // target rows of exp(-i H_eff tau) at the Gauss nodes
  };

  const Cached& cache(double h) {
    auto it = cache_.find(h);
    if (it != cache_.end()) return it->second;
    Cached c;
    const Complex mi(0.0, -1.0);
    c.u = (mi * h * heff_).exp();
    if (quadrature_) {
      const auto& rule = gauss8();
      c.rows.resize(static_cast<Eigen::Index>(rule.nodes.size()), heff_.cols());
      for (std::size_t g = 0; g < rule.nodes.size(); ++g) {
        Eigen::MatrixXcd ug = (mi * (h * rule.nodes[g]) * heff_).exp();
        c.rows.row(static_cast<Eigen::Index>(g)) = ug.row(target_);
      }
    }
    if (cache_.size() > 16) cache_.clear();
    return cache_.emplace(h, std::move(c)).first->second;
  }

  Eigen::MatrixXcd heff_;
  SplitState state_;
  int target_;
  bool loss_to_sink_;
  bool quadrature_;
  double norm_ = 0.0;
  double integral_ = 0.0;
  double t_ = 0.0;
  std::map<double, Cached> cache_;
};

// Truncated Taylor series for the action of exp(h G) on the site block plus
// vacuum/sink populations, with substeps sized so that ||G|| h_sub <= 4. The
// same series, integrated term by term, gives the exact integral of rho_tt.
class TaylorStepper final : public Stepper {
 public:
  TaylorStepper(const OpenSystemModel& m, const Eigen::MatrixXcd& rho0)
      : state_(SplitState::from(rho0)), target_(m.target - 1), sink_rate_(m.sink_rate) {
    const Eigen::MatrixXcd heff = effective_hamiltonian(m);
    heff_ = heff.sparseView();
    heff_adj_ = heff.adjoint().sparseView();
    dephasing_ = Eigen::Map<const Eigen::VectorXd>(m.dephasing.data(), m.sites());
    dissipation_ = Eigen::Map<const Eigen::VectorXd>(m.dissipation.data(), m.sites());
    coherent_heff_ = heff;
    coherent_heff_adj_ = heff.adjoint();
    dense_ = heff_.nonZeros() * 4 > heff.size();
    bound_ = 2.0 * one_norm(heff) + 2.0 * dephasing_.maxCoeff() + 2.0 * m.sink_rate +
             2.0 * dissipation_.maxCoeff();
  }

  void advance(double h) override {
    if (h <= 0.0) return;
    const long sub = std::max(1L, static_cast<long>(std::ceil(bound_ * h / kTheta)));
    const double hs = h / static_cast<double>(sub);
    for (long s = 0; s < sub; ++s) substep(hs);
    if (state_.has_coherences()) {
      const Eigen::MatrixXcd u = (Complex(0.0, -h) * coherent_heff_).exp();
      state_.vacuum_column = u * state_.vacuum_column;
      state_.sink_column = u * state_.sink_column;
    }
    state_.sites = 0.5 * (state_.sites + state_.sites.adjoint()).eval();
    t_ += h;
  }

  Eigen::VectorXd populations() const override { return state_.populations(); }
  Eigen::MatrixXcd density() const override { return state_.density(); }
  double target_integral() const override { return integral_; }
  double time() const override { return t_; }

 private:
  static constexpr double kTheta = 4.0;
  static constexpr int kMaxTerms = 80;

  void substep(double hs) {
    const Complex mi(0.0, -1.0);
    Eigen::MatrixXcd term = state_.sites;
    double term_vac = 0.0, term_sink = 0.0;
    Eigen::MatrixXcd sum = term;
    double sum_vac = state_.vacuum, sum_sink = state_.sink;
    double integral = hs * term(target_, target_).real();
    double prev_norm = std::numeric_limits<double>::infinity();
    bool converged = false;
    for (int k = 1; k <= kMaxTerms; ++k) {
      const double c = hs / k;
      Eigen::MatrixXcd next(term.rows(), term.cols());
      if (dense_) {
        next.noalias() = coherent_heff_ * term;
        next.noalias() -= term * coherent_heff_adj_;
      } else {
        next = heff_ * term - term * heff_adj_;
      }
      next *= mi;
      const Eigen::VectorXd diag = term.diagonal().real();
      next.diagonal() += (2.0 * dephasing_.cwiseProduct(diag)).cast<Complex>();
      term_vac = c * 2.0 * dissipation_.dot(diag);
      term_sink = c * 2.0 * sink_rate_ * diag[target_];
      term = c * next;
      sum += term;
      sum_vac += term_vac;
      sum_sink += term_sink;
      integral += hs * term(target_, target_).real() / (k + 1);
      const double norm =
          std::max({term.cwiseAbs().maxCoeff(), std::abs(term_vac), std::abs(term_sink)});
      const double scale = std::max(1e-300, sum.cwiseAbs().maxCoeff());
      if (norm <= 1e-17 * scale && prev_norm <= 1e-15 * scale) {
        converged = true;
        break;
      }
      prev_norm = norm;
    }
    if (!converged) throw NumericalError("Taylor propagator did not converge at t = " + std::to_string(t_));
    state_.sites = std::move(sum);
    state_.vacuum = sum_vac;
    state_.sink = sum_sink;
    integral_ += integral;
  }

  SplitState state_;
  int target_;
  double sink_rate_;
  Eigen::SparseMatrix<Complex> heff_;
  Eigen::SparseMatrix<Complex> heff_adj_;
  Eigen::MatrixXcd coherent_heff_;
  Eigen::MatrixXcd coherent_heff_adj_;
  bool dense_ = false;
  Eigen::VectorXd dephasing_;
  Eigen::VectorXd dissipation_;
  double bound_ = 0.0;
  double integral_ = 0.0;
  double t_ = 0.0;
};

// exp(h L) of the full generator, augmented with one row that accumulates
// the integral of rho_tt.
class DenseExpmStepper final : public Stepper {
 public:
  DenseExpmStepper(const OpenSystemModel& m, const Eigen::MatrixXcd& rho0) : dim_(m.dimension()) {
    const auto l = liouvillian(m);
    const auto d2 = l.rows();
    generator_ = Eigen::MatrixXcd::Zero(d2 + 1, d2 + 1);
    generator_.topLeftCorner(d2, d2) = Eigen::MatrixXcd(l);
    generator_(d2, vec_index(m.target, m.target, dim_)) = 1.0;
    x_ = Eigen::VectorXcd::Zero(d2 + 1);
    x_.head(d2) = vectorize(rho0);
  }

  void advance(double h) override {
    if (h <= 0.0) return;
    auto it = cache_.find(h);
    if (it == cache_.end()) {
      if (cache_.size() > 4) cache_.clear();
      it = cache_.emplace(h, (h * generator_).exp()).first;
    }
    x_ = it->second * x_;
    t_ += h;
  }

  Eigen::VectorXd populations() const override { return density().diagonal().real(); }
  Eigen::MatrixXcd density() const override {
    Eigen::MatrixXcd rho = unvectorize(x_.head(x_.size() - 1), dim_);
    return 0.5 * (rho + rho.adjoint());
  }
  double target_integral() const override { return x_[x_.size() - 1].real(); }
  double time() const override { return t_; }

 private:
  int dim_;
  Eigen::MatrixXcd generator_;
  Eigen::VectorXcd x_;
  std::map<double, Eigen::MatrixXcd> cache_;
  double t_ = 0.0;
};

// Adaptive Dormand-Prince 5(4) on the full vectorized master equation.
class RungeKuttaStepper final : public Stepper {
 public:
  using StateType = std::vector<Complex>;

  RungeKuttaStepper(const OpenSystemModel& m, const Eigen::MatrixXcd& rho0, const EvolveOptions& opt)
      : dim_(m.dimension()),
        l_(liouvillian(m)),
        target_index_(vec_index(m.target, m.target, m.dimension())),
        rtol_(opt.rtol),
        atol_(opt.atol),
        max_steps_(opt.max_rk_steps) {
    const Eigen::VectorXcd v = vectorize(rho0);
    x_.assign(v.data(), v.data() + v.size());
    x_.push_back(Complex(0.0));
  }

  void advance(double h) override {
    if (h <= 0.0) return;
    namespace ode = boost::numeric::odeint;
    const auto d2 = l_.rows();
    auto rhs = [this, d2](const StateType& x, StateType& dx, double) {
      if (++calls_ > max_steps_) throw NumericalError("Runge-Kutta step budget exhausted");
      Eigen::Map<const Eigen::VectorXcd> xv(x.data(), d2);
      Eigen::Map<Eigen::VectorXcd> dv(dx.data(), d2);
      dv = l_ * xv;
      dx[d2] = x[target_index_];
    };
    try {
      auto stepper = ode::make_controlled(atol_, rtol_, ode::runge_kutta_dopri5<StateType>());
      ode::integrate_adaptive(stepper, rhs, x_, t_, t_ + h, std::min(h, dt_guess_));
    } catch (const NumericalError& e) {
      throw NumericalError(std::string(e.what()) + " (reached t = " + std::to_string(t_) + ")");
    } catch (const std::exception& e) {
      throw NumericalError("Runge-Kutta integration failed near t = " + std::to_string(t_) + ": " + e.what());
    }
    t_ += h;
  }

  Eigen::VectorXd populations() const override { return density().diagonal().real(); }
  Eigen::MatrixXcd density() const override {
    Eigen::Map<const Eigen::VectorXcd> v(x_.data(), static_cast<Eigen::Index>(x_.size()) - 1);
    Eigen::MatrixXcd rho = unvectorize(v, dim_);
    return 0.5 * (rho + rho.adjoint());
  }
  double target_integral() const override { return x_.back().real(); }
  double time() const override { return t_; }

 private:
  int dim_;
  SparseSuperoperator l_;
  Eigen::Index target_index_;
  double rtol_, atol_;
  long max_steps_;
  long calls_ = 0;
  double dt_guess_ = 1e-3;
  StateType x_;
  double t_ = 0.0;
};

inline Propagator resolve(const OpenSystemModel& m, Propagator p) {
  if (p != Propagator::kAuto) return p;
  if (!m.has_dephasing() && !(m.sink_rate > 0.0 && m.has_dissipation())) return Propagator::kUnitary;
  return Propagator::kTaylor;
}

inline std::unique_ptr<Stepper> make_stepper(const OpenSystemModel& m, const QuantumState& rho0,
                                             const EvolveOptions& opt, Propagator method) {
  if (rho0.sites() != m.sites()) throw InvalidArgument("state dimension does not match the model");
  switch (method) {
    case Propagator::kUnitary: return std::make_unique<UnitaryStepper>(m, rho0.matrix(), opt.quadrature);
    case Propagator::kTaylor: return std::make_unique<TaylorStepper>(m, rho0.matrix());
    case Propagator::kDenseExpm: return std::make_unique<DenseExpmStepper>(m, rho0.matrix());
    case Propagator::kRungeKutta: return std::make_unique<RungeKuttaStepper>(m, rho0.matrix(), opt);
    case Propagator::kAuto: break;
  }
  throw InvalidArgument("unresolved propagator");
}

}  // namespace detail

// Propagates rho0 under the model's master equation and records
// populations on `times` (ascending, starting at or after 0).
inline PropagationResult evolve(const OpenSystemModel& m, const QuantumState& rho0,
                                std::span<const double> times, const EvolveOptions& opt = {}) {
  if (times.empty()) throw InvalidArgument("empty time grid");
  if (times.front() < 0.0 || !std::is_sorted(times.begin(), times.end()))
    throw InvalidArgument("time grid must be ascending and nonnegative");

  PropagationResult res;
  res.method = detail::resolve(m, opt.method);
  res.target = m.target;
  res.sink_rate = m.sink_rate;
  res.times.assign(times.begin(), times.end());
  res.populations.resize(static_cast<Eigen::Index>(times.size()), m.dimension());

  auto stepper = detail::make_stepper(m, rho0, opt, res.method);
  double t = 0.0;
  for (std::size_t k = 0; k < times.size(); ++k) {
    stepper->advance(times[k] - t);
    t = times[k];
    res.populations.row(static_cast<Eigen::Index>(k)) = stepper->populations().transpose();
    if (opt.quadrature) res.target_integral.push_back(stepper->target_integral());
    if (opt.snapshots) res.snapshots.push_back(stepper->density());
  }
  return res;
}

inline PropagationResult evolve(const OpenSystemModel& m, const QuantumState& rho0, double t_max, double dt,
                                const EvolveOptions& opt = {}) {
  const auto grid = uniform_grid(t_max, dt);
  return evolve(m, rho0, grid, opt);
}

// p_sink(t) = 2 Gamma_sink * integral_0^t rho_tt(s) ds. Uses the quadrature
// accumulated during propagation when available, otherwise the trapezoidal
// rule over the recorded target population.
inline std::vector<double> transfer_efficiency(const PropagationResult& r) {
  std::vector<double> p(r.times.size(), 0.0);
  if (!r.target_integral.empty()) {
    for (std::size_t k = 0; k < p.size(); ++k) p[k] = 2.0 * r.sink_rate * r.target_integral[k];
    return p;
  }
  const auto pop = r.site_population(r.target);
  for (std::size_t k = 1; k < p.size(); ++k)
    p[k] = p[k - 1] + r.sink_rate * (r.times[k] - r.times[k - 1]) * (pop[k] + pop[k - 1]);
  return p;
}

struct AsymptoticOptions {
  double flux_tolerance = 1e-8;
  double t_cap = 5000.0;
  double dt = 1.0;
  int window = 10;  // consecutive grid points below tolerance
  Propagator method = Propagator::kAuto;
};

struct AsymptoticTransfer {
  double p_sink = 0.0;
  bool converged = false;
  double time = 0.0;
};

// Runs until the sink flux 2 Gamma rho_tt stays below the tolerance for a
// full window of grid points, or until t_cap.
inline AsymptoticTransfer asymptotic_transfer(const OpenSystemModel& m, const QuantumState& rho0,
                                              const AsymptoticOptions& opt = {}) {
  EvolveOptions eo;
  eo.method = opt.method;
  eo.quadrature = false;
  auto stepper = detail::make_stepper(m, rho0, eo, detail::resolve(m, opt.method));
  const int n = m.sites();
  int quiet = 0;
  AsymptoticTransfer out;
  while (stepper->time() < opt.t_cap - 1e-12) {
    stepper->advance(std::min(opt.dt, opt.t_cap - stepper->time()));
    const Eigen::VectorXd pop = stepper->populations();
    const double flux = 2.0 * m.sink_rate * pop[m.target];
    quiet = flux < opt.flux_tolerance ? quiet + 1 : 0;
    out.p_sink = pop[n + 1];
    out.time = stepper->time();
    if (quiet >= opt.window) {
      out.converged = true;
      break;
    }
  }
  return out;
}

}  // namespace qdark
