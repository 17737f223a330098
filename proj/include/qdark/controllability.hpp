#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "graph.hpp"

namespace qdark {

struct ControllabilityCertificate {
  enum class Method { kExactModular, kFloating };
  bool controllable = false;
  int walk_matrix_rank = 0;
  Method method = Method::kExactModular;
  std::vector<std::uint64_t> primes;  // moduli used by the exact method
};

namespace detail {

inline std::uint64_t mulmod(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
  return static_cast<std::uint64_t>((static_cast<unsigned __int128>(a) * b) % m);
}

inline std::uint64_t powmod(std::uint64_t a, std::uint64_t e, std::uint64_t m) {
  std::uint64_t r = 1;
  a %= m;
  for (; e; e >>= 1) {
    if (e & 1) r = mulmod(r, a, m);
    a = mulmod(a, a, m);
  }
  return r;
}

// Deterministic Miller-Rabin; the bases {2, 7, 61} are exact below 4.7e9.
inline bool is_prime_u32(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t p : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL})
    if (n % p == 0) return n == p;
  std::uint64_t d = n - 1;
  int s = 0;
  while ((d & 1) == 0) {
    d >>= 1;
    ++s;
  }
  for (std::uint64_t a : {2ULL, 7ULL, 61ULL}) {
    if (a % n == 0) continue;
    std::uint64_t x = powmod(a, d, n);
    if (x == 1 || x == n - 1) continue;
    bool composite = true;
    for (int r = 1; r < s; ++r) {
      x = mulmod(x, x, n);
      if (x == n - 1) {
        composite = false;
        break;
      }
    }
    if (composite) return false;
  }
  return true;
}

// Random primes in [2^30, 2^31) from a fixed stream, so certificates are
// reproducible.
inline std::vector<std::uint64_t> word_primes(std::size_t count) {
  std::mt19937_64 rng(0x5eedc0de2024ULL);
  std::uniform_int_distribution<std::uint64_t> dist(1ULL << 30, (1ULL << 31) - 1);
  std::vector<std::uint64_t> out;
  while (out.size() < count) {
    std::uint64_t c = dist(rng) | 1ULL;
    if (is_prime_u32(c) && std::find(out.begin(), out.end(), c) == out.end()) out.push_back(c);
  }
  return out;
}

inline int rank_mod_p(std::vector<std::vector<std::uint64_t>> m, std::uint64_t p) {
  const int rows = static_cast<int>(m.size());
  const int cols = rows ? static_cast<int>(m[0].size()) : 0;
  int rank = 0;
  for (int c = 0; c < cols && rank < rows; ++c) {
    int piv = -1;
    for (int r = rank; r < rows; ++r)
      if (m[r][c] != 0) {
        piv = r;
        break;
      }
    if (piv < 0) continue;
    std::swap(m[piv], m[rank]);
    const std::uint64_t inv = powmod(m[rank][c], p - 2, p);
    for (int r = rank + 1; r < rows; ++r) {
      if (m[r][c] == 0) continue;
      const std::uint64_t f = mulmod(m[r][c], inv, p);
      for (int k = c; k < cols; ++k) m[r][k] = (m[r][k] + p - mulmod(f, m[rank][k], p)) % p;
    }
    ++rank;
  }
  return rank;
}

// Walk matrix [b, Ab, ..., A^{N-1} b] reduced mod p, b = all-ones.
inline std::vector<std::vector<std::uint64_t>> walk_matrix_mod_p(const WeightedGraph& g, std::uint64_t p) {
  const int n = g.size();
  auto to_mod = [p](double w) {
    auto v = static_cast<long long>(std::llround(w)) % static_cast<long long>(p);
    return static_cast<std::uint64_t>(v < 0 ? v + static_cast<long long>(p) : v);
  };
  std::vector<std::vector<std::uint64_t>> w(n, std::vector<std::uint64_t>(n, 0));
  std::vector<std::uint64_t> v(n, 1), next(n);
  for (int col = 0; col < n; ++col) {
    for (int i = 0; i < n; ++i) w[i][col] = v[i];
    std::fill(next.begin(), next.end(), 0);
    for (const auto& e : g.edges()) {
      const std::uint64_t a = to_mod(e.weight);
      next[e.u - 1] = (next[e.u - 1] + mulmod(a, v[e.v - 1], p)) % p;
      next[e.v - 1] = (next[e.v - 1] + mulmod(a, v[e.u - 1], p)) % p;
    }
    v.swap(next);
  }
  return w;
}

// Dimension of the Krylov space span{b, Ab, ...} by orthogonalized iteration.
inline int krylov_rank(const Eigen::MatrixXd& a, double rel_tol) {
  const auto n = a.rows();
  const double scale = std::max(1.0, a.norm());
  Eigen::MatrixXd q(n, n);
  Eigen::VectorXd v = Eigen::VectorXd::Ones(n) / std::sqrt(static_cast<double>(n));
  int k = 0;
  while (k < n) {
    q.col(k) = v;
    ++k;
    Eigen::VectorXd w = a * v;
    for (int pass = 0; pass < 2; ++pass)
      for (int j = 0; j < k; ++j) w -= q.col(j).dot(w) * q.col(j);
    const double r = w.norm();
    if (r <= rel_tol * scale) break;
    v = w / r;
  }
  return k;
}

}  // namespace detail

// Tests whether the walk matrix W = [b, Ab, ..., A^{N-1}b] with b = all-ones
// has full rank. Integer weights use exact rank over random word-size primes:
// one full-rank prime certifies controllability, and deficiency is reported
// once three primes agree on the largest observed rank. Other weights fall
// back to an orthogonalized Krylov rank in floating point.
inline ControllabilityCertificate walk_matrix_controllable(const WeightedGraph& g,
                                                           double floating_tol = 1e-9) {
  const int n = g.size();
  ControllabilityCertificate cert;
  bool integral = true;
  for (const auto& e : g.edges())
    if (e.weight != std::round(e.weight) || std::abs(e.weight) > 2147483647.0) integral = false;

  if (!integral) {
    cert.method = ControllabilityCertificate::Method::kFloating;
    cert.walk_matrix_rank = detail::krylov_rank(g.adjacency(), floating_tol);
    cert.controllable = cert.walk_matrix_rank == n;
    return cert;
  }

  cert.method = ControllabilityCertificate::Method::kExactModular;
  std::map<int, int> seen;
  for (std::uint64_t p : detail::word_primes(8)) {
    cert.primes.push_back(p);
    const int r = detail::rank_mod_p(detail::walk_matrix_mod_p(g, p), p);
    if (r == n) {
      cert.controllable = true;
      cert.walk_matrix_rank = n;
      return cert;
    }
    ++seen[r];
    const auto& [best_rank, hits] = *seen.rbegin();
    if (hits >= 3) break;
  }
  cert.walk_matrix_rank = seen.rbegin()->first;
  cert.controllable = false;
  return cert;
}

}  // namespace qdark
