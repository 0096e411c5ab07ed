#pragma once

#include "gptlab/config.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cstdint>
#include <random>
#include <vector>

namespace gptlab {

using Rng = std::mt19937_64;

/// Per-trial seed from a master seed and a counter (splitmix64 finalizer).
/// Trials seeded this way give the same results in any execution order.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t counter) {
  std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (counter + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline CMatrix ginibre(int d, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  CMatrix z(d, d);
  for (int j = 0; j < d; ++j)
    for (int i = 0; i < d; ++i) z(i, j) = Complex(normal(rng), normal(rng)) / std::sqrt(2.0);
  return z;
}

/// Haar-distributed unitary: QR of a Ginibre matrix with the phases of
/// diag(R) moved into Q (Mezzadri's correction).
inline CMatrix haar_unitary(int d, Rng& rng) {
  const CMatrix z = ginibre(d, rng);
  Eigen::HouseholderQR<CMatrix> qr(z);
  CMatrix q = qr.householderQ();
  const CMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int k = 0; k < d; ++k) {
    const Complex rk = r(k, k);
    const double a = std::abs(rk);
    if (a > 0.0) q.col(k) *= rk / a;
  }
  return q;
}

/// Haar-random unit vector in C^d.
inline CVector haar_ket(int d, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  CVector v(d);
  for (int i = 0; i < d; ++i) v(i) = Complex(normal(rng), normal(rng));
  return v / v.norm();
}

inline std::vector<int> random_permutation(int n, Rng& rng) {
  std::vector<int> p(n);
  for (int i = 0; i < n; ++i) p[i] = i;
  std::shuffle(p.begin(), p.end(), rng);
  return p;
}

}  // namespace gptlab
