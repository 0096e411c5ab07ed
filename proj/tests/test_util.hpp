#pragma once

#include "gptlab/core.hpp"
#include "gptlab/random.hpp"

#include <gtest/gtest.h>

namespace gptlab::testing {

inline CVector ket(std::initializer_list<Complex> amps) {
  CVector v(amps.size());
  int i = 0;
  for (auto a : amps) v(i++) = a;
  return v;
}

inline CVector basis_ket(int d, int i) { return CVector::Unit(d, i); }

inline StateVec qstate(int d, const CVector& psi) { return StateVec::from_ket(System::quantum(d), psi); }

inline CMatrix pauli_x() {
  CMatrix x(2, 2);
  x << 0, 1, 1, 0;
  return x;
}
inline CMatrix pauli_z() {
  CMatrix z(2, 2);
  z << 1, 0, 0, -1;
  return z;
}
inline CMatrix hadamard() {
  CMatrix h(2, 2);
  h << 1, 1, 1, -1;
  return h / std::sqrt(2.0);
}

/// Random density matrix: mixture of Haar kets with Dirichlet-ish weights.
inline CMatrix random_density(int d, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  CMatrix rho = CMatrix::Zero(d, d);
  double total = 0.0;
  for (int k = 0; k < d; ++k) {
    const double w = u(rng);
    const CVector v = haar_ket(d, rng);
    rho += w * v * v.adjoint();
    total += w;
  }
  return rho / total;
}

}  // namespace gptlab::testing
