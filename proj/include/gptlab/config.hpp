#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace gptlab {

using Real = double;
using Complex = std::complex<double>;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;

/// Default numerical tolerance used throughout the library.
inline constexpr double kDefaultTol = 1e-9;
inline constexpr std::uint64_t kDefaultSeed = 42;

/// Tolerance and seed injected into every operation that needs them.
struct Config {
  double tol = kDefaultTol;
  std::uint64_t seed = kDefaultSeed;
};

/// Raised on contract violations (mismatched systems, invalid inputs,
/// unmet preconditions).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Largest absolute entry. This is the sup-norm used for every operator
/// comparison in the library.
template <typename Derived>
double sup_norm(const Eigen::MatrixBase<Derived>& m) {
  if (m.size() == 0) return 0.0;
  return m.cwiseAbs().maxCoeff();
}

/// Cap on slit/input counts for anything that enumerates subsets.
inline constexpr int kMaxSubsetN = 12;

inline void require(bool cond, const std::string& what) {
  if (!cond) throw Error(what);
}

}  // namespace gptlab
