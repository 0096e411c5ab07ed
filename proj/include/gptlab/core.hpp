#pragma once

#include "gptlab/config.hpp"
#include "gptlab/system.hpp"

#include <algorithm>
#include <utility>
#include <vector>

namespace gptlab {

enum class Side { left, right };

/// A (possibly unnormalized) vector in the state space of a system.
class StateVec {
 public:
  StateVec(System system, Vector coeffs) : system_(std::move(system)), coeffs_(std::move(coeffs)) {
    require(coeffs_.size() == system_.dim(), "state has wrong length for " + system_.label());
  }

  static StateVec from_density(const System& system, const CMatrix& rho) {
    return StateVec(system, system.from_matrix(rho));
  }
  /// |psi><psi| for a Hilbert-space vector (not normalized here).
  static StateVec from_ket(const System& system, const CVector& psi) {
    return from_density(system, psi * psi.adjoint());
  }
  static StateVec maximally_mixed(const System& system) { return StateVec(system, system.maximally_mixed()); }

  const System& system() const { return system_; }
  const Vector& coeffs() const { return coeffs_; }
  CMatrix density() const { return system_.to_matrix(coeffs_); }

  double norm_weight() const { return system_.unit_effect().dot(coeffs_); }
  bool is_normalized(double tol = kDefaultTol) const { return std::abs(norm_weight() - 1.0) <= tol; }
  bool in_cone(double tol = kDefaultTol) const { return system_.in_state_cone(coeffs_, tol); }
  bool is_pure(double tol = kDefaultTol) const { return system_.is_pure(coeffs_, tol); }

  StateVec scaled(double a) const { return StateVec(system_, a * coeffs_); }
  friend StateVec operator+(const StateVec& a, const StateVec& b) {
    require(a.system_ == b.system_, "adding states of different systems");
    return StateVec(a.system_, a.coeffs_ + b.coeffs_);
  }
  friend StateVec operator-(const StateVec& a, const StateVec& b) {
    require(a.system_ == b.system_, "subtracting states of different systems");
    return StateVec(a.system_, a.coeffs_ - b.coeffs_);
  }

 private:
  System system_;
  Vector coeffs_;
};

/// A covector on the state space; (e|s) = e . s.
class EffectVec {
 public:
  EffectVec(System system, Vector coeffs) : system_(std::move(system)), coeffs_(std::move(coeffs)) {
    require(coeffs_.size() == system_.dim(), "effect has wrong length for " + system_.label());
  }

  static EffectVec from_operator(const System& system, const CMatrix& e) {
    return EffectVec(system, system.from_matrix(e));
  }
  static EffectVec unit(const System& system) { return EffectVec(system, system.unit_effect()); }
  /// The effect dual to a state under the trace inner product.
  static EffectVec dual_of(const StateVec& s) { return EffectVec(s.system(), s.coeffs()); }

  const System& system() const { return system_; }
  const Vector& coeffs() const { return coeffs_; }
  CMatrix op() const { return system_.to_matrix(coeffs_); }

  /// 0 <= E <= 1, equivalently probabilities in [0,1] on every normalized state.
  bool is_valid(double tol = kDefaultTol) const { return system_.in_effect_cone(coeffs_, tol); }

 private:
  System system_;
  Vector coeffs_;
};

/// Linear map between state spaces, stored as a dim(out) x dim(in) real matrix.
class TransformMat {
 public:
  TransformMat(System in, System out, Matrix m, bool reversible = false)
      : in_(std::move(in)), out_(std::move(out)), m_(std::move(m)), reversible_(reversible) {
    require(m_.rows() == out_.dim() && m_.cols() == in_.dim(), "transform matrix has wrong shape");
  }

  static TransformMat identity(const System& s) {
    return TransformMat(s, s, Matrix::Identity(s.dim(), s.dim()), true);
  }
  static TransformMat zero(const System& s) { return TransformMat(s, s, Matrix::Zero(s.dim(), s.dim())); }

  /// rho -> sum_k K_k rho K_k^dagger on one system.
  static TransformMat kraus(const System& s, const std::vector<CMatrix>& ops, bool reversible = false) {
    const int n = s.dim();
    Matrix m(n, n);
    Vector e = Vector::Zero(n);
    for (int b = 0; b < n; ++b) {
      e.setZero();
      e(b) = 1.0;
      const CMatrix basis = s.to_matrix(e);
      CMatrix image = CMatrix::Zero(s.hilbert_dim(), s.hilbert_dim());
      for (const auto& k : ops) image += k * basis * k.adjoint();
      m.col(b) = s.from_matrix(image);
    }
    return TransformMat(s, s, std::move(m), reversible);
  }

  /// rho -> U rho U^dagger, compiled to real form.
  static TransformMat conjugation(const System& s, const CMatrix& u) {
    require(u.rows() == s.hilbert_dim() && u.cols() == s.hilbert_dim(), "unitary has wrong size for " + s.label());
    const CMatrix uu = u * u.adjoint();
    require((uu - CMatrix::Identity(u.rows(), u.cols())).cwiseAbs().maxCoeff() < 1e-9, "matrix is not unitary");
    return kraus(s, {u}, true);
  }

  /// Permutation of the Hilbert basis |i> -> |perm[i]> (a relabeling of
  /// classical vertices).
  static TransformMat permutation(const System& s, const std::vector<int>& perm) {
    const int h = s.hilbert_dim();
    require(int(perm.size()) == h, "permutation has wrong size");
    CMatrix p = CMatrix::Zero(h, h);
    std::vector<bool> seen(h, false);
    for (int i = 0; i < h; ++i) {
      require(perm[i] >= 0 && perm[i] < h && !seen[perm[i]], "not a permutation");
      seen[perm[i]] = true;
      p(perm[i], i) = 1.0;
    }
    return kraus(s, {p}, true);
  }

  const System& in_system() const { return in_; }
  const System& out_system() const { return out_; }
  const Matrix& matrix() const { return m_; }
  bool reversible() const { return reversible_; }

  friend TransformMat operator*(const TransformMat& a, const TransformMat& b) {
    require(a.in_ == b.out_, "sequential composition of incompatible transforms");
    return TransformMat(b.in_, a.out_, a.m_ * b.m_, a.reversible_ && b.reversible_);
  }
  friend TransformMat operator+(const TransformMat& a, const TransformMat& b) {
    require(a.in_ == b.in_ && a.out_ == b.out_, "adding transforms on different systems");
    return TransformMat(a.in_, a.out_, a.m_ + b.m_);
  }
  friend TransformMat operator-(const TransformMat& a, const TransformMat& b) {
    require(a.in_ == b.in_ && a.out_ == b.out_, "subtracting transforms on different systems");
    return TransformMat(a.in_, a.out_, a.m_ - b.m_);
  }
  TransformMat scaled(double a) const { return TransformMat(in_, out_, a * m_); }

  TransformMat inverse() const {
    require(in_.dim() == out_.dim(), "non-square transform has no inverse");
    Eigen::FullPivLU<Matrix> lu(m_);
    require(lu.isInvertible(), "transform is not invertible");
    return TransformMat(out_, in_, lu.inverse(), reversible_);
  }

 private:
  System in_, out_;
  Matrix m_;
  bool reversible_;
};

/// A family of effects indexed by outcome.
class Measurement {
 public:
  Measurement(System system, std::vector<EffectVec> effects)
      : system_(std::move(system)), effects_(std::move(effects)) {
    for (const auto& e : effects_) require(e.system() == system_, "measurement effect on wrong system");
  }

  /// Rank-1 projective measurement in the columns of an orthonormal basis.
  static Measurement projective(const System& s, const CMatrix& basis) {
    std::vector<EffectVec> effects;
    for (int k = 0; k < basis.cols(); ++k)
      effects.push_back(EffectVec::from_operator(s, basis.col(k) * basis.col(k).adjoint()));
    return Measurement(s, std::move(effects));
  }

  const System& system() const { return system_; }
  const std::vector<EffectVec>& effects() const { return effects_; }
  std::size_t size() const { return effects_.size(); }
  const EffectVec& operator[](std::size_t i) const { return effects_[i]; }

  /// Deviation of the effect sum from the unit effect.
  double normalization_error() const {
    Vector sum = Vector::Zero(system_.dim());
    for (const auto& e : effects_) sum += e.coeffs();
    return sup_norm(sum - system_.unit_effect());
  }
  bool is_valid(double tol = kDefaultTol) const {
    if (normalization_error() > tol) return false;
    return std::all_of(effects_.begin(), effects_.end(), [&](const EffectVec& e) { return e.is_valid(tol); });
  }

 private:
  System system_;
  std::vector<EffectVec> effects_;
};

// ---------------------------------------------------------------------------
// Composition and evaluation

inline Vector kron(const Vector& a, const Vector& b) {
  Vector out(a.size() * b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a(i) * b;
  return out;
}

inline Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

inline CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

inline StateVec compose_parallel(const StateVec& a, const StateVec& b) {
  return StateVec(System::composite(a.system(), b.system()), kron(a.coeffs(), b.coeffs()));
}

inline EffectVec compose_parallel(const EffectVec& a, const EffectVec& b) {
  return EffectVec(System::composite(a.system(), b.system()), kron(a.coeffs(), b.coeffs()));
}

inline TransformMat compose_parallel(const TransformMat& a, const TransformMat& b) {
  return TransformMat(System::composite(a.in_system(), b.in_system()), System::composite(a.out_system(), b.out_system()),
                      kron(a.matrix(), b.matrix()), a.reversible() && b.reversible());
}

inline StateVec apply(const TransformMat& t, const StateVec& s) {
  require(t.in_system() == s.system(), "apply: transform input " + t.in_system().label() + " does not match state " +
                                           s.system().label());
  return StateVec(t.out_system(), t.matrix() * s.coeffs());
}

/// Raw value e . s; callers clamp only when reporting.
inline double probability(const EffectVec& e, const StateVec& s) {
  require(e.system() == s.system(), "probability: effect and state live on different systems");
  return e.coeffs().dot(s.coeffs());
}

inline double clamp_probability(double p) { return std::clamp(p, 0.0, 1.0); }

namespace detail {
// Coefficients of a composite vector as a dim(left) x dim(right) matrix.
inline Matrix as_block(const StateVec& s) {
  const System& sys = s.system();
  require(sys.is_composite(), "operation needs a state on a composite system");
  const int da = sys.left().dim(), db = sys.right().dim();
  return Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(s.coeffs().data(),
                                                                                                   da, db);
}
inline Vector flatten(const Matrix& m) {
  Vector out(m.size());
  for (Eigen::Index i = 0; i < m.rows(); ++i) out.segment(i * m.cols(), m.cols()) = m.row(i).transpose();
  return out;
}
}  // namespace detail

/// Apply an effect to one factor of a bipartite state; the result lives on
/// the other factor and is subnormalized in general.
inline StateVec condition(const EffectVec& e, const StateVec& s, Side measured) {
  const Matrix m = detail::as_block(s);
  const System sys = s.system();
  if (measured == Side::left) {
    require(e.system() == sys.left(), "condition: effect does not match left factor");
    return StateVec(sys.right(), m.transpose() * e.coeffs());
  }
  require(e.system() == sys.right(), "condition: effect does not match right factor");
  return StateVec(sys.left(), m * e.coeffs());
}

/// Discard one factor by applying its unit effect.
inline StateVec marginalize(const StateVec& s, Side keep) {
  require(s.system().is_composite(), "marginalize: state is not on a composite system");
  const System sys = s.system();
  if (keep == Side::left) return condition(EffectVec::unit(sys.right()), s, Side::right);
  return condition(EffectVec::unit(sys.left()), s, Side::left);
}

/// (T (x) id) s or (id (x) T) s without forming the Kronecker product.
inline StateVec apply_local(const TransformMat& t, const StateVec& s, Side acted) {
  const Matrix m = detail::as_block(s);
  const System sys = s.system();
  if (acted == Side::left) {
    require(t.in_system() == sys.left(), "apply_local: transform does not match left factor");
    return StateVec(System::composite(t.out_system(), sys.right()), detail::flatten(t.matrix() * m));
  }
  require(t.in_system() == sys.right(), "apply_local: transform does not match right factor");
  return StateVec(System::composite(sys.left(), t.out_system()), detail::flatten(m * t.matrix().transpose()));
}

/// Unit-effect preservation: (1| T = (1|.
inline double causality_defect(const TransformMat& t) {
  return sup_norm(t.matrix().transpose() * t.out_system().unit_effect() - t.in_system().unit_effect());
}

}  // namespace gptlab
