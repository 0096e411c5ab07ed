#pragma once

#include "gptlab/config.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <memory>
#include <string>

namespace gptlab {

// Real vector-space representation of a GPT system.
//
// Every system carries an orthonormal (trace inner product) basis of
// Hermitian operators on a Hilbert space of dimension hilbert_dim():
//
//   classical(n)     E_00, ..., E_{n-1,n-1}                         dim n
//   quantum(d)       I/sqrt(d); for each pair i<j the symmetric
//                    (|i><j| + |j><i|)/sqrt2 then antisymmetric
//                    (-i|i><j| + i|j><i|)/sqrt2 generator; then the
//                    traceless diagonals
//                    (sum_{m<l}|m><m| - l|l><l|)/sqrt(l(l+1)), l=1..d-1  dim d^2
//   composite(A, B)  B^A_a (x) B^B_b at index a*dim(B) + b         dim(A)dim(B)
//
// Because the basis is orthonormal and Hermitian, the coefficient dot
// product of an effect and a state equals Tr(E rho). States double as
// effects (self-duality) with the same coefficients.
class System {
 public:
  enum class Kind { classical, quantum, composite };

  static System classical(int n) {
    require(n >= 1, "classical system needs n >= 1");
    return System(std::make_shared<const Node>(Node{Kind::classical, n, n, n, "C" + std::to_string(n), nullptr, nullptr}));
  }

  static System quantum(int d) {
    require(d >= 1, "quantum system needs d >= 1");
    return System(std::make_shared<const Node>(Node{Kind::quantum, d, d * d, d, "Q" + std::to_string(d), nullptr, nullptr}));
  }

  static System composite(const System& left, const System& right) {
    return System(std::make_shared<const Node>(
        Node{Kind::composite, 0, left.dim() * right.dim(), left.hilbert_dim() * right.hilbert_dim(),
             "(" + left.label() + "*" + right.label() + ")", left.node_, right.node_}));
  }

  Kind kind() const { return node_->kind; }
  int dim() const { return node_->dim; }
  int hilbert_dim() const { return node_->hdim; }
  /// Maximal number of perfectly distinguishable pure states.
  int capacity() const { return node_->hdim; }
  const std::string& label() const { return node_->label; }
  bool is_composite() const { return node_->kind == Kind::composite; }

  System left() const {
    require(is_composite(), "left() on a non-composite system");
    return System(node_->left);
  }
  System right() const {
    require(is_composite(), "right() on a non-composite system");
    return System(node_->right);
  }

  /// True when every leaf is classical (the state cone is a simplex).
  bool is_classical() const {
    if (node_->kind == Kind::composite) return left().is_classical() && right().is_classical();
    return node_->kind == Kind::classical;
  }

  friend bool operator==(const System& a, const System& b) {
    if (a.node_ == b.node_) return true;
    if (a.kind() != b.kind() || a.dim() != b.dim()) return false;
    if (a.kind() == Kind::composite) return a.left() == b.left() && a.right() == b.right();
    return a.node_->n == b.node_->n;
  }
  friend bool operator!=(const System& a, const System& b) { return !(a == b); }

  /// Hermitian operator with the given basis coefficients.
  CMatrix to_matrix(const Vector& c) const {
    require(c.size() == dim(), "coefficient vector has wrong length for " + label());
    const int h = hilbert_dim();
    CMatrix m = CMatrix::Zero(h, h);
    switch (kind()) {
      case Kind::classical:
        for (int i = 0; i < h; ++i) m(i, i) = c(i);
        break;
      case Kind::quantum: {
        const int d = h;
        for (int i = 0; i < d; ++i) m(i, i) = c(0) / std::sqrt(double(d));
        int idx = 1;
        for (int i = 0; i < d; ++i) {
          for (int j = i + 1; j < d; ++j) {
            const double s = c(idx++) / std::sqrt(2.0);
            const double a = c(idx++) / std::sqrt(2.0);
            m(i, j) += Complex(s, -a);
            m(j, i) += Complex(s, a);
          }
        }
        for (int l = 1; l < d; ++l) {
          const double f = c(idx++) / std::sqrt(double(l) * (l + 1));
          for (int k = 0; k < l; ++k) m(k, k) += f;
          m(l, l) -= f * l;
        }
        break;
      }
      case Kind::composite: {
        const System a = left(), b = right();
        const int ha = a.hilbert_dim(), hb = b.hilbert_dim();
        Vector unit = Vector::Zero(a.dim());
        for (int i = 0; i < a.dim(); ++i) {
          const Vector block = c.segment(i * b.dim(), b.dim());
          if (block.cwiseAbs().maxCoeff() == 0.0) continue;
          unit.setZero();
          unit(i) = 1.0;
          const CMatrix ba = a.to_matrix(unit);
          const CMatrix rb = b.to_matrix(block);
          for (int p = 0; p < ha; ++p)
            for (int q = 0; q < ha; ++q)
              if (ba(p, q) != Complex(0.0)) m.block(p * hb, q * hb, hb, hb) += ba(p, q) * rb;
        }
        break;
      }
    }
    return m;
  }

  /// Coefficients Re Tr(B_a M) of an operator in this system's basis.
  /// For Hermitian M this inverts to_matrix exactly.
  Vector from_matrix(const CMatrix& m) const {
    const int h = hilbert_dim();
    require(m.rows() == h && m.cols() == h, "operator has wrong size for " + label());
    Vector c(dim());
    switch (kind()) {
      case Kind::classical:
        for (int i = 0; i < h; ++i) c(i) = m(i, i).real();
        break;
      case Kind::quantum: {
        const int d = h;
        c(0) = m.trace().real() / std::sqrt(double(d));
        int idx = 1;
        for (int i = 0; i < d; ++i) {
          for (int j = i + 1; j < d; ++j) {
            c(idx++) = (m(i, j).real() + m(j, i).real()) / std::sqrt(2.0);
            c(idx++) = (m(j, i).imag() - m(i, j).imag()) / std::sqrt(2.0);
          }
        }
        for (int l = 1; l < d; ++l) {
          double acc = 0.0;
          for (int k = 0; k < l; ++k) acc += m(k, k).real();
          acc -= l * m(l, l).real();
          c(idx++) = acc / std::sqrt(double(l) * (l + 1));
        }
        break;
      }
      case Kind::composite: {
        const System a = left(), b = right();
        const int ha = a.hilbert_dim(), hb = b.hilbert_dim();
        Vector unit = Vector::Zero(a.dim());
        CMatrix x(hb, hb);
        for (int i = 0; i < a.dim(); ++i) {
          unit.setZero();
          unit(i) = 1.0;
          const CMatrix ba = a.to_matrix(unit);
          // x = Tr_A[(B_i (x) 1) M]
          x.setZero();
          for (int p = 0; p < ha; ++p)
            for (int q = 0; q < ha; ++q)
              if (ba(p, q) != Complex(0.0)) x += ba(p, q) * m.block(q * hb, p * hb, hb, hb);
          c.segment(i * b.dim(), b.dim()) = b.from_matrix(x);
        }
        break;
      }
    }
    return c;
  }

  /// Coefficients of the deterministic effect (the identity operator).
  Vector unit_effect() const { return from_matrix(CMatrix::Identity(hilbert_dim(), hilbert_dim())); }

  Vector maximally_mixed() const {
    const int h = hilbert_dim();
    return from_matrix(CMatrix::Identity(h, h) / double(h));
  }

  /// Extreme eigenvalues of the reconstructed operator.
  std::pair<double, double> eigen_range(const Vector& c) const {
    if (is_classical()) return {c.minCoeff(), c.maxCoeff()};
    Eigen::SelfAdjointEigenSolver<CMatrix> es(to_matrix(c), Eigen::EigenvaluesOnly);
    const auto& ev = es.eigenvalues();
    return {ev.minCoeff(), ev.maxCoeff()};
  }

  bool in_state_cone(const Vector& c, double tol) const { return eigen_range(c).first >= -tol; }

  /// 0 <= E <= 1 as operators, which is equivalent to 0 <= (e|s) <= 1 on all
  /// normalized states.
  bool in_effect_cone(const Vector& c, double tol) const {
    const auto [lo, hi] = eigen_range(c);
    return lo >= -tol && hi <= 1.0 + tol;
  }

  /// Pure: largest eigenvalue 1 (for classical, a simplex vertex).
  bool is_pure(const Vector& c, double tol) const {
    const auto [lo, hi] = eigen_range(c);
    return lo >= -tol && hi >= 1.0 - tol && std::abs(c.dot(unit_effect()) - 1.0) <= tol;
  }

 private:
  struct Node {
    Kind kind;
    int n;     // classical n or quantum d; unused for composites
    int dim;   // real vector-space dimension
    int hdim;  // Hilbert-space dimension of the matrix representation
    std::string label;
    std::shared_ptr<const Node> left, right;
  };

  explicit System(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

  std::shared_ptr<const Node> node_;
};

}  // namespace gptlab
