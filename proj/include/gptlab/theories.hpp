#pragma once

#include "gptlab/core.hpp"
#include "gptlab/random.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include <string>
#include <vector>

namespace gptlab {

/// True when every leaf of the system is quantum.
inline bool is_all_quantum(const System& s) {
  if (s.is_composite()) return is_all_quantum(s.left()) && is_all_quantum(s.right());
  return s.kind() == System::Kind::quantum;
}

enum class TheoryName { classical, quantum };

inline std::string to_string(TheoryName t) { return t == TheoryName::classical ? "classical" : "quantum"; }

inline TheoryName parse_theory(const std::string& s) {
  if (s == "classical") return TheoryName::classical;
  if (s == "quantum") return TheoryName::quantum;
  throw Error("unknown theory '" + s + "' (expected classical or quantum)");
}

/// One of the two implemented theories together with its samplers.
class TheoryHandle {
 public:
  explicit TheoryHandle(TheoryName name) : name_(name) {}

  TheoryName name() const { return name_; }

  /// A system with n perfectly distinguishable pure states.
  System system(int n) const { return name_ == TheoryName::classical ? System::classical(n) : System::quantum(n); }

  bool owns(const System& s) const { return name_ == TheoryName::classical ? s.is_classical() : is_all_quantum(s); }

  StateVec sample_pure(const System& s, Rng& rng) const {
    require(owns(s), "sample_pure: system " + s.label() + " does not belong to the " + to_string(name_) + " theory");
    if (name_ == TheoryName::classical) {
      std::uniform_int_distribution<int> pick(0, s.hilbert_dim() - 1);
      Vector c = Vector::Zero(s.dim());
      c(pick(rng)) = 1.0;
      return StateVec(s, c);
    }
    return StateVec::from_ket(s, haar_ket(s.hilbert_dim(), rng));
  }

  TransformMat sample_reversible(const System& s, Rng& rng) const {
    require(owns(s), "sample_reversible: system " + s.label() + " does not belong to the " + to_string(name_) +
                         " theory");
    if (name_ == TheoryName::classical) return TransformMat::permutation(s, random_permutation(s.hilbert_dim(), rng));
    return TransformMat::conjugation(s, haar_unitary(s.hilbert_dim(), rng));
  }

 private:
  TheoryName name_;
};

inline TheoryHandle classical_theory() { return TheoryHandle(TheoryName::classical); }
inline TheoryHandle quantum_theory() { return TheoryHandle(TheoryName::quantum); }

/// Basis-completion of the given orthonormal kets (columns).
inline CMatrix complete_basis(const CMatrix& kets) {
  const int d = int(kets.rows());
  CMatrix out(d, d);
  int filled = 0;
  auto push = [&](CVector v) {
    for (int k = 0; k < filled; ++k) v -= out.col(k).dot(v) * out.col(k);
    const double n = v.norm();
    if (n > 1e-6 && filled < d) out.col(filled++) = v / n;
  };
  for (int k = 0; k < kets.cols(); ++k) {
    const CVector v = kets.col(k);
    push(v);
    require(filled == k + 1, "complete_basis: input kets are not linearly independent");
  }
  for (int i = 0; i < d && filled < d; ++i) push(CVector::Unit(d, i));
  return out;
}

/// Leading eigenvector of a pure quantum state.
inline CVector pure_ket(const StateVec& s) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(s.density());
  return es.eigenvectors().col(es.eigenvectors().cols() - 1);
}

// ---------------------------------------------------------------------------
// Purification and dynamically faithful states

/// Vectorized projector onto sum_i sqrt(p_i) |v_i>|i> on Q(d) (x) Q(d).
inline StateVec purify(const StateVec& s, const Config& cfg = {}) {
  const System& sys = s.system();
  require(sys.kind() == System::Kind::quantum, "purify: state is not on a quantum system");
  require(s.is_normalized(cfg.tol), "purify: state is not normalized");
  const int d = sys.hilbert_dim();
  Eigen::SelfAdjointEigenSolver<CMatrix> es(s.density());
  require(es.eigenvalues().minCoeff() >= -cfg.tol, "purify: state is not positive");
  CVector psi = CVector::Zero(d * d);
  for (int i = 0; i < d; ++i) {
    const double p = es.eigenvalues()(i);
    if (p < cfg.tol) continue;
    psi += std::sqrt(p) * kron(CMatrix(es.eigenvectors().col(i)), CMatrix(CVector::Unit(d, i)));
  }
  return StateVec::from_ket(System::composite(sys, sys), psi);
}

/// Purification of the completely mixed state sum_i p_i |i><i|.
inline StateVec faithful_state(const std::vector<double>& p, const System& sys, const Config& cfg = {}) {
  require(sys.kind() == System::Kind::quantum, "faithful_state: system is not quantum");
  const int d = sys.hilbert_dim();
  require(int(p.size()) == d, "faithful_state: probability vector has wrong length");
  double total = 0.0;
  for (double x : p) {
    require(x > 0.0, "faithful_state: state is not completely mixed (zero or negative weight)");
    total += x;
  }
  require(std::abs(total - 1.0) <= cfg.tol, "faithful_state: weights do not sum to 1");
  CVector psi = CVector::Zero(d * d);
  for (int i = 0; i < d; ++i) psi(i * d + i) = std::sqrt(p[i]);
  return StateVec::from_ket(System::composite(sys, sys), psi);
}

/// Whether (T (x) id) psi and (T2 (x) id) psi agree to within tol.
inline bool check_faithful(const TransformMat& t, const TransformMat& t2, const StateVec& psi, const Config& cfg = {}) {
  require(psi.system().is_composite(), "check_faithful: psi is not bipartite");
  require(t.in_system() == psi.system().left() && t2.in_system() == psi.system().left() &&
              t.out_system() == t2.out_system(),
          "check_faithful: dimension mismatch");
  const StateVec a = apply_local(t, psi, Side::left);
  const StateVec b = apply_local(t2, psi, Side::left);
  return sup_norm(a.coeffs() - b.coeffs()) < cfg.tol;
}

// ---------------------------------------------------------------------------
// Strong symmetry

namespace detail {
inline void require_distinguishable_pure(const std::vector<StateVec>& states, const Config& cfg,
                                         const std::string& who) {
  require(!states.empty(), who + ": empty tuple");
  const System& sys = states.front().system();
  for (std::size_t i = 0; i < states.size(); ++i) {
    require(states[i].system() == sys, who + ": states live on different systems");
    require(states[i].is_pure(cfg.tol), who + ": state " + std::to_string(i) + " is not pure");
    for (std::size_t j = 0; j < i; ++j)
      require(std::abs(states[i].coeffs().dot(states[j].coeffs())) <= cfg.tol,
              who + ": states " + std::to_string(j) + " and " + std::to_string(i) + " are not perfectly distinguishable");
  }
}

inline int vertex_index(const StateVec& s) {
  Eigen::Index idx;
  s.coeffs().maxCoeff(&idx);
  return int(idx);
}
}  // namespace detail

/// A reversible T with T src_i = dst_i for pure, perfectly distinguishable tuples.
inline TransformMat check_strong_symmetry_witness(const std::vector<StateVec>& src, const std::vector<StateVec>& dst,
                                                  const Config& cfg = {}) {
  require(src.size() == dst.size(), "strong symmetry: tuples have different lengths");
  detail::require_distinguishable_pure(src, cfg, "strong symmetry (source)");
  detail::require_distinguishable_pure(dst, cfg, "strong symmetry (target)");
  const System sys = src.front().system();
  require(dst.front().system() == sys, "strong symmetry: tuples live on different systems");
  const int h = sys.hilbert_dim();

  TransformMat t = TransformMat::identity(sys);
  if (sys.is_classical()) {
    std::vector<int> perm(h, -1);
    std::vector<bool> used(h, false);
    for (std::size_t i = 0; i < src.size(); ++i) {
      const int a = detail::vertex_index(src[i]), b = detail::vertex_index(dst[i]);
      perm[a] = b;
      used[b] = true;
    }
    int next = 0;
    for (int a = 0; a < h; ++a) {
      if (perm[a] >= 0) continue;
      while (used[next]) ++next;
      perm[a] = next;
      used[next] = true;
    }
    t = TransformMat::permutation(sys, perm);
  } else {
    require(is_all_quantum(sys), "strong symmetry: mixed classical/quantum composites are not supported");
    CMatrix a(h, src.size()), b(h, dst.size());
    for (std::size_t i = 0; i < src.size(); ++i) {
      a.col(i) = pure_ket(src[i]);
      b.col(i) = pure_ket(dst[i]);
    }
    const CMatrix u = complete_basis(b) * complete_basis(a).adjoint();
    t = TransformMat::conjugation(sys, u);
  }
  for (std::size_t i = 0; i < src.size(); ++i)
    require(sup_norm(apply(t, src[i]).coeffs() - dst[i].coeffs()) <= cfg.tol * 10,
            "strong symmetry: witness failed to map state " + std::to_string(i));
  return t;
}

// ---------------------------------------------------------------------------
// Informationally consistent composition

struct CompositionReport {
  std::string theory;
  int trials = 0;
  std::vector<std::string> failures;
  bool ok() const { return failures.empty(); }
};

inline CompositionReport check_composition_axioms(const TheoryHandle& theory, int trials, std::uint64_t seed,
                                                  const Config& cfg = {}) {
  CompositionReport report{to_string(theory.name()), trials, {}};
  std::uniform_int_distribution<int> dim_pick(2, 4);
  for (int t = 0; t < trials; ++t) {
    Rng rng(derive_seed(seed, std::uint64_t(t)));
    const System a = theory.system(dim_pick(rng)), b = theory.system(dim_pick(rng));
    const StateVec sa = theory.sample_pure(a, rng), sb = theory.sample_pure(b, rng);
    if (!compose_parallel(sa, sb).is_pure(cfg.tol))
      report.failures.push_back("trial " + std::to_string(t) + ": product of pure states on " + a.label() + "," +
                                b.label() + " is not pure");
    const StateVec mm = compose_parallel(StateVec::maximally_mixed(a), StateVec::maximally_mixed(b));
    const StateVec target = StateVec::maximally_mixed(mm.system());
    if (sup_norm(mm.coeffs() - target.coeffs()) > cfg.tol)
      report.failures.push_back("trial " + std::to_string(t) + ": product of maximally mixed states on " + a.label() +
                                "," + b.label() + " is not maximally mixed");
  }
  return report;
}

// ---------------------------------------------------------------------------
// Unique distinguishing measurement

namespace detail {
// Every null direction of the linear constraints (e|i) = target_i must be
// excluded by the cone: in the frame basis an off-diagonal entry (p,q) of a
// valid effect E vanishes whenever E_pp or E_qq is 0 (E >= 0) or 1 (1-E >= 0).
inline bool null_directions_pinned(const System& sys, const Matrix& null_basis, const CMatrix& frame,
                                   const Vector& frame_diag, double tol) {
  for (Eigen::Index k = 0; k < null_basis.cols(); ++k) {
    const CMatrix f = frame.adjoint() * sys.to_matrix(null_basis.col(k)) * frame;
    for (Eigen::Index p = 0; p < f.rows(); ++p) {
      if (std::abs(f(p, p)) > 1e-7) return false;
      for (Eigen::Index q = p + 1; q < f.cols(); ++q) {
        if (std::abs(f(p, q)) <= 1e-7) continue;
        const bool psd_pin = frame_diag(p) <= tol || frame_diag(q) <= tol;
        const bool bound_pin = 1.0 - frame_diag(p) <= tol || 1.0 - frame_diag(q) <= tol;
        if (!psd_pin && !bound_pin) return false;
      }
    }
  }
  return true;
}
}  // namespace detail

/// The unique measurement {(j|} with (j|i) = delta_ij for a complete frame of
/// pure perfectly distinguishable states. Refuses incomplete frames.
inline Measurement check_unique_distinguishing(const std::vector<StateVec>& frame_states, const Config& cfg = {}) {
  detail::require_distinguishable_pure(frame_states, cfg, "unique distinguishing");
  const System sys = frame_states.front().system();
  const int n = int(frame_states.size());
  require(n == sys.capacity(), "unique distinguishing: incomplete frame (" + std::to_string(n) + " of " +
                                   std::to_string(sys.capacity()) + " states); uniqueness is not guaranteed");

  Matrix constraints(n, sys.dim());
  for (int i = 0; i < n; ++i) constraints.row(i) = frame_states[i].coeffs().transpose();
  Eigen::FullPivLU<Matrix> lu(constraints);
  const Matrix null_basis = lu.dimensionOfKernel() > 0 ? Matrix(lu.kernel()) : Matrix(sys.dim(), 0);

  CMatrix frame = CMatrix::Identity(sys.hilbert_dim(), sys.hilbert_dim());
  if (!sys.is_classical()) {
    for (int i = 0; i < n; ++i) frame.col(i) = pure_ket(frame_states[i]);
  }

  std::vector<EffectVec> effects;
  for (int j = 0; j < n; ++j) {
    // Self-duality supplies a feasible point; the pinning argument shows it
    // is the only one.
    const EffectVec candidate = EffectVec::dual_of(frame_states[j]);
    require(candidate.is_valid(cfg.tol), "unique distinguishing: candidate effect is not valid");
    for (int i = 0; i < n; ++i)
      require(std::abs(probability(candidate, frame_states[i]) - (i == j ? 1.0 : 0.0)) <= cfg.tol,
              "unique distinguishing: candidate violates (j|i) = delta_ij");
    if (null_basis.cols() > 0) {
      Vector diag = Vector::Zero(n);
      diag(j) = 1.0;
      require(detail::null_directions_pinned(sys, null_basis, frame, diag, cfg.tol),
              "unique distinguishing: solution set is not a single point");
      // Scaled form: any e with (e|i) = alpha delta_ij equals alpha (j|.
      for (double alpha : {0.25, 0.5}) {
        require(detail::null_directions_pinned(sys, null_basis, frame, alpha * diag, cfg.tol),
                "unique distinguishing: scaled solution set is not a single point");
      }
    }
    effects.push_back(candidate);
  }
  Measurement m(sys, std::move(effects));
  require(m.normalization_error() <= cfg.tol, "unique distinguishing: effects do not sum to the unit effect");
  return m;
}

}  // namespace gptlab
