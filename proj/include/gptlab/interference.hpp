#pragma once

#include "gptlab/core.hpp"
#include "gptlab/theories.hpp"

#include <bit>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace gptlab {

/// Subset of slit labels {0..N-1} as a bitmask.
using Subset = std::uint32_t;

inline int subset_size(Subset s) { return std::popcount(s); }
inline Subset full_subset(int n) { return n >= 32 ? ~Subset(0) : (Subset(1) << n) - 1; }

inline std::string subset_to_string(Subset s) {
  std::string out = "{";
  bool first = true;
  for (int i = 0; s >> i; ++i) {
    if (!((s >> i) & 1u)) continue;
    if (!first) out += ",";
    out += std::to_string(i);
    first = false;
  }
  return out + "}";
}

inline Subset make_subset(std::initializer_list<int> items) {
  Subset s = 0;
  for (int i : items) s |= Subset(1) << i;
  return s;
}

/// Calls f(sub) for every subset of mask, including the empty set and mask.
template <typename F>
void for_each_submask(Subset mask, F&& f) {
  Subset sub = mask;
  while (true) {
    f(sub);
    if (sub == 0) break;
    sub = (sub - 1) & mask;
  }
}

/// N pure, perfectly distinguishable states with their distinguishing effects.
class SlitStructure {
 public:
  /// Validates purity and (j|i) = delta_ij. The distinguishing effects are the
  /// duals of the slit states; for a complete frame they are checked to be the
  /// unique such measurement.
  static SlitStructure from_states(std::vector<StateVec> states, const Config& cfg = {}) {
    detail::require_distinguishable_pure(states, cfg, "slit structure");
    const System sys = states.front().system();
    require(int(states.size()) <= kMaxSubsetN, "slit structure: more than " + std::to_string(kMaxSubsetN) + " slits");
    std::vector<EffectVec> effects;
    if (int(states.size()) == sys.capacity()) {
      effects = check_unique_distinguishing(states, cfg).effects();
    } else {
      Vector rest = sys.unit_effect();
      for (const auto& s : states) {
        effects.push_back(EffectVec::dual_of(s));
        rest -= s.coeffs();
      }
      effects.emplace_back(sys, rest);
    }
    std::vector<CMatrix> projectors;
    for (const auto& s : states) projectors.push_back(s.density());
    return SlitStructure(sys, std::move(states), Measurement(sys, std::move(effects)), std::move(projectors));
  }

  /// The first n basis states of a system (classical vertices or |i><i|).
  static SlitStructure basis(const System& sys, int n, const Config& cfg = {}) {
    require(n >= 1 && n <= sys.capacity(), "slit structure: " + std::to_string(n) + " slits exceed capacity of " +
                                               sys.label());
    std::vector<StateVec> states;
    for (int i = 0; i < n; ++i) states.push_back(StateVec::from_ket(sys, CVector::Unit(sys.hilbert_dim(), i)));
    return from_states(std::move(states), cfg);
  }

  const System& system() const { return system_; }
  int size() const { return int(states_.size()); }
  const std::vector<StateVec>& states() const { return states_; }
  const StateVec& state(int i) const { return states_.at(i); }
  /// Distinguishing measurement; for incomplete frames a final effect collects
  /// the remainder of the unit effect.
  const Measurement& distinguishing() const { return distinguishing_; }
  const EffectVec& effect(int j) const { return distinguishing_[j]; }
  /// Rank-1 projector onto slit i in the Hilbert representation.
  const CMatrix& slit_projector(int i) const { return projectors_.at(i); }
  bool complete() const { return size() == system_.capacity(); }

 private:
  SlitStructure(System sys, std::vector<StateVec> states, Measurement m, std::vector<CMatrix> projectors)
      : system_(std::move(sys)), states_(std::move(states)), distinguishing_(std::move(m)),
        projectors_(std::move(projectors)) {}

  System system_;
  std::vector<StateVec> states_;
  Measurement distinguishing_;
  std::vector<CMatrix> projectors_;
};

/// Face projector P_I: rho -> Pi_I rho Pi_I with Pi_I the sum of the slit
/// projectors in I. P_{} is the zero map.
inline TransformMat face_projector(const SlitStructure& slits, Subset subset) {
  require((subset & ~full_subset(slits.size())) == 0, "face_projector: subset " + subset_to_string(subset) +
                                                   " is not within the " + std::to_string(slits.size()) + " slits");
  const System& sys = slits.system();
  if (subset == 0) return TransformMat::zero(sys);
  CMatrix pi = CMatrix::Zero(sys.hilbert_dim(), sys.hilbert_dim());
  for (int i = 0; i < slits.size(); ++i)
    if ((subset >> i) & 1u) pi += slits.slit_projector(i);
  return TransformMat::kraus(sys, {pi});
}

/// All face projectors of a slit structure. Built eagerly when the table fits
/// the memory budget; otherwise each projector is rebuilt on request.
class ProjectorFamily {
 public:
  static constexpr std::size_t kCacheBudget = std::size_t(1) << 25;  // doubles

  explicit ProjectorFamily(SlitStructure slits) : slits_(std::move(slits)) {
    const std::size_t n = std::size_t(1) << slits_.size();
    const std::size_t entries = std::size_t(slits_.system().dim()) * slits_.system().dim();
    if (n * entries <= kCacheBudget) {
      cache_.reserve(n);
      for (Subset s = 0; s < n; ++s) cache_.push_back(face_projector(slits_, s).matrix());
    }
  }

  const SlitStructure& slits() const { return slits_; }
  int size() const { return slits_.size(); }
  const System& system() const { return slits_.system(); }
  Subset full() const { return full_subset(slits_.size()); }
  bool cached() const { return !cache_.empty(); }

  Matrix face(Subset s) const {
    require((s & ~full()) == 0, "projector family: subset out of range");
    if (!cache_.empty()) return cache_[s];
    return face_projector(slits_, s).matrix();
  }

  /// omega_I = sum_{J subset of I} (-1)^{|I|+|J|} P_J.
  Matrix coherence(Subset s) const {
    require(s != 0, "coherence projector of the empty set is undefined");
    require((s & ~full()) == 0, "projector family: subset out of range");
    const int d = system().dim();
    Matrix out = Matrix::Zero(d, d);
    const int n = subset_size(s);
    for_each_submask(s, [&](Subset sub) {
      if (sub == 0) return;
      const double sign = ((n + subset_size(sub)) % 2 == 0) ? 1.0 : -1.0;
      out += sign * face(sub);
    });
    return out;
  }

 private:
  SlitStructure slits_;
  std::vector<Matrix> cache_;
};

inline TransformMat coherence_projector(const SlitStructure& slits, Subset subset) {
  require(subset != 0, "coherence_projector: empty subset");
  const int n = subset_size(subset);
  TransformMat out = TransformMat::zero(slits.system());
  for_each_submask(subset, [&](Subset sub) {
    if (sub == 0) return;
    out = out + face_projector(slits, sub).scaled(((n + subset_size(sub)) % 2 == 0) ? 1.0 : -1.0);
  });
  return out;
}

/// Exact binomial coefficient with the convention C(-1, 0) = 1.
inline long long binomial(long long n, long long r) {
  if (r == 0) return 1;
  if (r < 0 || n < r) return 0;
  long long out = 1;
  for (long long i = 1; i <= r; ++i) out = out * (n - r + i) / i;
  return out;
}

/// C(k, m, N) = (-1)^{k-m} binom(N-m-1, k-m).
inline long long decomposition_coefficient(int k, int m, int n) {
  require(1 <= m && m <= k && k <= n, "decomposition_coefficient: need 1 <= m <= k <= N (got k=" + std::to_string(k) +
                                          ", m=" + std::to_string(m) + ", N=" + std::to_string(n) + ")");
  const long long b = binomial(n - m - 1, k - m);
  return ((k - m) % 2 == 0) ? b : -b;
}

namespace detail {
inline void require_order(const ProjectorFamily& fam, int k) {
  require(k >= 1 && k <= fam.size(), "interference order k=" + std::to_string(k) + " must satisfy 1 <= k <= N=" +
                                         std::to_string(fam.size()));
}
}  // namespace detail

/// sup-norm of P_full - sum_{|I|<=k} C(k,|I|,N) P_I. P_full is the identity
/// on the face-complete subspace.
inline double identity_residual(const ProjectorFamily& fam, int k) {
  detail::require_order(fam, k);
  const int n = fam.size();
  Matrix acc = fam.face(fam.full());
  for (Subset s = 1; s <= fam.full(); ++s) {
    const int m = subset_size(s);
    if (m > k) continue;
    acc -= double(decomposition_coefficient(k, m, n)) * fam.face(s);
  }
  return sup_norm(acc);
}

/// sup-norm of P_full - sum_{1<=|I|<=k} omega_I.
inline double coherence_identity_residual(const ProjectorFamily& fam, int k) {
  detail::require_order(fam, k);
  Matrix acc = fam.face(fam.full());
  for (Subset s = 1; s <= fam.full(); ++s)
    if (subset_size(s) <= k) acc -= fam.coherence(s);
  return sup_norm(acc);
}

/// s = sum_{1<=|I|<=k} omega_I s, keyed by I.
inline std::map<Subset, StateVec> coherence_decompose(const ProjectorFamily& fam, int k, const StateVec& s,
                                                      const Config& cfg = {}) {
  require(s.system() == fam.system(), "coherence_decompose: state lives on a different system");
  const double residual = coherence_identity_residual(fam, k);
  require(residual < cfg.tol, "coherence_decompose: k=" + std::to_string(k) +
                                  " is below the maximal interference order (residual " + std::to_string(residual) +
                                  ")");
  std::map<Subset, StateVec> out;
  for (Subset sub = 1; sub <= fam.full(); ++sub)
    if (subset_size(sub) <= k) out.emplace(sub, StateVec(s.system(), fam.coherence(sub) * s.coeffs()));
  return out;
}

/// I_n = sum_{nonempty J subset of I} (-1)^{n-|J|} (e| P_J |s), evaluated as
/// (e| omega_I |s). The two agree by definition of omega_I; going through
/// omega_I keeps classical values exactly zero since its entries are integers.
inline double sorkin_functional(const ProjectorFamily& fam, const StateVec& s, const EffectVec& e, Subset subset) {
  require(subset != 0, "sorkin_functional: empty slit set");
  require((subset & ~fam.full()) == 0, "sorkin_functional: subset out of range");
  require(s.system() == fam.system() && e.system() == fam.system(), "sorkin_functional: system mismatch");
  return e.coeffs().dot(fam.coherence(subset) * s.coeffs());
}

struct InterferenceOrder {
  int k = 0;
  std::vector<double> residuals;  // coherence_identity_residual for k = 1..N
  bool monotone = true;
};

/// Smallest k whose coherence decomposition reproduces the identity.
inline InterferenceOrder max_interference_order(const ProjectorFamily& fam, double tol = kDefaultTol) {
  InterferenceOrder out;
  for (int k = 1; k <= fam.size(); ++k) {
    out.residuals.push_back(coherence_identity_residual(fam, k));
    if (out.residuals.size() >= 2 && out.residuals.back() > out.residuals[out.residuals.size() - 2] + tol)
      out.monotone = false;
  }
  for (int k = 1; k <= fam.size(); ++k)
    if (out.residuals[k - 1] < tol) {
      out.k = k;
      break;
    }
  return out;
}

}  // namespace gptlab
