#pragma once

#include "gptlab/oracles.hpp"
#include "gptlab/theories.hpp"

#include "json.hpp"

#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace gptlab {

// A bounded-error algorithm on a toy input set, already given in dilated
// form: U = sum_x |x><x| (x) M V_x^{(x) r}. Each copy owns work qubits and
// one answer qubit (answer least significant, copies in order), M is the
// in-place majority vote onto the last copy's answer wire, and the answer
// read off that wire is compared with the decision table.
struct ToyAlgorithm {
  int input_qubits = 1;
  int work_qubits = 0;         // per copy
  std::vector<CMatrix> branches;  // V_x on work (x) answer, one per input x
  std::vector<int> decision;      // f(x) in {0,1}
  int copies = 1;                 // r; odd

  int inputs() const { return 1 << input_qubits; }
  int copy_levels() const { return 1 << (work_qubits + 1); }
  int qubits() const { return input_qubits + copies * (work_qubits + 1); }
};

inline constexpr int kToyMaxInputQubits = 3;
inline constexpr int kToyMaxWorkQubits = 2;
inline constexpr int kToyMaxCopies = 201;

inline void validate_toy(const ToyAlgorithm& a, const Config& cfg = {}) {
  require(a.input_qubits >= 1 && a.input_qubits <= kToyMaxInputQubits, "toy algorithm: input register out of range");
  require(a.work_qubits >= 0 && a.work_qubits <= kToyMaxWorkQubits, "toy algorithm: work register out of range");
  require(a.copies >= 1 && a.copies % 2 == 1 && a.copies <= kToyMaxCopies, "toy algorithm: copy count must be odd");
  require(int(a.branches.size()) == a.inputs() && int(a.decision.size()) == a.inputs(),
          "toy algorithm: register mismatch between branches, decisions and input size");
  const int m = a.copy_levels();
  for (int x = 0; x < a.inputs(); ++x) {
    require(a.decision[x] == 0 || a.decision[x] == 1, "toy algorithm: decisions must be 0 or 1");
    require(a.branches[x].rows() == m && a.branches[x].cols() == m, "toy algorithm: branch has wrong size");
    require(sup_norm(a.branches[x].adjoint() * a.branches[x] - CMatrix::Identity(m, m)) <= cfg.tol,
            "toy algorithm: branch " + std::to_string(x) + " is not unitary");
  }
}

/// Answers f(x) exactly: V_x = 1 (x) X^f(x).
inline ToyAlgorithm exact_algorithm(std::vector<int> decision, int input_qubits, int work_qubits = 0) {
  ToyAlgorithm a;
  a.input_qubits = input_qubits;
  a.work_qubits = work_qubits;
  a.decision = std::move(decision);
  const int m = 1 << (work_qubits + 1);
  for (int f : a.decision) {
    CMatrix v = CMatrix::Zero(m, m);
    for (int l = 0; l < m; ++l) v(l ^ (f & 1), l) = 1.0;
    a.branches.push_back(v);
  }
  validate_toy(a);
  return a;
}

/// Answers f(x) with probability p. With work qubits the answer becomes
/// entangled with them (rotation, then Hadamards and CNOTs from the answer).
inline ToyAlgorithm biased_algorithm(std::vector<int> decision, double p, int input_qubits, int work_qubits = 0) {
  require(p >= 0.0 && p <= 1.0, "biased_algorithm: p outside [0,1]");
  ToyAlgorithm a;
  a.input_qubits = input_qubits;
  a.work_qubits = work_qubits;
  a.decision = std::move(decision);
  const int m = 1 << (work_qubits + 1);
  const double c = std::sqrt(p), s = std::sqrt(1.0 - p);
  for (int f : a.decision) {
    // Answer rotation taking |0> to sqrt(p)|f> + sqrt(1-p)|1-f>.
    CMatrix rot(2, 2);
    rot << c, -s, s, c;
    if (f) rot = (CMatrix(2, 2) << 0, 1, 1, 0).finished() * rot;
    CMatrix v = kron(CMatrix(CMatrix::Identity(m / 2, m / 2)), rot);
    for (int w = 0; w < work_qubits; ++w) {
      const int bit = 1 << (w + 1);
      CMatrix h = CMatrix::Zero(m, m), cx = CMatrix::Zero(m, m);
      for (int l = 0; l < m; ++l) {
        const double sign = (l & bit) ? -1.0 : 1.0;
        h(l, l) += sign / std::sqrt(2.0);
        h(l ^ bit, l) += 1.0 / std::sqrt(2.0);
        cx((l & 1) ? l ^ bit : l, l) = 1.0;
      }
      v = cx * h * v;
    }
    a.branches.push_back(v);
  }
  validate_toy(a);
  return a;
}

/// P(majority of r independent trials succeeds) for per-trial success p.
inline double majority_closed_form(double p, int r) {
  require(r >= 1 && r % 2 == 1, "majority_closed_form: r must be odd");
  double total = 0.0, binom = 1.0;
  for (int i = 0; i <= r; ++i) {
    if (i > r / 2) total += binom * std::pow(p, i) * std::pow(1.0 - p, r - i);
    binom = binom * (r - i) / (i + 1);
  }
  return total;
}

/// Smallest odd r whose majority probability reaches target.
inline int repetitions_for(double p, double target) {
  require(p > 0.5, "repetitions_for: per-trial success must exceed 1/2");
  for (int r = 1; r <= kToyMaxCopies; r += 2)
    if (majority_closed_form(p, r) >= target) return r;
  throw Error("repetitions_for: target needs more than " + std::to_string(kToyMaxCopies) + " copies");
}

/// r parallel copies plus a reversible majority vote on their answer wires.
inline ToyAlgorithm amplify(const ToyAlgorithm& alg, int r) {
  validate_toy(alg);
  require(r >= 1 && r % 2 == 1, "amplify: repetition count must be odd, got " + std::to_string(r));
  if (r == 1) return alg;
  require(alg.copies == 1, "amplify: algorithm is already amplified");
  require(r <= kToyMaxCopies, "amplify: too many copies");
  ToyAlgorithm out = alg;
  out.copies = r;
  return out;
}

// ---------------------------------------------------------------------------
// Dense Hilbert-space form

namespace detail {

// Majority vote on the copy register: basis index -> index.
inline int majority_permute(int index, int copies, int levels) {
  int ones = 0, mask = 0, stride = 1;
  for (int c = 0; c < copies; ++c, stride *= levels) {
    ones += (index / stride) & 1;
    mask += stride;
  }
  const int maj = 2 * ones > copies ? 1 : 0;
  return (index & 1) == maj ? index : index ^ mask;
}

}  // namespace detail

inline constexpr int kToyMaxDenseQubits = 12;

/// The dilation U as a dense unitary on input (x) copies.
inline CMatrix toy_unitary(const ToyAlgorithm& alg) {
  validate_toy(alg);
  require(alg.qubits() <= kToyMaxDenseQubits, "toy_unitary: register too large for a dense unitary");
  const int m = alg.copy_levels();
  int span = 1;
  for (int c = 0; c < alg.copies; ++c) span *= m;
  const int h = alg.inputs() * span;
  CMatrix u = CMatrix::Zero(h, h);
  for (int x = 0; x < alg.inputs(); ++x) {
    CMatrix block = alg.branches[x];
    for (int c = 1; c < alg.copies; ++c) block = kron(block, alg.branches[x]);
    for (int i = 0; i < span; ++i)
      u.row(x * span + detail::majority_permute(i, alg.copies, m)).segment(x * span, span) = block.row(i);
  }
  return u;
}

// ---------------------------------------------------------------------------
// Oracle construction

struct OracleRow {
  int x = 0;
  int decision = 0;
  double p_acc = 0.0;           // answer wire reads f(x)
  double sigma_norm = 1.0;      // (sigma|sigma) of the post-selected remainder
  double closed_circuit = 0.0;  // G on |x,0..0,0), effect (x,0..0,f(x)|
  double fidelity = 0.0;        // min over external |b) of the ideal-oracle probability
};

enum class SubroutineRoute { automatic, gpt, hilbert, sector };

inline std::string to_string(SubroutineRoute r) {
  switch (r) {
    case SubroutineRoute::gpt: return "gpt";
    case SubroutineRoute::hilbert: return "hilbert";
    case SubroutineRoute::sector: return "sector";
    default: return "automatic";
  }
}

struct OracleApproximation {
  SubroutineRoute route = SubroutineRoute::gpt;
  std::optional<TransformMat> g;  // present on the GPT route
  std::optional<TransformMat> u;  // dilation on input (x) copies, GPT route
  std::vector<OracleRow> rows;
};

/// Total qubits, including the external answer wire, for which the full
/// real-vector construction is built.
inline constexpr int kToyMaxGptQubits = 5;

/// The controlled bit-flip C on answer (x) external: T_0 = 1, T_1 = X.
inline ControlledTransform controlled_bit_flip(const Config& cfg = {}) {
  const System q = System::quantum(2);
  CMatrix x(2, 2);
  x << 0, 1, 1, 0;
  return build_controlled(SlitStructure::basis(q, 2, cfg), {CMatrix::Identity(2, 2), x}, q, cfg);
}

namespace detail {

inline CVector basis_ket(int dim, int i) { return CVector::Unit(dim, i); }

inline std::vector<OracleRow> rows_gpt(const ToyAlgorithm& alg, OracleApproximation& out, const Config& cfg) {
  const int h_main = 1 << alg.qubits();
  const System q2 = System::quantum(2);
  const System rest = System::quantum(h_main / 2);
  const System main = System::composite(rest, q2);
  const System whole = System::composite(main, q2);

  const TransformMat u = TransformMat::conjugation(main, toy_unitary(alg));
  const TransformMat u_ext = compose_parallel(u, TransformMat::identity(q2));
  // C acts on the last answer wire and the external wire; kron is
  // associative, so rest (x) (answer (x) ext) has the same coefficients.
  const ControlledTransform c = controlled_bit_flip(cfg);
  const TransformMat c_whole(whole, whole, kron(Matrix(Matrix::Identity(rest.dim(), rest.dim())), c.matrix().matrix()),
                             true);
  const TransformMat g = u_ext.inverse() * c_whole * u_ext;

  std::vector<OracleRow> rows;
  const int span = h_main / alg.inputs();
  for (int x = 0; x < alg.inputs(); ++x) {
    OracleRow row;
    row.x = x;
    row.decision = alg.decision[x];
    const CVector in_main = basis_ket(h_main, x * span);
    const StateVec after = apply(u, StateVec::from_ket(main, in_main));
    const EffectVec answer = EffectVec::from_operator(q2, basis_ket(2, row.decision) * basis_ket(2, row.decision).adjoint());
    // The algorithm's channel: prepare, run U, trace everything but the answer.
    row.p_acc = probability(answer, marginalize(after, Side::right));
    const StateVec ascaled = condition(answer, after, Side::right);  // alpha |sigma)
    const double alpha = probability(EffectVec::unit(rest), ascaled);
    row.sigma_norm = alpha > 0.0 ? ascaled.coeffs().squaredNorm() / (alpha * alpha) : 0.0;

    double worst = 1.0;
    for (int b = 0; b < 2; ++b) {
      const StateVec s = StateVec::from_ket(whole, kron(CMatrix(in_main), CMatrix(basis_ket(2, b))));
      const CVector target = kron(CMatrix(in_main), CMatrix(basis_ket(2, b ^ row.decision)));
      const double prob = probability(EffectVec::from_operator(whole, target * target.adjoint()), apply(g, s));
      if (b == 0) row.closed_circuit = prob;
      worst = std::min(worst, prob);
    }
    row.fidelity = worst;
    rows.push_back(row);
  }
  out.g = g;
  out.u = u;
  return rows;
}

inline std::vector<OracleRow> rows_hilbert(const ToyAlgorithm& alg) {
  const CMatrix u = toy_unitary(alg);
  const int h = int(u.rows());
  std::vector<OracleRow> rows;
  const int span = h / alg.inputs();
  for (int x = 0; x < alg.inputs(); ++x) {
    OracleRow row;
    row.x = x;
    row.decision = alg.decision[x];
    const CVector psi = u.col(x * span);
    CVector chi = CVector::Zero(h / 2);
    for (int i = 0; i < h; ++i)
      if ((i & 1) == row.decision) chi(i / 2) = psi(i);
    row.p_acc = chi.squaredNorm();
    row.sigma_norm = row.p_acc > 0.0 ? 1.0 : 0.0;  // a pure remainder
    double worst = 1.0;
    for (int b = 0; b < 2; ++b) {
      // Column of G on |x,0..0,b): U |x,0..0) = psi, then C = sum_i |i><i|
      // (x) X^i (i the answer bit) splits psi by external value, then U^dagger.
      CVector ext_part[2] = {CVector::Zero(h), CVector::Zero(h)};
      for (int i = 0; i < h; ++i) ext_part[b ^ (i & 1)](i) = psi(i);
      const CVector out = u.adjoint() * ext_part[b ^ row.decision];
      const double prob = std::norm(out(x * span));
      if (b == 0) row.closed_circuit = prob;
      worst = std::min(worst, prob);
    }
    row.fidelity = worst;
    rows.push_back(row);
  }
  return rows;
}

// Occupation-number basis of r-1 identical copies, each with m levels.
inline void compositions(int total, int parts, std::vector<int>& cur, std::vector<std::vector<int>>& out) {
  if (int(cur.size()) == parts - 1) {
    cur.push_back(total);
    out.push_back(cur);
    cur.pop_back();
    return;
  }
  for (int k = 0; k <= total; ++k) {
    cur.push_back(k);
    compositions(total - k, parts, cur, out);
    cur.pop_back();
  }
}

// Every copy sees the same input, so after V_x^{(x) r} the first r-1 copies
// sit in their symmetric subspace; the majority vote maps symmetric states
// to symmetric states. The circuit is simulated exactly in
// Sym^{r-1}(C^m) (x) C^m (x) C^2 instead of the full register.
inline std::vector<OracleRow> rows_sector(const ToyAlgorithm& alg) {
  const int m = alg.copy_levels(), r = alg.copies;
  std::vector<std::vector<int>> occ;
  std::vector<int> cur;
  compositions(r - 1, m, cur, occ);
  std::map<std::vector<int>, int> index;
  for (int s = 0; s < int(occ.size()); ++s) index[occ[s]] = s;
  std::vector<double> log_fact(r + 1, 0.0);
  for (int i = 1; i <= r; ++i) log_fact[i] = log_fact[i - 1] + std::log(double(i));

  std::vector<OracleRow> rows;
  const int dim = int(occ.size()) * m;
  for (int x = 0; x < alg.inputs(); ++x) {
    OracleRow row;
    row.x = x;
    row.decision = alg.decision[x];
    const CVector psi = alg.branches[x].col(0);
    // psi^{(x) r-1} (x) psi in the sector, then the majority permutation.
    CVector phi = CVector::Zero(dim);
    for (int s = 0; s < int(occ.size()); ++s) {
      Complex amp = std::exp(0.5 * log_fact[r - 1]);
      int ones = 0;
      for (int l = 0; l < m; ++l) {
        for (int k = 0; k < occ[s][l]; ++k) amp *= psi(l);
        amp /= std::exp(0.5 * log_fact[occ[s][l]]);
        if (l & 1) ones += occ[s][l];
      }
      for (int last = 0; last < m; ++last) {
        const int maj = 2 * (ones + (last & 1)) > r ? 1 : 0;
        int ts = s, tl = last;
        if ((last & 1) != maj) {
          std::vector<int> flipped(m);
          for (int l = 0; l < m; ++l) flipped[l] = occ[s][l ^ 1];
          ts = index.at(flipped);
          tl = last ^ 1;
        }
        phi(ts * m + tl) += amp * psi(last);
      }
    }
    CVector chi = CVector::Zero(dim);
    for (int i = 0; i < dim; ++i)
      if ((i & 1) == row.decision) chi(i) = phi(i);
    row.p_acc = chi.squaredNorm();
    row.sigma_norm = row.p_acc > 0.0 ? 1.0 : 0.0;  // a pure remainder
    // <x,0,b'| U^-1 C U |x,0,b> = <phi (x) b'| C |phi (x) b>.
    double worst = 1.0;
    for (int b = 0; b < 2; ++b) {
      CVector in = CVector::Zero(2 * dim), cin = CVector::Zero(2 * dim), outv = CVector::Zero(2 * dim);
      for (int i = 0; i < dim; ++i) in(2 * i + b) = phi(i);
      for (int i = 0; i < dim; ++i)
        for (int e = 0; e < 2; ++e) cin(2 * i + (e ^ (i & 1))) = in(2 * i + e);
      for (int i = 0; i < dim; ++i) outv(2 * i + (b ^ row.decision)) = phi(i);
      const double prob = std::norm(outv.dot(cin));
      if (b == 0) row.closed_circuit = prob;
      worst = std::min(worst, prob);
    }
    row.fidelity = worst;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace detail

/// G = (U^-1 (x) 1) C (U (x) 1) and its per-input behaviour. The automatic
/// route builds G in the real-vector representation when the register is
/// small enough and otherwise falls back to exact symmetric-sector
/// simulation.
inline OracleApproximation build_oracle_from_algorithm(const ToyAlgorithm& alg,
                                                       SubroutineRoute route = SubroutineRoute::automatic,
                                                       const Config& cfg = {}) {
  validate_toy(alg, cfg);
  if (route == SubroutineRoute::automatic)
    route = alg.qubits() + 1 <= kToyMaxGptQubits ? SubroutineRoute::gpt : SubroutineRoute::sector;
  OracleApproximation out;
  out.route = route;
  switch (route) {
    case SubroutineRoute::gpt:
      require(alg.qubits() + 1 <= kToyMaxGptQubits, "build_oracle_from_algorithm: register too large for the GPT route");
      out.rows = detail::rows_gpt(alg, out, cfg);
      break;
    case SubroutineRoute::hilbert:
      out.rows = detail::rows_hilbert(alg);
      break;
    default:
      out.rows = detail::rows_sector(alg);
      break;
  }
  return out;
}

/// (0|_ext C (|0)_ext (x) .) on the control wire, as a transformation.
inline TransformMat post_selected_bit_flip(int ext_value, const Config& cfg = {}) {
  const System q = System::quantum(2);
  const ControlledTransform c = controlled_bit_flip(cfg);
  const StateVec prep = StateVec::from_ket(q, CVector::Unit(2, ext_value));
  const EffectVec eff = EffectVec::from_operator(q, CVector::Unit(2, ext_value) * CVector::Unit(2, ext_value).adjoint());
  Matrix m(q.dim(), q.dim());
  for (int i = 0; i < q.dim(); ++i) {
    const StateVec in(System::composite(q, q), kron(Vector(Vector::Unit(q.dim(), i)), prep.coeffs()));
    m.col(i) = condition(eff, apply(c.matrix(), in), Side::right).coeffs();
  }
  return TransformMat(q, q, m);
}

/// The bit-flip identity used in the proof, checked through a dynamically
/// faithful state: post-selecting the external wire on |0) behaves as the
/// effect (0| followed by re-preparing |0) on the control.
inline bool check_bit_flip_identity(const std::vector<double>& weights = {0.5, 0.5}, const Config& cfg = {}) {
  const System q = System::quantum(2);
  const TransformMat lhs = post_selected_bit_flip(0, cfg);
  const TransformMat rhs = TransformMat::kraus(q, {CVector::Unit(2, 0) * CVector::Unit(2, 0).adjoint()});
  return check_faithful(lhs, rhs, faithful_state(weights, q, cfg), cfg);
}

// ---------------------------------------------------------------------------
// The bound

struct SubroutineReport {
  int q = 0;
  double bound = 0.0;  // 1 - 2^-q
  SubroutineRoute route = SubroutineRoute::gpt;
  int copies = 1;
  std::vector<OracleRow> rows;
  double chain_residual = 0.0;  // max |closed - p_acc^2 (sigma|sigma)|
  bool pass = false;
  double min_fidelity() const {
    double m = 1.0;
    for (const auto& r : rows) m = std::min(m, r.fidelity);
    return m;
  }
};

/// Whether G behaves as the ideal oracle with probability at least 1 - 2^-q
/// on every input. The closed-circuit value factors as
/// P_x(acc)^2 (sigma|sigma); the fidelity already carries the (sigma|sigma)
/// factor, so a subnormalized remainder simply lowers it.
inline SubroutineReport verify_subroutine_bound(const ToyAlgorithm& alg, int q,
                                                SubroutineRoute route = SubroutineRoute::automatic,
                                                const Config& cfg = {}) {
  require(q >= 0 && q <= 52, "verify_subroutine_bound: q out of range");
  const OracleApproximation oa = build_oracle_from_algorithm(alg, route, cfg);
  SubroutineReport rep;
  rep.q = q;
  rep.bound = 1.0 - std::ldexp(1.0, -q);
  rep.route = oa.route;
  rep.copies = alg.copies;
  rep.rows = oa.rows;
  for (const auto& r : rep.rows)
    rep.chain_residual = std::max(rep.chain_residual, std::abs(r.closed_circuit - r.p_acc * r.p_acc * r.sigma_norm));
  rep.pass = rep.min_fidelity() >= rep.bound && rep.chain_residual < cfg.tol;
  return rep;
}

inline nlohmann::json to_json(const SubroutineReport& r) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& x : r.rows)
    rows.push_back({{"x", x.x},
                    {"decision", x.decision},
                    {"p_acc", x.p_acc},
                    {"sigma_norm", x.sigma_norm},
                    {"closed_circuit", x.closed_circuit},
                    {"fidelity", x.fidelity}});
  return {{"check", "subroutine"}, {"q", r.q},         {"bound", r.bound},
          {"route", to_string(r.route)}, {"copies", r.copies}, {"chain_residual", r.chain_residual},
          {"per_x", rows},      {"pass", r.pass}};
}

}  // namespace gptlab
