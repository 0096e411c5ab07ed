#pragma once

#include "gptlab/interference.hpp"

#include "json.hpp"

#include <Eigen/LU>

#include <cmath>
#include <memory>
#include <string>
#include <vector>

namespace gptlab {

/// C{T_i}: a reversible transformation on control (x) target acting as T_i on
/// the target when the control is in slit state i.
class ControlledTransform {
 public:
  ControlledTransform(SlitStructure control, System target, std::vector<TransformMat> branches, TransformMat matrix)
      : control_(std::move(control)), target_(std::move(target)), branches_(std::move(branches)),
        matrix_(std::move(matrix)) {}

  const SlitStructure& control_slits() const { return control_; }
  const System& control_system() const { return control_.system(); }
  const System& target_system() const { return target_; }
  const std::vector<TransformMat>& branches() const { return branches_; }
  const TransformMat& matrix() const { return matrix_; }

 private:
  SlitStructure control_;
  System target_;
  std::vector<TransformMat> branches_;
  TransformMat matrix_;
};

namespace detail {

// Checks apply(C, |i) (x) sigma) = |i) (x) T_i sigma on the target basis
// states and a few Haar/vertex samples.
inline void verify_control_equation(const ControlledTransform& ct, const Config& cfg) {
  const System& target = ct.target_system();
  const TheoryHandle theory = target.is_classical() ? classical_theory() : quantum_theory();
  std::vector<StateVec> probes;
  for (int a = 0; a < target.hilbert_dim(); ++a)
    probes.push_back(StateVec::from_ket(target, CVector::Unit(target.hilbert_dim(), a)));
  if (theory.owns(target)) {
    Rng rng(derive_seed(cfg.seed, 0xC0));
    for (int t = 0; t < 4; ++t) probes.push_back(theory.sample_pure(target, rng));
  }
  const SlitStructure& slits = ct.control_slits();
  for (int i = 0; i < slits.size(); ++i)
    for (const StateVec& sigma : probes) {
      const StateVec lhs = apply(ct.matrix(), compose_parallel(slits.state(i), sigma));
      const StateVec rhs = compose_parallel(slits.state(i), apply(ct.branches()[i], sigma));
      require(sup_norm(lhs.coeffs() - rhs.coeffs()) <= cfg.tol,
              "build_controlled: control equation fails for branch " + std::to_string(i));
    }
  require(causality_defect(ct.matrix()) <= cfg.tol, "build_controlled: result does not preserve the unit effect");
}

inline CMatrix slit_ket_matrix(const SlitStructure& slits) {
  const int h = slits.system().hilbert_dim();
  CMatrix kets(h, slits.size());
  for (int i = 0; i < slits.size(); ++i) kets.col(i) = pure_ket(slits.state(i));
  return kets;
}

}  // namespace detail

/// Quantum control: U = sum_i |i><i| (x) U_i + (1 - Pi) (x) 1, compiled to a
/// conjugation. Slits that do not fill the control leave the complement idle.
inline ControlledTransform build_controlled(const SlitStructure& control, const std::vector<CMatrix>& unitaries,
                                            const System& target, const Config& cfg = {}) {
  require(int(unitaries.size()) == control.size(), "build_controlled: " + std::to_string(unitaries.size()) +
                                                       " branches for " + std::to_string(control.size()) + " slits");
  require(is_all_quantum(control.system()) && is_all_quantum(target),
          "build_controlled: unitary branches need quantum control and target");
  const int hc = control.system().hilbert_dim(), ht = target.hilbert_dim();
  const CMatrix kets = detail::slit_ket_matrix(control);
  CMatrix u = kron(CMatrix(CMatrix::Identity(hc, hc) - kets * kets.adjoint()), CMatrix(CMatrix::Identity(ht, ht)));
  std::vector<TransformMat> branches;
  for (int i = 0; i < control.size(); ++i) {
    require(unitaries[i].rows() == ht && unitaries[i].cols() == ht, "build_controlled: branch has wrong size");
    require(sup_norm(unitaries[i].adjoint() * unitaries[i] - CMatrix::Identity(ht, ht)) <= cfg.tol,
            "build_controlled: branch " + std::to_string(i) + " is not reversible");
    branches.push_back(TransformMat::conjugation(target, unitaries[i]));
    u += kron(CMatrix(kets.col(i) * kets.col(i).adjoint()), unitaries[i]);
  }
  const System joint = System::composite(control.system(), target);
  ControlledTransform ct(control, target, std::move(branches), TransformMat::conjugation(joint, u));
  detail::verify_control_equation(ct, cfg);
  return ct;
}

/// Classical control: sum_i [i](x)T_i plus the identity on unused vertices.
inline ControlledTransform build_controlled(const SlitStructure& control, const std::vector<TransformMat>& branches,
                                            const System& target, const Config& cfg = {}) {
  require(int(branches.size()) == control.size(), "build_controlled: " + std::to_string(branches.size()) +
                                                      " branches for " + std::to_string(control.size()) + " slits");
  require(control.system().is_classical(), "build_controlled: quantum control needs unitary branches");
  const int nc = control.system().dim();
  Matrix m = Matrix::Zero(nc * target.dim(), nc * target.dim());
  Vector unused = Vector::Ones(nc);
  for (int i = 0; i < control.size(); ++i) {
    const TransformMat& t = branches[i];
    require(t.in_system() == target && t.out_system() == target, "build_controlled: branch on wrong system");
    require(t.reversible(), "build_controlled: branch " + std::to_string(i) + " is not reversible");
    const int v = detail::vertex_index(control.state(i));
    unused(v) = 0.0;
    Matrix sel = Matrix::Zero(nc, nc);
    sel(v, v) = 1.0;
    m += kron(sel, t.matrix());
  }
  m += kron(Matrix(unused.asDiagonal()), Matrix(Matrix::Identity(target.dim(), target.dim())));
  const System joint = System::composite(control.system(), target);
  ControlledTransform ct(control, target, branches, TransformMat(joint, joint, m, true));
  detail::verify_control_equation(ct, cfg);
  return ct;
}

/// Basis (columns) of the states fixed by every branch, i.e. the kernel of
/// the stacked (T_i - 1).
inline Matrix common_fixed_subspace(const std::vector<TransformMat>& branches) {
  require(!branches.empty(), "common_fixed_subspace: no branches");
  const int d = branches.front().in_system().dim();
  Matrix stacked(d * int(branches.size()), d);
  for (std::size_t i = 0; i < branches.size(); ++i)
    stacked.middleRows(int(i) * d, d) = branches[i].matrix() - Matrix::Identity(d, d);
  Eigen::FullPivLU<Matrix> lu(stacked);
  lu.setThreshold(1e-10);
  if (lu.dimensionOfKernel() == 0) return Matrix(d, 0);
  return lu.kernel();
}

/// Q with (i| Q = (i| for every distinguishing effect of the slits.
class PhaseTransform {
 public:
  static PhaseTransform make(SlitStructure slits, TransformMat q, const Config& cfg = {}) {
    require(q.in_system() == slits.system() && q.out_system() == slits.system(),
            "phase transformation: acts on the wrong system");
    const double defect = phase_defect(slits, q);
    require(defect <= cfg.tol, "phase transformation: changes distinguishing statistics by " + std::to_string(defect));
    return PhaseTransform(std::move(slits), std::move(q));
  }

  /// max over distinguishing effects of the sup-norm of (i| Q - (i|.
  static double phase_defect(const SlitStructure& slits, const TransformMat& q) {
    double worst = 0.0;
    for (const EffectVec& e : slits.distinguishing().effects())
      worst = std::max(worst, sup_norm(Vector(q.matrix().transpose() * e.coeffs() - e.coeffs())));
    return worst;
  }

  const SlitStructure& slits() const { return slits_; }
  const TransformMat& matrix() const { return q_; }

 private:
  PhaseTransform(SlitStructure slits, TransformMat q) : slits_(std::move(slits)), q_(std::move(q)) {}
  SlitStructure slits_;
  TransformMat q_;
};

namespace detail {
inline Matrix kicked_matrix(const TransformMat& joint, const System& control, const StateVec& s) {
  const int dc = control.dim();
  Matrix q(dc, dc);
  for (int a = 0; a < dc; ++a) {
    const StateVec in(joint.in_system(), kron(Vector(Vector::Unit(dc, a)), s.coeffs()));
    q.col(a) = marginalize(apply(joint, in), Side::left).coeffs();
  }
  return q;
}
}  // namespace detail

/// Generalised phase kick-back: Q = (id (x) u_T) C (id (x) s) for a state s
/// fixed by every branch. Verifies C(sigma (x) s) = Q sigma (x) s.
inline PhaseTransform kick_back(const ControlledTransform& ct, const StateVec& s, const Config& cfg = {}) {
  require(s.system() == ct.target_system(), "kick_back: target state on wrong system");
  for (std::size_t i = 0; i < ct.branches().size(); ++i)
    require(sup_norm(apply(ct.branches()[i], s).coeffs() - s.coeffs()) <= cfg.tol,
            "kick_back: target state is not fixed by branch " + std::to_string(i));
  const System& control = ct.control_system();
  const Matrix q = detail::kicked_matrix(ct.matrix(), control, s);
  const Matrix q_inv = detail::kicked_matrix(ct.matrix().inverse(), control, s);
  require(sup_norm(Matrix(q * q_inv) - Matrix::Identity(control.dim(), control.dim())) <= cfg.tol * 10,
          "kick_back: kicked-back map is not reversible");

  std::vector<StateVec> probes;
  for (int a = 0; a < control.hilbert_dim(); ++a)
    probes.push_back(StateVec::from_ket(control, CVector::Unit(control.hilbert_dim(), a)));
  const TheoryHandle theory = control.is_classical() ? classical_theory() : quantum_theory();
  if (theory.owns(control)) {
    Rng rng(derive_seed(cfg.seed, 0xCB));
    for (int t = 0; t < 4; ++t) probes.push_back(theory.sample_pure(control, rng));
  }
  const TransformMat qt(control, control, q, true);
  for (const StateVec& sigma : probes) {
    const StateVec lhs = apply(ct.matrix(), compose_parallel(sigma, s));
    const StateVec rhs = compose_parallel(apply(qt, sigma), s);
    require(sup_norm(lhs.coeffs() - rhs.coeffs()) <= cfg.tol, "kick_back: output is not a product with the target");
  }
  return PhaseTransform::make(ct.control_slits(), qt, cfg);
}

// ---------------------------------------------------------------------------
// Oracle systems

struct BoolFunction {
  std::string id;
  std::vector<int> values;  // f(x) in {0,1} for x in the domain order
};

enum class Realization { phase, controlled };

inline std::string to_string(Realization r) { return r == Realization::phase ? "phase" : "controlled"; }

inline Realization parse_realization(const std::string& s) {
  if (s == "phase") return Realization::phase;
  if (s == "controlled") return Realization::controlled;
  throw Error("unknown oracle realization '" + s + "' (expected phase or controlled)");
}

inline constexpr const char* kNullSymbol = "\xE2\x80\xA2";  // U+2022

/// A family {O_f} on a quantum control register. Input x occupies level x;
/// levels past the domain (including the null query) carry phase +1.
class OracleSystem {
 public:
  const std::vector<std::string>& domain() const { return domain_; }
  int domain_size() const { return int(domain_.size()); }
  const std::vector<BoolFunction>& functions() const { return functions_; }
  int function_count() const { return int(functions_.size()); }
  Realization realization() const { return realization_; }
  int capacity() const { return capacity_; }
  bool has_null_query() const { return null_query_; }
  /// Control level of the null input; -1 when absent.
  int null_index() const { return null_query_ ? domain_size() : -1; }
  const System& system() const { return system_; }
  const ProjectorFamily& projectors() const { return *family_; }

  const TransformMat& oracle(int f) const { return oracles_.at(f); }
  PhaseTransform phase_transform(int f, const Config& cfg = {}) const {
    return PhaseTransform::make(family_->slits(), oracle(f), cfg);
  }
  /// Phase e^{i theta_x} applied at level x by O_f.
  const Vector& phases(int f) const { return phases_.at(f); }

  int index_of(const std::string& id) const {
    for (int f = 0; f < function_count(); ++f)
      if (functions_[f].id == id) return f;
    throw Error("oracle system: unknown function '" + id + "'");
  }

  /// Mask of the control levels that correspond to domain inputs (plus null).
  Subset input_mask() const { return full_subset(domain_size() + (null_query_ ? 1 : 0)); }

  /// Whether f and g agree on every input in I (the null input always agrees).
  bool agree_on(int f, int g, Subset inputs) const {
    for (int x = 0; x < domain_size(); ++x)
      if (((inputs >> x) & 1u) && functions_[f].values[x] != functions_[g].values[x]) return false;
    return true;
  }

  /// Family with explicit phase angles per function (one per control level);
  /// used for the canonical oracles and for injecting faulty ones in tests.
  static OracleSystem from_phases(std::vector<std::string> domain, std::vector<BoolFunction> functions,
                                  std::vector<Vector> phases, int capacity, Realization realization,
                                  bool null_query = false, const Config& cfg = {}) {
    validate(domain, functions, capacity);
    require(phases.size() == functions.size(), "oracle system: one phase vector per function required");
    OracleSystem os;
    os.domain_ = std::move(domain);
    os.functions_ = std::move(functions);
    os.capacity_ = capacity;
    os.null_query_ = null_query;
    os.realization_ = realization;
    os.system_ = System::quantum(capacity);
    os.family_ = std::make_shared<ProjectorFamily>(SlitStructure::basis(os.system_, capacity, cfg));
    for (std::size_t f = 0; f < os.functions_.size(); ++f) {
      require(phases[f].size() == capacity, "oracle system: phase vector has wrong length");
      CVector diag(capacity);
      for (int x = 0; x < capacity; ++x) diag(x) = std::polar(1.0, phases[f](x));
      if (realization == Realization::phase) {
        os.oracles_.push_back(TransformMat::conjugation(os.system_, CMatrix(diag.asDiagonal())));
      } else {
        os.oracles_.push_back(controlled_realization(os.family_->slits(), diag, cfg));
      }
    }
    os.phases_ = std::move(phases);
    return os;
  }

 private:
  static void validate(const std::vector<std::string>& domain, const std::vector<BoolFunction>& functions,
                       int capacity) {
    require(!domain.empty(), "oracle system: empty domain");
    require(int(domain.size()) <= capacity, "oracle system: domain of size " + std::to_string(domain.size()) +
                                                " exceeds control capacity " + std::to_string(capacity));
    require(capacity <= kMaxSubsetN, "oracle system: control capacity above " + std::to_string(kMaxSubsetN));
    require(!functions.empty(), "oracle system: empty function class");
    for (const auto& f : functions) {
      require(f.values.size() == domain.size(), "oracle system: function '" + f.id + "' has wrong arity");
      for (int v : f.values) require(v == 0 || v == 1, "oracle system: function '" + f.id + "' is not boolean");
    }
  }

  // Target qubit with branch diag(1, e^{i theta_x}); kicking back from |1><1|
  // leaves e^{i theta_x} on control level x.
  static TransformMat controlled_realization(const SlitStructure& control, const CVector& diag, const Config& cfg) {
    std::vector<CMatrix> branches;
    for (int x = 0; x < diag.size(); ++x) {
      CMatrix z = CMatrix::Identity(2, 2);
      z(1, 1) = diag(x);
      branches.push_back(z);
    }
    const System qubit = System::quantum(2);
    const ControlledTransform ct = build_controlled(control, branches, qubit, cfg);
    return kick_back(ct, StateVec::from_ket(qubit, CVector::Unit(2, 1)), cfg).matrix();
  }

  std::vector<std::string> domain_;
  std::vector<BoolFunction> functions_;
  std::vector<Vector> phases_;
  std::vector<TransformMat> oracles_;
  int capacity_ = 0;
  bool null_query_ = false;
  Realization realization_ = Realization::phase;
  System system_ = System::quantum(1);
  std::shared_ptr<const ProjectorFamily> family_;

  friend OracleSystem add_null_query(const OracleSystem& os, const Config& cfg);
};

/// Canonical phase angles: pi f(x) on domain levels, 0 elsewhere.
inline Vector canonical_phases(const BoolFunction& f, int capacity) {
  Vector theta = Vector::Zero(capacity);
  for (std::size_t x = 0; x < f.values.size(); ++x) theta(int(x)) = f.values[x] ? std::acos(-1.0) : 0.0;
  return theta;
}

/// O_f: rho -> D_f rho D_f with D_f = sum_x (-1)^{f(x)} |x><x|. capacity 0
/// means |X|.
inline OracleSystem build_phase_oracle_family(std::vector<std::string> domain, std::vector<BoolFunction> functions,
                                              int capacity = 0, Realization realization = Realization::phase,
                                              const Config& cfg = {}) {
  if (capacity == 0) capacity = int(domain.size());
  require(int(domain.size()) <= capacity, "build_phase_oracle_family: domain of size " + std::to_string(domain.size()) +
                                              " exceeds control capacity " + std::to_string(capacity));
  std::vector<Vector> phases;
  for (const auto& f : functions) {
    require(f.values.size() == domain.size(), "build_phase_oracle_family: function '" + f.id + "' has wrong arity");
    phases.push_back(canonical_phases(f, capacity));
  }
  return OracleSystem::from_phases(std::move(domain), std::move(functions), std::move(phases), capacity, realization,
                                   false, cfg);
}

/// All 2^|X| boolean functions on X, ids "f<bits>" with x_0 first.
inline std::vector<BoolFunction> all_boolean_functions(int n) {
  require(n >= 1 && n <= 16, "all_boolean_functions: domain size out of range");
  std::vector<BoolFunction> out;
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    BoolFunction f{"f", std::vector<int>(n)};
    for (int x = 0; x < n; ++x) {
      f.values[x] = (mask >> x) & 1u;
      f.id += char('0' + f.values[x]);
    }
    out.push_back(std::move(f));
  }
  return out;
}

inline std::vector<std::string> index_domain(int n) {
  std::vector<std::string> d;
  for (int i = 0; i < n; ++i) d.push_back(std::to_string(i));
  return d;
}

/// Adds the null input at control level |X|; every oracle acts trivially there.
inline OracleSystem add_null_query(const OracleSystem& os, const Config& cfg = {}) {
  require(!os.has_null_query(), "add_null_query: oracle system already has a null query");
  require(os.capacity() >= os.domain_size() + 1, "add_null_query: control capacity " + std::to_string(os.capacity()) +
                                                     " leaves no level for the null input (need " +
                                                     std::to_string(os.domain_size() + 1) + ")");
  for (int f = 0; f < os.function_count(); ++f)
    require(std::abs(std::remainder(os.phases(f)(os.domain_size()), 2 * std::acos(-1.0))) <= cfg.tol,
            "add_null_query: oracle '" + os.functions()[f].id + "' acts on the null level");
  OracleSystem out = os;
  out.null_query_ = true;
  return out;
}

struct LocalityViolation {
  int f = 0, g = 0;
  Subset inputs = 0;
  double norm = 0.0;
};

struct LocalityReport {
  long long checked = 0;
  std::vector<LocalityViolation> violations;  // first few only
  long long violation_count = 0;
  double worst = 0.0;
  bool ok() const { return violation_count == 0; }
};

enum class LocalityForm { coherence, face };

/// For all f, g and nonempty I within the inputs with f|_I = g|_I, checks
/// ||(O_f - O_g) omega_I|| < tol (or with P_I for the fixed-state form).
inline LocalityReport check_locality(const OracleSystem& os, const Config& cfg = {},
                                     LocalityForm form = LocalityForm::coherence) {
  LocalityReport report;
  const ProjectorFamily& fam = os.projectors();
  const Subset inputs = os.input_mask();
  std::vector<Matrix> restricted;
  std::vector<Subset> subsets;
  for (Subset s = 1; s <= inputs; ++s) {
    if ((s & ~inputs) != 0) continue;
    subsets.push_back(s);
    restricted.push_back(form == LocalityForm::coherence ? fam.coherence(s) : fam.face(s));
  }
  for (int f = 0; f < os.function_count(); ++f)
    for (int g = f + 1; g < os.function_count(); ++g) {
      const Matrix diff = os.oracle(f).matrix() - os.oracle(g).matrix();
      for (std::size_t k = 0; k < subsets.size(); ++k) {
        if (!os.agree_on(f, g, subsets[k])) continue;
        ++report.checked;
        const double norm = sup_norm(Matrix(diff * restricted[k]));
        report.worst = std::max(report.worst, norm);
        if (norm >= cfg.tol) {
          if (report.violations.size() < 16) report.violations.push_back({f, g, subsets[k], norm});
          ++report.violation_count;
        }
      }
    }
  return report;
}

// ---------------------------------------------------------------------------
// JSON

inline nlohmann::json to_json(const OracleSystem& os) {
  nlohmann::json j;
  j["domain"] = os.domain();
  j["functions"] = nlohmann::json::array();
  for (const auto& f : os.functions()) j["functions"].push_back({{"id", f.id}, {"values", f.values}});
  j["realization"] = to_string(os.realization());
  j["capacity"] = os.capacity();
  j["null_query"] = os.has_null_query();
  return j;
}

/// Parses {"domain", "functions", "realization"} with optional "capacity"
/// and "null_query"; the oracles are rebuilt in canonical form.
inline OracleSystem oracle_system_from_json(const nlohmann::json& j, const Config& cfg = {}) {
  try {
    require(j.is_object(), "oracle JSON: expected an object");
    const auto domain = j.at("domain").get<std::vector<std::string>>();
    std::vector<BoolFunction> functions;
    for (const auto& f : j.at("functions")) functions.push_back({f.at("id").get<std::string>(),
                                                                 f.at("values").get<std::vector<int>>()});
    const Realization r = parse_realization(j.value("realization", std::string("phase")));
    const bool null_query = j.value("null_query", false);
    const int capacity = j.value("capacity", int(domain.size()) + (null_query ? 1 : 0));
    OracleSystem os = build_phase_oracle_family(domain, functions, capacity, r, cfg);
    return null_query ? add_null_query(os, cfg) : os;
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("oracle JSON: ") + e.what());
  }
}

inline nlohmann::json to_json(const LocalityReport& r, const OracleSystem& os) {
  nlohmann::json j;
  j["checked"] = r.checked;
  j["violation_count"] = r.violation_count;
  j["worst"] = r.worst;
  j["ok"] = r.ok();
  j["violations"] = nlohmann::json::array();
  for (const auto& v : r.violations)
    j["violations"].push_back({{"f", os.functions()[v.f].id},
                               {"g", os.functions()[v.g].id},
                               {"inputs", subset_to_string(v.inputs)},
                               {"norm", v.norm}});
  return j;
}

}  // namespace gptlab
