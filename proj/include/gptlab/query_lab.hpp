#pragma once

#include "gptlab/oracles.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include "json.hpp"

#include <algorithm>
#include <exception>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

namespace gptlab {

using Rational = boost::multiprecision::cpp_rational;

inline Rational parse_rational(const std::string& text) {
  try {
    return Rational(text.c_str());
  } catch (const std::exception&) {
    throw Error("invalid rational '" + text + "' (expected p/q)");
  }
}

inline std::string to_string(const Rational& r) { return r.str(); }

// ---------------------------------------------------------------------------
// Learning problems

struct FunctionEntry {
  std::string id;
  std::vector<int> values;
  std::string cls;
  Rational weight;
};

/// (C, {C_j}, mu) over a finite input set X.
class LearningProblem {
 public:
  LearningProblem(std::vector<std::string> inputs, std::vector<FunctionEntry> functions)
      : inputs_(std::move(inputs)), functions_(std::move(functions)) {
    validate();
    for (const auto& f : functions_) {
      auto it = std::find(classes_.begin(), classes_.end(), f.cls);
      if (it == classes_.end()) {
        classes_.push_back(f.cls);
        class_prior_.push_back(0);
        it = classes_.end() - 1;
      }
      const int j = int(it - classes_.begin());
      class_index_.push_back(j);
      class_prior_[j] += f.weight;
    }
  }

  const std::vector<std::string>& inputs() const { return inputs_; }
  int input_count() const { return int(inputs_.size()); }
  const std::vector<FunctionEntry>& functions() const { return functions_; }
  int function_count() const { return int(functions_.size()); }
  const FunctionEntry& function(int f) const { return functions_.at(f); }
  /// Class labels in order of first appearance.
  const std::vector<std::string>& classes() const { return classes_; }
  int class_count() const { return int(classes_.size()); }
  int class_of(int f) const { return class_index_.at(f); }
  const Rational& class_prior(int j) const { return class_prior_.at(j); }

  std::vector<BoolFunction> bool_functions() const {
    std::vector<BoolFunction> out;
    for (const auto& f : functions_) out.push_back({f.id, f.values});
    return out;
  }

 private:
  void validate() const {
    require(!inputs_.empty(), "learning problem: empty input set");
    require(int(inputs_.size()) <= kMaxSubsetN, "learning problem: more than " + std::to_string(kMaxSubsetN) +
                                                    " inputs");
    require(std::set<std::string>(inputs_.begin(), inputs_.end()).size() == inputs_.size(),
            "learning problem: duplicate input labels");
    require(!functions_.empty(), "learning problem: empty function class");
    Rational total = 0;
    std::set<std::string> ids;
    std::set<std::vector<int>> seen;
    for (const auto& f : functions_) {
      require(ids.insert(f.id).second, "learning problem: duplicate function id '" + f.id + "'");
      require(f.values.size() == inputs_.size(), "learning problem: function '" + f.id + "' has " +
                                                     std::to_string(f.values.size()) + " values for " +
                                                     std::to_string(inputs_.size()) + " inputs");
      for (int v : f.values) require(v == 0 || v == 1, "learning problem: function '" + f.id + "' is not boolean");
      require(seen.insert(f.values).second, "learning problem: function '" + f.id + "' duplicates another's values");
      require(f.weight > 0, "learning problem: weight of '" + f.id + "' is not positive");
      require(!f.cls.empty(), "learning problem: function '" + f.id + "' has no class");
      total += f.weight;
    }
    require(total == 1, "learning problem: weights sum to " + to_string(total) + ", not 1");
  }

  std::vector<std::string> inputs_;
  std::vector<FunctionEntry> functions_;
  std::vector<std::string> classes_;
  std::vector<int> class_index_;
  std::vector<Rational> class_prior_;
};

inline nlohmann::json to_json(const LearningProblem& p) {
  nlohmann::json j;
  j["inputs"] = p.inputs();
  j["functions"] = nlohmann::json::array();
  for (const auto& f : p.functions())
    j["functions"].push_back({{"id", f.id}, {"values", f.values}, {"class", f.cls}, {"weight", to_string(f.weight)}});
  return j;
}

inline LearningProblem learning_problem_from_json(const nlohmann::json& j) {
  std::string field = "(root)";
  try {
    require(j.is_object(), "learning problem JSON: expected an object");
    field = "inputs";
    auto inputs = j.at("inputs").get<std::vector<std::string>>();
    field = "functions";
    const auto& fs = j.at("functions");
    require(fs.is_array(), "learning problem JSON: functions must be an array");
    std::vector<FunctionEntry> functions;
    for (std::size_t i = 0; i < fs.size(); ++i) {
      const auto& f = fs[i];
      const std::string at = "functions[" + std::to_string(i) + "]";
      field = at + ".weight";
      const auto& w = f.at("weight");
      require(w.is_string(), "learning problem JSON: " + field + " must be a \"p/q\" string");
      Rational weight;
      try {
        weight = parse_rational(w.get<std::string>());
      } catch (const Error& e) {
        throw Error("learning problem JSON: " + field + ": " + e.what());
      }
      field = at + ".id";
      std::string id = f.at("id").get<std::string>();
      field = at + ".values";
      std::vector<int> values = f.at("values").get<std::vector<int>>();
      field = at + ".class";
      functions.push_back({std::move(id), std::move(values), f.at("class").get<std::string>(), weight});
    }
    return LearningProblem(std::move(inputs), std::move(functions));
  } catch (const nlohmann::json::exception& e) {
    throw Error("learning problem JSON: field " + field + ": " + e.what());
  }
}

/// All 2^N functions on inputs "1".."N", uniform prior, classes by parity.
inline LearningProblem parity_problem(int n) {
  require(n >= 1, "parity_problem: N must be positive");
  require(n <= kMaxSubsetN, "parity_problem: N=" + std::to_string(n) + " exceeds the enumeration cap of " +
                                std::to_string(kMaxSubsetN));
  std::vector<std::string> inputs;
  for (int i = 1; i <= n; ++i) inputs.push_back(std::to_string(i));
  std::vector<FunctionEntry> functions;
  const Rational w(Rational(1) / Rational(boost::multiprecision::cpp_int(1) << n));
  for (const BoolFunction& f : all_boolean_functions(n)) {
    int parity = 0;
    for (int v : f.values) parity ^= v;
    functions.push_back({f.id, f.values, parity ? "odd" : "even", w});
  }
  return LearningProblem(std::move(inputs), std::move(functions));
}

// ---------------------------------------------------------------------------
// Classical uselessness

struct ClassicalCertificate {
  std::vector<int> x;  // input indices, length n
  std::vector<int> y;
  int cls = 0;
  Rational conditional, prior;
};

struct ClassicalUselessResult {
  bool useless = true;
  int n = 0;
  long long events_checked = 0;
  std::optional<ClassicalCertificate> certificate;
};

namespace detail {

// Weights over their common denominator D, when D fits comfortably in 62
// bits; identities a/D = b/D are then checked on integers.
struct ScaledWeights {
  std::vector<std::int64_t> weight;
  std::int64_t scale = 1;  // D, the scaled total weight
};

inline std::optional<ScaledWeights> scale_weights(const LearningProblem& p) {
  using boost::multiprecision::cpp_int;
  cpp_int d = 1;
  for (const auto& f : p.functions()) d = boost::multiprecision::lcm(d, cpp_int(denominator(f.weight)));
  const cpp_int limit = cpp_int(1) << 62;
  if (d >= limit) return std::nullopt;
  ScaledWeights out;
  out.scale = d.convert_to<std::int64_t>();
  for (const auto& f : p.functions())
    out.weight.push_back(cpp_int(numerator(f.weight) * (d / denominator(f.weight))).convert_to<std::int64_t>());
  return out;
}

// Per pattern y of f restricted to t: row[0] = mu(f|_t = y), row[1 + j] =
// mu(C_j and f|_t = y). visit(y, row) runs for realized patterns in
// increasing y.
template <typename Num, typename Visit>
void for_each_pattern(const LearningProblem& p, Subset t, const std::vector<Num>& weight, Visit&& visit) {
  std::vector<int> pos;
  for (int x = 0; x < p.input_count(); ++x)
    if ((t >> x) & 1u) pos.push_back(x);
  const int nj = p.class_count(), width = nj + 1;
  const std::size_t patterns = std::size_t(1) << pos.size();
  std::vector<Num> table(patterns * width, Num(0));
  std::vector<char> seen(patterns, 0);
  for (int f = 0; f < p.function_count(); ++f) {
    std::size_t idx = 0;
    for (std::size_t b = 0; b < pos.size(); ++b)
      if (p.function(f).values[pos[b]]) idx |= std::size_t(1) << b;
    seen[idx] = 1;
    table[idx * width] += weight[f];
    table[idx * width + 1 + p.class_of(f)] += weight[f];
  }
  for (std::size_t idx = 0; idx < patterns; ++idx) {
    if (!seen[idx]) continue;
    Subset y = 0;
    for (std::size_t b = 0; b < pos.size(); ++b)
      if ((idx >> b) & 1u) y |= Subset(1) << pos[b];
    visit(y, &table[idx * width]);
  }
}

// row[1 + j] / total == mu(C_j) row[0] / total, cross-multiplied.
inline bool factorizes(std::int64_t joint, std::int64_t marginal, std::int64_t class_weight, std::int64_t total) {
  return static_cast<__int128>(joint) * total == static_cast<__int128>(class_weight) * marginal;
}
inline bool factorizes(const Rational& joint, const Rational& marginal, const Rational& class_weight,
                       const Rational& total) {
  return joint * total == class_weight * marginal;
}

// Drives body(weights, class_weights, total) with integer weights when they
// fit, exact rationals otherwise.
template <typename Body>
void with_weights(const LearningProblem& p, Body&& body) {
  if (const auto scaled = scale_weights(p)) {
    std::vector<std::int64_t> cls(p.class_count(), 0);
    for (int f = 0; f < p.function_count(); ++f) cls[p.class_of(f)] += scaled->weight[f];
    body(scaled->weight, cls, scaled->scale);
    return;
  }
  std::vector<Rational> w;
  for (const auto& f : p.functions()) w.push_back(f.weight);
  std::vector<Rational> cls;
  for (int j = 0; j < p.class_count(); ++j) cls.push_back(p.class_prior(j));
  body(w, cls, Rational(1));
}

template <typename Num>
Rational as_rational(const Num& v) {
  return Rational(v);
}

}  // namespace detail

/// mu(f in C_j | f(x_i) = y_i, i <= n) = mu(C_j) for all query tuples with
/// positive probability, in exact arithmetic. A tuple with repeats conditions
/// on its set of distinct inputs (or has probability zero), so it suffices to
/// range over input sets of size <= n.
inline ClassicalUselessResult classical_useless(const LearningProblem& p, int n) {
  require(n >= 1, "classical_useless: n must be at least 1");
  ClassicalUselessResult out;
  out.n = n;
  const int nx = p.input_count(), nj = p.class_count();
  const int max_size = std::min(n, nx);
  // Smaller sets first, so a failure is reported with the fewest queries.
  std::vector<Subset> order;
  for (Subset s = 1; s <= full_subset(nx); ++s)
    if (subset_size(s) <= max_size) order.push_back(s);
  std::stable_sort(order.begin(), order.end(), [](Subset a, Subset b) { return subset_size(a) < subset_size(b); });
  detail::with_weights(p, [&](const auto& weight, const auto& cls, const auto& total) {
    for (Subset s : order) {
      detail::for_each_pattern(p, s, weight, [&](Subset pattern, const auto* row) {
        if (!out.useless) return;
        for (int j = 0; j < nj; ++j) {
          ++out.events_checked;
          if (detail::factorizes(row[1 + j], row[0], cls[j], total)) continue;
          ClassicalCertificate cert;
          for (int x = 0; x < nx; ++x)
            if ((s >> x) & 1u) {
              cert.x.push_back(x);
              cert.y.push_back(int((pattern >> x) & 1u));
            }
          while (int(cert.x.size()) < n) {
            cert.x.push_back(cert.x.front());
            cert.y.push_back(cert.y.front());
          }
          cert.cls = j;
          cert.conditional = detail::as_rational(row[1 + j]) / detail::as_rational(row[0]);
          cert.prior = p.class_prior(j);
          out.useless = false;
          out.certificate = std::move(cert);
          return;
        }
      });
      if (!out.useless) return;
    }
  });
  return out;
}

/// Largest n >= 0 such that n classical queries are useless (capped at |X|).
inline int classical_useless_level(const LearningProblem& p) {
  const ClassicalUselessResult r = classical_useless(p, p.input_count());
  if (r.useless) return p.input_count();
  std::set<int> distinct(r.certificate->x.begin(), r.certificate->x.end());
  return int(distinct.size()) - 1;
}

inline nlohmann::json to_json(const ClassicalUselessResult& r, const LearningProblem& p) {
  nlohmann::json j;
  j["check"] = "classical-useless";
  j["n"] = r.n;
  j["useless"] = r.useless;
  j["events_checked"] = r.events_checked;
  j["evidence"] = "exact";
  if (r.certificate) {
    const auto& c = *r.certificate;
    std::vector<std::string> xs;
    for (int x : c.x) xs.push_back(p.inputs()[x]);
    j["certificate"] = {{"x", xs},
                        {"y", c.y},
                        {"class", p.classes()[c.cls]},
                        {"conditional", to_string(c.conditional)},
                        {"prior", to_string(c.prior)}};
  } else {
    j["certificate"] = nullptr;
  }
  return j;
}

/// (useless generalised queries, minimal query count) when n classical
/// queries are useless in a theory of order k: (floor(n/k), floor(n/k) + 1).
inline std::pair<int, int> useless_bound(int n_classical_useless, int k) {
  require(n_classical_useless >= 0, "useless_bound: n must be non-negative");
  require(k >= 1, "useless_bound: k must be at least 1");
  const int m = n_classical_useless / k;
  return {m, m + 1};
}

// ---------------------------------------------------------------------------
// Query algorithms

/// rho_f = G_n O_f ... G_1 O_f sigma, then measured. The register is the
/// oracle control, optionally tensored with an ancilla on the right.
struct QueryAlgorithm {
  StateVec initial;
  std::vector<TransformMat> interleave;
  Measurement measurement;
  std::vector<int> answer_map;  // outcome -> class index; empty if none

  int queries() const { return int(interleave.size()); }
};

inline void validate_algorithm(const QueryAlgorithm& alg, const OracleSystem& os) {
  const System& sys = alg.initial.system();
  require(sys == os.system() || (sys.is_composite() && sys.left() == os.system()),
          "query algorithm: register " + sys.label() + " does not hold the oracle control " + os.system().label());
  for (std::size_t i = 0; i < alg.interleave.size(); ++i)
    require(alg.interleave[i].in_system() == sys && alg.interleave[i].out_system() == sys,
            "query algorithm: interleave " + std::to_string(i + 1) + " acts on the wrong system");
  require(alg.measurement.system() == sys, "query algorithm: measurement on the wrong system");
  require(alg.answer_map.empty() || alg.answer_map.size() == alg.measurement.size(),
          "query algorithm: answer map does not cover every outcome");
}

inline StateVec query(const OracleSystem& os, int f, const StateVec& s) {
  if (s.system() == os.system()) return apply(os.oracle(f), s);
  return apply_local(os.oracle(f), s, Side::left);
}

/// Oracle index for each problem function, matched by id and checked by values.
inline std::vector<int> match_oracles(const LearningProblem& p, const OracleSystem& os) {
  require(os.domain() == p.inputs(), "run_algorithm: oracle domain differs from the problem inputs");
  std::vector<int> out;
  for (const auto& f : p.functions()) {
    const int g = os.index_of(f.id);
    require(os.functions()[g].values == f.values, "run_algorithm: oracle '" + f.id + "' has different values");
    out.push_back(g);
  }
  return out;
}

inline std::vector<StateVec> run_algorithm(const LearningProblem& p, const OracleSystem& os, const QueryAlgorithm& alg,
                                           const Config& cfg = {}) {
  validate_algorithm(alg, os);
  const std::vector<int> oracle_of = match_oracles(p, os);
  std::vector<StateVec> out;
  for (int f = 0; f < p.function_count(); ++f) {
    StateVec rho = alg.initial;
    for (const TransformMat& g : alg.interleave) rho = apply(g, query(os, oracle_of[f], rho));
    require(rho.is_normalized(cfg.tol * 10), "run_algorithm: output for '" + p.function(f).id + "' is not normalized");
    out.push_back(std::move(rho));
  }
  return out;
}

/// Oracle system with the canonical phase oracles for the problem's functions.
inline OracleSystem build_oracles(const LearningProblem& p, int capacity = 0, Realization r = Realization::phase,
                                  const Config& cfg = {}) {
  return build_phase_oracle_family(p.inputs(), p.bool_functions(), capacity, r, cfg);
}

// ---------------------------------------------------------------------------
// Posteriors

inline constexpr double kExcludeBelow = 1e-12;

struct OutcomeRow {
  double probability = 0.0;
  std::vector<double> posterior;  // over classes; empty when excluded
  bool excluded = false;
};

struct PosteriorReport {
  std::vector<double> prior;
  std::vector<OutcomeRow> outcomes;
  std::vector<std::vector<double>> joint;  // mu(s, f), [outcome][function]
  double max_deviation = 0.0;
  int excluded_outcomes = 0;
};

/// mu(s, f) = (s|rho_f) mu(f), normalized per outcome and summed per class.
inline PosteriorReport posterior(const LearningProblem& p, const std::vector<StateVec>& states, const Measurement& m) {
  require(int(states.size()) == p.function_count(), "posterior: need one output state per function");
  PosteriorReport r;
  const int nj = p.class_count();
  for (int j = 0; j < nj; ++j) r.prior.push_back(p.class_prior(j).convert_to<double>());
  std::vector<double> mu;
  for (const auto& f : p.functions()) mu.push_back(f.weight.convert_to<double>());
  for (std::size_t s = 0; s < m.size(); ++s) {
    OutcomeRow row;
    std::vector<double> likelihood, joint;
    for (int f = 0; f < p.function_count(); ++f) {
      likelihood.push_back(probability(m[s], states[f]));
      joint.push_back(likelihood.back() * mu[f]);
      row.probability += joint.back();
    }
    r.joint.push_back(joint);
    if (row.probability < kExcludeBelow) {
      row.excluded = true;
      ++r.excluded_outcomes;
      r.outcomes.push_back(std::move(row));
      continue;
    }
    // A likelihood that does not depend on f carries no information; return
    // the prior itself rather than a rounded copy of it.
    const bool flat = std::all_of(likelihood.begin(), likelihood.end(), [&](double l) { return l == likelihood[0]; });
    if (flat) {
      row.posterior = r.prior;
    } else {
      row.posterior.assign(nj, 0.0);
      for (int f = 0; f < p.function_count(); ++f) row.posterior[p.class_of(f)] += joint[f] / row.probability;
    }
    for (int j = 0; j < nj; ++j) r.max_deviation = std::max(r.max_deviation, std::abs(row.posterior[j] - r.prior[j]));
    r.outcomes.push_back(std::move(row));
  }
  return r;
}

/// Probability that the answer map names f's class, per function.
inline std::vector<double> success_probabilities(const LearningProblem& p, const std::vector<StateVec>& states,
                                                 const QueryAlgorithm& alg) {
  require(!alg.answer_map.empty(), "success_probabilities: algorithm has no answer map");
  std::vector<double> out;
  for (int f = 0; f < p.function_count(); ++f) {
    double total = 0.0;
    for (std::size_t s = 0; s < alg.measurement.size(); ++s)
      if (alg.answer_map[s] == p.class_of(f)) total += probability(alg.measurement[s], states[f]);
    out.push_back(total);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Sampled generalised uselessness

struct SampleOptions {
  int ancilla = 2;      // ancilla dimension; 1 means none
  double tol = 1e-7;    // pass threshold on the maximal deviation
  int threads = 1;
};

struct SampleReport {
  int n = 0;
  int k = 2;
  int samples = 0;
  double max_deviation = 0.0;
  long long excluded_outcomes = 0;
  double tolerance = 0.0;
  std::uint64_t seed = 0;
  bool pass() const { return max_deviation < tolerance; }
};

/// One random n-query algorithm: Haar-random pure sigma, Haar-random unitary
/// interleaves and a Haar-rotated rank-1 projective measurement on the
/// control (x) ancilla register.
inline QueryAlgorithm random_algorithm(const OracleSystem& os, int n, int ancilla, Rng& rng) {
  const System sys = ancilla > 1 ? System::composite(os.system(), System::quantum(ancilla)) : os.system();
  const int h = sys.hilbert_dim();
  QueryAlgorithm alg{StateVec::from_ket(sys, haar_ket(h, rng)), {}, Measurement(sys, {}), {}};
  for (int i = 0; i < n; ++i) alg.interleave.push_back(TransformMat::conjugation(sys, haar_unitary(h, rng)));
  alg.measurement = Measurement::projective(sys, haar_unitary(h, rng));
  return alg;
}

namespace detail {
// Runs body(t) for t in [0, count) on up to `threads` workers. Results are
// written per index by the caller, so the outcome does not depend on timing.
template <typename F>
void parallel_for(int count, int threads, F&& body) {
  threads = std::max(1, std::min(threads, count));
  if (threads == 1) {
    for (int t = 0; t < count; ++t) body(t);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(threads);
  for (int w = 0; w < threads; ++w)
    pool.emplace_back([&, w] {
      try {
        for (int t = w; t < count; t += threads) body(t);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}
}  // namespace detail

/// Statistical evidence only: the maximal |posterior - prior| over sampled
/// algorithms and their outcomes.
inline SampleReport generalized_useless_sample(const LearningProblem& p, const OracleSystem& os, int n, int samples,
                                               std::uint64_t seed, const SampleOptions& opt = {}) {
  require(n >= 0, "generalized_useless_sample: negative query count");
  require(samples >= 0, "generalized_useless_sample: negative sample count");
  require(opt.ancilla >= 1, "generalized_useless_sample: ancilla dimension must be positive");
  SampleReport r{n, 2, samples, 0.0, 0, opt.tol, seed};
  std::vector<double> deviation(samples, 0.0);
  std::vector<int> excluded(samples, 0);
  detail::parallel_for(samples, opt.threads, [&](int t) {
    Rng rng(derive_seed(seed, std::uint64_t(t)));
    const QueryAlgorithm alg = random_algorithm(os, n, opt.ancilla, rng);
    const PosteriorReport post = posterior(p, run_algorithm(p, os, alg), alg.measurement);
    deviation[t] = post.max_deviation;
    excluded[t] = post.excluded_outcomes;
  });
  for (int t = 0; t < samples; ++t) {
    r.max_deviation = std::max(r.max_deviation, deviation[t]);
    r.excluded_outcomes += excluded[t];
  }
  return r;
}

inline nlohmann::json to_json(const SampleReport& r) {
  return {{"check", "generalized-useless-sample"},
          {"evidence", "statistical"},
          {"n", r.n},
          {"k", r.k},
          {"samples", r.samples},
          {"max_deviation", r.max_deviation},
          {"excluded_outcomes", r.excluded_outcomes},
          {"tolerance", r.tolerance},
          {"pass", r.pass()},
          {"seed", r.seed}};
}

// ---------------------------------------------------------------------------
// Parity by repeated Deutsch

struct ParityAlgorithm {
  QueryAlgorithm algorithm;
  OracleSystem oracles;
  /// Control-level pairs queried in order; the null level stands in for the
  /// missing partner when N is odd.
  std::vector<std::pair<int, int>> pairs;
};

/// ceil(N/2) queries on one register. The state (|a_i> + |b_i>)/sqrt2 picks
/// up (-1)^{f(a_i)} and (-1)^{f(b_i)}; the interleave moves it to the next
/// pair, so the relative sign ends up as (-1)^{parity(f)}. A +/- measurement
/// on the first pair reads it out. Odd N pairs the last input with the null
/// level, where every oracle acts trivially.
inline ParityAlgorithm deutsch_parity_algorithm(int n, const Config& cfg = {}) {
  const LearningProblem p = parity_problem(n);
  const bool odd = n % 2 == 1;
  const int levels = odd ? n + 1 : n;
  OracleSystem os = build_oracles(p, levels, Realization::phase, cfg);
  if (odd) os = add_null_query(os, cfg);
  const System sys = os.system();
  const int m = levels / 2;

  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i < m; ++i) pairs.push_back({2 * i, 2 * i + 1});
  std::vector<int> shift(levels);  // pair i -> pair i+1 (mod m)
  for (int i = 0; i < m; ++i) {
    shift[pairs[i].first] = pairs[(i + 1) % m].first;
    shift[pairs[i].second] = pairs[(i + 1) % m].second;
  }
  const TransformMat g = TransformMat::permutation(sys, shift);

  const double r = 1.0 / std::sqrt(2.0);
  CVector plus = CVector::Zero(levels), minus = CVector::Zero(levels);
  plus(0) = plus(1) = r;
  minus(0) = r;
  minus(1) = -r;
  std::vector<EffectVec> effects{EffectVec::from_operator(sys, plus * plus.adjoint()),
                                 EffectVec::from_operator(sys, minus * minus.adjoint())};
  std::vector<int> answer{0, 1};  // classes: "even" is 0, "odd" is 1
  if (levels > 2) {
    CMatrix rest = CMatrix::Identity(levels, levels);
    rest(0, 0) = rest(1, 1) = 0.0;
    effects.push_back(EffectVec::from_operator(sys, rest));
    answer.push_back(0);
  }
  QueryAlgorithm alg{StateVec::from_ket(sys, plus), std::vector<TransformMat>(m, g), Measurement(sys, std::move(effects)),
                     std::move(answer)};
  require(p.classes()[0] == "even", "deutsch_parity_algorithm: unexpected class order");
  return {std::move(alg), std::move(os), std::move(pairs)};
}

}  // namespace gptlab
