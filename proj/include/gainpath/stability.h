#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "gainpath/operators.h"
#include "gainpath/plus_vector.h"
#include "gainpath/scalar_fn.h"

namespace gainpath {

/// Iteration defaults shared by the fixed-point routines.
inline constexpr double kDefaultTol = 1e-10;
inline constexpr int kDefaultKmax = 100000;
inline constexpr double kDivergenceGuard = 1e12;
/// Relative slack used when a witness is re-checked by direct evaluation.
inline constexpr double kWitnessTol = 1e-12;

/// Which monotone map drives s(k+1) = T(s(k)).
struct OperatorKind {
  enum class Type { kGamma, kGammaHat, kGammaR, kScaled };

  Type type = Type::kGamma;
  double r = 0.0;
  ScalarFn f;
  ScalingMode mode = ScalingMode::kPostCompose;

  static OperatorKind Gamma() { return {}; }
  static OperatorKind GammaHat() { return {Type::kGammaHat, 0.0, {}, {}}; }
  static OperatorKind GammaR(double r) { return {Type::kGammaR, r, {}, {}}; }
  static OperatorKind Scaled(ScalarFn f, ScalingMode mode) {
    return {Type::kScaled, 0.0, std::move(f), mode};
  }

  std::string describe() const;
};

/// Evaluates T(s) for the given kind.
PlusVector apply(const GainOperator& op, const OperatorKind& kind,
                 const PlusVector& s);

struct Trajectory {
  OperatorKind kind;
  std::vector<PlusVector> states;
  bool converged = false;
  bool overflowed = false;
  std::optional<PlusVector> limit;
  int iterations = 0;
};

/// Iterates T from s0 until ||s(k+1) - s(k)||_inf <= tol or k = kmax.
/// Stops early with overflowed = true once ||s(k)||_inf exceeds the guard.
Trajectory simulate(const GainOperator& op, const OperatorKind& kind,
                    const PlusVector& s0, int kmax = kDefaultKmax,
                    double tol = kDefaultTol);

enum class Property {
  kUgs,
  kUgas,
  kUges,
  kSgc,
  kUniformSgc,
  kMbi,
  kOplusMbi,
  kMaxRobustSgc,
  kPointOfDecay,
  kOrderContraction,
};

enum class Verdict {
  kExactPass,
  kNotFalsified,
  kInconclusive,
  kImpliedByTheorem,
  kFalsified,
};

const char* to_string(Property p);
const char* to_string(Verdict v);

struct Witness {
  std::optional<PlusVector> s;
  /// Second vector: b for (s, b) witnesses, s2 for ordered pairs.
  std::optional<PlusVector> b;
  std::optional<std::size_t> i;
  std::optional<std::size_t> j;
  /// Threshold or level attached to the violation.
  std::optional<double> t;
  std::optional<int> k;
  std::optional<OperatorKind> kind;
  /// omega for max-robust SGC witnesses.
  std::optional<ScalarFn> f;
};

struct Estimate {
  /// phi, eta or similar comparison-function estimate.
  std::optional<ScalarFn> function;
  /// Spectral radius, contraction constant, or another scalar.
  std::optional<double> scalar;
  /// UGES constants: ||Gamma^k|| <= M rate^k.
  std::optional<double> m;
  std::optional<double> rate;
  /// (level, value) samples backing the estimate.
  std::vector<std::pair<double, double>> samples;
  /// First index k at which a finite witness succeeded.
  std::optional<int> index;
};

struct Budget {
  long samples = 0;
  long iterations = 0;
};

struct Certificate {
  Property property = Property::kSgc;
  Verdict verdict = Verdict::kInconclusive;
  std::optional<Witness> witness;
  Estimate estimate;
  Budget budget;
  std::uint64_t seed = 0;
  std::vector<std::string> notes;

  bool falsified() const { return verdict == Verdict::kFalsified; }
};

/// Re-checks a falsified certificate's witness by direct evaluation. Returns
/// false for certificates without a witness or whose witness does not show a
/// violation.
bool replay_witness(const GainOperator& op, const Certificate& cert);

/// Test vectors of sup-norm `level`: the constant vector, k-sparse spikes for
/// k in {1, n/10, n/2}, then componentwise uniform vectors rescaled to the
/// level. Returns `count` vectors (at least one).
std::vector<PlusVector> sample_level(std::size_t n, double level, int count,
                                     std::mt19937_64& rng);

/// Upper limit of the nondecreasing Gamma-hat trajectory from s. Throws
/// ConvergenceError on overflow or when kmax is exhausted. When phi is given,
/// the result is checked against ||s*|| <= phi(||s||) (ConsistencyError).
PlusVector compute_qhat(const GainOperator& op, const PlusVector& s,
                        int kmax = kDefaultKmax, double tol = kDefaultTol,
                        const ScalarFn* phi = nullptr);

/// Exact-pass iff Gamma(s) <= s + tol 1. Throws DomainError for s = 0.
Certificate check_point_of_decay(const GainOperator& op, const PlusVector& s,
                                 double tol = 0.0);

/// Sampled UGS envelope phi for the chosen operator kind.
Certificate estimate_ugs_phi(const GainOperator& op, const OperatorKind& kind,
                             const std::vector<double>& levels,
                             int samples_per_level, int kmax = kDefaultKmax,
                             std::uint64_t seed = 0);

/// Spectral radius of a linear additive operator by Perron power iteration
/// with Collatz-Wielandt bracketing.
Certificate certify_uges_linear(const GainOperator& op);

/// Finite-witness check of inf_k ||Gamma^k(1)|| < 1 for linear gains.
Certificate certify_homogeneous(const GainOperator& op, int nmax);

/// Searches for s != 0 with Gamma(s) >= s.
Certificate check_sgc_sample(const GainOperator& op, int budget,
                             std::uint64_t seed = 0);

/// Sampled eta(t) = min_{||s||=t} max_i max(0, s_i - Gamma_i(s)).
Certificate estimate_uniform_sgc_eta(const GainOperator& op,
                                     const std::vector<double>& levels,
                                     int samples_per_level,
                                     std::uint64_t seed = 0);

/// Sampled phi(t) = max ||s|| over the maximal solutions of s <= Gamma(s) (+) b.
Certificate estimate_oplus_mbi_phi(const GainOperator& op,
                                   const std::vector<double>& levels,
                                   int samples_per_level,
                                   int kmax = kDefaultKmax,
                                   std::uint64_t seed = 0);

/// Replays an oplus-MBI certificate's (s, b) witness as an MBI check:
/// s <= Gamma(s) (+) b implies (id - Gamma)(s) <= b.
Certificate mbi_from_oplus_witness(const GainOperator& op,
                                   const Certificate& oplus_mbi);

/// MBI via a UGES certificate of the omega-scaled operator with linear omega,
/// subadditive MAFs and bounded #I_i. Never samples.
Certificate mbi_by_uges_route(const GainOperator& op, double omega_slope = 1.0 - 1e-3);

/// Max-type only: searches for s != 0, i, j with Gamma(s) (+) omega(s_j) e_i >= s.
Certificate check_max_robust_sgc(const GainOperator& op, const ScalarFn& omega,
                                 int budget, std::uint64_t seed = 0);

enum class Direction { kBackward, kForward };

struct DecayIndexEntry {
  /// s_i >= alpha.
  bool applicable = false;
  std::optional<std::size_t> witness;
};

/// For each node with s_i >= alpha (default ||s||/2), some j in N-+_i(horizon)
/// with Gamma_j(s) < omega(s_j).
std::vector<DecayIndexEntry> check_decay_index(
    const GainOperator& op, const PlusVector& s, int horizon,
    const ScalarFn& omega, Direction direction,
    std::optional<double> alpha = std::nullopt);

struct FixedPointSet {
  std::vector<PlusVector> points;
  /// Index sets whose linear system was singular or whose iteration failed.
  std::vector<std::vector<std::size_t>> unsolved;
};

/// All fixed points of Gamma_r for additive operators with linear or
/// piecewise-linear gains and n <= 12, by enumerating the active index set
/// {i : Gamma_i(s) > r}.
FixedPointSet enumerate_fixed_points_sumtype(const GainOperator& op, double r);

/// Log-spaced levels over [lo, hi] with the given number of points.
std::vector<double> log_levels(double lo, double hi, int points);

}  // namespace gainpath
