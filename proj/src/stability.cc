#include "gainpath/stability.h"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <sstream>

#include <Eigen/LU>

#include "gainpath/errors.h"
#include "gainpath/graph.h"

namespace gainpath {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kRateMargin = 1e-9;
constexpr double kMbiStart = 1e10;
constexpr double kMbiThreshold = 1e9;

void require_scaling(const GainOperator& op, const OperatorKind& kind) {
  if (kind.type == OperatorKind::Type::kScaled) {
    (void)op.scaled(kind.f, kind.mode, PlusVector::Zeros(op.size()));
  }
  if (kind.type == OperatorKind::Type::kGammaR && !(kind.r >= 0.0)) {
    throw DomainError("Gamma_r needs r >= 0");
  }
}

// T(s) without re-validating the scaling function.
PlusVector apply_unchecked(const GainOperator& op, const OperatorKind& kind,
                           const PlusVector& s) {
  switch (kind.type) {
    case OperatorKind::Type::kGamma:
      return op.gamma(s);
    case OperatorKind::Type::kGammaHat:
      return op.gamma_hat(s);
    case OperatorKind::Type::kGammaR:
      return op.gamma_r(kind.r, s);
    case OperatorKind::Type::kScaled: {
      std::vector<double> out = op.gamma(s).data();
      if (kind.mode == ScalingMode::kPreInverse) {
        for (double& v : out) v = kind.f.inverse(v);
      } else {
        for (double& v : out) v += kind.f(v);
      }
      return PlusVector(std::move(out));
    }
  }
  return s;
}

struct RunStats {
  double max_norm = 0.0;
  bool overflow = false;
  int overflow_step = 0;
  int iterations = 0;
};

// Runs a trajectory keeping only a short history, stopping at convergence,
// at an exact short cycle, at overflow, or at kmax.
RunStats run_trajectory(const GainOperator& op, const OperatorKind& kind,
                        const PlusVector& s0, int kmax, double tol) {
  constexpr std::size_t kCycleWindow = 8;
  RunStats stats;
  stats.max_norm = s0.sup_norm();
  std::deque<PlusVector> history{s0};
  PlusVector cur = s0;
  for (int k = 1; k <= kmax; ++k) {
    PlusVector next = apply_unchecked(op, kind, cur);
    stats.iterations = k;
    const double norm = next.sup_norm();
    stats.max_norm = std::max(stats.max_norm, norm);
    if (!(norm <= kDivergenceGuard)) {
      stats.overflow = true;
      stats.overflow_step = k;
      return stats;
    }
    if (sup_distance(next, cur) <= tol) return stats;
    if (std::find(history.begin(), history.end(), next) != history.end()) {
      return stats;
    }
    history.push_back(next);
    if (history.size() > kCycleWindow) history.pop_front();
    cur = std::move(next);
  }
  return stats;
}

// Strictly increasing piecewise-linear upper envelope through the observed
// maxima: y_k = max(obs_k, y_{k-1} t_k / t_{k-1}).
ScalarFn envelope_from(const std::vector<std::pair<double, double>>& samples) {
  std::vector<ScalarFn::Point> points{{0.0, 0.0}};
  double prev_t = 0.0;
  double prev_y = 0.0;
  for (const auto& [t, obs] : samples) {
    double y = obs;
    if (prev_t > 0.0) y = std::max(y, prev_y * t / prev_t);
    if (!(y > prev_y)) y = std::nextafter(prev_y, kInf);
    points.push_back({t, y});
    prev_t = t;
    prev_y = y;
  }
  return ScalarFn::PiecewiseLinear(std::move(points));
}

void require_levels(const std::vector<double>& levels) {
  if (levels.empty()) throw DomainError("levels must be nonempty");
  double prev = 0.0;
  for (double t : levels) {
    if (!(t > prev)) throw DomainError("levels must be positive and increasing");
    prev = t;
  }
}

bool dominates(const PlusVector& big, const PlusVector& small) {
  // big >= small up to the witness slack.
  const double slack = kWitnessTol * small.sup_norm();
  for (std::size_t i = 0; i < big.size(); ++i) {
    if (big[i] < small[i] - slack) return false;
  }
  return true;
}

// Candidate from the limit of Gamma^n(Q(s)), which decreases towards a fixed
// point of Gamma. Returns nullopt when the Gamma-hat limit does not exist.
std::optional<PlusVector> descent_candidate(const GainOperator& op,
                                            const PlusVector& s, long& iters) {
  try {
    PlusVector q = compute_qhat(op, s, 2000, 0.0);
    for (int k = 0; k < 2000; ++k) {
      PlusVector next = op.gamma(q);
      ++iters;
      if (sup_distance(next, q) <= 1e-15 * q.sup_norm()) return next;
      q = std::move(next);
    }
    return q;
  } catch (const ConvergenceError&) {
    return std::nullopt;
  }
}

double log_uniform(std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
  return std::exp(u(rng));
}

}  // namespace

std::string OperatorKind::describe() const {
  std::ostringstream out;
  out.precision(17);
  switch (type) {
    case Type::kGamma:
      out << "gamma";
      break;
    case Type::kGammaHat:
      out << "gamma-hat";
      break;
    case Type::kGammaR:
      out << "gamma-r(" << r << ")";
      break;
    case Type::kScaled:
      out << "scaled(" << f.describe() << ","
          << (mode == ScalingMode::kPreInverse ? "pre-inverse" : "post-compose")
          << ")";
      break;
  }
  return out.str();
}

PlusVector apply(const GainOperator& op, const OperatorKind& kind,
                 const PlusVector& s) {
  require_scaling(op, kind);
  return apply_unchecked(op, kind, s);
}

Trajectory simulate(const GainOperator& op, const OperatorKind& kind,
                    const PlusVector& s0, int kmax, double tol) {
  if (kmax < 1) throw DomainError("kmax must be at least 1");
  if (!(tol >= 0.0)) throw DomainError("tol must be nonnegative");
  if (s0.size() != op.size()) throw DimensionError("initial state has wrong length");
  require_scaling(op, kind);
  Trajectory traj;
  traj.kind = kind;
  traj.states.push_back(s0);
  for (int k = 0; k < kmax; ++k) {
    PlusVector next = apply_unchecked(op, kind, traj.states.back());
    traj.iterations = k + 1;
    const bool overflow = !(next.sup_norm() <= kDivergenceGuard);
    const double step = sup_distance(next, traj.states.back());
    traj.states.push_back(std::move(next));
    if (overflow) {
      traj.overflowed = true;
      return traj;
    }
    if (step <= tol) {
      traj.converged = true;
      traj.limit = traj.states.back();
      return traj;
    }
  }
  return traj;
}

const char* to_string(Property p) {
  switch (p) {
    case Property::kUgs:
      return "UGS";
    case Property::kUgas:
      return "UGAS";
    case Property::kUges:
      return "UGES";
    case Property::kSgc:
      return "SGC";
    case Property::kUniformSgc:
      return "uniform-SGC";
    case Property::kMbi:
      return "MBI";
    case Property::kOplusMbi:
      return "oplus-MBI";
    case Property::kMaxRobustSgc:
      return "max-robust-SGC";
    case Property::kPointOfDecay:
      return "point-of-decay";
    case Property::kOrderContraction:
      return "order-contraction";
  }
  return "?";
}

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::kExactPass:
      return "exact-pass";
    case Verdict::kNotFalsified:
      return "not-falsified";
    case Verdict::kInconclusive:
      return "inconclusive";
    case Verdict::kImpliedByTheorem:
      return "implied-by-theorem";
    case Verdict::kFalsified:
      return "falsified";
  }
  return "?";
}

bool replay_witness(const GainOperator& op, const Certificate& cert) {
  if (!cert.falsified() || !cert.witness) return false;
  const Witness& w = *cert.witness;
  try {
    switch (cert.property) {
      case Property::kSgc:
      case Property::kUniformSgc: {
        if (!w.s || w.s->is_zero()) return false;
        return dominates(op.gamma(*w.s), *w.s);
      }
      case Property::kOplusMbi:
      case Property::kMbi: {
        if (!w.s || !w.b || !w.t) return false;
        const PlusVector& s = *w.s;
        const PlusVector g = op.gamma(s);
        const double slack = kWitnessTol * (1.0 + s.sup_norm());
        for (std::size_t i = 0; i < s.size(); ++i) {
          const double rhs = cert.property == Property::kOplusMbi
                                 ? std::max(g[i], (*w.b)[i])
                                 : g[i] + (*w.b)[i];
          if (s[i] > rhs + slack) return false;
        }
        return s.sup_norm() > *w.t;
      }
      case Property::kUgs:
      case Property::kUgas: {
        if (!w.s || !w.k || !w.kind) return false;
        PlusVector cur = *w.s;
        for (int k = 0; k < *w.k; ++k) {
          cur = apply(op, *w.kind, cur);
          if (!(cur.sup_norm() <= kDivergenceGuard)) return true;
        }
        return false;
      }
      case Property::kUges: {
        if (!w.s || w.s->is_zero()) return false;
        return dominates(op.gamma(*w.s), w.s->scaled(1.0 - kRateMargin));
      }
      case Property::kMaxRobustSgc: {
        if (!w.s || !w.i || !w.j || !w.f || w.s->is_zero()) return false;
        const PlusVector& s = *w.s;
        const PlusVector lhs =
            oplus(op.gamma(s), PlusVector::Unit(s.size(), *w.i, (*w.f)(s[*w.j])));
        return dominates(lhs, s);
      }
      case Property::kPointOfDecay: {
        if (!w.s || !w.i) return false;
        return op.component(*w.i, *w.s) > (*w.s)[*w.i] + w.t.value_or(0.0);
      }
      case Property::kOrderContraction: {
        if (!w.s || !w.b || !w.k || !leq(*w.s, *w.b)) return false;
        const double den = sup_distance(*w.b, *w.s);
        if (den == 0.0) return false;
        const double num = sup_distance(op.gamma_power(*w.b, *w.k),
                                        op.gamma_power(*w.s, *w.k));
        return num / den >= 1.0 - kRateMargin;
      }
    }
  } catch (const Error&) {
    return false;
  }
  return false;
}

std::vector<PlusVector> sample_level(std::size_t n, double level, int count,
                                     std::mt19937_64& rng) {
  std::vector<PlusVector> out;
  count = std::max(count, 1);
  out.push_back(PlusVector::Constant(n, level));
  std::vector<std::size_t> ks;
  for (std::size_t k : {std::size_t{1}, n / 10, n / 2}) {
    if (k >= 1 && k < n && std::find(ks.begin(), ks.end(), k) == ks.end()) {
      ks.push_back(k);
    }
  }
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  for (std::size_t k : ks) {
    if (static_cast<int>(out.size()) >= count) break;
    std::shuffle(idx.begin(), idx.end(), rng);
    std::vector<double> v(n, 0.0);
    for (std::size_t m = 0; m < k; ++m) v[idx[m]] = level;
    out.emplace_back(std::move(v));
  }
  std::uniform_real_distribution<double> u(0.0, 1.0);
  while (static_cast<int>(out.size()) < count) {
    std::vector<double> v(n);
    double top = 0.0;
    for (double& x : v) {
      x = u(rng);
      top = std::max(top, x);
    }
    if (top == 0.0) {
      out.push_back(PlusVector::Constant(n, level));
      continue;
    }
    for (double& x : v) x = x / top * level;
    // Pin the maximum exactly at the level.
    *std::max_element(v.begin(), v.end()) = level;
    out.emplace_back(std::move(v));
  }
  out.resize(static_cast<std::size_t>(count), PlusVector::Constant(n, level));
  return out;
}

std::vector<double> log_levels(double lo, double hi, int points) {
  if (!(lo > 0.0) || !(hi >= lo) || points < 1) {
    throw DomainError("log_levels needs 0 < lo <= hi and points >= 1");
  }
  std::vector<double> out;
  if (points == 1) return {lo};
  const double step = std::log(hi / lo) / (points - 1);
  for (int k = 0; k < points; ++k) out.push_back(lo * std::exp(step * k));
  out.back() = hi;
  return out;
}

PlusVector compute_qhat(const GainOperator& op, const PlusVector& s, int kmax,
                        double tol, const ScalarFn* phi) {
  if (s.size() != op.size()) throw DimensionError("vector has wrong length");
  PlusVector cur = s;
  for (int k = 0; k < kmax; ++k) {
    PlusVector next = op.gamma_hat(cur);
    if (!(next.sup_norm() <= kDivergenceGuard)) {
      throw ConvergenceError(ConvergenceError::Reason::kOverflow,
                             "Gamma-hat trajectory exceeded the divergence guard");
    }
    if (sup_distance(next, cur) <= tol) {
      if (phi && next.sup_norm() > (*phi)(s.sup_norm()) * (1.0 + 1e-9)) {
        throw ConsistencyError("Q-hat(s) exceeds the supplied UGS bound phi");
      }
      return next;
    }
    cur = std::move(next);
  }
  throw ConvergenceError(ConvergenceError::Reason::kUnboundedGrowth,
                         "Gamma-hat trajectory did not converge within kmax");
}

Certificate check_point_of_decay(const GainOperator& op, const PlusVector& s,
                                 double tol) {
  if (s.size() != op.size()) throw DimensionError("vector has wrong length");
  if (s.is_zero()) throw DomainError("a point of decay must be nonzero");
  Certificate cert;
  cert.property = Property::kPointOfDecay;
  cert.verdict = Verdict::kExactPass;
  cert.budget.samples = 1;
  const PlusVector g = op.gamma(s);
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (g[i] > s[i] + tol) {
      cert.verdict = Verdict::kFalsified;
      Witness w;
      w.s = s;
      w.i = i;
      w.t = tol;
      cert.witness = w;
      break;
    }
  }
  return cert;
}

Certificate estimate_ugs_phi(const GainOperator& op, const OperatorKind& kind,
                             const std::vector<double>& levels,
                             int samples_per_level, int kmax,
                             std::uint64_t seed) {
  require_levels(levels);
  require_scaling(op, kind);
  Certificate cert;
  cert.property = Property::kUgs;
  cert.seed = seed;
  cert.notes.push_back("operator " + kind.describe());
  std::mt19937_64 rng(seed);
  for (double t : levels) {
    double worst = 0.0;
    for (const PlusVector& s0 : sample_level(op.size(), t, samples_per_level, rng)) {
      const RunStats stats = run_trajectory(op, kind, s0, kmax, kDefaultTol);
      ++cert.budget.samples;
      cert.budget.iterations += stats.iterations;
      if (stats.overflow) {
        cert.verdict = Verdict::kFalsified;
        Witness w;
        w.s = s0;
        w.k = stats.overflow_step;
        w.kind = kind;
        w.t = kDivergenceGuard;
        cert.witness = w;
        cert.estimate.samples.emplace_back(t, kInf);
        return cert;
      }
      worst = std::max(worst, stats.max_norm);
    }
    cert.estimate.samples.emplace_back(t, worst);
  }
  cert.verdict = Verdict::kNotFalsified;
  cert.estimate.function = envelope_from(cert.estimate.samples);
  return cert;
}

Certificate certify_uges_linear(const GainOperator& op) {
  const Eigen::MatrixXd a = op.matrix();
  const auto n = static_cast<std::size_t>(a.rows());
  Certificate cert;
  cert.property = Property::kUges;

  struct Entry {
    std::size_t i, j;
    double w;
  };
  std::vector<Entry> entries;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double w = a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      if (w != 0.0) entries.push_back({i, j, w});
    }
  }
  auto multiply = [&](const std::vector<double>& x) {
    std::vector<double> y(n, 0.0);
    for (const auto& e : entries) y[e.i] += e.w * x[e.j];
    return y;
  };

  // Power iteration on A + I keeps x strictly positive, and the Perron root
  // of A + I strictly dominates every other eigenvalue in modulus.
  constexpr int kMaxIterations = 200000;
  std::vector<double> x(n, 1.0);
  std::vector<double> support = x;
  double lower = 0.0;
  double upper = kInf;
  double previous_upper = kInf;
  int stagnant = 0;
  int it = 0;
  for (; it < kMaxIterations; ++it) {
    const std::vector<double> y = multiply(x);
    upper = 0.0;
    for (std::size_t i = 0; i < n; ++i) upper = std::max(upper, y[i] / x[i]);
    // The lower bound holds for any nonnegative x over its support, so
    // components that have died out (reducible A) are dropped.
    support = x;
    for (double& v : support) {
      if (v < 1e-9) v = 0.0;
    }
    const std::vector<double> ys = multiply(support);
    lower = kInf;
    for (std::size_t i = 0; i < n; ++i) {
      if (support[i] > 0.0) lower = std::min(lower, ys[i] / support[i]);
    }
    if (n == 0) lower = upper = 0.0;
    if (upper - lower <= 1e-12 * std::max(1.0, upper)) break;
    stagnant = std::abs(upper - previous_upper) <= 1e-15 * std::max(1.0, upper)
                   ? stagnant + 1
                   : 0;
    if (stagnant >= 200) break;
    previous_upper = upper;
    double top = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += y[i];
      top = std::max(top, x[i]);
    }
    for (double& v : x) v = std::max(v / top, 1e-300);
  }
  cert.budget.iterations = it + 1;

  const double radius = upper;
  cert.estimate.scalar = radius;
  cert.notes.push_back("Collatz-Wielandt bracket [" + std::to_string(lower) +
                       ", " + std::to_string(upper) + "]");

  const double rate = radius + kRateMargin;
  double m = 1.0;
  std::vector<double> v(n, 1.0);
  double scale = 1.0;
  for (std::size_t k = 1; k <= 2 * n; ++k) {
    v = multiply(v);
    scale *= rate;
    const double norm = v.empty() ? 0.0 : *std::max_element(v.begin(), v.end());
    if (norm == 0.0) break;
    m = std::max(m, norm / scale);
  }
  cert.estimate.m = m;
  cert.estimate.rate = rate;

  if (upper < 1.0 - kRateMargin) {
    cert.verdict = Verdict::kExactPass;
  } else if (lower >= 1.0 - kRateMargin) {
    cert.verdict = Verdict::kFalsified;
    Witness w;
    w.s = PlusVector(support);
    cert.witness = w;
  } else {
    cert.verdict = Verdict::kInconclusive;
  }
  return cert;
}

Certificate certify_homogeneous(const GainOperator& op, int nmax) {
  if (!op.is_homogeneous_subadditive()) {
    throw WrongClassError("homogeneous certificate needs linear gains");
  }
  if (nmax < 1) throw DomainError("nmax must be at least 1");
  Certificate cert;
  cert.property = Property::kUges;
  cert.verdict = Verdict::kInconclusive;
  PlusVector v = PlusVector::Ones(op.size());
  double best = kInf;
  for (int k = 1; k <= nmax; ++k) {
    v = op.gamma(v);
    ++cert.budget.iterations;
    const double norm = v.sup_norm();
    cert.estimate.samples.emplace_back(k, norm);
    best = std::min(best, norm);
    if (norm < 1.0) {
      cert.verdict = Verdict::kExactPass;
      cert.estimate.index = k;
      cert.estimate.scalar = norm;
      return cert;
    }
  }
  cert.estimate.scalar = best;
  cert.notes.push_back("min_k ||Gamma^k(1)|| >= 1 up to k = " +
                       std::to_string(nmax));
  return cert;
}

Certificate check_sgc_sample(const GainOperator& op, int budget,
                             std::uint64_t seed) {
  if (budget < 1) throw DomainError("budget must be at least 1");
  Certificate cert;
  cert.property = Property::kSgc;
  cert.verdict = Verdict::kNotFalsified;
  cert.seed = seed;
  const std::size_t n = op.size();
  std::mt19937_64 rng(seed);

  auto test = [&](const PlusVector& s) {
    ++cert.budget.samples;
    if (s.is_zero() || !dominates(op.gamma(s), s)) return false;
    cert.verdict = Verdict::kFalsified;
    Witness w;
    w.s = s;
    cert.witness = w;
    return true;
  };

  for (double c : {1.0, 1e-3, 1e-2, 0.1, 10.0, 100.0, 1000.0}) {
    if (cert.budget.samples >= budget) return cert;
    if (test(PlusVector::Constant(n, c))) return cert;
  }
  while (cert.budget.samples < budget) {
    const double level = log_uniform(rng, 1e-3, 1e3);
    const PlusVector s = sample_level(n, level, 4, rng).back();
    if (test(s)) return cert;
    if (cert.budget.samples % 4 == 0 && cert.budget.samples < budget) {
      if (auto cand = descent_candidate(op, s, cert.budget.iterations)) {
        if (test(*cand)) return cert;
      }
    }
  }
  return cert;
}

Certificate estimate_uniform_sgc_eta(const GainOperator& op,
                                     const std::vector<double>& levels,
                                     int samples_per_level, std::uint64_t seed) {
  require_levels(levels);
  Certificate cert;
  cert.property = Property::kUniformSgc;
  cert.seed = seed;
  std::mt19937_64 rng(seed);
  for (double t : levels) {
    double best = kInf;
    std::optional<PlusVector> arg;
    for (const PlusVector& s : sample_level(op.size(), t, samples_per_level, rng)) {
      ++cert.budget.samples;
      const PlusVector g = op.gamma(s);
      double dist = 0.0;
      for (std::size_t i = 0; i < s.size(); ++i) {
        dist = std::max(dist, s[i] - g[i]);
      }
      if (dist < best) {
        best = dist;
        arg = s;
      }
    }
    cert.estimate.samples.emplace_back(t, best);
    if (best <= kWitnessTol * t && !cert.witness) {
      Witness w;
      w.s = *arg;
      w.t = t;
      cert.witness = w;
    }
  }
  if (cert.witness) {
    cert.verdict = Verdict::kFalsified;
    return cert;
  }
  cert.verdict = Verdict::kNotFalsified;
  bool increasing = true;
  double prev = 0.0;
  for (const auto& [t, eta] : cert.estimate.samples) {
    if (!(eta > prev)) increasing = false;
    prev = eta;
  }
  if (increasing) {
    std::vector<ScalarFn::Point> pts{{0.0, 0.0}};
    for (const auto& [t, eta] : cert.estimate.samples) pts.push_back({t, eta});
    cert.estimate.function = ScalarFn::PiecewiseLinear(std::move(pts));
  }
  return cert;
}

Certificate estimate_oplus_mbi_phi(const GainOperator& op,
                                   const std::vector<double>& levels,
                                   int samples_per_level, int kmax,
                                   std::uint64_t seed) {
  require_levels(levels);
  Certificate cert;
  cert.property = Property::kOplusMbi;
  cert.seed = seed;
  std::mt19937_64 rng(seed);
  const std::size_t n = op.size();
  bool truncated = false;
  for (double t : levels) {
    double worst = 0.0;
    for (const PlusVector& b : sample_level(n, t, samples_per_level, rng)) {
      ++cert.budget.samples;
      // Decreasing iteration s <- s ^ (Gamma(s) (+) b). Every solution below
      // the start stays below each iterate, and the limit is a solution.
      PlusVector s = PlusVector::Constant(n, kMbiStart);
      bool converged = false;
      for (int k = 0; k < kmax; ++k) {
        const PlusVector g = oplus(op.gamma(s), b);
        std::vector<double> next(n);
        for (std::size_t i = 0; i < n; ++i) next[i] = std::min(s[i], g[i]);
        PlusVector nv(std::move(next));
        ++cert.budget.iterations;
        const double step = sup_distance(nv, s);
        s = std::move(nv);
        if (step <= kDefaultTol * std::max(1.0, s.sup_norm())) {
          converged = true;
          break;
        }
      }
      if (!converged) truncated = true;
      if (s.sup_norm() > kMbiThreshold) {
        cert.verdict = Verdict::kFalsified;
        Witness w;
        w.s = s;
        w.b = b;
        w.t = kMbiThreshold;
        cert.witness = w;
        cert.estimate.samples.emplace_back(t, s.sup_norm());
        return cert;
      }
      worst = std::max(worst, s.sup_norm());
    }
    cert.estimate.samples.emplace_back(t, worst);
  }
  if (truncated) {
    cert.notes.push_back("some iterations hit kmax; the envelope uses the last iterate");
  }
  cert.verdict = Verdict::kNotFalsified;
  cert.estimate.function = envelope_from(cert.estimate.samples);
  return cert;
}

Certificate mbi_from_oplus_witness(const GainOperator& op,
                                   const Certificate& oplus_mbi) {
  Certificate cert;
  cert.property = Property::kMbi;
  cert.seed = oplus_mbi.seed;
  cert.verdict = Verdict::kInconclusive;
  if (oplus_mbi.property != Property::kOplusMbi || !oplus_mbi.falsified() ||
      !oplus_mbi.witness) {
    cert.notes.push_back("no oplus-MBI witness to replay");
    return cert;
  }
  cert.witness = oplus_mbi.witness;
  cert.budget.samples = 1;
  cert.verdict = Verdict::kFalsified;
  if (!replay_witness(op, cert)) {
    cert.verdict = Verdict::kInconclusive;
    cert.witness.reset();
    cert.notes.push_back("oplus-MBI witness did not replay as an MBI violation");
  }
  return cert;
}

Certificate mbi_by_uges_route(const GainOperator& op, double omega_slope) {
  if (!op.has_linear_gains()) {
    throw WrongClassError("UGES route needs linear gains");
  }
  if (!(omega_slope > 0.0 && omega_slope < 1.0)) {
    throw ScalingError(omega_slope, "omega must be linear with slope in (0,1)");
  }
  // omega^{-1} o Gamma equals Gamma with every gain divided by the slope,
  // since every MAF kind is positively homogeneous.
  NetworkSpec scaled = op.spec();
  for (auto& [key, gain] : scaled.gains) {
    gain = ScalarFn::Linear(gain.linear_slope() / omega_slope);
  }
  const GainOperator scaled_op(scaled);
  const Certificate uges =
      scaled_op.is_additive()
          ? certify_uges_linear(scaled_op)
          : certify_homogeneous(scaled_op, static_cast<int>(4 * op.size() + 20));
  Certificate cert;
  cert.property = Property::kMbi;
  cert.budget = uges.budget;
  cert.estimate = uges.estimate;
  cert.notes.push_back("UGES of the omega-scaled operator: " +
                       std::string(to_string(uges.verdict)));
  cert.verdict = uges.verdict == Verdict::kExactPass ? Verdict::kImpliedByTheorem
                                                     : Verdict::kInconclusive;
  return cert;
}

Certificate check_max_robust_sgc(const GainOperator& op, const ScalarFn& omega,
                                 int budget, std::uint64_t seed) {
  if (!op.is_max_type()) {
    throw WrongClassError("max-robust SGC applies to max-type operators only");
  }
  if (omega.class_tag() != ScalarFn::ClassTag::kKInfinity) {
    throw ScalingError(0.0, "omega must be of class K-infinity");
  }
  if (auto t = find_not_below_identity(omega)) {
    throw ScalingError(*t, "omega is not below id");
  }
  if (budget < 1) throw DomainError("budget must be at least 1");
  Certificate cert;
  cert.property = Property::kMaxRobustSgc;
  cert.verdict = Verdict::kNotFalsified;
  cert.seed = seed;
  const std::size_t n = op.size();
  std::mt19937_64 rng(seed);

  auto test = [&](const PlusVector& s) {
    ++cert.budget.samples;
    if (s.is_zero()) return false;
    const PlusVector g = op.gamma(s);
    const double slack = kWitnessTol * s.sup_norm();
    std::vector<std::size_t> short_of;
    for (std::size_t k = 0; k < n && short_of.size() < 2; ++k) {
      if (g[k] < s[k] - slack) short_of.push_back(k);
    }
    if (short_of.size() > 1) return false;
    const std::size_t j = static_cast<std::size_t>(
        std::max_element(s.values().begin(), s.values().end()) - s.values().begin());
    const std::size_t i = short_of.empty() ? j : short_of.front();
    if (!short_of.empty() && omega(s[j]) < s[i] - slack) return false;
    cert.verdict = Verdict::kFalsified;
    Witness w;
    w.s = s;
    w.i = i;
    w.j = j;
    w.f = omega;
    cert.witness = w;
    return true;
  };

  for (double c : {1.0, 1e-3, 1e-2, 0.1, 10.0, 100.0, 1000.0}) {
    if (cert.budget.samples >= budget) return cert;
    if (test(PlusVector::Constant(n, c))) return cert;
  }
  while (cert.budget.samples < budget) {
    const double level = log_uniform(rng, 1e-3, 1e3);
    const PlusVector s = sample_level(n, level, 4, rng).back();
    if (test(s)) return cert;
    if (cert.budget.samples < budget) {
      try {
        if (test(compute_qhat(op, s, 2000, 0.0))) return cert;
      } catch (const ConvergenceError&) {
      }
    }
    if (cert.budget.samples % 4 == 0 && cert.budget.samples < budget) {
      if (auto cand = descent_candidate(op, s, cert.budget.iterations)) {
        if (test(*cand)) return cert;
      }
    }
  }
  return cert;
}

std::vector<DecayIndexEntry> check_decay_index(const GainOperator& op,
                                               const PlusVector& s, int horizon,
                                               const ScalarFn& omega,
                                               Direction direction,
                                               std::optional<double> alpha) {
  if (s.size() != op.size()) throw DimensionError("vector has wrong length");
  if (s.is_zero()) throw DomainError("decay index needs s != 0");
  const double threshold = alpha.value_or(s.sup_norm() / 2.0);
  const PlusVector g = op.gamma(s);
  std::vector<DecayIndexEntry> out(op.size());
  for (std::size_t i = 0; i < op.size(); ++i) {
    if (s[i] < threshold) continue;
    out[i].applicable = true;
    const InfluenceSets sets = neighbor_sets(op.spec(), i, horizon);
    const auto& candidates =
        direction == Direction::kBackward ? sets.backward : sets.forward;
    for (std::size_t j : candidates) {
      if (g[j] < omega(s[j])) {
        out[i].witness = j;
        break;
      }
    }
  }
  return out;
}

FixedPointSet enumerate_fixed_points_sumtype(const GainOperator& op, double r) {
  constexpr std::size_t kMaxNodes = 12;
  const std::size_t n = op.size();
  if (n > kMaxNodes) {
    throw SizeError("fixed-point enumeration supports n <= 12, got " +
                    std::to_string(n));
  }
  if (!op.is_additive()) {
    throw WrongClassError("fixed-point enumeration needs sum-type MAFs");
  }
  for (const auto& [key, gain] : op.spec().gains) {
    if (!gain.is_linear() && gain.kind() != ScalarFn::Kind::kPiecewiseLinear) {
      throw WrongClassError("fixed-point enumeration needs linear or "
                            "piecewise-linear gains, got " + gain.describe());
    }
  }
  if (!(r > 0.0)) throw DomainError("r must be positive");

  const bool linear = op.has_linear_gains();
  const Eigen::MatrixXd a = linear ? op.matrix() : Eigen::MatrixXd();
  FixedPointSet result;

  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    std::vector<std::size_t> active;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask & (1u << i)) active.push_back(i);
    }
    std::vector<double> s(n, r);
    bool solved = true;
    if (linear && !active.empty()) {
      const auto m = static_cast<Eigen::Index>(active.size());
      Eigen::MatrixXd lhs = Eigen::MatrixXd::Identity(m, m);
      Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
      for (Eigen::Index p = 0; p < m; ++p) {
        const auto i = static_cast<Eigen::Index>(active[p]);
        for (Eigen::Index q = 0; q < m; ++q) {
          lhs(p, q) -= a(i, static_cast<Eigen::Index>(active[q]));
        }
        for (std::size_t j = 0; j < n; ++j) {
          if (!(mask & (1u << j))) rhs(p) += a(i, static_cast<Eigen::Index>(j)) * r;
        }
      }
      Eigen::FullPivLU<Eigen::MatrixXd> lu(lhs);
      lu.setThreshold(1e-12);
      if (!lu.isInvertible()) {
        solved = false;
      } else {
        const Eigen::VectorXd sol = lu.solve(rhs);
        for (Eigen::Index p = 0; p < m; ++p) {
          if (!(sol(p) >= -1e-12 * std::max(1.0, sol.cwiseAbs().maxCoeff()))) {
            solved = false;
          }
          s[active[static_cast<std::size_t>(p)]] = std::max(0.0, sol(p));
        }
        if (!solved) continue;  // negative branch solution: inconsistent
      }
    } else if (!active.empty()) {
      // Piecewise-linear gains: fixed-point iteration restricted to the branch.
      solved = false;
      for (int k = 0; k < 100000; ++k) {
        const PlusVector g = op.gamma(PlusVector(s));
        double step = 0.0;
        for (std::size_t i : active) {
          step = std::max(step, std::abs(g[i] - s[i]));
          s[i] = g[i];
        }
        if (!(PlusVector(s).sup_norm() <= kDivergenceGuard)) break;
        if (step <= 1e-14 * std::max(1.0, PlusVector(s).sup_norm())) {
          solved = true;
          break;
        }
      }
    }
    if (!solved) {
      result.unsolved.push_back(active);
      continue;
    }
    const PlusVector sv(s);
    const PlusVector g = op.gamma(sv);
    const double scale = std::max(1.0, sv.sup_norm());
    const double eps = 1e-10 * scale;
    bool consistent = true;
    for (std::size_t i = 0; i < n && consistent; ++i) {
      const bool in = mask & (1u << i);
      if (in) {
        consistent = g[i] >= r - eps && std::abs(g[i] - s[i]) <= eps;
      } else {
        consistent = g[i] <= r + eps;
      }
    }
    if (!consistent) continue;
    const bool duplicate = std::any_of(
        result.points.begin(), result.points.end(),
        [&](const PlusVector& p) { return sup_distance(p, sv) <= 1e-10 * scale; });
    if (!duplicate) result.points.push_back(sv);
  }
  return result;
}

}  // namespace gainpath
