#include "gainpath/path.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <Eigen/Core>

#include "gainpath/errors.h"

namespace gainpath {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kContractionMargin = 1e-9;

double p1_slack(double tol, const PlusVector& s) {
  return 100.0 * tol * (1.0 + s.sup_norm());
}

}  // namespace

PlusVector compute_sigma_star(const GainOperator& op, double r, double tol,
                              int kmax) {
  if (!(r >= 0.0)) throw DomainError("sigma_* needs r >= 0");
  if (r == 0.0) return PlusVector::Zeros(op.size());
  return compute_qhat(op, PlusVector::Constant(op.size(), r), kmax, tol);
}

PlusVector compute_sigma_upper_from(const GainOperator& op, double r,
                                    double start_level, double tol, int kmax) {
  if (!(r > 0.0)) throw DomainError("sigma^* needs r > 0");
  if (!(start_level >= r)) {
    throw DomainError("start level " + std::to_string(start_level) +
                      " is below r = " + std::to_string(r));
  }
  // Q-hat(L 1) is a point of decay above L 1, so Gamma_r iterates from it
  // decrease and their limit is the largest fixed point below L 1.
  PlusVector cur = compute_qhat(op, PlusVector::Constant(op.size(), start_level),
                                kmax, tol);
  for (int k = 0; k < kmax; ++k) {
    PlusVector next = op.gamma_r(r, cur);
    // Q-hat is only converged to tol, so the first steps may rise by that much.
    if (!leq(next, cur, 2.0 * tol + 1e-12 * (1.0 + cur.sup_norm()))) {
      throw ConsistencyError("downward Gamma_r iteration increased at step " +
                             std::to_string(k + 1));
    }
    if (sup_distance(next, cur) <= tol) return next;
    cur = std::move(next);
  }
  throw ConvergenceError(ConvergenceError::Reason::kNotConverged,
                         "downward Gamma_r iteration did not converge within kmax");
}

PlusVector compute_sigma_upper(const GainOperator& op, double r,
                               const ScalarFn& phi, double tol, int kmax) {
  if (!(r > 0.0)) throw DomainError("sigma^* needs r > 0");
  const double start = phi(r);
  if (start < r) {
    throw DomainError("phi(r) = " + std::to_string(start) + " < r = " +
                      std::to_string(r));
  }
  PlusVector upper = compute_sigma_upper_from(op, r, start, tol, kmax);
  // A valid phi bounds every fixed point of Gamma_r, so restarting higher
  // must land on the same limit.
  const PlusVector probe = compute_sigma_upper_from(op, r, 2.0 * start, tol, kmax);
  if (sup_distance(probe, upper) > 10.0 * tol * (1.0 + probe.sup_norm())) {
    throw ConsistencyError(
        "Gamma_r has fixed points above phi(r) = " + std::to_string(start) +
        "; phi is not a valid bound");
  }
  return upper;
}

double fixed_point_gap(const GainOperator& op, double r, const ScalarFn& phi,
                       double tol, int kmax) {
  const PlusVector lower = compute_sigma_star(op, r, tol, kmax);
  const PlusVector upper = compute_sigma_upper(op, r, phi, tol, kmax);
  if (!leq(lower, upper, 2.0 * tol * (1.0 + upper.sup_norm()))) {
    throw ConsistencyError("sigma_*(r) is not below sigma^*(r)");
  }
  return sup_distance(upper, lower);
}

ScalarFn default_phi(const GainOperator& op, const std::vector<double>& levels,
                     std::uint64_t seed) {
  const Certificate cert =
      estimate_ugs_phi(op, OperatorKind::GammaHat(), levels, 8, kDefaultKmax, seed);
  if (cert.falsified() || !cert.estimate.function) {
    throw ConvergenceError(ConvergenceError::Reason::kOverflow,
                           "Gamma-hat trajectories overflow; no UGS envelope");
  }
  return *cert.estimate.function;
}

std::vector<double> log_grid(double lo, double hi, int per_decade) {
  if (!(lo > 0.0) || !(hi > lo) || per_decade < 1) {
    throw DomainError("log_grid needs 0 < lo < hi and per_decade >= 1");
  }
  const int points =
      std::max(2, static_cast<int>(std::ceil(std::log10(hi / lo) * per_decade)) + 1);
  return log_levels(lo, hi, points);
}

const char* to_string(PathMode mode) {
  return mode == PathMode::kSigmaStar ? "sigma-star" : "sigma-upper";
}

PathTable::PathTable(std::vector<double> grid, std::vector<PlusVector> sigma,
                     Meta meta)
    : meta_(std::move(meta)) {
  if (grid.empty()) throw DomainError("path grid must be nonempty");
  if (grid.size() != sigma.size()) {
    throw DimensionError("path grid and sigma differ in length");
  }
  double prev = 0.0;
  for (double r : grid) {
    if (!(r > prev) || !std::isfinite(r)) {
      throw DomainError("path grid must be positive and strictly increasing");
    }
    prev = r;
  }
  dim_ = sigma.front().size();
  grid_.reserve(grid.size() + 1);
  grid_.push_back(0.0);
  grid_.insert(grid_.end(), grid.begin(), grid.end());
  sigma_.reserve(grid_.size());
  sigma_.push_back(PlusVector::Zeros(dim_));
  for (std::size_t k = 0; k < sigma.size(); ++k) {
    const PlusVector& s = sigma[k];
    if (s.size() != dim_) throw DimensionError("path points differ in dimension");
    const PlusVector& before = sigma_.back();
    const double slack = 1e3 * meta_.tol * (1.0 + s.sup_norm());
    for (std::size_t i = 0; i < dim_; ++i) {
      if (s[i] < grid[k] * (1.0 - 1e-12)) {
        throw ConsistencyError("sigma_" + std::to_string(i + 1) + "(" +
                               std::to_string(grid[k]) + ") is below r");
      }
      if (s[i] < before[i] - slack) {
        throw ConsistencyError("sigma_" + std::to_string(i + 1) +
                               " decreases at r = " + std::to_string(grid[k]));
      }
    }
    sigma_.push_back(s);
  }
  if (meta_.truncation == 0) meta_.truncation = dim_;
}

double PathTable::component(std::size_t i, double r, bool* out_of_range) const {
  if (i >= dim_) throw DomainError("path component out of range");
  if (!(r >= 0.0)) throw DomainError("path argument must be nonnegative");
  const std::size_t last = grid_.size() - 1;
  if (out_of_range) *out_of_range = r > grid_[last];
  std::size_t k;
  if (r >= grid_[last]) {
    k = last - 1;
  } else {
    k = static_cast<std::size_t>(
            std::upper_bound(grid_.begin(), grid_.end(), r) - grid_.begin()) -
        1;
  }
  const double x0 = grid_[k];
  const double x1 = grid_[k + 1];
  const double y0 = sigma_[k][i];
  const double y1 = sigma_[k + 1][i];
  if (r == x1) return y1;
  return y0 + (y1 - y0) * (r - x0) / (x1 - x0);
}

PlusVector PathTable::operator()(double r) const {
  std::vector<double> out(dim_);
  for (std::size_t i = 0; i < dim_; ++i) out[i] = component(i, r);
  return PlusVector(std::move(out));
}

double PathTable::inverse(std::size_t i, double v, bool* out_of_range) const {
  if (i >= dim_) throw DomainError("path component out of range");
  if (!(v >= 0.0)) throw DomainError("path inverse needs v >= 0");
  const std::size_t m = grid_.size();
  if (out_of_range) *out_of_range = v > sigma_[m - 1][i];
  if (v == 0.0) return 0.0;
  std::size_t lo = 1;
  std::size_t hi = m;
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (sigma_[mid][i] < v) {
      lo = mid + 1;
    } else {
      hi = mid;
    }
  }
  const std::size_t k = lo;
  if (k == m) {
    const double y0 = sigma_[m - 2][i];
    const double y1 = sigma_[m - 1][i];
    if (!(y1 > y0)) {
      throw DomainError("sigma_" + std::to_string(i + 1) +
                        " is flat on its last segment; inverse undefined");
    }
    return grid_[m - 1] + (v - y1) * (grid_[m - 1] - grid_[m - 2]) / (y1 - y0);
  }
  const double y0 = sigma_[k - 1][i];
  const double y1 = sigma_[k][i];
  if (v == y1) {
    // Smallest preimage: walk back over flat segments ending at v.
    std::size_t j = k;
    while (j > 0 && sigma_[j - 1][i] == v) --j;
    return grid_[j];
  }
  return grid_[k - 1] + (v - y0) * (grid_[k] - grid_[k - 1]) / (y1 - y0);
}

double PathTable::lipschitz_constant() const {
  double best = 0.0;
  for (std::size_t k = 0; k + 1 < grid_.size(); ++k) {
    best = std::max(best, sup_distance(sigma_[k + 1], sigma_[k]) /
                              (grid_[k + 1] - grid_[k]));
  }
  return best;
}

PathTable build_path_table(const GainOperator& op, const std::vector<double>& grid,
                           const ScalarFn* phi, double tol, int kmax,
                           PathMode mode) {
  if (mode == PathMode::kSigmaUpper && !phi) {
    throw DomainError("sigma-upper mode needs a phi bound");
  }
  PathTable::Meta meta;
  meta.tol = tol;
  meta.kmax = kmax;
  meta.truncation = op.size();
  meta.mode = mode;
  std::vector<PlusVector> sigma;
  sigma.reserve(grid.size());
  for (double r : grid) {
    try {
      PlusVector lower = compute_sigma_star(op, r, tol, kmax);
      if (phi) {
        PlusVector upper = compute_sigma_upper(op, r, *phi, tol, kmax);
        if (!leq(lower, upper, 2.0 * tol * (1.0 + upper.sup_norm()))) {
          throw ConsistencyError("sigma_*(r) is not below sigma^*(r)");
        }
        const double gap = sup_distance(upper, lower);
        meta.gaps.push_back(gap);
        meta.max_gap = std::max(meta.max_gap, gap);
        sigma.push_back(mode == PathMode::kSigmaStar ? std::move(lower)
                                                     : std::move(upper));
      } else {
        sigma.push_back(std::move(lower));
      }
    } catch (const PathConstructionError&) {
      throw;
    } catch (const Error& e) {
      throw PathConstructionError(r, e.what());
    }
  }
  return PathTable(grid, std::move(sigma), std::move(meta));
}

NetworkSpec scale_gains(const NetworkSpec& spec, double factor) {
  if (!(factor > 0.0) || !std::isfinite(factor)) {
    throw DomainError("gain scale factor must be positive and finite");
  }
  NetworkSpec out = spec;
  for (auto& [key, gain] : out.gains) {
    switch (gain.kind()) {
      case ScalarFn::Kind::kZero:
        break;
      case ScalarFn::Kind::kLinear:
        gain = ScalarFn::Linear(gain.coefficient() * factor);
        break;
      case ScalarFn::Kind::kPower:
        gain = ScalarFn::Power(gain.coefficient() * factor, gain.exponent());
        break;
      case ScalarFn::Kind::kPiecewiseLinear: {
        std::vector<ScalarFn::Point> pts = gain.points();
        for (auto& p : pts) p.y *= factor;
        gain = ScalarFn::PiecewiseLinear(std::move(pts), gain.tail_slope() * factor);
        break;
      }
    }
  }
  out.band.reset();
  return out;
}

MafBoundReport check_maf_lower_bound(const GainOperator& op, double r1, double r2,
                                     int samples, std::uint64_t seed) {
  if (!(r1 > 0.0) || !(r2 > r1)) throw DomainError("need 0 < R1 < R2");
  MafBoundReport report;
  const NetworkSpec& spec = op.spec();
  double l = kInf;
  bool saw_max = false;
  for (std::size_t i = 0; i < spec.n; ++i) {
    const std::size_t m = spec.neighbors[i].size();
    if (m == 0) continue;
    const MafSpec& maf = spec.mafs[i];
    switch (maf.kind()) {
      case MafSpec::Kind::kSum:
        l = std::min(l, 1.0);
        break;
      case MafSpec::Kind::kWeightedSum:
        for (double w : maf.weights()) l = std::min(l, w);
        break;
      case MafSpec::Kind::kMax:
        l = 0.0;
        saw_max = true;
        break;
      case MafSpec::Kind::kPSum: {
        const double p = maf.p();
        const double a = std::pow(r1, p);
        const double b = std::pow(r2, p);
        l = std::min(l, std::pow(a / (a + (m - 1.0) * b), (p - 1.0) / p));
        break;
      }
    }
  }
  if (l == kInf) l = 1.0;
  report.l = l;
  if (saw_max) {
    report.notes.push_back(
        "the MAF lower-bound assumption is not necessarily satisfied for "
        "max-type operators");
  }

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(r1, r2);
  double sampled = kInf;
  for (std::size_t i = 0; i < spec.n; ++i) {
    const std::size_t m = spec.neighbors[i].size();
    if (m == 0) continue;
    std::vector<double> a(m);
    std::vector<double> b(m);
    for (int k = 0; k < samples; ++k) {
      double top = 0.0;
      for (std::size_t j = 0; j < m; ++j) {
        const double x = u(rng);
        const double y = u(rng);
        a[j] = std::min(x, y);
        b[j] = std::max(x, y);
        top = std::max(top, b[j] - a[j]);
      }
      if (top == 0.0) continue;
      sampled = std::min(sampled, (spec.mafs[i](b) - spec.mafs[i](a)) / top);
    }
  }
  report.sampled = sampled == kInf ? l : sampled;
  report.confirmed = report.sampled >= l * (1.0 - 1e-9) - 1e-12;
  return report;
}

double check_gain_lower_lipschitz(const GainOperator& op, double a, double b) {
  if (!(a > 0.0) || !(b > a)) throw DomainError("need 0 < a < b");
  double c = kInf;
  for (const auto& [key, gain] : op.spec().gains) c = std::min(c, gain.min_slope(a, b));
  return c;
}

Certificate check_order_contraction(const GainOperator& op, int k, double r1,
                                    double r2, int samples, std::uint64_t seed) {
  if (k < 1) throw DomainError("k must be at least 1");
  if (!(r1 >= 0.0) || !(r2 > r1)) throw DomainError("need 0 <= R1 < R2");
  Certificate cert;
  cert.property = Property::kOrderContraction;
  cert.seed = seed;
  const std::size_t n = op.size();

  if (op.is_additive() && op.has_linear_gains()) {
    const Eigen::MatrixXd a = op.matrix();
    Eigen::MatrixXd power = Eigen::MatrixXd::Identity(a.rows(), a.cols());
    for (int step = 0; step < k; ++step) power = power * a;
    const double norm = n == 0 ? 0.0 : power.rowwise().sum().maxCoeff();
    cert.estimate.scalar = norm;
    cert.budget.samples = 1;
    if (norm < 1.0 - kContractionMargin) {
      cert.verdict = Verdict::kExactPass;
    } else {
      cert.verdict = Verdict::kFalsified;
      Witness w;
      w.s = PlusVector::Constant(n, r1);
      w.b = PlusVector::Constant(n, r2);
      w.k = k;
      cert.witness = w;
    }
    return cert;
  }

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  std::optional<std::pair<PlusVector, PlusVector>> arg;
  auto consider = [&](const PlusVector& lo, const PlusVector& hi) {
    ++cert.budget.samples;
    const double den = sup_distance(hi, lo);
    if (den == 0.0) return;
    const double ratio =
        sup_distance(op.gamma_power(hi, k), op.gamma_power(lo, k)) / den;
    cert.budget.iterations += 2L * k;
    if (ratio > worst) {
      worst = ratio;
      arg.emplace(lo, hi);
    }
  };
  consider(PlusVector::Constant(n, r1), PlusVector::Constant(n, r2));
  std::uniform_int_distribution<std::size_t> pick(0, n == 0 ? 0 : n - 1);
  for (int m = 1; m < samples && n > 0; ++m) {
    std::vector<double> lo(n);
    std::vector<double> hi(n);
    for (std::size_t i = 0; i < n; ++i) lo[i] = r1 + (r2 - r1) * u(rng);
    if (m % 2 == 0) {
      hi = lo;
      const std::size_t j = pick(rng);
      hi[j] = lo[j] + (r2 - lo[j]) * u(rng);
    } else {
      for (std::size_t i = 0; i < n; ++i) hi[i] = lo[i] + (r2 - lo[i]) * u(rng);
    }
    consider(PlusVector(lo), PlusVector(hi));
  }
  cert.estimate.scalar = worst;
  if (worst < 1.0 - kContractionMargin) {
    cert.verdict = Verdict::kNotFalsified;
  } else {
    cert.verdict = Verdict::kFalsified;
    Witness w;
    w.s = arg->first;
    w.b = arg->second;
    w.k = k;
    cert.witness = w;
  }
  return cert;
}

PathReport verify_path(const GainOperator& op, const PathTable& table,
                       const std::optional<ScalarFn>& rho,
                       const std::vector<std::pair<double, double>>& subintervals) {
  if (table.dimension() != op.size()) {
    throw DimensionError("path table dimension differs from the network size");
  }
  const auto& grid = table.grid();
  const auto& sigma = table.sigma();
  const double tol = table.meta().tol;
  PathReport report;

  report.p1.worst = kInf;
  report.p1.pass = true;
  for (std::size_t k = 1; k < grid.size(); ++k) {
    const PlusVector& s = sigma[k];
    const PlusVector g = op.gamma(s);
    double margin = kInf;
    for (std::size_t i = 0; i < s.size(); ++i) {
      const double target = rho ? rho->plus_identity_inverse(s[i]) : s[i];
      margin = std::min(margin, target - g[i]);
    }
    report.p1.margins.emplace_back(grid[k], margin);
    if (margin < report.p1.worst) {
      report.p1.worst = margin;
      report.p1.worst_r = grid[k];
    }
    if (margin < -p1_slack(tol, s)) report.p1.pass = false;
  }

  report.p2.pass = true;
  for (std::size_t k = 1; k < grid.size(); ++k) {
    const auto& v = sigma[k].values();
    const double lo = v.empty() ? grid[k] : *std::min_element(v.begin(), v.end());
    const double hi = v.empty() ? grid[k] : *std::max_element(v.begin(), v.end());
    report.p2.envelopes.emplace_back(grid[k], lo, hi);
    if (lo < grid[k] * (1.0 - tol)) report.p2.pass = false;
  }

  report.p3.pass = true;
  report.p3.min_step.assign(table.dimension(), kInf);
  for (std::size_t i = 0; i < table.dimension(); ++i) {
    for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
      const double step = sigma[k + 1][i] - sigma[k][i];
      if (step < report.p3.min_step[i]) report.p3.min_step[i] = step;
      if (!(step > 0.0) && report.p3.pass) {
        report.p3.pass = false;
        report.p3.component = i;
        report.p3.interval = {grid[k], grid[k + 1]};
      }
    }
  }

  report.p4.pass = true;
  double hull_lo = kInf;
  double hull_hi = 0.0;
  for (const auto& [a, b] : subintervals) {
    if (!(a > 0.0) || !(b > a) || b > grid.back()) {
      throw DomainError("subinterval [" + std::to_string(a) + ", " +
                        std::to_string(b) + "] is outside the grid span");
    }
    PathReport::P4::Entry entry{a, b, kInf, 0.0};
    for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
      if (!(grid[k + 1] > a && grid[k] < b)) continue;
      const double width = grid[k + 1] - grid[k];
      for (std::size_t i = 0; i < table.dimension(); ++i) {
        const double slope = std::abs(sigma[k + 1][i] - sigma[k][i]) / width;
        entry.c = std::min(entry.c, slope);
        entry.C = std::max(entry.C, slope);
      }
    }
    if (!(entry.c > 0.0) || !(entry.c <= entry.C)) report.p4.pass = false;
    report.p4.entries.push_back(entry);
    const PlusVector lo = table(a);
    const PlusVector hi = table(b);
    for (std::size_t i = 0; i < lo.size(); ++i) {
      hull_lo = std::min(hull_lo, lo[i]);
      hull_hi = std::max(hull_hi, hi[i]);
    }
  }

  if (!subintervals.empty() && hull_hi > hull_lo && hull_lo > 0.0) {
    report.side.lo = hull_lo;
    report.side.hi = hull_hi;
    report.side.maf = check_maf_lower_bound(op, hull_lo, hull_hi);
    report.side.gain_lipschitz = check_gain_lower_lipschitz(op, hull_lo, hull_hi);
    report.side.contraction = check_order_contraction(op, 2, hull_lo, hull_hi, 200);
  }
  return report;
}

}  // namespace gainpath
