#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "gainpath/operators.h"
#include "gainpath/plus_vector.h"
#include "gainpath/scalar_fn.h"
#include "gainpath/stability.h"

namespace gainpath {

/// sigma_*(r): limit of the Gamma-hat iteration from r 1. Returns 0 for r = 0.
/// Throws DomainError for r < 0 and ConvergenceError when the iteration is
/// unbounded.
PlusVector compute_sigma_star(const GainOperator& op, double r,
                              double tol = kDefaultTol, int kmax = kDefaultKmax);

/// sigma^*(r) = inf_n Gamma_r^n(phi(r) 1), computed as the limit of the
/// non-increasing Gamma_r iteration from Q-hat(phi(r) 1). Throws DomainError
/// when phi(r) < r, ConsistencyError when an iterate increases or when a
/// restart from 2 phi(r) reaches a different limit (phi is then not a bound
/// on the fixed points), and ConvergenceError when kmax is exhausted.
PlusVector compute_sigma_upper(const GainOperator& op, double r,
                               const ScalarFn& phi, double tol = kDefaultTol,
                               int kmax = kDefaultKmax);

/// Largest fixed point of Gamma_r below Q-hat(L 1) for the start level L.
PlusVector compute_sigma_upper_from(const GainOperator& op, double r,
                                    double start_level, double tol = kDefaultTol,
                                    int kmax = kDefaultKmax);

/// ||sigma^*(r) - sigma_*(r)||_inf after checking sigma_* <= sigma^*.
double fixed_point_gap(const GainOperator& op, double r, const ScalarFn& phi,
                       double tol = kDefaultTol, int kmax = kDefaultKmax);

/// UGS envelope of Gamma-hat sampled at the given levels, used as the
/// default phi. Throws ConvergenceError when the sampled trajectories overflow.
ScalarFn default_phi(const GainOperator& op, const std::vector<double>& levels,
                     std::uint64_t seed = 0);

/// Log-spaced grid over [lo, hi] with `per_decade` points per decade.
std::vector<double> log_grid(double lo, double hi, int per_decade = 17);

enum class PathMode { kSigmaStar, kSigmaUpper };

const char* to_string(PathMode mode);

/// Sampled path r -> sigma(r) with sigma(0) = 0 and monotone piecewise-linear
/// interpolation per component.
class PathTable {
 public:
  struct Meta {
    double tol = kDefaultTol;
    int kmax = kDefaultKmax;
    std::size_t truncation = 0;
    PathMode mode = PathMode::kSigmaStar;
    /// Fixed-point gap per grid point (empty when no phi was supplied).
    std::vector<double> gaps;
    double max_gap = 0.0;
  };

  /// grid and sigma exclude r = 0, which is prepended here. Throws
  /// DomainError when the grid is not positive and strictly increasing,
  /// DimensionError on size mismatches, and ConsistencyError when a
  /// component decreases or r <= sigma_i(r) fails.
  PathTable(std::vector<double> grid, std::vector<PlusVector> sigma, Meta meta);

  std::size_t dimension() const { return dim_; }
  /// Grid including the leading 0.
  const std::vector<double>& grid() const { return grid_; }
  const std::vector<PlusVector>& sigma() const { return sigma_; }
  const Meta& meta() const { return meta_; }

  /// sigma_i(r). Beyond the last grid point the last segment is extended and
  /// *out_of_range is set when given.
  double component(std::size_t i, double r, bool* out_of_range = nullptr) const;
  PlusVector operator()(double r) const;

  /// sigma_i^{-1}(v), exact on each segment. For flat segments the smallest
  /// preimage is returned.
  double inverse(std::size_t i, double v, bool* out_of_range = nullptr) const;

  /// max over adjacent grid pairs of ||sigma(r2) - sigma(r1)||_inf / (r2 - r1).
  double lipschitz_constant() const;

 private:
  std::size_t dim_ = 0;
  std::vector<double> grid_;
  std::vector<PlusVector> sigma_;
  Meta meta_;
};

/// Builds the table at every grid point. With phi, sigma^* and the gap are
/// computed too; kSigmaUpper mode requires phi. Failures are rethrown as
/// PathConstructionError naming r.
PathTable build_path_table(const GainOperator& op, const std::vector<double>& grid,
                           const ScalarFn* phi = nullptr, double tol = kDefaultTol,
                           int kmax = kDefaultKmax,
                           PathMode mode = PathMode::kSigmaStar);

/// Multiplies every gain by `factor`, giving (factor id) o Gamma for every
/// supported MAF kind.
NetworkSpec scale_gains(const NetworkSpec& spec, double factor);

struct MafBoundReport {
  /// Exact bound l (0 for max-type nodes).
  double l = 0.0;
  /// Smallest observed ratio over the sampled ordered pairs.
  double sampled = 0.0;
  bool confirmed = false;
  std::vector<std::string> notes;
};

/// Lower bound l with mu_i(s2) - mu_i(s1) >= l (s2_j - s1_j) on [R1 1, R2 1].
MafBoundReport check_maf_lower_bound(const GainOperator& op, double r1, double r2,
                                     int samples = 200, std::uint64_t seed = 0);

/// min over all gains of the smallest slope on [a, b]; +inf without gains.
double check_gain_lower_lipschitz(const GainOperator& op, double a, double b);

/// K = max ||Gamma^k(s2) - Gamma^k(s1)||_inf / ||s2 - s1||_inf over ordered
/// pairs in [R1 1, R2 1]. Exact for linear additive operators.
Certificate check_order_contraction(const GainOperator& op, int k, double r1,
                                    double r2, int samples = 400,
                                    std::uint64_t seed = 0);

struct PathReport {
  struct P1 {
    /// (r, min_i [(id+rho)^{-1}(sigma_i(r)) - Gamma_i(sigma(r))]).
    std::vector<std::pair<double, double>> margins;
    double worst = 0.0;
    double worst_r = 0.0;
    bool pass = false;
  } p1;

  struct P2 {
    /// (r, sigma_min(r), sigma_max(r)).
    std::vector<std::tuple<double, double, double>> envelopes;
    bool pass = false;
  } p2;

  struct P3 {
    /// Smallest forward difference per component.
    std::vector<double> min_step;
    bool pass = false;
    std::optional<std::size_t> component;
    std::optional<std::pair<double, double>> interval;
  } p3;

  struct P4 {
    struct Entry {
      double a = 0.0;
      double b = 0.0;
      double c = 0.0;
      double C = 0.0;
    };
    std::vector<Entry> entries;
    bool pass = false;
  } p4;

  struct Side {
    MafBoundReport maf;
    double gain_lipschitz = 0.0;
    std::optional<Certificate> contraction;
    /// Order interval [lo, hi] used for the side conditions.
    double lo = 0.0;
    double hi = 0.0;
  } side;

  bool passed() const { return p1.pass && p2.pass && p3.pass && p4.pass; }
};

/// Checks (P1)-(P4) on the table plus the side conditions on the hull of the
/// subintervals. Throws DomainError for a subinterval outside the grid span.
PathReport verify_path(const GainOperator& op, const PathTable& table,
                       const std::optional<ScalarFn>& rho,
                       const std::vector<std::pair<double, double>>& subintervals);

}  // namespace gainpath
