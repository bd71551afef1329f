#pragma once

#include <optional>
#include <string>
#include <vector>

namespace gainpath {

/// A monotone function R+ -> R+ from a closed parametric family:
///
///   zero                  t -> 0
///   linear(a)             t -> a t
///   power(a, p)           t -> a t^p
///   piecewise-linear      interpolates breakpoints starting at (0,0) and
///                         continues past the last breakpoint with a tail
///                         slope (default: slope of the last segment)
///
/// Every nonzero member is strictly increasing on [0, last breakpoint] and has
/// an exact inverse on its range. A piecewise-linear function with tail slope 0
/// is bounded and tagged K; all other nonzero members are unbounded (K-infinity).
class ScalarFn {
 public:
  enum class Kind { kZero, kLinear, kPower, kPiecewiseLinear };
  enum class ClassTag { kZero, kK, kKInfinity };

  struct Point {
    double x;
    double y;
    bool operator==(const Point&) const = default;
  };

  /// The zero function.
  ScalarFn() = default;

  static ScalarFn Zero() { return ScalarFn(); }
  static ScalarFn Identity() { return Linear(1.0); }
  static ScalarFn Linear(double a);
  static ScalarFn Power(double a, double p);
  /// Throws DomainError unless the breakpoints start at (0,0) and increase
  /// strictly in both coordinates.
  static ScalarFn PiecewiseLinear(std::vector<Point> points,
                                  std::optional<double> tail_slope = {});

  double operator()(double t) const;

  /// Exact inverse on the range. Throws DomainError for y outside the range
  /// or for the zero function (except inverse(0) of a nonzero function).
  double inverse(double y) const;

  /// Solves t + f(t) = y for t, i.e. evaluates (id + f)^{-1}(y).
  double plus_identity_inverse(double y) const;

  /// Smallest difference quotient |f(r1) - f(r2)| / |r1 - r2| over [lo, hi].
  double min_slope(double lo, double hi) const;

  Kind kind() const { return kind_; }
  ClassTag class_tag() const;
  bool is_zero() const { return kind_ == Kind::kZero; }
  bool is_unbounded() const;
  /// sup of f over [0, inf); infinity for unbounded functions.
  double supremum() const;

  double coefficient() const { return a_; }
  double exponent() const { return p_; }
  const std::vector<Point>& points() const { return points_; }
  double tail_slope() const { return tail_; }

  /// True for linear(a), and for power(a, 1).
  bool is_linear() const;
  /// Slope of a linear function; throws WrongClassError otherwise.
  double linear_slope() const;

  /// Short human readable form, e.g. "linear(0.25)".
  std::string describe() const;

  bool operator==(const ScalarFn&) const = default;

 private:
  Kind kind_ = Kind::kZero;
  double a_ = 0.0;
  double p_ = 1.0;
  std::vector<Point> points_;
  double tail_ = 0.0;
};

const char* to_string(ScalarFn::ClassTag tag);

/// Checks f(t) < t on a log-spaced grid over [lo, hi]. Returns the first
/// violating t, or nullopt when the inequality holds at every sample.
std::optional<double> find_not_below_identity(const ScalarFn& f,
                                              double lo = 1e-6,
                                              double hi = 1e6,
                                              int points = 241);

}  // namespace gainpath
