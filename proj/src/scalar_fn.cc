#include "gainpath/scalar_fn.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "gainpath/errors.h"

namespace gainpath {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool positive_finite(double v) { return std::isfinite(v) && v > 0.0; }

double segment_slope(const ScalarFn::Point& a, const ScalarFn::Point& b) {
  return (b.y - a.y) / (b.x - a.x);
}

}  // namespace

ScalarFn ScalarFn::Linear(double a) {
  if (!positive_finite(a)) {
    throw DomainError("linear gain needs a > 0, got " + std::to_string(a));
  }
  ScalarFn f;
  f.kind_ = Kind::kLinear;
  f.a_ = a;
  return f;
}

ScalarFn ScalarFn::Power(double a, double p) {
  if (!positive_finite(a) || !positive_finite(p)) {
    throw DomainError("power gain needs a > 0 and p > 0");
  }
  ScalarFn f;
  f.kind_ = Kind::kPower;
  f.a_ = a;
  f.p_ = p;
  return f;
}

ScalarFn ScalarFn::PiecewiseLinear(std::vector<Point> points,
                                   std::optional<double> tail_slope) {
  if (points.size() < 2) {
    throw DomainError("piecewise-linear function needs at least two points");
  }
  if (points.front().x != 0.0 || points.front().y != 0.0) {
    throw DomainError("piecewise-linear function must start at (0,0)");
  }
  for (std::size_t k = 1; k < points.size(); ++k) {
    const auto& prev = points[k - 1];
    const auto& cur = points[k];
    if (!std::isfinite(cur.x) || !std::isfinite(cur.y) || !(cur.x > prev.x) ||
        !(cur.y > prev.y)) {
      throw DomainError(
          "piecewise-linear breakpoints must increase strictly in both "
          "coordinates (breakpoint " +
          std::to_string(k) + ")");
    }
  }
  const double tail =
      tail_slope.value_or(segment_slope(points[points.size() - 2], points.back()));
  if (!std::isfinite(tail) || tail < 0.0) {
    throw DomainError("tail slope must be finite and nonnegative");
  }
  ScalarFn f;
  f.kind_ = Kind::kPiecewiseLinear;
  f.points_ = std::move(points);
  f.tail_ = tail;
  return f;
}

double ScalarFn::operator()(double t) const {
  switch (kind_) {
    case Kind::kZero:
      return 0.0;
    case Kind::kLinear:
      return a_ * t;
    case Kind::kPower:
      return t <= 0.0 ? 0.0 : a_ * std::pow(t, p_);
    case Kind::kPiecewiseLinear: {
      if (t <= 0.0) return 0.0;
      const Point& last = points_.back();
      if (t >= last.x) return last.y + tail_ * (t - last.x);
      auto it = std::upper_bound(
          points_.begin(), points_.end(), t,
          [](double v, const Point& p) { return v < p.x; });
      const Point& hi = *it;
      const Point& lo = *(it - 1);
      return lo.y + (t - lo.x) * (hi.y - lo.y) / (hi.x - lo.x);
    }
  }
  return 0.0;
}

double ScalarFn::inverse(double y) const {
  if (y < 0.0 || std::isnan(y)) {
    throw DomainError("inverse of a negative value");
  }
  switch (kind_) {
    case Kind::kZero:
      if (y == 0.0) return 0.0;
      throw DomainError("zero function is not invertible");
    case Kind::kLinear:
      return y / a_;
    case Kind::kPower:
      return y == 0.0 ? 0.0 : std::pow(y / a_, 1.0 / p_);
    case Kind::kPiecewiseLinear: {
      if (y == 0.0) return 0.0;
      const Point& last = points_.back();
      if (y >= last.y) {
        if (y == last.y) return last.x;
        if (tail_ <= 0.0) {
          throw DomainError("value " + std::to_string(y) +
                            " above the range of a bounded function");
        }
        return last.x + (y - last.y) / tail_;
      }
      auto it = std::upper_bound(
          points_.begin(), points_.end(), y,
          [](double v, const Point& p) { return v < p.y; });
      const Point& hi = *it;
      const Point& lo = *(it - 1);
      return lo.x + (y - lo.y) * (hi.x - lo.x) / (hi.y - lo.y);
    }
  }
  return 0.0;
}

double ScalarFn::plus_identity_inverse(double y) const {
  if (y < 0.0 || std::isnan(y)) {
    throw DomainError("(id+f)^-1 of a negative value");
  }
  if (y == 0.0) return 0.0;
  switch (kind_) {
    case Kind::kZero:
      return y;
    case Kind::kLinear:
      return y / (1.0 + a_);
    case Kind::kPiecewiseLinear: {
      // id + f is piecewise linear with breakpoints (x, x + f(x)).
      const Point& last = points_.back();
      const double last_sum = last.x + last.y;
      if (y >= last_sum) return last.x + (y - last_sum) / (1.0 + tail_);
      for (std::size_t k = 1; k < points_.size(); ++k) {
        const double hi_sum = points_[k].x + points_[k].y;
        if (y <= hi_sum) {
          const Point& lo = points_[k - 1];
          const double lo_sum = lo.x + lo.y;
          return lo.x + (y - lo_sum) * (points_[k].x - lo.x) / (hi_sum - lo_sum);
        }
      }
      return last.x;
    }
    case Kind::kPower: {
      // g(t) = t + a t^p - y is increasing with g(0) < 0 <= g(y).
      double lo = 0.0;
      double hi = y;
      double t = std::min(y, inverse(y));
      for (int iter = 0; iter < 200; ++iter) {
        const double g = t + a_ * std::pow(t, p_) - y;
        if (g > 0.0) {
          hi = t;
        } else {
          lo = t;
        }
        const double dg = 1.0 + a_ * p_ * std::pow(t, p_ - 1.0);
        double next = t - g / dg;
        if (!(next > lo && next < hi) || !std::isfinite(next)) {
          next = 0.5 * (lo + hi);
        }
        if (std::abs(next - t) <= 1e-16 * std::max(1.0, std::abs(t)) ||
            hi - lo <= 1e-16 * hi) {
          return next;
        }
        t = next;
      }
      return t;
    }
  }
  return y;
}

double ScalarFn::min_slope(double lo, double hi) const {
  if (!(lo >= 0.0) || !(hi > lo)) {
    throw DomainError("min_slope needs 0 <= lo < hi");
  }
  switch (kind_) {
    case Kind::kZero:
      return 0.0;
    case Kind::kLinear:
      return a_;
    case Kind::kPower: {
      // The derivative a p t^(p-1) is monotone in t, so the extreme sits at
      // an endpoint. For p > 1 at lo = 0 the derivative vanishes.
      const double at_lo = lo == 0.0
                               ? (p_ < 1.0 ? kInf : (p_ == 1.0 ? a_ : 0.0))
                               : a_ * p_ * std::pow(lo, p_ - 1.0);
      const double at_hi = a_ * p_ * std::pow(hi, p_ - 1.0);
      return std::min(at_lo, at_hi);
    }
    case Kind::kPiecewiseLinear: {
      double best = kInf;
      for (std::size_t k = 1; k < points_.size(); ++k) {
        if (points_[k].x > lo && points_[k - 1].x < hi) {
          best = std::min(best, segment_slope(points_[k - 1], points_[k]));
        }
      }
      if (hi > points_.back().x) best = std::min(best, tail_);
      return best;
    }
  }
  return 0.0;
}

ScalarFn::ClassTag ScalarFn::class_tag() const {
  if (kind_ == Kind::kZero) return ClassTag::kZero;
  return is_unbounded() ? ClassTag::kKInfinity : ClassTag::kK;
}

bool ScalarFn::is_unbounded() const {
  switch (kind_) {
    case Kind::kZero:
      return false;
    case Kind::kLinear:
    case Kind::kPower:
      return true;
    case Kind::kPiecewiseLinear:
      return tail_ > 0.0;
  }
  return false;
}

double ScalarFn::supremum() const {
  if (kind_ == Kind::kZero) return 0.0;
  if (is_unbounded()) return kInf;
  return points_.back().y;
}

bool ScalarFn::is_linear() const {
  return kind_ == Kind::kLinear || (kind_ == Kind::kPower && p_ == 1.0);
}

double ScalarFn::linear_slope() const {
  if (!is_linear()) {
    throw WrongClassError("expected a linear gain, got " + describe());
  }
  return a_;
}

std::string ScalarFn::describe() const {
  std::ostringstream out;
  out.precision(17);
  switch (kind_) {
    case Kind::kZero:
      out << "zero";
      break;
    case Kind::kLinear:
      out << "linear(" << a_ << ")";
      break;
    case Kind::kPower:
      out << "power(" << a_ << "," << p_ << ")";
      break;
    case Kind::kPiecewiseLinear:
      out << "piecewise-linear(" << points_.size() << " points, tail "
          << tail_ << ")";
      break;
  }
  return out.str();
}

const char* to_string(ScalarFn::ClassTag tag) {
  switch (tag) {
    case ScalarFn::ClassTag::kZero:
      return "zero";
    case ScalarFn::ClassTag::kK:
      return "K";
    case ScalarFn::ClassTag::kKInfinity:
      return "K-infinity";
  }
  return "?";
}

std::optional<double> find_not_below_identity(const ScalarFn& f, double lo,
                                              double hi, int points) {
  const double step = std::log(hi / lo) / std::max(1, points - 1);
  for (int k = 0; k < points; ++k) {
    const double t = lo * std::exp(step * k);
    if (!(f(t) < t)) return t;
  }
  return std::nullopt;
}

}  // namespace gainpath
