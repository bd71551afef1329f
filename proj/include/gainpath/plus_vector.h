#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace gainpath {

/// A finite nonnegative vector, the truncation of an element of the positive
/// cone of l-infinity. Entries are validated on construction.
class PlusVector {
 public:
  PlusVector() = default;
  /// Throws DomainError on a negative or NaN entry.
  explicit PlusVector(std::vector<double> values);
  PlusVector(std::initializer_list<double> values);

  static PlusVector Zeros(std::size_t n);
  static PlusVector Constant(std::size_t n, double value);
  static PlusVector Ones(std::size_t n) { return Constant(n, 1.0); }
  /// value * e_i.
  static PlusVector Unit(std::size_t n, std::size_t i, double value = 1.0);

  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  std::span<const double> values() const { return values_; }
  const std::vector<double>& data() const { return values_; }

  double sup_norm() const;
  bool is_zero() const;

  /// Componentwise scaling by c >= 0.
  PlusVector scaled(double c) const;

  bool operator==(const PlusVector&) const = default;

  std::string to_string() const;

 private:
  std::vector<double> values_;
};

/// Componentwise maximum s1 (+) s2.
PlusVector oplus(const PlusVector& a, const PlusVector& b);

/// Componentwise a <= b.
bool leq(const PlusVector& a, const PlusVector& b);

/// Componentwise a <= b + tol.
bool leq(const PlusVector& a, const PlusVector& b, double tol);

/// ||a - b||_inf.
double sup_distance(const PlusVector& a, const PlusVector& b);

/// Componentwise sum a + b.
PlusVector add(const PlusVector& a, const PlusVector& b);

}  // namespace gainpath
