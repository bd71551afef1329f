#include "gainpath/plus_vector.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "gainpath/errors.h"

namespace gainpath {
namespace {

void require_same_size(const PlusVector& a, const PlusVector& b) {
  if (a.size() != b.size()) {
    throw DimensionError("vector lengths differ: " + std::to_string(a.size()) +
                         " vs " + std::to_string(b.size()));
  }
}

}  // namespace

PlusVector::PlusVector(std::vector<double> values) : values_(std::move(values)) {
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!(values_[i] >= 0.0)) {
      throw DomainError("entry " + std::to_string(i + 1) +
                        " is negative or NaN");
    }
  }
}

PlusVector::PlusVector(std::initializer_list<double> values)
    : PlusVector(std::vector<double>(values)) {}

PlusVector PlusVector::Zeros(std::size_t n) {
  return PlusVector(std::vector<double>(n, 0.0));
}

PlusVector PlusVector::Constant(std::size_t n, double value) {
  return PlusVector(std::vector<double>(n, value));
}

PlusVector PlusVector::Unit(std::size_t n, std::size_t i, double value) {
  std::vector<double> v(n, 0.0);
  v.at(i) = value;
  return PlusVector(std::move(v));
}

double PlusVector::sup_norm() const {
  double out = 0.0;
  for (double v : values_) out = std::max(out, v);
  return out;
}

bool PlusVector::is_zero() const {
  return std::all_of(values_.begin(), values_.end(),
                     [](double v) { return v == 0.0; });
}

PlusVector PlusVector::scaled(double c) const {
  std::vector<double> out(values_);
  for (double& v : out) v *= c;
  return PlusVector(std::move(out));
}

std::string PlusVector::to_string() const {
  std::ostringstream out;
  out.precision(17);
  out << "(";
  for (std::size_t i = 0; i < values_.size(); ++i) {
    out << (i ? ", " : "") << values_[i];
  }
  out << ")";
  return out.str();
}

PlusVector oplus(const PlusVector& a, const PlusVector& b) {
  require_same_size(a, b);
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = std::max(a[i], b[i]);
  return PlusVector(std::move(out));
}

bool leq(const PlusVector& a, const PlusVector& b) { return leq(a, b, 0.0); }

bool leq(const PlusVector& a, const PlusVector& b, double tol) {
  require_same_size(a, b);
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] > b[i] + tol) return false;
  }
  return true;
}

double sup_distance(const PlusVector& a, const PlusVector& b) {
  require_same_size(a, b);
  double out = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    out = std::max(out, std::abs(a[i] - b[i]));
  }
  return out;
}

PlusVector add(const PlusVector& a, const PlusVector& b) {
  require_same_size(a, b);
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  return PlusVector(std::move(out));
}

}  // namespace gainpath
