#include "gainpath/maf.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "gainpath/errors.h"

namespace gainpath {

MafSpec MafSpec::Max() {
  MafSpec m;
  m.kind_ = Kind::kMax;
  return m;
}

MafSpec MafSpec::Sum() { return MafSpec(); }

MafSpec MafSpec::WeightedSum(std::vector<double> weights) {
  for (double w : weights) {
    if (!std::isfinite(w) || w < 0.0) {
      throw DomainError("weighted-sum weights must be finite and nonnegative");
    }
  }
  MafSpec m;
  m.kind_ = Kind::kWeightedSum;
  m.weights_ = std::move(weights);
  return m;
}

MafSpec MafSpec::PSum(double p) {
  if (!std::isfinite(p) || p < 1.0) {
    throw DomainError("p-sum needs p >= 1");
  }
  MafSpec m;
  m.kind_ = Kind::kPSum;
  m.p_ = p;
  return m;
}

double MafSpec::operator()(std::span<const double> values) const {
  switch (kind_) {
    case Kind::kMax: {
      double out = 0.0;
      for (double v : values) out = std::max(out, v);
      return out;
    }
    case Kind::kSum: {
      double out = 0.0;
      for (double v : values) out += v;
      return out;
    }
    case Kind::kWeightedSum: {
      if (values.size() != weights_.size()) {
        throw DimensionError("weighted-sum MAF has " +
                             std::to_string(weights_.size()) +
                             " weights but received " +
                             std::to_string(values.size()) + " values");
      }
      double out = 0.0;
      for (std::size_t k = 0; k < values.size(); ++k) out += weights_[k] * values[k];
      return out;
    }
    case Kind::kPSum: {
      if (p_ == 1.0) {
        double out = 0.0;
        for (double v : values) out += v;
        return out;
      }
      // Scale by the largest entry so large gains do not overflow v^p.
      double scale = 0.0;
      for (double v : values) scale = std::max(scale, v);
      if (scale == 0.0) return 0.0;
      double acc = 0.0;
      for (double v : values) acc += std::pow(v / scale, p_);
      return scale * std::pow(acc, 1.0 / p_);
    }
  }
  return 0.0;
}

std::string MafSpec::describe() const {
  std::ostringstream out;
  out << to_string(kind_);
  if (kind_ == Kind::kPSum) out << "(" << p_ << ")";
  if (kind_ == Kind::kWeightedSum) {
    out << "(";
    for (std::size_t k = 0; k < weights_.size(); ++k) {
      out << (k ? "," : "") << weights_[k];
    }
    out << ")";
  }
  return out.str();
}

const char* to_string(MafSpec::Kind kind) {
  switch (kind) {
    case MafSpec::Kind::kMax:
      return "max";
    case MafSpec::Kind::kSum:
      return "sum";
    case MafSpec::Kind::kWeightedSum:
      return "weighted-sum";
    case MafSpec::Kind::kPSum:
      return "p-sum";
  }
  return "?";
}

}  // namespace gainpath
