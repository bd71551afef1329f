#pragma once

#include <span>
#include <string>
#include <vector>

namespace gainpath {

/// Monotone aggregation function mu_i combining the gain values of node i's
/// neighbors. Arguments are passed in neighbor order.
class MafSpec {
 public:
  enum class Kind { kMax, kSum, kWeightedSum, kPSum };

  MafSpec() = default;

  static MafSpec Max();
  static MafSpec Sum();
  /// One nonnegative weight per neighbor, in neighbor order.
  static MafSpec WeightedSum(std::vector<double> weights);
  /// (sum_j v_j^p)^(1/p), p >= 1.
  static MafSpec PSum(double p);

  double operator()(std::span<const double> values) const;

  Kind kind() const { return kind_; }
  const std::vector<double>& weights() const { return weights_; }
  double p() const { return p_; }

  /// Sum-type in the sense of the fixed-point enumeration: sum or weighted sum.
  bool is_additive() const {
    return kind_ == Kind::kSum || kind_ == Kind::kWeightedSum;
  }

  std::string describe() const;

  bool operator==(const MafSpec&) const = default;

 private:
  Kind kind_ = Kind::kSum;
  std::vector<double> weights_;
  double p_ = 1.0;
};

const char* to_string(MafSpec::Kind kind);

}  // namespace gainpath
