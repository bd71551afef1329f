#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "gainpath/network.h"
#include "gainpath/plus_vector.h"
#include "gainpath/scalar_fn.h"

namespace gainpath {

enum class ScalingMode {
  /// omega^{-1} o Gamma; requires omega < id.
  kPreInverse,
  /// (id + rho) o Gamma.
  kPostCompose,
};

/// The gain operator Gamma_i(s) = mu_i([gamma_ij(s_j)]_{j in I_i}) of a
/// structurally valid network, together with the derived operators built on
/// it. Immutable after construction; all evaluations are pure.
class GainOperator {
 public:
  /// Throws StructuralError / DimensionError for malformed specs.
  explicit GainOperator(NetworkSpec spec);

  std::size_t size() const { return spec_.n; }
  const NetworkSpec& spec() const { return spec_; }

  /// Gamma_i(s).
  double component(std::size_t i, const PlusVector& s) const;

  PlusVector gamma(const PlusVector& s) const;
  /// Augmented operator s (+) Gamma(s).
  PlusVector gamma_hat(const PlusVector& s) const;
  /// r1 (+) Gamma(s).
  PlusVector gamma_r(double r, const PlusVector& s) const;
  /// Gamma^k(s); k = 0 returns s.
  PlusVector gamma_power(const PlusVector& s, int k) const;
  PlusVector gamma_hat_power(const PlusVector& s, int k) const;

  /// Componentwise scaling of Gamma(s). Pre-inverse mode checks omega < id
  /// on a sample grid and throws ScalingError with the violating t.
  PlusVector scaled(const ScalarFn& f, ScalingMode mode,
                    const PlusVector& s) const;

  bool is_max_type() const;
  /// Every MAF is a sum or a weighted sum.
  bool is_additive() const;
  /// Every gain is linear.
  bool has_linear_gains() const;
  /// Linear gains combined by max, sum, weighted-sum or p-sum MAFs: the
  /// operator is homogeneous and subadditive.
  bool is_homogeneous_subadditive() const { return has_linear_gains(); }

  /// The nonnegative matrix of a linear additive operator. Throws
  /// WrongClassError otherwise.
  Eigen::MatrixXd matrix() const;

  struct Edge {
    std::size_t j;
    ScalarFn gain;
  };
  const std::vector<Edge>& edges(std::size_t i) const { return edges_[i]; }

 private:
  void require_size(const PlusVector& s) const;
  double evaluate(std::size_t i, const PlusVector& s,
                  std::vector<double>& scratch) const;

  NetworkSpec spec_;
  std::vector<std::vector<Edge>> edges_;
};

/// P_r(s) = r1 (+) s. Throws DomainError for r < 0.
PlusVector project_pr(double r, const PlusVector& s);

PlusVector eval_gamma(const NetworkSpec& spec, const PlusVector& s);
PlusVector eval_gamma_hat(const NetworkSpec& spec, const PlusVector& s);
PlusVector eval_gamma_r(const NetworkSpec& spec, double r, const PlusVector& s);
PlusVector eval_scaled(const NetworkSpec& spec, const ScalarFn& f,
                       ScalingMode mode, const PlusVector& s);

}  // namespace gainpath
