#include "gainpath/operators.h"

#include <algorithm>
#include <cmath>

#include "gainpath/errors.h"

namespace gainpath {

GainOperator::GainOperator(NetworkSpec spec) : spec_(std::move(spec)) {
  check_structure(spec_);
  edges_.resize(spec_.n);
  for (std::size_t i = 0; i < spec_.n; ++i) {
    for (std::size_t j : spec_.neighbors[i]) {
      edges_[i].push_back({j, spec_.gains.at({i, j})});
    }
  }
}

void GainOperator::require_size(const PlusVector& s) const {
  if (s.size() != spec_.n) {
    throw DimensionError("vector of length " + std::to_string(s.size()) +
                         " for a network of " + std::to_string(spec_.n) +
                         " nodes");
  }
}

double GainOperator::evaluate(std::size_t i, const PlusVector& s,
                              std::vector<double>& scratch) const {
  const auto& edges = edges_[i];
  scratch.resize(edges.size());
  for (std::size_t k = 0; k < edges.size(); ++k) {
    scratch[k] = edges[k].gain(s[edges[k].j]);
  }
  return spec_.mafs[i](scratch);
}

double GainOperator::component(std::size_t i, const PlusVector& s) const {
  require_size(s);
  std::vector<double> scratch;
  return evaluate(i, s, scratch);
}

PlusVector GainOperator::gamma(const PlusVector& s) const {
  require_size(s);
  std::vector<double> out(spec_.n);
  std::vector<double> scratch;
  for (std::size_t i = 0; i < spec_.n; ++i) out[i] = evaluate(i, s, scratch);
  return PlusVector(std::move(out));
}

PlusVector GainOperator::gamma_hat(const PlusVector& s) const {
  return oplus(s, gamma(s));
}

PlusVector GainOperator::gamma_r(double r, const PlusVector& s) const {
  return project_pr(r, gamma(s));
}

PlusVector GainOperator::gamma_power(const PlusVector& s, int k) const {
  PlusVector out = s;
  for (int step = 0; step < k; ++step) out = gamma(out);
  return out;
}

PlusVector GainOperator::gamma_hat_power(const PlusVector& s, int k) const {
  PlusVector out = s;
  for (int step = 0; step < k; ++step) out = gamma_hat(out);
  return out;
}

PlusVector GainOperator::scaled(const ScalarFn& f, ScalingMode mode,
                                const PlusVector& s) const {
  if (f.class_tag() != ScalarFn::ClassTag::kKInfinity) {
    throw ScalingError(0.0, "scaling function " + f.describe() +
                                " is not of class K-infinity");
  }
  std::vector<double> out = gamma(s).data();
  if (mode == ScalingMode::kPreInverse) {
    if (auto t = find_not_below_identity(f)) {
      throw ScalingError(*t, "omega = " + f.describe() + " is not below id");
    }
    for (double& v : out) v = f.inverse(v);
  } else {
    for (double& v : out) v += f(v);
  }
  return PlusVector(std::move(out));
}

bool GainOperator::is_max_type() const {
  return std::all_of(spec_.mafs.begin(), spec_.mafs.end(), [](const MafSpec& m) {
    return m.kind() == MafSpec::Kind::kMax;
  });
}

bool GainOperator::is_additive() const {
  return std::all_of(spec_.mafs.begin(), spec_.mafs.end(),
                     [](const MafSpec& m) { return m.is_additive(); });
}

bool GainOperator::has_linear_gains() const {
  return std::all_of(spec_.gains.begin(), spec_.gains.end(),
                     [](const auto& kv) { return kv.second.is_linear(); });
}

Eigen::MatrixXd GainOperator::matrix() const {
  if (!is_additive() || !has_linear_gains()) {
    throw WrongClassError(
        "matrix form needs linear gains and sum or weighted-sum MAFs");
  }
  const auto n = static_cast<Eigen::Index>(spec_.n);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t i = 0; i < spec_.n; ++i) {
    const MafSpec& maf = spec_.mafs[i];
    for (std::size_t k = 0; k < edges_[i].size(); ++k) {
      const double w =
          maf.kind() == MafSpec::Kind::kWeightedSum ? maf.weights()[k] : 1.0;
      a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(edges_[i][k].j)) +=
          w * edges_[i][k].gain.linear_slope();
    }
  }
  return a;
}

PlusVector project_pr(double r, const PlusVector& s) {
  if (!(r >= 0.0)) throw DomainError("P_r needs r >= 0");
  std::vector<double> out = s.data();
  for (double& v : out) v = std::max(v, r);
  return PlusVector(std::move(out));
}

PlusVector eval_gamma(const NetworkSpec& spec, const PlusVector& s) {
  return GainOperator(spec).gamma(s);
}

PlusVector eval_gamma_hat(const NetworkSpec& spec, const PlusVector& s) {
  return GainOperator(spec).gamma_hat(s);
}

PlusVector eval_gamma_r(const NetworkSpec& spec, double r, const PlusVector& s) {
  return GainOperator(spec).gamma_r(r, s);
}

PlusVector eval_scaled(const NetworkSpec& spec, const ScalarFn& f,
                       ScalingMode mode, const PlusVector& s) {
  return GainOperator(spec).scaled(f, mode, s);
}

}  // namespace gainpath
