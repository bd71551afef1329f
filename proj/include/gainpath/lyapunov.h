#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gainpath/network.h"
#include "gainpath/path.h"
#include "gainpath/scalar_fn.h"

namespace gainpath {

// Node i with state x_i in R^{n_i}:
//   linear:      dx_i/dt = -a x_i + sum_j b_ij x_j + c u_i
//   saturating:  dx_i/dt = -a x_i + sum_j b_ij tanh(x_j) + c u_i
// with V_i(x_i) = scale |x_i| (absolute value, or Euclidean norm for n_i > 1).
struct SubsystemModel {
  enum class Dynamics { kLinear, kSaturating };

  std::size_t state_dim = 1;
  Dynamics dynamics = Dynamics::kLinear;
  double a = 1.0;
  /// (j, b_ij); neighbors must have the same state dimension.
  std::vector<std::pair<std::size_t, double>> coupling;
  double c = 1.0;
  double lyap_scale = 1.0;
  ScalarFn psi1 = ScalarFn::Identity();
  ScalarFn psi2 = ScalarFn::Identity();
  ScalarFn alpha = ScalarFn::Identity();

  double lyapunov(std::span<const double> x) const;
};

/// Throws StructuralError when a model couples to j outside I_i, and
/// DimensionError when the model count or coupled state sizes mismatch.
void check_coupling(const NetworkSpec& spec, const std::vector<SubsystemModel>& models);

/// Gains from |V_i|' <= -a V_i + sum |b_ij| V_j + |c| |u| with sum aggregation:
/// gamma_ij(t) = 2 |b_ij| t / a, gamma_iu(t) = 4 |c| t / a, alpha_i(t) = a t / 4.
struct DerivedGains {
  NetworkSpec spec;
  ScalarFn gamma_u_max;
  std::vector<ScalarFn> alphas;
};

DerivedGains derive_gain_spec(const std::vector<SubsystemModel>& models);

/// Piecewise-constant input on a uniform mesh, right-continuous. values[k] is
/// the flattened input on [k mesh, (k+1) mesh); the last value is held.
/// An empty signal is identically zero.
struct InputSignal {
  double mesh = 1.0;
  std::vector<std::vector<double>> values;

  std::span<const double> at(double t) const;
  double sup_norm() const;
};

struct StateTrajectory {
  double dt = 0.0;
  std::vector<double> times;
  /// Flattened network state per sample.
  std::vector<std::vector<double>> states;
  bool blew_up = false;
  std::optional<double> blow_up_time;
};

/// Total state dimension and per-node offsets into the flattened state.
std::vector<std::size_t> state_offsets(const std::vector<SubsystemModel>& models);

/// Classical RK4 with step dt, input held at its value at the step start.
/// Stops with blew_up = true once |x|_inf exceeds 1e12.
StateTrajectory simulate_network_ode(const std::vector<SubsystemModel>& models,
                                     const std::vector<double>& x0,
                                     const InputSignal& input, double T, double dt);

/// V(x) = max_i sigma_i^{-1}(V_i(x_i)).
class CompositeLyapunov {
 public:
  /// Throws ConsistencyError when a table component is not strictly
  /// increasing, DimensionError when the model count differs from the table.
  CompositeLyapunov(PathTable table, std::vector<SubsystemModel> subsystems,
                    ScalarFn gamma_u_max);

  double operator()(std::span<const double> x, bool* out_of_range = nullptr) const;

  const PathTable& table() const { return table_; }
  const std::vector<SubsystemModel>& subsystems() const { return subsystems_; }
  const ScalarFn& gamma_u_max() const { return gamma_u_max_; }

 private:
  PathTable table_;
  std::vector<SubsystemModel> subsystems_;
  std::vector<std::size_t> offsets_;
  ScalarFn gamma_u_max_;
};

CompositeLyapunov assemble_V(PathTable table, std::vector<SubsystemModel> subsystems,
                             ScalarFn gamma_u_max);

struct DecayReport {
  /// Samples where the antecedent V > gamma(|u|) (1 + tol) held.
  std::size_t checked = 0;
  std::size_t violations = 0;
  /// min over checked samples of (-alpha(V) + tol (1 + V)) - dV/dt.
  double worst_margin = 0.0;
  std::optional<double> first_violation_time;
};

DecayReport check_iss_decay(const StateTrajectory& trajectory,
                            const CompositeLyapunov& V, const InputSignal& input,
                            const ScalarFn& alpha, double tol);

struct IssRun {
  StateTrajectory trajectory;
  double input_norm = 0.0;
};

struct IssFit {
  /// gamma-hat(t) = gamma_slope t.
  double gamma_slope = 0.0;
  struct Bucket {
    double lo = 0.0;
    double hi = 0.0;
    /// beta-hat(r, t_k) = r h[k], non-increasing in k.
    std::vector<double> h;
  };
  std::vector<Bucket> buckets;
  double exceedance = 0.0;
  bool beta_decreasing = false;
  bool blew_up = false;
  bool pass = false;
  std::vector<std::string> notes;
};

/// Fits |x(t)| <= beta(|x0|, t) + gamma(|u|). gamma is linear, taken from the
/// late-time level of the runs with input; beta is a per-decade suffix-sup
/// envelope of the zero-input runs (of the excess over gamma when the batch
/// has none). Every sample is then checked against the bound, with a
/// resolution of 1e-3 (|x0| + gamma(|u|)). With V given, V(x) replaces the
/// state norm. Pass iff no blow-up, every bucket envelope falls below half
/// its initial value by the end, and at most 1% of samples exceed the bound.
IssFit fit_iss_estimate(const std::vector<IssRun>& batch,
                        const CompositeLyapunov* V = nullptr);

}  // namespace gainpath
