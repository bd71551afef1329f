#include "gainpath/lyapunov.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gainpath/errors.h"

namespace gainpath {
namespace {

constexpr double kBlowUp = 1e12;
constexpr double kFitResolution = 1e-3;
constexpr double kInf = std::numeric_limits<double>::infinity();

double norm_of(std::span<const double> x) {
  if (x.size() == 1) return std::abs(x[0]);
  double sum = 0.0;
  for (double v : x) sum += v * v;
  return std::sqrt(sum);
}

double sup_abs(const std::vector<double>& x) {
  double out = 0.0;
  for (double v : x) out = std::max(out, std::abs(v));
  return out;
}

void network_rhs(const std::vector<SubsystemModel>& models,
                 const std::vector<std::size_t>& offsets,
                 const std::vector<double>& x, std::span<const double> u,
                 std::vector<double>& dx) {
  dx.assign(x.size(), 0.0);
  for (std::size_t i = 0; i < models.size(); ++i) {
    const SubsystemModel& m = models[i];
    const std::size_t oi = offsets[i];
    for (std::size_t d = 0; d < m.state_dim; ++d) {
      double v = -m.a * x[oi + d];
      if (!u.empty()) v += m.c * u[oi + d];
      for (const auto& [j, b] : m.coupling) {
        const double xj = x[offsets[j] + d];
        v += b * (m.dynamics == SubsystemModel::Dynamics::kLinear ? xj
                                                                  : std::tanh(xj));
      }
      dx[oi + d] = v;
    }
  }
}

}  // namespace

double SubsystemModel::lyapunov(std::span<const double> x) const {
  if (x.size() != state_dim) throw DimensionError("node state has wrong length");
  return lyap_scale * norm_of(x);
}

std::vector<std::size_t> state_offsets(const std::vector<SubsystemModel>& models) {
  std::vector<std::size_t> out;
  out.reserve(models.size() + 1);
  std::size_t total = 0;
  for (const auto& m : models) {
    if (m.state_dim == 0) throw DimensionError("node state dimension must be positive");
    out.push_back(total);
    total += m.state_dim;
  }
  out.push_back(total);
  return out;
}

void check_coupling(const NetworkSpec& spec, const std::vector<SubsystemModel>& models) {
  if (models.size() != spec.n) {
    throw DimensionError("expected " + std::to_string(spec.n) +
                         " subsystem models, got " + std::to_string(models.size()));
  }
  for (std::size_t i = 0; i < models.size(); ++i) {
    for (const auto& [j, b] : models[i].coupling) {
      if (j >= models.size()) throw StructuralError(i, j, "coupling index out of range");
      const auto& nb = spec.neighbors[i];
      if (std::find(nb.begin(), nb.end(), j) == nb.end()) {
        throw StructuralError(i, j, "dynamics couple to a node outside I_i");
      }
      if (models[j].state_dim != models[i].state_dim) {
        throw DimensionError("coupled nodes must share the state dimension");
      }
    }
  }
}

DerivedGains derive_gain_spec(const std::vector<SubsystemModel>& models) {
  DerivedGains out;
  out.spec = NetworkSpec::Isolated(models.size(), MafSpec::Sum());
  double input_slope = 0.0;
  for (std::size_t i = 0; i < models.size(); ++i) {
    const SubsystemModel& m = models[i];
    if (!(m.a > 0.0) || !(m.lyap_scale > 0.0)) {
      throw DomainError("node " + std::to_string(i + 1) +
                        " needs a > 0 and a positive Lyapunov scale");
    }
    for (const auto& [j, b] : m.coupling) {
      if (j >= models.size() || j == i) {
        throw StructuralError(i, j, "invalid coupling index");
      }
      if (b == 0.0) continue;
      const double slope = 2.0 * std::abs(b) * m.lyap_scale / (m.a * models[j].lyap_scale);
      out.spec.connect(i, j, ScalarFn::Linear(slope));
    }
    const double gu = 4.0 * std::abs(m.c) * m.lyap_scale / m.a;
    out.spec.external_gains[i] =
        gu > 0.0 ? std::optional<ScalarFn>(ScalarFn::Linear(gu)) : std::nullopt;
    input_slope = std::max(input_slope, gu);
    out.alphas.push_back(ScalarFn::Linear(m.a / 4.0));
  }
  out.gamma_u_max = input_slope > 0.0 ? ScalarFn::Linear(input_slope) : ScalarFn::Zero();
  return out;
}

std::span<const double> InputSignal::at(double t) const {
  if (values.empty()) return {};
  if (!(mesh > 0.0)) throw DomainError("input mesh must be positive");
  const double idx = std::floor(t / mesh + 1e-9);
  const std::size_t k =
      idx <= 0.0 ? 0
                 : std::min(values.size() - 1, static_cast<std::size_t>(idx));
  return values[k];
}

double InputSignal::sup_norm() const {
  double out = 0.0;
  for (const auto& v : values) out = std::max(out, sup_abs(v));
  return out;
}

StateTrajectory simulate_network_ode(const std::vector<SubsystemModel>& models,
                                     const std::vector<double>& x0,
                                     const InputSignal& input, double T, double dt) {
  if (!(dt > 0.0) || !(T >= dt)) throw DomainError("need dt > 0 and T >= dt");
  const std::vector<std::size_t> offsets = state_offsets(models);
  const std::size_t total = offsets.back();
  if (x0.size() != total) throw DimensionError("initial state has wrong length");
  for (const auto& v : input.values) {
    if (v.size() != total) throw DimensionError("input sample has wrong length");
  }
  for (std::size_t i = 0; i < models.size(); ++i) {
    for (const auto& [j, b] : models[i].coupling) {
      if (j >= models.size()) throw StructuralError(i, j, "coupling index out of range");
      if (models[j].state_dim != models[i].state_dim) {
        throw DimensionError("coupled nodes must share the state dimension");
      }
    }
  }

  const auto steps = static_cast<std::size_t>(std::llround(T / dt));
  StateTrajectory traj;
  traj.dt = dt;
  traj.times.reserve(steps + 1);
  traj.states.reserve(steps + 1);
  traj.times.push_back(0.0);
  traj.states.push_back(x0);

  std::vector<double> k1, k2, k3, k4, tmp(total);
  std::vector<double> x = x0;
  for (std::size_t s = 0; s < steps; ++s) {
    const double t = static_cast<double>(s) * dt;
    const auto u = input.at(t);
    network_rhs(models, offsets, x, u, k1);
    for (std::size_t q = 0; q < total; ++q) tmp[q] = x[q] + 0.5 * dt * k1[q];
    network_rhs(models, offsets, tmp, u, k2);
    for (std::size_t q = 0; q < total; ++q) tmp[q] = x[q] + 0.5 * dt * k2[q];
    network_rhs(models, offsets, tmp, u, k3);
    for (std::size_t q = 0; q < total; ++q) tmp[q] = x[q] + dt * k3[q];
    network_rhs(models, offsets, tmp, u, k4);
    for (std::size_t q = 0; q < total; ++q) {
      x[q] += dt / 6.0 * (k1[q] + 2.0 * k2[q] + 2.0 * k3[q] + k4[q]);
    }
    const double now = static_cast<double>(s + 1) * dt;
    traj.times.push_back(now);
    traj.states.push_back(x);
    if (!(sup_abs(x) <= kBlowUp)) {
      traj.blew_up = true;
      traj.blow_up_time = now;
      break;
    }
  }
  return traj;
}

CompositeLyapunov::CompositeLyapunov(PathTable table,
                                     std::vector<SubsystemModel> subsystems,
                                     ScalarFn gamma_u_max)
    : table_(std::move(table)),
      subsystems_(std::move(subsystems)),
      gamma_u_max_(std::move(gamma_u_max)) {
  if (subsystems_.size() != table_.dimension()) {
    throw DimensionError("path table has " + std::to_string(table_.dimension()) +
                         " components for " + std::to_string(subsystems_.size()) +
                         " subsystems");
  }
  const auto& sigma = table_.sigma();
  for (std::size_t i = 0; i < table_.dimension(); ++i) {
    for (std::size_t k = 0; k + 1 < sigma.size(); ++k) {
      if (!(sigma[k + 1][i] > sigma[k][i])) {
        throw ConsistencyError("cannot assemble V: sigma_" + std::to_string(i + 1) +
                               " is not strictly increasing on [" +
                               std::to_string(table_.grid()[k]) + ", " +
                               std::to_string(table_.grid()[k + 1]) + "]");
      }
    }
  }
  offsets_ = state_offsets(subsystems_);
}

double CompositeLyapunov::operator()(std::span<const double> x,
                                     bool* out_of_range) const {
  if (x.size() != offsets_.back()) throw DimensionError("state has wrong length");
  double v = 0.0;
  bool outside = false;
  for (std::size_t i = 0; i < subsystems_.size(); ++i) {
    const auto xi = x.subspan(offsets_[i], subsystems_[i].state_dim);
    bool flag = false;
    v = std::max(v, table_.inverse(i, subsystems_[i].lyapunov(xi), &flag));
    outside = outside || flag;
  }
  if (out_of_range) *out_of_range = outside;
  return v;
}

CompositeLyapunov assemble_V(PathTable table, std::vector<SubsystemModel> subsystems,
                             ScalarFn gamma_u_max) {
  return CompositeLyapunov(std::move(table), std::move(subsystems),
                           std::move(gamma_u_max));
}

DecayReport check_iss_decay(const StateTrajectory& trajectory,
                            const CompositeLyapunov& V, const InputSignal& input,
                            const ScalarFn& alpha, double tol) {
  DecayReport report;
  report.worst_margin = kInf;
  const double threshold = V.gamma_u_max()(input.sup_norm()) * (1.0 + tol);
  const auto& xs = trajectory.states;
  if (xs.size() < 2) return report;
  double v_now = V(xs[0]);
  for (std::size_t k = 0; k + 1 < xs.size(); ++k) {
    const double v_next = V(xs[k + 1]);
    const double dt = trajectory.times[k + 1] - trajectory.times[k];
    if (v_now > threshold) {
      ++report.checked;
      const double derivative = (v_next - v_now) / dt;
      const double margin = -alpha(v_now) + tol * (1.0 + v_now) - derivative;
      report.worst_margin = std::min(report.worst_margin, margin);
      if (margin < 0.0) {
        ++report.violations;
        if (!report.first_violation_time) {
          report.first_violation_time = trajectory.times[k];
        }
      }
    }
    v_now = v_next;
  }
  if (report.checked == 0) report.worst_margin = 0.0;
  return report;
}

IssFit fit_iss_estimate(const std::vector<IssRun>& batch, const CompositeLyapunov* V) {
  if (batch.empty()) throw DomainError("ISS fit needs a nonempty batch");
  IssFit fit;

  // Measured size per run and sample.
  std::vector<std::vector<double>> y(batch.size());
  std::size_t horizon = 0;
  for (std::size_t r = 0; r < batch.size(); ++r) {
    const auto& traj = batch[r].trajectory;
    if (traj.blew_up) fit.blew_up = true;
    y[r].reserve(traj.states.size());
    for (const auto& x : traj.states) y[r].push_back(V ? (*V)(x) : sup_abs(x));
    horizon = std::max(horizon, y[r].size());
  }
  if (fit.blew_up) {
    fit.notes.push_back("a trajectory blew up");
    return fit;
  }

  auto bucket_of = [](double r0) { return std::floor(std::log10(r0)); };
  std::vector<double> keys;
  for (std::size_t r = 0; r < batch.size(); ++r) {
    if (y[r].empty() || !(y[r][0] > 1e-12)) continue;
    const double key = bucket_of(y[r][0]);
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) keys.push_back(key);
  }
  std::sort(keys.begin(), keys.end());

  // Suffix-sup envelopes of the excess over gamma_slope * |u|, per decade of r0.
  auto build_buckets = [&](bool zero_input_only) {
    std::vector<IssFit::Bucket> out;
    for (double key : keys) {
      IssFit::Bucket bucket;
      bucket.lo = std::pow(10.0, key);
      bucket.hi = std::pow(10.0, key + 1.0);
      bucket.h.assign(horizon, 0.0);
      bool any = false;
      for (std::size_t r = 0; r < batch.size(); ++r) {
        if (y[r].empty() || !(y[r][0] > 1e-12)) continue;
        if (bucket_of(y[r][0]) != key) continue;
        if (zero_input_only && batch[r].input_norm > 0.0) continue;
        any = true;
        const double offset = fit.gamma_slope * batch[r].input_norm;
        for (std::size_t k = 0; k < y[r].size(); ++k) {
          bucket.h[k] = std::max(bucket.h[k], std::max(0.0, y[r][k] - offset) / y[r][0]);
        }
      }
      if (!any) continue;
      for (std::size_t k = horizon - 1; k-- > 0;) {
        bucket.h[k] = std::max(bucket.h[k], bucket.h[k + 1]);
      }
      out.push_back(std::move(bucket));
    }
    return out;
  };

  auto envelope_in = [&](const std::vector<IssFit::Bucket>& buckets,
                         double r0) -> const std::vector<double>* {
    if (buckets.empty()) return nullptr;
    const double key = bucket_of(r0);
    const IssFit::Bucket* best = &buckets.front();
    for (const auto& b : buckets) {
      if (std::abs(std::log10(b.lo) - key) < std::abs(std::log10(best->lo) - key)) {
        best = &b;
      }
    }
    return &best->h;
  };

  // Gain from the steady-state level of the runs with input.
  bool any_free = false;
  for (std::size_t r = 0; r < batch.size(); ++r) {
    if (y[r].empty()) continue;
    if (!(batch[r].input_norm > 0.0)) {
      any_free = true;
      continue;
    }
    const double level = *std::max_element(
        y[r].begin() + static_cast<long>(y[r].size() / 2), y[r].end());
    fit.gamma_slope = std::max(fit.gamma_slope, level / batch[r].input_norm);
  }
  fit.buckets = build_buckets(any_free);

  fit.beta_decreasing = true;
  for (const auto& b : fit.buckets) {
    if (b.h.empty() || b.h.back() > 0.5 * b.h.front()) fit.beta_decreasing = false;
  }

  std::size_t total = 0;
  std::size_t exceed = 0;
  for (std::size_t r = 0; r < batch.size(); ++r) {
    if (y[r].empty()) continue;
    const double r0 = y[r][0];
    const double offset = fit.gamma_slope * batch[r].input_norm;
    const std::vector<double>* h = r0 > 1e-12 ? envelope_in(fit.buckets, r0) : nullptr;
    for (std::size_t k = 0; k < y[r].size(); ++k) {
      const double beta = h ? r0 * (*h)[std::min(k, h->size() - 1)] : 0.0;
      ++total;
      if (y[r][k] > beta + offset + kFitResolution * (r0 + offset) + 1e-9) ++exceed;
    }
  }
  fit.exceedance = total ? static_cast<double>(exceed) / static_cast<double>(total) : 0.0;
  if (!fit.beta_decreasing) fit.notes.push_back("no decreasing beta envelope");
  fit.pass = fit.beta_decreasing && fit.exceedance <= 0.01;
  return fit;
}

}  // namespace gainpath
