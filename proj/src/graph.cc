#include "gainpath/graph.h"

#include <algorithm>
#include <deque>
#include <limits>
#include <string>

#include "gainpath/errors.h"
#include "gainpath/operators.h"
#include "gainpath/plus_vector.h"

namespace gainpath {
namespace {

// Nodes within `steps` hops of `start` following `adjacency`.
std::vector<std::size_t> reach(const std::vector<std::vector<std::size_t>>& adjacency,
                               std::size_t start, int steps) {
  std::vector<int> depth(adjacency.size(), -1);
  std::deque<std::size_t> queue{start};
  depth[start] = 0;
  while (!queue.empty()) {
    const std::size_t v = queue.front();
    queue.pop_front();
    if (depth[v] == steps) continue;
    for (std::size_t w : adjacency[v]) {
      if (depth[w] < 0) {
        depth[w] = depth[v] + 1;
        queue.push_back(w);
      }
    }
  }
  std::vector<std::size_t> out;
  for (std::size_t v = 0; v < adjacency.size(); ++v) {
    if (depth[v] >= 0) out.push_back(v);
  }
  return out;
}

std::vector<std::vector<std::size_t>> influenced_by(const NetworkSpec& spec) {
  // j -> i whenever j in I_i.
  std::vector<std::vector<std::size_t>> out(spec.n);
  for (std::size_t i = 0; i < spec.n; ++i) {
    for (std::size_t j : spec.neighbors[i]) out[j].push_back(i);
  }
  return out;
}

void require_horizon(int horizon) {
  if (horizon < 1 || horizon > kMaxHorizon) {
    throw DomainError("horizon must lie in [1, " + std::to_string(kMaxHorizon) +
                      "], got " + std::to_string(horizon));
  }
}

}  // namespace

InfluenceSets neighbor_sets(const NetworkSpec& spec, std::size_t i, int horizon) {
  require_horizon(horizon);
  if (i >= spec.n) {
    throw DomainError("node index " + std::to_string(i + 1) + " out of range");
  }
  InfluenceSets sets;
  sets.node = i;
  sets.horizon = horizon;
  sets.backward = reach(spec.neighbors, i, horizon - 1);
  sets.forward = reach(influenced_by(spec), i, horizon - 1);
  return sets;
}

std::size_t influence_bound(const NetworkSpec& spec, int horizon) {
  require_horizon(horizon);
  const auto forward = influenced_by(spec);
  std::size_t bound = 0;
  for (std::size_t i = 0; i < spec.n; ++i) {
    bound = std::max(bound, reach(forward, i, horizon - 1).size());
  }
  return bound;
}

bool check_symmetry(const NetworkSpec& spec) {
  for (const auto& [key, gain] : spec.gains) {
    if (!spec.gains.count({key.second, key.first})) return false;
  }
  return true;
}

TechnicalAssumptionReport check_standard_technical(
    const NetworkSpec& spec, const std::vector<double>& grid) {
  if (grid.empty()) throw DomainError("grid must be nonempty");
  for (double t : grid) {
    if (!(t > 0.0)) throw DomainError("grid points must be positive");
  }
  const GainOperator op(spec);
  TechnicalAssumptionReport report;

  double xi_slope = 1.0;
  for (const MafSpec& maf : spec.mafs) {
    if (maf.kind() == MafSpec::Kind::kWeightedSum) {
      for (double w : maf.weights()) xi_slope = std::min(xi_slope, w);
    }
  }
  report.xi = xi_slope > 0.0 ? ScalarFn::Linear(xi_slope) : ScalarFn::Zero();
  report.xi_ok = xi_slope > 0.0;
  for (std::size_t i = 0; i < spec.n && report.xi_ok; ++i) {
    for (std::size_t j : spec.neighbors[i]) {
      const ScalarFn& gain = spec.gains.at({i, j});
      for (double t : grid) {
        const double lhs = op.component(i, PlusVector::Unit(spec.n, j, t));
        const double rhs = report.xi(gain(t));
        if (lhs < rhs * (1.0 - 1e-12)) {
          report.xi_ok = false;
          report.xi_witness = {{i, j}, t};
          break;
        }
      }
      if (!report.xi_ok) break;
    }
  }

  report.eta_ok = true;
  if (!spec.gains.empty()) {
    for (double t : grid) {
      double eta = std::numeric_limits<double>::infinity();
      for (const auto& [key, gain] : spec.gains) eta = std::min(eta, gain(t));
      report.eta.emplace_back(t, eta);
      if (report.eta_ok && !(eta > 0.0 && eta < t)) {
        report.eta_ok = false;
        report.eta_witness = {t, eta};
      }
    }
  }
  return report;
}

}  // namespace gainpath
