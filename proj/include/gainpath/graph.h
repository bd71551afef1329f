#pragma once

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "gainpath/network.h"
#include "gainpath/scalar_fn.h"

namespace gainpath {

/// Longest supported reachability horizon.
inline constexpr int kMaxHorizon = 64;

/// Nodes influencing node i (backward) or influenced by it (forward) through
/// interconnection chains of length 0..horizon-1. Sorted, 0-based.
struct InfluenceSets {
  std::size_t node = 0;
  int horizon = 1;
  std::vector<std::size_t> backward;
  std::vector<std::size_t> forward;
};

/// Breadth-first traversal over the edges j -> i (j in I_i). Throws
/// DomainError for i out of range or horizon outside [1, kMaxHorizon].
InfluenceSets neighbor_sets(const NetworkSpec& spec, std::size_t i, int horizon);

/// B_n = max_i #N+_i(horizon).
std::size_t influence_bound(const NetworkSpec& spec, int horizon);

/// True iff gamma_ij is present exactly when gamma_ji is.
bool check_symmetry(const NetworkSpec& spec);

/// Grid-certified standard technical assumptions.
struct TechnicalAssumptionReport {
  bool xi_ok = false;
  /// Candidate xi implied by the MAF kinds.
  ScalarFn xi;
  /// (i, j, t) of the first sample where Gamma_i(t e_j) < xi(gamma_ij(t)).
  std::optional<std::pair<std::pair<std::size_t, std::size_t>, double>>
      xi_witness;

  bool eta_ok = false;
  /// (t, min_ij gamma_ij(t)) on the grid.
  std::vector<std::pair<double, double>> eta;
  /// First grid point where eta is not positive or not below id.
  std::optional<std::pair<double, double>> eta_witness;
};

/// Throws DomainError for an empty or nonpositive grid.
TechnicalAssumptionReport check_standard_technical(const NetworkSpec& spec,
                                                   const std::vector<double>& grid);

}  // namespace gainpath
