#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gainpath/maf.h"
#include "gainpath/scalar_fn.h"

namespace gainpath {

/// Translation-invariant band rule. Node i (0-based) receives neighbor i+offset
/// for every offset that stays inside [0, size). Truncation drops the
/// out-of-range offsets, so boundary nodes have fewer neighbors.
struct BandTemplate {
  struct Offset {
    long offset = 0;
    ScalarFn gain;
    /// Only used when maf is a weighted sum.
    double weight = 1.0;
  };

  std::vector<Offset> offsets;
  MafSpec maf;
  std::optional<ScalarFn> external_gain;
  /// Default truncation size.
  std::size_t size = 0;
};

/// An interconnection of n nodes. neighbors[i] is the index set I_i (0-based,
/// in MAF argument order) and gains holds gamma_ij keyed by (i, j). A missing
/// key means gamma_ij = 0; an explicit zero function is rejected.
struct NetworkSpec {
  std::size_t n = 0;
  std::vector<std::vector<std::size_t>> neighbors;
  std::map<std::pair<std::size_t, std::size_t>, ScalarFn> gains;
  std::vector<MafSpec> mafs;
  std::vector<std::optional<ScalarFn>> external_gains;
  std::optional<BandTemplate> band;

  /// n isolated nodes sharing one MAF.
  static NetworkSpec Isolated(std::size_t n, const MafSpec& maf = MafSpec::Sum());

  /// Expands a band template at truncation size n (0 uses band.size).
  static NetworkSpec FromTemplate(const BandTemplate& band, std::size_t n = 0);

  /// Appends j to I_i and records gamma_ij.
  NetworkSpec& connect(std::size_t i, std::size_t j, ScalarFn gain);

  std::size_t edge_count() const { return gains.size(); }
};

/// Throws StructuralError for self-loops, dangling gain keys, neighbors
/// without a gain, duplicate neighbors, indices out of range, and
/// weighted-sum weight counts that do not match #I_i.
void check_structure(const NetworkSpec& spec);

struct ValidationCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct ValidationReport {
  std::vector<ValidationCheck> checks;
  /// max_i mu_i(R * sum_{j in I_i} e_j) for R = 1, 10, 100.
  std::vector<std::pair<double, double>> maf_bounds;
  /// Grid samples (t, max_ij gamma_ij(t)) of the uniform gain envelope on
  /// [0, 100]; filled for templated networks.
  std::vector<std::pair<double, double>> gain_envelope;

  bool passed() const;
};

/// Runs the structural checks (throwing on malformed input) followed by the
/// class-tag, MAF-finiteness and, for templated networks, the uniform gain
/// envelope checks.
ValidationReport validate_network(const NetworkSpec& spec);

}  // namespace gainpath
