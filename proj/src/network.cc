#include "gainpath/network.h"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "gainpath/errors.h"

namespace gainpath {

NetworkSpec NetworkSpec::Isolated(std::size_t n, const MafSpec& maf) {
  NetworkSpec spec;
  spec.n = n;
  spec.neighbors.assign(n, {});
  spec.mafs.assign(n, maf);
  spec.external_gains.assign(n, std::nullopt);
  return spec;
}

NetworkSpec NetworkSpec::FromTemplate(const BandTemplate& band, std::size_t n) {
  if (n == 0) n = band.size;
  if (n == 0) throw DomainError("template truncation size must be positive");
  NetworkSpec spec = Isolated(n, band.maf);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> weights;
    for (const auto& off : band.offsets) {
      if (off.offset == 0) {
        throw StructuralError(i, i, "template offset 0 creates a self-loop");
      }
      const long j = static_cast<long>(i) + off.offset;
      if (j < 0 || j >= static_cast<long>(n)) continue;
      spec.connect(i, static_cast<std::size_t>(j), off.gain);
      weights.push_back(off.weight);
    }
    if (band.maf.kind() == MafSpec::Kind::kWeightedSum) {
      spec.mafs[i] = MafSpec::WeightedSum(std::move(weights));
    }
    spec.external_gains[i] = band.external_gain;
  }
  spec.band = band;
  spec.band->size = n;
  return spec;
}

NetworkSpec& NetworkSpec::connect(std::size_t i, std::size_t j, ScalarFn gain) {
  neighbors.at(i).push_back(j);
  gains[{i, j}] = std::move(gain);
  return *this;
}

void check_structure(const NetworkSpec& spec) {
  if (spec.neighbors.size() != spec.n || spec.mafs.size() != spec.n) {
    throw DimensionError("network has n=" + std::to_string(spec.n) +
                         " but " + std::to_string(spec.neighbors.size()) +
                         " neighbor lists and " +
                         std::to_string(spec.mafs.size()) + " MAFs");
  }
  if (!spec.external_gains.empty() && spec.external_gains.size() != spec.n) {
    throw DimensionError("external gain list does not match n");
  }
  for (std::size_t i = 0; i < spec.n; ++i) {
    std::set<std::size_t> seen;
    for (std::size_t j : spec.neighbors[i]) {
      if (j >= spec.n) throw StructuralError(i, j, "neighbor index out of range");
      if (j == i) throw StructuralError(i, j, "self-loop");
      if (!seen.insert(j).second) throw StructuralError(i, j, "duplicate neighbor");
      if (!spec.gains.count({i, j})) {
        throw StructuralError(i, j, "neighbor without a gain function");
      }
    }
    const MafSpec& maf = spec.mafs[i];
    if (maf.kind() == MafSpec::Kind::kWeightedSum &&
        maf.weights().size() != spec.neighbors[i].size()) {
      throw StructuralError(i, i,
                            "weighted-sum MAF has " +
                                std::to_string(maf.weights().size()) +
                                " weights for " +
                                std::to_string(spec.neighbors[i].size()) +
                                " neighbors");
    }
  }
  for (const auto& [key, gain] : spec.gains) {
    const auto [i, j] = key;
    if (i >= spec.n || j >= spec.n) {
      throw StructuralError(i, j, "gain key out of range");
    }
    if (i == j) throw StructuralError(i, j, "self-loop");
    const auto& nb = spec.neighbors[i];
    if (std::find(nb.begin(), nb.end(), j) == nb.end()) {
      throw StructuralError(i, j, "gain key for a node outside the neighbor set");
    }
  }
}

bool ValidationReport::passed() const {
  return std::all_of(checks.begin(), checks.end(),
                     [](const ValidationCheck& c) { return c.passed; });
}

ValidationReport validate_network(const NetworkSpec& spec) {
  check_structure(spec);
  ValidationReport report;
  report.checks.push_back({"neighbor-sets", true, "consistent"});

  {
    ValidationCheck check{"gain-class", true, "all gains of class K"};
    for (const auto& [key, gain] : spec.gains) {
      if (gain.class_tag() == ScalarFn::ClassTag::kZero) {
        check.passed = false;
        check.detail = "gain (" + std::to_string(key.first + 1) + "," +
                       std::to_string(key.second + 1) +
                       ") is the zero function; remove the neighbor instead";
        break;
      }
    }
    if (check.passed) {
      for (std::size_t i = 0; i < spec.external_gains.size(); ++i) {
        const auto& ext = spec.external_gains[i];
        if (ext && ext->is_zero()) {
          check.passed = false;
          check.detail = "external gain of node " + std::to_string(i + 1) +
                         " is the zero function";
          break;
        }
      }
    }
    report.checks.push_back(check);
  }

  {
    ValidationCheck check{"maf-bound", true, ""};
    std::ostringstream detail;
    for (double level : {1.0, 10.0, 100.0}) {
      double worst = 0.0;
      for (std::size_t i = 0; i < spec.n; ++i) {
        const std::vector<double> args(spec.neighbors[i].size(), level);
        worst = std::max(worst, spec.mafs[i](args));
      }
      report.maf_bounds.emplace_back(level, worst);
      if (!std::isfinite(worst)) check.passed = false;
      detail << "R=" << level << ": " << worst << "; ";
    }
    check.detail = detail.str();
    report.checks.push_back(check);
  }

  if (spec.band) {
    ValidationCheck check{"gain-envelope", true, ""};
    constexpr int kSamples = 101;
    double previous = 0.0;
    report.gain_envelope.emplace_back(0.0, 0.0);
    for (int k = 1; k < kSamples; ++k) {
      const double t = 100.0 * k / (kSamples - 1);
      double env = 0.0;
      for (const auto& [key, gain] : spec.gains) env = std::max(env, gain(t));
      report.gain_envelope.emplace_back(t, env);
      if (!std::isfinite(env) || env < previous) check.passed = false;
      previous = env;
    }
    std::ostringstream detail;
    detail << "envelope(100)=" << previous;
    check.detail = detail.str();
    report.checks.push_back(check);
  }
  return report;
}

}  // namespace gainpath
